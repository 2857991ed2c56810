import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cechlab import analytics, oracles
from cechlab.cech import build_complex, complex_from_simplices
from cechlab.errors import InsufficientDimensionError, InvalidComplexError
from cechlab.homology import (
    AUDIT,
    betti_numbers,
    boundary_matrix,
    homology_match,
    manifold_betti,
)
from cechlab.manifold import flat_torus, round_sphere, sphere_with_volume
from cechlab.morse import coverage_certificate
from cechlab.sampler import fixed_cloud, make_rng, poisson_process

T2 = flat_torus(2)


def closure(tops):
    out = set()
    for t in tops:
        t = tuple(sorted(t))
        for k in range(1, len(t) + 1):
            out.update(itertools.combinations(t, k))
    return out


def cx_of(tops, dim_cap=None):
    return complex_from_simplices(T2, closure(tops), dim_cap=dim_cap)


def test_filled_triangle():
    assert betti_numbers(cx_of([(0, 1, 2)])).betti[:2] == (1, 0)


def test_hollow_square():
    cx = cx_of([(0, 1), (1, 2), (2, 3), (0, 3)])
    assert betti_numbers(cx).betti[:2] == (1, 1)
    assert oracles.gf2_rank(boundary_matrix(cx, 1).dense()) == 3


def test_two_disjoint_edges():
    assert betti_numbers(cx_of([(0, 1), (2, 3)])).betti[:2] == (2, 0)


def test_boundary_of_tetrahedron_is_a_sphere():
    cx = cx_of(itertools.combinations(range(4), 3), dim_cap=3)
    assert betti_numbers(cx).trusted() == (1, 0, 1, 0)


def test_minimal_torus_triangulation():
    # 7-vertex Möbius–Császár torus
    tri = [tuple(sorted(((i) % 7, (i + a) % 7, (i + b) % 7))) for i in range(7) for a, b in ((1, 3), (2, 3))]
    cx = cx_of(tri, dim_cap=3)
    assert betti_numbers(cx).trusted() == (1, 2, 1, 0)


def test_projective_plane_over_gf2():
    # 6-vertex RP^2: over GF(2) every Betti number is 1
    tri = [(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 1, 5), (1, 2, 4), (2, 3, 5),
           (1, 3, 4), (1, 3, 5), (2, 4, 5)]
    cx = cx_of(tri, dim_cap=3)
    assert betti_numbers(cx).trusted() == (1, 1, 1, 0)


def test_not_face_closed():
    cx = complex_from_simplices(T2, [(0,), (1,), (2,), (0, 1), (0, 1, 2)])
    with pytest.raises(InvalidComplexError):
        betti_numbers(cx)


def test_boundary_squares_to_zero():
    cloud = poisson_process(T2, 60, 1)
    cx = build_complex(cloud, 0.12)
    assert len(cx.simplices[3]) > 0
    for k in (2, 3):
        if len(cx.simplices[k]) == 0:
            continue
        d1 = boundary_matrix(cx, k - 1).dense().astype(np.int64)
        d2 = boundary_matrix(cx, k).dense().astype(np.int64)
        assert not np.any((d1 @ d2) % 2)


def test_manifold_betti():
    assert manifold_betti(T2).betti == (1, 2, 1)
    assert manifold_betti(round_sphere(2)).betti == (1, 0, 1)
    assert manifold_betti(flat_torus(3)).betti == (1, 3, 3, 1)
    assert manifold_betti(round_sphere(3)).betti == (1, 0, 0, 1)


def test_homology_match_examples():
    empty = build_complex(fixed_cloud(T2, np.zeros((0, 2))), 0.1)
    assert not homology_match(empty, T2, 1)
    single = build_complex(fixed_cloud(T2, [[0.5, 0.5]]), 0.1)
    assert homology_match(single, T2, 0)
    with pytest.raises(InsufficientDimensionError):
        homology_match(build_complex(fixed_cloud(T2, [[0.5, 0.5]]), 0.1, dim_cap=1), T2, 1)


def test_dense_torus_sample_matches():
    n = 2000
    r0 = analytics.radius_of_lambda(n, 3 * np.log(n), 2, 1.0)
    cloud = poisson_process(T2, n, 2)
    assert coverage_certificate(cloud, r0)
    cx = build_complex(cloud, r0, method="delaunay")
    assert homology_match(cx, T2, 1)
    assert betti_numbers(cx).trusted() == (1, 2, 1, 0)


def test_dense_sphere_sample_matches():
    m = sphere_with_volume(2)
    n = 2000
    r0 = analytics.radius_of_lambda(n, 3 * np.log(n), 2, 1.0)
    cx = build_complex(poisson_process(m, n, 3), r0, method="delaunay")
    assert betti_numbers(cx).trusted()[:3] == (1, 0, 1)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_matches_dense_oracle_on_random_complexes(seed):
    rng = make_rng(seed)
    nv = int(rng.integers(4, 12))
    tops = set()
    for _ in range(int(rng.integers(1, 25))):
        size = int(rng.integers(1, 5))
        tops.add(tuple(sorted(rng.choice(nv, size=min(size, nv), replace=False).tolist())))
    S = closure(tops) | {(v,) for v in range(nv)}
    cx = complex_from_simplices(T2, S, dim_cap=4)
    assert betti_numbers(cx).betti[:4] == oracles.dense_betti(S, 3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(["torus", "sphere"]))
def test_euler_identity_on_cech_complexes(seed, kind):
    m = flat_torus(2) if kind == "torus" else sphere_with_volume(2)
    rng = make_rng(seed)
    n = float(rng.integers(20, 200))
    r = float(rng.uniform(0.02, 0.9 * m.convexity_radius))
    before = AUDIT["failures"]
    b = betti_numbers(build_complex(poisson_process(m, n, seed), r, method="delaunay"))
    assert AUDIT["failures"] == before
    assert sum((-1) ** k * x for k, x in enumerate(b.betti)) == b.euler
