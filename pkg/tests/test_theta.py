import math

import numpy as np
import pytest

from cechlab import analytics
from cechlab.cech import build_complex
from cechlab.errors import InvalidConfigurationError, InvalidInputError, OutOfRegimeError
from cechlab.homology import betti_numbers
from cechlab.manifold import distance, exp_map, flat_torus, round_sphere
from cechlab.sampler import fixed_cloud, poisson_process
from cechlab.theta import (
    ThetaConfig,
    c_g_constant,
    count_theta_cycles,
    radius_rule_holds,
    phi,
    theta_config,
    theta_lower_bound_check,
    theta_radii,
)

T2 = flat_torus(2)
S2 = round_sphere(2)


def hessian_factor_oracle(t: float, h: float = 1e-4) -> float:
    """Smallest Hessian eigenvalue of ρ²/2 on the unit sphere at distance t, by finite differences."""
    p = np.array([0.0, 0.0, 1.0])
    x = np.array([math.sin(t), 0.0, math.cos(t)])

    def f(v):
        return 0.5 * distance(S2, p, exp_map(S2, x, v)) ** 2

    H = np.empty((2, 2))
    E = np.eye(2) * h
    for i in range(2):
        for j in range(2):
            H[i, j] = (f(E[i] + E[j]) - f(E[i] - E[j]) - f(-E[i] + E[j]) + f(-E[i] - E[j])) / (4 * h * h)
    return float(np.linalg.eigvalsh(H).min())


def test_c_g_torus_is_one():
    for r in (0.01, 0.1, 0.25):
        assert c_g_constant(T2, r) == 1.0


def test_c_g_sphere_value_and_oracle():
    assert c_g_constant(S2, 0.1) == pytest.approx(1 / math.sqrt(0.2 / math.tan(0.2)), abs=1e-12)
    assert c_g_constant(S2, 0.1) == pytest.approx(1.0067523, abs=1e-6)
    for r in (0.05, 0.1, 0.3):
        A = min(hessian_factor_oracle(t) for t in np.linspace(0.01, 2 * r, 25))
        assert c_g_constant(S2, r) == pytest.approx(1 / math.sqrt(A), abs=1e-6)


def test_c_g_monotone_limit():
    vals = [c_g_constant(S2, r) for r in (1e-3, 0.01, 0.05, 0.1, 0.3, 0.6)]
    assert all(v >= 1 for v in vals)
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert vals[0] == pytest.approx(1.0, abs=1e-4)
    with pytest.raises(OutOfRegimeError):
        c_g_constant(S2, 1.0)


def test_theta_radii_example():
    r1, r2 = theta_radii(0.02, 10.0, 1.0)
    assert r2 == pytest.approx(0.022)
    assert r1 == pytest.approx(0.0199)
    assert 0.02 * math.sqrt(1 - 0.1 ** 2) == pytest.approx(0.0198997, abs=1e-7)
    assert radius_rule_holds(0.02, r1, r2, 1.0)


def test_theta_radii_limit_and_errors():
    for lam in (1e2, 1e3, 1e4):
        r1, r2 = theta_radii(0.02, lam, 1.0)
        assert abs(r1 - 0.02) <= 0.02 / lam ** 2 and abs(r2 - 0.02) <= 0.02 / lam * 1.0001
    with pytest.raises(OutOfRegimeError):
        theta_radii(0.24, 10.0, 1.0, max_radius=0.25)
    with pytest.raises(InvalidInputError):
        theta_radii(0.02, 0.5, 1.0)
    with pytest.raises(InvalidConfigurationError):
        ThetaConfig(0.1, 0.02, 0.01, 0.022, 0.1)


def test_phi_values():
    c = np.array([0.5, 0.5])
    assert phi(T2, c, [c + [0.05, 0], c - [0.05, 0]]) == pytest.approx(1.0)
    tri = [c + 0.05 * np.array([math.cos(a), math.sin(a)]) for a in (0.3, 0.3 + 2 * math.pi / 3, 0.3 + 4 * math.pi / 3)]
    assert phi(T2, c, tri) == pytest.approx(0.5)
    # center on the hypotenuse of a right triangle: origin on a facet of Δ
    right = [c + [0.05, 0], c - [0.05, 0], c + [0, 0.05]]
    assert phi(T2, c, right) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(InvalidConfigurationError):
        phi(T2, c, [c + [0.05, 0.01], c + [0.05, -0.01]])


def hand_built(with_ring: bool):
    r = 0.05
    cfg = theta_config(T2, r, 100.0, 0.1)
    c = np.array([0.5, 0.5])
    rho = 0.049999
    assert cfg.r1 < rho <= cfg.r
    pts = [c + [rho, 0], c - [rho, 0]]
    if with_ring:
        # ring just outside B_{r2}, spacing below ερ/4
        R = cfg.r2 * 1.001
        count = math.ceil(2 * math.pi * R / (cfg.epsilon * r / 4)) + 1
        assert 2 * math.pi * R / count < cfg.epsilon * rho / 4
        pts += [c + R * np.array([math.cos(2 * math.pi * i / count), math.sin(2 * math.pi * i / count)])
                for i in range(count)]
    return fixed_cloud(T2, np.array(pts)), cfg


def test_hand_built_theta_cycle():
    cloud, cfg = hand_built(True)
    count, cycles = count_theta_cycles(cloud, 1, cfg)
    assert count == 1
    assert cycles[0].generators == (0, 1)
    assert cycles[0].phi == pytest.approx(1.0)
    cx = build_complex(cloud, cfg.r, method="delaunay")
    assert betti_numbers(cx).betti[1] >= 1
    assert theta_lower_bound_check(cx, count, T2, 1)


def test_without_ring_no_theta_cycle():
    cloud, cfg = hand_built(False)
    assert count_theta_cycles(cloud, 1, cfg)[0] == 0


def test_empty_cloud_and_zero_count():
    cfg = theta_config(T2, 0.05, 20.0)
    empty = fixed_cloud(T2, np.zeros((0, 2)))
    assert count_theta_cycles(empty, 1, cfg)[0] == 0
    cx = build_complex(empty, 0.05)
    assert theta_lower_bound_check(cx, 0, T2, 1)


def test_theta_bound_on_random_clouds():
    n = 1500
    for lam in (3.0, 6.0, 9.0):
        r = analytics.radius_of_lambda(n, lam, 2, 1.0)
        cfg = theta_config(T2, r, lam)
        for seed in range(3):
            cloud = poisson_process(T2, n, seed)
            count, _ = count_theta_cycles(cloud, 1, cfg, method="delaunay")
            cx = build_complex(cloud, r, method="delaunay")
            assert theta_lower_bound_check(cx, count, T2, 1)


def test_k_range_enforced():
    cfg = theta_config(T2, 0.05, 20.0)
    with pytest.raises(InvalidInputError):
        count_theta_cycles(poisson_process(T2, 50, 1), 2, cfg)
