"""Critical points of the distance function to a point cloud.

A (k+1)-subset Y generates an index-k critical point when its center
``c = c(Y)`` exists, the origin lies in the convex hull of the vectors
``log_c(y)`` (equivalently of the gradients ``-2 log_c(y)`` of the squared
distances), and the open ball of radius ``rho(Y)`` around ``c`` contains no
other cloud point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .cech import CechComplex, build_complex, check_radius
from .errors import InvalidInputError, OutOfRegimeError
from .grid import SpatialGrid
from .homology import BettiVector, betti_numbers, manifold_betti
from .manifold import (
    ManifoldModel,
    as_points,
    build_net,
    circumcenters,
    distance,
    exp_map,
    lift,
    log_map,
)
from .sampler import PointCloud

# origin-in-hull tolerance, relative to the diameter 2*rho of the ball
HULL_TOL = 1e-9
# open-ball emptiness slack in absolute distance units
EMPTY_TOL = 1e-12
_CHUNK = 100_000


@dataclass(frozen=True)
class CriticalPoint:
    index: int
    center: np.ndarray
    radius: float
    generators: tuple

    def row(self) -> list:
        return [self.index, self.radius, *self.center.tolist(), *self.generators]


@lru_cache(maxsize=None)
def _subsets(s: int, sizes: tuple):
    out = []
    for size in sizes:
        out.extend(itertools.combinations(range(s), size))
    return tuple(out)


def _hull_distance_subsets(V: np.ndarray, subsets) -> np.ndarray:
    """Distance from the origin to the union of the simplices spanned by ``subsets``.

    For each vertex subset the origin is projected onto its affine hull; the
    projection counts only when it lies inside the subset's simplex.  The
    minimum over all faces of a simplex equals the distance to the simplex.
    """
    M = V.shape[0]
    best = np.full(M, np.inf)
    for sub in subsets:
        S = V[:, list(sub), :]
        if len(sub) == 1:
            best = np.minimum(best, np.linalg.norm(S[:, 0, :], axis=1))
            continue
        v0 = S[:, 0, :]
        A = S[:, 1:, :] - v0[:, None, :]
        G = A @ np.swapaxes(A, 1, 2)
        rhs = -np.einsum("kid,kd->ki", A, v0)
        det = np.linalg.det(G)
        scale = np.prod(np.maximum(np.einsum("kii->ki", G), 1e-300), axis=1)
        ok = det > 1e-12 * scale
        Gs = np.where(ok[:, None, None], G, np.eye(len(sub) - 1))
        mu = np.linalg.solve(Gs, rhs[..., None])[..., 0]
        lam0 = 1.0 - mu.sum(axis=1)
        inside = ok & (lam0 >= -1e-12) & np.all(mu >= -1e-12, axis=1)
        p = v0 + np.einsum("ki,kid->kd", mu, A)
        dist = np.where(inside, np.linalg.norm(p, axis=1), np.inf)
        best = np.minimum(best, dist)
    return best


def origin_hull_distance(V: np.ndarray) -> np.ndarray:
    """Distance from the origin to conv(V[k]) for a stack ``V`` of shape (M, s, d)."""
    V = np.asarray(V, dtype=float)
    s = V.shape[1]
    return _hull_distance_subsets(V, _subsets(s, tuple(range(1, s + 1))))


def boundary_distance(V: np.ndarray) -> np.ndarray:
    """Distance from the origin to the relative boundary of the simplex conv(V[k])."""
    V = np.asarray(V, dtype=float)
    s = V.shape[1]
    return _hull_distance_subsets(V, _subsets(s, tuple(range(1, s))))


def delta_polytope_contains_origin(m: ManifoldModel, center, Y) -> bool:
    """Whether 0 lies in conv{-2 log_center(y)} up to the closed-hull tolerance."""
    center = as_points(m, center)
    Y = as_points(m, Y).reshape(-1, m.ambient_dim)
    if len(Y) == 0:
        raise InvalidInputError("need at least one generator")
    dist = distance(m, center, Y)
    if np.max(dist) > m.convexity_radius:
        raise OutOfRegimeError("generators farther than the convexity radius")
    V = -2.0 * log_map(m, np.broadcast_to(center, Y.shape), Y)
    rho = float(np.max(dist))
    return bool(origin_hull_distance(V[None])[0] <= HULL_TOL * max(2 * rho, 1e-300))


def log_vectors(m: ManifoldModel, centers: np.ndarray, gens_pts: np.ndarray) -> np.ndarray:
    """log_c(y) for stacks: centers (M, D), generator points (M, s, D) -> (M, s, d)."""
    M, s, D = gens_pts.shape
    c = np.repeat(centers[:, None, :], s, axis=1)
    return log_map(m, c.reshape(-1, D), gens_pts.reshape(-1, D)).reshape(M, s, m.d)


def _empty_ball(m, grid, pts, centers, radii, gens, r_hi) -> np.ndarray:
    """True where no non-generator lies at distance <= rho - EMPTY_TOL."""
    ok = np.ones(len(centers), dtype=bool)
    if len(centers) == 0:
        return ok
    qi, pj, dist = grid.query(centers, r_hi)
    inner = dist <= radii[qi] - EMPTY_TOL
    is_gen = np.any(gens[qi] == pj[:, None], axis=1)
    bad = inner & ~is_gen
    ok[np.unique(qi[bad])] = False
    return ok


@dataclass
class _Filtered:
    gens: np.ndarray
    centers: np.ndarray
    radii: np.ndarray
    degenerate: int = 0


def filter_critical(m: ManifoldModel, pts: np.ndarray, cand: np.ndarray, r_lo: float,
                    r_hi: float, grid: SpatialGrid | None = None) -> _Filtered:
    """Keep candidate generator sets that satisfy the three critical-point conditions."""
    s = cand.shape[1]
    D = m.ambient_dim
    if grid is None:
        grid = SpatialGrid(m, pts, r_hi)
    G, C, R = [], [], []
    degenerate = 0
    for lo in range(0, len(cand), _CHUNK):
        block = cand[lo : lo + _CHUNK]
        lifted = lift(m, pts[block])
        centers, radii, bary, valid = circumcenters(m, lifted)
        degenerate += int(np.count_nonzero(~valid))
        keep = valid & (radii > r_lo) & (radii <= r_hi)
        block, centers, radii = block[keep], centers[keep], radii[keep]
        if len(block) == 0:
            continue
        # the barycentric coordinates settle clear cases; borderline ones use the hull distance
        b = bary[keep]
        inside = np.all(b >= 1e-9, axis=1)
        unsure = ~inside & np.all(b >= -1e-6, axis=1)
        if np.any(unsure):
            V = -2.0 * log_vectors(m, centers[unsure], pts[block[unsure]])
            dist = origin_hull_distance(V)
            inside[unsure] = dist <= HULL_TOL * 2 * radii[unsure]
        block, centers, radii = block[inside], centers[inside], radii[inside]
        empty = _empty_ball(m, grid, pts, centers, radii, block, r_hi)
        G.append(block[empty])
        C.append(centers[empty])
        R.append(radii[empty])
    if not G:
        return _Filtered(np.zeros((0, s), dtype=np.int64), np.zeros((0, D)), np.zeros(0), degenerate)
    return _Filtered(np.concatenate(G), np.concatenate(C), np.concatenate(R), degenerate)


def candidate_sets(cloud: PointCloud, k: int, r_hi: float, method: str = "clique") -> np.ndarray:
    """(k+1)-subsets that may generate critical points with radius <= r_hi.

    ``clique``: k-simplices of the Čech complex at ``r_hi`` (the center ball
    encloses its generators, so their enclosing radius is at most rho).
    ``delaunay``: k-faces of the Delaunay triangulation, which contain every
    generator set with an empty open ball.
    """
    if method == "delaunay":
        from .delaunay import delaunay_faces

        faces = delaunay_faces(cloud, k)
        if faces is not None:
            return faces
    cx = build_complex(cloud, r_hi, dim_cap=k, method="cech")
    return cx.simplices[k]


def _check_interval(m: ManifoldModel, k: int, r_lo: float, r_hi: float) -> None:
    if not 0 <= k <= m.d:
        raise InvalidInputError(f"index k must be in [0, {m.d}], got {k}")
    if not 0 <= r_lo < r_hi:
        raise InvalidInputError(f"need 0 <= r_lo < r_hi, got ({r_lo}, {r_hi}]")
    check_radius(m, r_hi)


def enumerate_critical_arrays(cloud: PointCloud, k: int, r_lo: float, r_hi: float,
                              method: str = "clique") -> _Filtered:
    """Array form of :func:`enumerate_critical_points`, sorted by (radius, generators)."""
    m = cloud.manifold
    _check_interval(m, k, r_lo, r_hi)
    pts = cloud.points
    n = len(pts)
    if k == 0:
        gens = np.arange(n if r_lo == 0 else 0, dtype=np.int64).reshape(-1, 1)
        return _Filtered(gens, pts[gens[:, 0]].copy(), np.zeros(len(gens)))
    if n < k + 1:
        return _Filtered(np.zeros((0, k + 1), dtype=np.int64), np.zeros((0, m.ambient_dim)), np.zeros(0))
    cand = candidate_sets(cloud, k, r_hi, method)
    out = filter_critical(m, pts, cand, r_lo, r_hi)
    order = np.lexsort([out.gens[:, c] for c in range(k, -1, -1)] + [out.radii])
    return _Filtered(out.gens[order], out.centers[order], out.radii[order], out.degenerate)


def enumerate_critical_points(cloud: PointCloud, k: int, r_lo: float, r_hi: float,
                              method: str = "clique") -> list:
    """Index-k critical points with radius in ``(r_lo, r_hi]``.

    Index 0 yields every cloud point at radius 0 (the minima), reported when
    ``r_lo == 0`` so that the count over ``[0, r]`` equals the cloud size.
    """
    arr = enumerate_critical_arrays(cloud, k, r_lo, r_hi, method)
    return [
        CriticalPoint(k, c, float(rad), tuple(int(v) for v in g))
        for g, c, rad in zip(arr.gens, arr.centers, arr.radii)
    ]


@dataclass
class CritCounts:
    """Critical radii per index over ``(r_lo, r_hi]``; index 0 counts the points."""

    r_lo: float
    r_hi: float
    radii: dict
    n_points: int
    degenerate: int = 0

    def count(self, k: int, a: float | None = None, b: float | None = None) -> int:
        """C_k(a, b] restricted to the enumerated interval."""
        a = self.r_lo if a is None else a
        b = self.r_hi if b is None else b
        if k == 0:
            return self.n_points if a <= 0 <= b and self.r_lo == 0 else 0
        if a < self.r_lo or b > self.r_hi:
            raise InvalidInputError(
                f"interval ({a}, {b}] not inside enumerated ({self.r_lo}, {self.r_hi}]"
            )
        rad = self.radii.get(k)
        if rad is None:
            return 0
        return int(np.count_nonzero((rad > a) & (rad <= b)))

    def as_tuple(self) -> tuple:
        ks = range(max(self.radii, default=0) + 1)
        return tuple(self.count(k) for k in ks)


def crit_counts(cloud: PointCloud, r_lo: float, r_hi: float, k_max: int | None = None,
                method: str = "clique") -> CritCounts:
    m = cloud.manifold
    if k_max is None:
        k_max = m.d
    radii = {0: np.zeros(len(cloud) if r_lo == 0 else 0)}
    degenerate = 0
    for k in range(1, k_max + 1):
        arr = enumerate_critical_arrays(cloud, k, r_lo, r_hi, method)
        radii[k] = arr.radii
        degenerate += arr.degenerate
    return CritCounts(r_lo, r_hi, radii, len(cloud), degenerate)


@dataclass
class MorseReport:
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(row["weak_pass"] and row["relative_pass"] is not False for row in self.rows)

    def failures(self) -> list:
        return [r for r in self.rows if not r["weak_pass"] or r["relative_pass"] is False]


def morse_inequality_check(cx: CechComplex, m: ManifoldModel, counts: CritCounts,
                           covered_at: float | None = None,
                           betti: BettiVector | None = None) -> MorseReport:
    """Weak and (under coverage) relative Morse inequalities for each index.

    Weak: β_k ≤ C_k(0, r].  Relative, when the union of balls of radius
    ``covered_at`` is the whole manifold: β_k − β_k(M) ≤ C_{k+1}(r, covered_at].
    """
    if betti is None:
        betti = betti_numbers(cx)
    mb = manifold_betti(m).betti
    r = cx.r
    report = MorseReport()
    top = min(betti.trusted_upto, m.d)
    for k in range(top + 1):
        beta = betti.betti[k]
        weak = counts.count(k, 0.0, r) if k == 0 else counts.count(k, max(counts.r_lo, 0.0), r)
        row = {"k": k, "beta": beta, "weak_bound": weak, "weak_pass": beta <= weak,
               "relative_bound": None, "relative_pass": None}
        if covered_at is not None:
            rel = counts.count(k + 1, r, covered_at) if k + 1 <= m.d else 0
            row["relative_bound"] = rel
            row["relative_pass"] = beta - mb[k] <= rel
        report.rows.append(row)
    return report


def _cube_net(d: int, half_width: float) -> np.ndarray:
    """Cell centers of a grid on [-w, w]^d whose cells have half-diagonal <= w/2."""
    q = math.ceil(2 * math.sqrt(d))
    axis = (np.arange(q) + 0.5) * (2 * half_width / q) - half_width
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def coverage_certificate(cloud: PointCloud, r0: float, delta: float | None = None,
                         max_depth: int = 6) -> bool:
    """Sound test that the balls of radius ``r0`` around the cloud cover M.

    Start from a ``delta``-net of M (default ``r0/2``).  A net point whose
    nearest cloud point is within ``r0 - delta`` certifies its whole
    ``delta``-ball; one farther than ``r0`` is itself uncovered, so coverage
    fails.  Undecided net points are replaced by a ``delta/2``-net of their
    ``delta``-ball and the test repeats, up to ``max_depth`` refinements,
    after which the answer is a conservative ``False``.
    """
    m = cloud.manifold
    check_radius(m, r0)
    if delta is None:
        delta = r0 / 2
    if not 0 < delta < r0:
        raise InvalidInputError("net spacing must lie in (0, r0)")
    if len(cloud) == 0:
        return False
    grid = SpatialGrid(m, cloud.points, r0)
    queue = build_net(m, delta)
    for depth in range(max_depth + 1):
        pending = []
        # chunks let a clearly uncovered cloud fail early
        for lo in range(0, len(queue), 8192):
            near = grid.nearest_distance(queue[lo : lo + 8192], r0)
            if np.any(near > r0):
                return False
            pending.append(queue[lo : lo + 8192][near > r0 - delta])
        open_pts = np.concatenate(pending)
        if len(open_pts) == 0:
            return True
        if depth == max_depth:
            return False
        child = _cube_net(m.d, delta)
        reps = np.repeat(open_pts, len(child), axis=0)
        queue = exp_map(m, reps, np.tile(child, (len(open_pts), 1)))
        delta /= 2
    return False


def write_critical_csv(points: list, fh) -> None:
    fh.write("index,radius,center,generators\n")
    for cp in points:
        center = " ".join("%.17g" % v for v in cp.center)
        gens = " ".join(str(g) for g in cp.generators)
        fh.write(f"{cp.index},{cp.radius:.17g},{center},{gens}\n")
