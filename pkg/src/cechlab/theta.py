"""Θ-cycles: robust critical configurations that certify homology.

A critical configuration Y of index k counts towards the lower bound
β_k^ε(r) when its radius lies in (r1, r], the closed ball of radius r2
around its center holds no other point, its polytope Δ(Y) contains a ball of
relative radius ε around the origin (φ(Y) ≥ ε), and the annulus
A_ε = B_ρ(c) minus the open ball B_{ερ}(c) is covered by the balls of
radius ρ around the cloud.  Coverage of the annulus is certified with a net.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cech import CechComplex
from .errors import InvalidConfigurationError, InvalidInputError, InvariantError, OutOfRegimeError
from .grid import SpatialGrid
from .homology import BettiVector, betti_numbers
from .manifold import ManifoldModel, as_points, build_net, distance, log_map
from .morse import HULL_TOL, boundary_distance, enumerate_critical_arrays, log_vectors, origin_hull_distance
from .sampler import PointCloud

DEFAULT_EPSILON = 0.1


def c_g_constant(m: ManifoldModel, r: float) -> float:
    """Excess-inequality constant 1/sqrt(A(r)) with A the Hessian factor of ρ²/2.

    On the round sphere of radius R the smallest eigenvalue of the Hessian of
    ρ²/2 at distance t is (t/R) cot(t/R); it decreases in t, so over
    distances up to 2r it is A(r) = (2r/R) cot(2r/R).
    """
    if not 0 < r <= m.convexity_radius:
        raise OutOfRegimeError(f"radius {r} outside (0, {m.convexity_radius:g}]")
    if m.is_torus:
        return 1.0
    x = 2 * r / m.scale
    A = min(1.0, x / math.tan(x)) if x < math.pi / 2 else 0.0
    if A <= 0:
        raise OutOfRegimeError("Hessian bound degenerates at this radius")
    return 1.0 / math.sqrt(A)


def radius_rule_holds(r: float, r1: float, r2: float, c_g: float) -> bool:
    """r1 > r sqrt(1 - (r2/r - 1)^2 / c_g^2) (trivially true if the radicand is negative)."""
    rad = 1.0 - ((r2 / r - 1.0) / c_g) ** 2
    if rad < 0:
        return True
    return r1 > r * math.sqrt(rad)


def theta_radii(r: float, lambda_val: float, c_g: float, max_radius: float | None = None):
    """(r1, r2) = (r(1 - ξ²/(2 c_g²)), r(1 + ξ)) with ξ = 1/Λ."""
    if not lambda_val > 1:
        raise InvalidInputError(f"need Λ > 1, got {lambda_val}")
    if not r > 0 or not c_g >= 1:
        raise InvalidInputError("need r > 0 and c_g >= 1")
    xi = 1.0 / lambda_val
    r2 = r * (1 + xi)
    r1 = r * (1 - xi * xi / (2 * c_g * c_g))
    if max_radius is not None and r2 > max_radius:
        raise OutOfRegimeError(f"r2 = {r2:g} exceeds {max_radius:g}")
    if not radius_rule_holds(r, r1, r2, c_g):
        raise InvariantError(f"radii ({r1}, {r}, {r2}) violate the lower-bound hypothesis")
    return r1, r2


@dataclass(frozen=True)
class ThetaConfig:
    epsilon: float
    r: float
    r1: float
    r2: float
    xi: float
    c_g: float = 1.0

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise InvalidConfigurationError("epsilon must lie in (0, 1)")
        if not 0 < self.r1 < self.r < self.r2:
            raise InvalidConfigurationError("need 0 < r1 < r < r2")
        if not radius_rule_holds(self.r, self.r1, self.r2, self.c_g):
            raise InvalidConfigurationError("r1 too small for the lower-bound hypothesis")


def theta_config(m: ManifoldModel, r: float, lambda_val: float,
                 epsilon: float = DEFAULT_EPSILON) -> ThetaConfig:
    """Default configuration: ξ = 1/Λ and c_g evaluated at r."""
    cg = c_g_constant(m, r)
    r1, r2 = theta_radii(r, lambda_val, cg, m.convexity_radius)
    return ThetaConfig(epsilon, r, r1, r2, 1.0 / lambda_val, cg)


def phi_from_vectors(V: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """φ for stacks of polytope vertices ``V`` (M, s, d) = -2 log vectors."""
    return boundary_distance(V) / (2 * rho)


def phi(m: ManifoldModel, center, Y) -> float:
    """(1/2ρ) times the distance from the origin to the boundary of Δ(Y)."""
    center = as_points(m, center)
    Y = as_points(m, Y).reshape(-1, m.ambient_dim)
    if len(Y) < 2:
        raise InvalidConfigurationError("φ needs at least two generators")
    V = -2.0 * log_map(m, np.broadcast_to(center, Y.shape), Y)
    rho = float(np.mean(distance(m, center, Y)))
    if origin_hull_distance(V[None])[0] > HULL_TOL * 2 * rho:
        raise InvalidConfigurationError("origin lies outside Δ(Y)")
    return float(phi_from_vectors(V[None], np.array([rho]))[0])


@dataclass(frozen=True)
class ThetaCycle:
    generators: tuple
    center: np.ndarray
    radius: float
    phi: float
    certified: bool = True


def annulus_certificate(m: ManifoldModel, grid: SpatialGrid, center, rho: float,
                        epsilon: float) -> bool:
    """Net certificate that A_ε(center, ρ) lies in the ρ-neighborhood of the cloud.

    Net points are at most ερ/2 from any annulus point, so a cloud point
    within ρ(1 - ε/2) of every net point covers the annulus.
    """
    delta = epsilon * rho / (2 * math.sqrt(2))
    net = build_net(m, delta, region=(center, epsilon * rho, rho))
    reach = rho * (1 - epsilon / 2)
    near = grid.nearest_distance(net, reach)
    return bool(np.all(near <= reach))


def count_theta_cycles(cloud: PointCloud, k: int, cfg: ThetaConfig, method: str = "clique"):
    """Number of Θ-cycles satisfying C1–C3 with a passing annulus certificate."""
    m = cloud.manifold
    if not 1 <= k <= m.d - 1:
        raise InvalidInputError(f"Θ-cycles need 1 <= k <= d - 1, got k={k}")
    if cfg.r2 > m.convexity_radius:
        raise OutOfRegimeError("r2 exceeds the convexity radius")
    if len(cloud) < k + 1:
        return 0, []
    pts = cloud.points
    crit = enumerate_critical_arrays(cloud, k, cfg.r1, cfg.r, method)
    if len(crit.gens) == 0:
        return 0, []
    grid = SpatialGrid(m, pts, cfg.r2)
    # C2: closed r2-ball around the center holds only the generators
    qi, pj, _ = grid.query(crit.centers, cfg.r2)
    intruder = ~np.any(crit.gens[qi] == pj[:, None], axis=1)
    c2 = np.ones(len(crit.gens), dtype=bool)
    c2[np.unique(qi[intruder])] = False
    # C3: robustness of the critical configuration
    V = -2.0 * log_vectors(m, crit.centers, pts[crit.gens])
    phis = phi_from_vectors(V, crit.radii)
    c3 = phis >= cfg.epsilon
    cycles = []
    for i in np.nonzero(c2 & c3)[0]:
        rho = float(crit.radii[i])
        if annulus_certificate(m, grid, crit.centers[i], rho, cfg.epsilon):
            cycles.append(ThetaCycle(tuple(int(g) for g in crit.gens[i]), crit.centers[i],
                                     rho, float(phis[i])))
    return len(cycles), cycles


def theta_lower_bound_check(cx: CechComplex, theta_count: int, m: ManifoldModel, k: int,
                            betti: BettiVector | None = None) -> bool:
    """β_k of the complex is at least the number of certified Θ-cycles."""
    if theta_count == 0:
        return True
    if betti is None:
        betti = betti_numbers(cx)
    return betti.betti[k] >= theta_count
