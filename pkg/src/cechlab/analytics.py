"""Closed-form reference quantities for the density parameter Λ."""

from __future__ import annotations

import math

from .errors import InvalidInputError, OutOfRegimeError
from .manifold import unit_ball_volume

omega = unit_ball_volume


def lambda_of(n: float, r: float, d: int, vol: float) -> float:
    """Λ = n ω_d r^d / vol, the expected number of points in an r-ball."""
    if not n > 0 or not vol > 0 or d < 1 or r < 0:
        raise InvalidInputError("lambda_of needs n > 0, r >= 0, d >= 1, vol > 0")
    return n * omega(d) * r ** d / vol


def radius_of_lambda(n: float, lam: float, d: int, vol: float) -> float:
    """Inverse of :func:`lambda_of` in r."""
    if not lam > 0:
        raise OutOfRegimeError(f"target Λ must be positive, got {lam}")
    if not n > 0 or not vol > 0 or d < 1:
        raise InvalidInputError("radius_of_lambda needs n > 0, d >= 1, vol > 0")
    return (lam * vol / (n * omega(d))) ** (1.0 / d)


def threshold_lambda(n: float, k: float, offset: float) -> float:
    """Λ = log n + k log log n + offset."""
    if not n > math.e:
        raise InvalidInputError(f"log log n needs n > e, got {n}")
    return math.log(n) + k * math.log(math.log(n)) + offset


def threshold_radius(n: float, k: float, offset: float, d: int, vol: float,
                     max_radius: float | None = None) -> float:
    """Radius at which Λ = log n + k log log n + offset."""
    lam = threshold_lambda(n, k, offset)
    r = radius_of_lambda(n, lam, d, vol)
    if max_radius is not None and r > max_radius:
        raise OutOfRegimeError(f"radius {r:g} exceeds {max_radius:g}")
    return r


def _poisson_tail_head(lam: float, k: int) -> float:
    # e^{-Λ} Σ_{j<k} Λ^j / j!, computed in log space for large Λ
    if math.isinf(lam):
        return 0.0
    return sum(math.exp(-lam + j * math.log(lam) - math.lgamma(j + 1)) for j in range(k))


def crit_envelope(n: float, lambda_r: float, lambda_r0: float, k: int) -> float:
    """n (e^{-Λ} Σ_{j<k} Λ^j/j! − e^{-Λ0} Σ_{j<k} Λ0^j/j!).

    Shape of the expected number of index-k critical points with radius in
    (r, r0], up to a constant that is not known explicitly.
    """
    if k < 1:
        raise InvalidInputError("crit_envelope needs k >= 1")
    if not 0 < lambda_r <= lambda_r0:
        raise InvalidInputError(f"need 0 < Λ <= Λ0, got {lambda_r}, {lambda_r0}")
    value = n * (_poisson_tail_head(lambda_r, k) - _poisson_tail_head(lambda_r0, k))
    return max(value, 0.0)


def betti_envelope(n: float, lambda_val: float, k: int, a_k: float, b_k: float,
                   beta_k_M: int) -> tuple:
    """(a_k n Λ^{k-2} e^{-Λ}, β_k(M) + b_k n Λ^k e^{-Λ}) with user-supplied constants."""
    if not n > 0 or not lambda_val > 0:
        raise InvalidInputError("betti_envelope needs n > 0 and Λ > 0")
    if math.isinf(lambda_val):
        return 0.0, float(beta_k_M)
    lower = a_k * n * math.exp((k - 2) * math.log(lambda_val) - lambda_val)
    upper = beta_k_M + b_k * n * math.exp(k * math.log(lambda_val) - lambda_val)
    return lower, upper


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple:
    """Wilson score interval for a binomial proportion (95% by default)."""
    if trials <= 0:
        return 0.0, 1.0
    p = successes / trials
    denom = 1 + z * z / trials
    mid = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, mid - half), min(1.0, mid + half)
