"""Exact geometry on the flat torus and the round sphere.

Points are plain numpy arrays.  A torus point has ``d`` coordinates in
``[0, L)``; a sphere point has ``d + 1`` ambient coordinates and Euclidean
norm ``R``.  Every function accepts a single point (1-D array) or a stack of
points (leading batch axes) where that makes sense.

Flat computations on small configurations (circumcenters, enclosing balls)
are done on a *lift*: on the torus the configuration is unwrapped around its
first point using nearest images, on the sphere the ambient coordinates are
already a faithful lift.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegenerateGeodesicError, InvalidInputError, OutOfRegimeError

TORUS = "torus"
SPHERE = "sphere"
_KINDS = (TORUS, SPHERE)

# relative tolerance for sphere membership of input points
POINT_TOL = 1e-12


def unit_ball_volume(d: int) -> float:
    """Volume of the unit ball in R^d, pi^(d/2) / Gamma(d/2 + 1)."""
    if d == 1:
        return 2.0
    if d == 2:
        return math.pi
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def unit_sphere_area(d: int) -> float:
    """Surface measure of the unit sphere S^d embedded in R^(d+1)."""
    return 2.0 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)


@dataclass(frozen=True)
class ManifoldModel:
    """A flat torus ``[0, L)^d`` or a round sphere of radius ``R`` in R^(d+1)."""

    kind: str
    d: int
    scale: float

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidInputError(f"unknown manifold kind {self.kind!r}")
        if int(self.d) != self.d or self.d < 1:
            raise InvalidInputError(f"dimension must be a positive integer, got {self.d}")
        if not self.scale > 0 or not math.isfinite(self.scale):
            raise InvalidInputError(f"scale must be positive, got {self.scale}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "scale", float(self.scale))

    @property
    def is_torus(self) -> bool:
        return self.kind == TORUS

    @property
    def ambient_dim(self) -> int:
        return self.d if self.is_torus else self.d + 1

    @property
    def volume(self) -> float:
        if self.is_torus:
            return self.scale ** self.d
        return unit_sphere_area(self.d) * self.scale ** self.d

    @property
    def scalar_curvature(self) -> float:
        if self.is_torus:
            return 0.0
        return self.d * (self.d - 1) / self.scale ** 2

    @property
    def convexity_radius(self) -> float:
        # conservative: L/4 keeps every pair with a unique nearest lift
        if self.is_torus:
            return self.scale / 4
        return math.pi * self.scale / 4

    @property
    def injectivity_radius(self) -> float:
        if self.is_torus:
            return self.scale / 2
        return math.pi * self.scale

    @property
    def diameter(self) -> float:
        if self.is_torus:
            return self.scale * math.sqrt(self.d) / 2
        return math.pi * self.scale

    def describe(self) -> str:
        name = "T" if self.is_torus else "S"
        sym = "L" if self.is_torus else "R"
        return f"{name}^{self.d}({sym}={self.scale:g})"


def flat_torus(d: int = 2, side: float = 1.0) -> ManifoldModel:
    return ManifoldModel(TORUS, d, side)


def round_sphere(d: int = 2, radius: float = 1.0) -> ManifoldModel:
    return ManifoldModel(SPHERE, d, radius)


def sphere_with_volume(d: int, volume: float = 1.0) -> ManifoldModel:
    """Round S^d scaled so that its total volume equals ``volume``."""
    return round_sphere(d, (volume / unit_sphere_area(d)) ** (1.0 / d))


# ---------------------------------------------------------------------------
# points and distances


def as_points(m: ManifoldModel, points, *, check: bool = True) -> np.ndarray:
    """Validate ``points`` for ``m`` and return them as a float array."""
    arr = np.asarray(points, dtype=float)
    if arr.shape[-1:] != (m.ambient_dim,):
        raise InvalidInputError(
            f"{m.describe()} points need {m.ambient_dim} coordinates, got shape {arr.shape}"
        )
    if check and arr.size:
        if m.is_torus:
            if np.any(arr < 0) or np.any(arr >= m.scale):
                raise InvalidInputError("torus coordinates must lie in [0, L)")
        else:
            norms = np.linalg.norm(arr, axis=-1)
            if np.any(np.abs(norms - m.scale) > 1e3 * POINT_TOL * m.scale):
                raise InvalidInputError("sphere points must have norm R")
    return arr


def wrap(m: ManifoldModel, x: np.ndarray) -> np.ndarray:
    """Map ambient coordinates back onto the manifold."""
    x = np.asarray(x, dtype=float)
    if m.is_torus:
        y = np.mod(x, m.scale)
        # mod can return L itself for tiny negative inputs
        return np.where(y >= m.scale, 0.0, y)
    norms = np.linalg.norm(x, axis=-1, keepdims=True)
    return m.scale * x / norms


def min_image(m: ManifoldModel, diff: np.ndarray) -> np.ndarray:
    """Nearest-image representative of a torus displacement."""
    L = m.scale
    return diff - L * np.round(diff / L)


def _sphere_angle(p: np.ndarray, q: np.ndarray, R: float) -> np.ndarray:
    # 2*atan2(|p-q|, |p+q|) is accurate at both small and near-antipodal angles
    chord = np.linalg.norm(p - q, axis=-1)
    sumn = np.linalg.norm(p + q, axis=-1)
    return 2.0 * np.arctan2(chord, sumn)


def distance(m: ManifoldModel, p, q) -> np.ndarray | float:
    """Geodesic distance, broadcasting over leading axes."""
    p = as_points(m, p, check=False)
    q = as_points(m, q, check=False)
    if m.is_torus:
        out = np.linalg.norm(min_image(m, q - p), axis=-1)
    else:
        out = m.scale * _sphere_angle(p, q, m.scale)
    return float(out) if np.ndim(out) == 0 else out


def pairwise_distances(m: ManifoldModel, points) -> np.ndarray:
    P = as_points(m, points, check=False)
    return distance(m, P[:, None, :], P[None, :, :])


# ---------------------------------------------------------------------------
# tangent spaces


def tangent_frame(m: ManifoldModel, p) -> np.ndarray:
    """Orthonormal basis of T_pM as columns of an (ambient_dim, d) array.

    On the torus this is the identity.  On the sphere it is the last ``d``
    columns of the Householder reflection sending ``e_0`` to ``p / R``; the
    construction is deterministic in ``p``.
    """
    p = np.asarray(p, dtype=float)
    D = m.ambient_dim
    if m.is_torus:
        return np.broadcast_to(np.eye(D), p.shape[:-1] + (D, D)).copy()
    phat = p / m.scale
    u = -phat.copy()
    u[..., 0] += 1.0
    uu = np.sum(u * u, axis=-1)[..., None, None]
    eye = np.eye(D)
    with np.errstate(invalid="ignore", divide="ignore"):
        H = eye - 2.0 * u[..., :, None] * u[..., None, :] / uu
    H = np.where(uu < 1e-30, eye, H)
    return H[..., :, 1:]


def log_map(m: ManifoldModel, p, q) -> np.ndarray:
    """Inverse exponential map: the tangent vector at ``p`` pointing to ``q``.

    The result is expressed in the frame of :func:`tangent_frame` and has
    norm ``distance(m, p, q)``.
    """
    p = as_points(m, p, check=False)
    q = as_points(m, q, check=False)
    if m.is_torus:
        diff = min_image(m, q - p)
        if np.any(np.abs(np.abs(diff) - m.scale / 2) < 1e-12 * m.scale):
            raise DegenerateGeodesicError("ambiguous nearest wrap on the torus")
        return diff
    R = m.scale
    phat = p / R
    qhat = q / R
    theta = _sphere_angle(p, q, R)
    if np.any(theta > math.pi - 1e-9):
        raise DegenerateGeodesicError("antipodal points have no unique geodesic")
    cos_t = np.sum(phat * qhat, axis=-1, keepdims=True)
    w = qhat - cos_t * phat
    wn = np.linalg.norm(w, axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        amb = np.where(wn > 0, R * theta[..., None] * w / wn, 0.0)
    frame = tangent_frame(m, p)
    return np.einsum("...ij,...i->...j", frame, amb)


def exp_map(m: ManifoldModel, p, v) -> np.ndarray:
    """Exponential map at ``p`` of the frame-coordinate tangent vector ``v``."""
    p = as_points(m, p, check=False)
    v = np.asarray(v, dtype=float)
    if m.is_torus:
        return wrap(m, p + v)
    R = m.scale
    frame = tangent_frame(m, p)
    amb = np.einsum("...ij,...j->...i", frame, v)
    nv = np.linalg.norm(amb, axis=-1, keepdims=True)
    t = nv / R
    with np.errstate(invalid="ignore", divide="ignore"):
        dirn = np.where(nv > 0, amb / nv, 0.0)
    q = np.cos(t) * p + R * np.sin(t) * dirn
    return wrap(m, q)


# ---------------------------------------------------------------------------
# lifts, circumcenters, enclosing balls


def lift(m: ManifoldModel, Y: np.ndarray) -> np.ndarray:
    """Unwrap configurations ``Y[..., s, D]`` around their first point."""
    Y = np.asarray(Y, dtype=float)
    if not m.is_torus:
        return Y
    base = Y[..., :1, :]
    return base + min_image(m, Y - base)


def lift_is_faithful(m: ManifoldModel, lifted: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """True where lifted Euclidean distances equal the torus distances."""
    if not m.is_torus:
        return np.ones(lifted.shape[:-2], dtype=bool)
    diff = lifted[..., :, None, :] - lifted[..., None, :, :]
    eu = np.linalg.norm(diff, axis=-1)
    tor = np.linalg.norm(min_image(m, diff), axis=-1)
    return np.all(np.abs(eu - tor) <= tol * m.scale, axis=(-1, -2))


def _affine_circumcenter(P: np.ndarray):
    """Circumcenter of each point set ``P[k]`` inside its own affine hull.

    Returns ``(center, bary, valid)`` where ``bary`` are the barycentric
    coordinates of the center with respect to the rows of ``P[k]``.
    """
    M, s, D = P.shape
    if s == 1:
        return P[:, 0, :].copy(), np.ones((M, 1)), np.ones(M, dtype=bool)
    A = P[:, 1:, :] - P[:, :1, :]
    G = A @ np.swapaxes(A, 1, 2)
    diag = np.einsum("kii->ki", G)
    b = 0.5 * diag
    if s == 2:
        valid = diag[:, 0] > 0
        mu = np.where(valid, 0.5, 0.0)[:, None]
    else:
        det = np.linalg.det(G)
        scale = np.prod(np.maximum(diag, 1e-300), axis=1)
        valid = det > 1e-10 * scale
        Gs = np.where(valid[:, None, None], G, np.eye(s - 1))
        mu = np.linalg.solve(Gs, b[..., None])[..., 0]
        mu = np.where(valid[:, None], mu, 0.0)
    center = P[:, 0, :] + np.einsum("ki,kid->kd", mu, A)
    bary = np.concatenate([1.0 - mu.sum(axis=1, keepdims=True), mu], axis=1)
    return center, bary, valid


def circumcenters(m: ManifoldModel, lifted: np.ndarray):
    """Batched centers and radii of lifted configurations ``(M, s, D)``.

    Returns ``(centers, radii, bary, valid)``.  ``centers`` are points of
    ``m``; ``bary`` are the barycentric coordinates of the flat circumcenter
    with respect to the configuration, which locate the origin with respect
    to the log-map vectors of the configuration at its center.
    """
    lifted = np.asarray(lifted, dtype=float)
    cE, bary, valid = _affine_circumcenter(lifted)
    if m.is_torus:
        radii = np.linalg.norm(cE - lifted[:, 0, :], axis=1)
        # past L/2 the flat distances are no longer torus distances
        valid = valid & (radii < m.injectivity_radius)
        return wrap(m, cE), radii, bary, valid
    R = m.scale
    norm = np.linalg.norm(cE, axis=1)
    valid = valid & (norm > 1e-12 * R)
    safe = np.where(valid[:, None], cE, lifted[:, 0, :])
    centers = wrap(m, safe)
    radii = R * _sphere_angle(centers, lifted[:, 0, :], R)
    return centers, radii, bary, valid


def _lifted_distances(m: ManifoldModel, flat_center, lifted):
    # distances from a flat (lifted) center to lifted points
    if m.is_torus:
        return np.linalg.norm(lifted - flat_center[:, None, :], axis=-1)
    c = wrap(m, flat_center)
    return m.scale * _sphere_angle(c[:, None, :], lifted, m.scale)


@lru_cache(maxsize=None)
def _support_subsets(s: int, max_size: int):
    out = []
    for size in range(1, min(s, max_size) + 1):
        out.extend(itertools.combinations(range(s), size))
    return tuple(out)


def miniball_batch(m: ManifoldModel, lifted: np.ndarray):
    """Minimal enclosing geodesic balls of lifted configurations ``(M, s, D)``.

    The minimal ball is the smallest circumball of a support subset (at most
    ``d + 1`` points) that encloses the whole configuration, so all support
    subsets are tried and the smallest enclosing one kept.
    Returns ``(centers, radii)``.
    """
    lifted = np.asarray(lifted, dtype=float)
    M, s, D = lifted.shape
    best_r = np.full(M, np.inf)
    best_c = np.zeros((M, D))
    if M == 0:
        return best_c, best_r
    for subset in _support_subsets(s, m.d + 1):
        sub = lifted[:, list(subset), :]
        cE, _, valid = _affine_circumcenter(sub)
        if m.is_torus:
            rad = np.linalg.norm(cE - sub[:, 0, :], axis=1)
            flat = cE
        else:
            nrm = np.linalg.norm(cE, axis=1)
            valid = valid & (nrm > 1e-12 * m.scale)
            flat = np.where(valid[:, None], cE, sub[:, 0, :])
            rad = m.scale * _sphere_angle(wrap(m, flat), sub[:, 0, :], m.scale)
        dist = _lifted_distances(m, flat, lifted)
        tol = 1e-10 * rad + 1e-14 * m.scale
        encl = valid & np.all(dist <= (rad + tol)[:, None], axis=1)
        better = encl & (rad < best_r)
        best_r = np.where(better, rad, best_r)
        best_c = np.where(better[:, None], flat, best_c)
    return wrap(m, best_c), best_r


def miniball_radii(m: ManifoldModel, lifted: np.ndarray) -> np.ndarray:
    return miniball_batch(m, lifted)[1]


def _check_regime(m: ManifoldModel, Y: np.ndarray, bound: float) -> np.ndarray:
    if len(Y) > 1:
        dmat = pairwise_distances(m, Y)
        # a diameter equal to the bound still has a miniball within the convexity radius
        if dmat.max() > bound * (1 + 1e-12):
            raise OutOfRegimeError(
                f"configuration diameter {dmat.max():.6g} exceeds {bound:.6g}"
            )
    lifted = lift(m, Y[None])
    if not lift_is_faithful(m, lifted)[0]:
        raise OutOfRegimeError("configuration wraps around the torus")
    return lifted


def circumcenter(m: ManifoldModel, Y):
    """Center ``c(Y)`` and radius ``rho(Y)``, or ``None`` for degenerate input.

    ``c(Y)`` minimizes the common distance over the set of points equidistant
    from ``Y``.  Requires ``1 <= len(Y) <= d + 1``.
    """
    Y = as_points(m, Y)
    if Y.ndim != 2 or not 1 <= len(Y) <= m.d + 1:
        raise InvalidInputError(f"circumcenter needs 1..{m.d + 1} points")
    lifted = _check_regime(m, Y, 2 * m.convexity_radius)
    centers, radii, _, valid = circumcenters(m, lifted)
    if not valid[0]:
        return None
    return centers[0], float(radii[0])


def min_enclosing_ball(m: ManifoldModel, Y):
    """Center and radius of the smallest closed geodesic ball containing ``Y``."""
    Y = as_points(m, Y)
    if Y.ndim != 2 or len(Y) == 0:
        raise InvalidInputError("min_enclosing_ball needs at least one point")
    lifted = _check_regime(m, Y, 2 * m.convexity_radius)
    centers, radii = miniball_batch(m, lifted)
    return centers[0], float(radii[0])


# ---------------------------------------------------------------------------
# volumes


def _sin_power_integral(n: int, x: float) -> float:
    # integral of sin^n over [0, x] via the reduction formula
    if n == 0:
        return x
    if n == 1:
        return 1.0 - math.cos(x)
    return -(math.sin(x) ** (n - 1)) * math.cos(x) / n + (n - 1) / n * _sin_power_integral(
        n - 2, x
    )


def ball_volume(m: ManifoldModel, r: float) -> float:
    """Exact volume of a geodesic ball of radius ``r``.

    Valid up to the injectivity radius (``L/2`` on the torus, ``pi R`` on the
    sphere), beyond which balls overlap themselves.
    """
    if not 0 <= r <= m.injectivity_radius:
        raise OutOfRegimeError(f"radius {r} outside [0, {m.injectivity_radius}]")
    if m.is_torus:
        return unit_ball_volume(m.d) * r ** m.d
    R = m.scale
    if m.d == 2:
        return 2 * math.pi * R * R * (1 - math.cos(r / R))
    return unit_sphere_area(m.d - 1) * R ** m.d * _sin_power_integral(m.d - 1, r / R)


def ball_volume_expansion(m: ManifoldModel, r: float) -> float:
    """Second-order small-radius expansion of the ball volume."""
    s = m.scalar_curvature
    return unit_ball_volume(m.d) * r ** m.d * (1 - s / (6 * (m.d + 2)) * r * r)


# ---------------------------------------------------------------------------
# nets and sampling


def sphere_net(dim: int, radius: float, delta: float) -> np.ndarray:
    """A ``delta``-net (geodesic) of the sphere S^dim of the given radius.

    Points are returned as ambient coordinates in R^(dim+1).  Polar angle
    bands are spaced so a meridian step costs at most ``delta/2``; each band
    carries a ``delta/2``-net of its latitude sphere, so any point reaches a
    net point along a path of length at most ``delta``.
    """
    if radius <= 1e-15 * max(delta, 1.0):
        return np.zeros((1, dim + 1))
    if dim == 0:
        return np.array([[radius], [-radius]])
    if dim == 1:
        # equally spaced angles: arc gaps of at most delta
        count = max(2, math.ceil(2 * math.pi * radius / delta))
        ang = 2 * math.pi * np.arange(count) / count
        return radius * np.column_stack([np.cos(ang), np.sin(ang)])
    if math.pi * radius <= delta:
        pt = np.zeros((1, dim + 1))
        pt[0, 0] = radius
        return pt
    J = math.ceil(math.pi * radius / delta)
    rows = []
    for j in range(J + 1):
        theta = math.pi * j / J
        sub_r = radius * math.sin(theta)
        if j in (0, J) or sub_r <= 1e-12 * radius:
            pt = np.zeros((1, dim + 1))
            pt[0, 0] = radius * math.cos(theta)
            rows.append(pt)
            continue
        sub = sphere_net(dim - 1, sub_r, delta / 2)
        rows.append(np.column_stack([np.full(len(sub), radius * math.cos(theta)), sub]))
    return np.vstack(rows)


def tangent_annulus_net(d: int, r_inner: float, r_outer: float, delta: float) -> np.ndarray:
    """Polar ``delta``-net of the annulus ``r_inner <= |v| <= r_outer`` in R^d."""
    if r_outer < r_inner or r_inner < 0:
        raise InvalidInputError("annulus needs 0 <= r_inner <= r_outer")
    width = r_outer - r_inner
    count = math.ceil(width / delta) if width > 0 else 0
    radii = [r_inner + width * i / count for i in range(count + 1)] if count else [r_inner]
    rows = []
    for t in radii:
        if d == 1:
            rows.append(np.array([[t], [-t]]) if t > 0 else np.zeros((1, 1)))
        else:
            rows.append(sphere_net(d - 1, t, delta / 2))
    return np.vstack(rows)


def build_net(m: ManifoldModel, delta: float, region=None) -> np.ndarray:
    """Deterministic ``delta``-net of ``m`` or of a geodesic annulus.

    ``region`` is ``(center, r_inner, r_outer)``.  Annulus nets are built in
    the tangent space at ``center`` and pushed through the exponential map,
    which does not increase distances on either model.
    """
    if not delta > 0:
        raise InvalidInputError("delta must be positive")
    if region is not None:
        center, r_in, r_out = region
        center = as_points(m, center)
        if r_out >= m.injectivity_radius:
            raise OutOfRegimeError("annulus exceeds the injectivity radius")
        V = tangent_annulus_net(m.d, float(r_in), float(r_out), delta)
        return exp_map(m, np.broadcast_to(center, (len(V), m.ambient_dim)), V)
    return _whole_net(m, float(delta)).copy()


@lru_cache(maxsize=16)
def _whole_net(m: ManifoldModel, delta: float) -> np.ndarray:
    if m.is_torus:
        L, d = m.scale, m.d
        per_axis = max(1, math.ceil(L * math.sqrt(d) / delta))
        axis = np.arange(per_axis) * (L / per_axis)
        grids = np.meshgrid(*([axis] * d), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)
    return sphere_net(m.d, m.scale, delta)


def uniform_sample(m: ManifoldModel, rng: np.random.Generator, size: int | None = None):
    """Uniform points with respect to the Riemannian volume."""
    shape = (1 if size is None else size, m.ambient_dim)
    if m.is_torus:
        pts = wrap(m, rng.random(shape) * m.scale)
    else:
        g = rng.standard_normal(shape)
        nrm = np.linalg.norm(g, axis=1, keepdims=True)
        pts = m.scale * g / nrm
    return pts[0] if size is None else pts
