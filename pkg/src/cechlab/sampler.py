"""Homogeneous Poisson processes with reproducible seeding."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .manifold import ManifoldModel, as_points, uniform_sample

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """The SplitMix64 output finalizer, a bijection on 64-bit integers."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def subtrial_seed(master_seed: int, trial_index: int) -> int:
    """Seed for trial ``trial_index`` of a run seeded with ``master_seed``.

    The counter ``master + i * gamma`` is injective in ``i`` modulo 2^64
    because ``gamma`` is odd, and the finalizer is a bijection, so distinct
    indices below 2^64 never collide for a fixed master seed.
    """
    return splitmix64((int(master_seed) + int(trial_index) * GOLDEN_GAMMA) & MASK64)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & MASK64))


def _poisson_inversion(lam: float, rng: np.random.Generator) -> int:
    u = rng.random()
    k = 0
    p = math.exp(-lam)
    cdf = p
    while u > cdf and k < 10_000:
        k += 1
        p *= lam / k
        cdf += p
    return k


def _poisson_ptrs(lam: float, rng: np.random.Generator) -> int:
    # transformed rejection with squeeze (Hormann 1993)
    slam = math.sqrt(lam)
    loglam = math.log(lam)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    invalpha = 1.1239 + 1.1328 / (b - 3.4)
    vr = 0.9277 - 3.6224 / (b - 2)
    while True:
        U = rng.random() - 0.5
        V = rng.random()
        us = 0.5 - abs(U)
        k = math.floor((2 * a / us + b) * U + lam + 0.43)
        if us >= 0.07 and V <= vr:
            return k
        if k < 0 or (us < 0.013 and V > us):
            continue
        lhs = math.log(V) + math.log(invalpha) - math.log(a / (us * us) + b)
        if lhs <= -lam + k * loglam - math.lgamma(k + 1):
            return k


def poisson_variate(lam: float, rng: np.random.Generator) -> int:
    """One Poisson(lam) draw: inversion below 30, PTRS rejection above."""
    if lam < 0 or not math.isfinite(lam):
        raise InvalidInputError(f"Poisson mean must be finite and >= 0, got {lam}")
    if lam == 0:
        return 0
    if lam < 30:
        return _poisson_inversion(lam, rng)
    return _poisson_ptrs(lam, rng)


@dataclass
class PointCloud:
    manifold: ManifoldModel
    points: np.ndarray
    intensity_n: float
    seed: int | None = None
    label: str = field(default="")
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, self.manifold.ambient_dim)
        self.points = as_points(self.manifold, pts)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def cloud_id(self) -> str:
        if self.label:
            return self.label
        return f"{self.manifold.describe()}:n={self.intensity_n:g}:seed={self.seed}"

    def to_csv(self, fh=None) -> str | None:
        return write_cloud_csv(self.points, fh)


def poisson_process(m: ManifoldModel, n: float, seed: int) -> PointCloud:
    """A realization of the Poisson process with intensity ``n`` on ``m``.

    The total count is Poisson(n) and the points are i.i.d. uniform, so counts
    in disjoint regions are independent Poisson variables.
    """
    if not n > 0 or not math.isfinite(n):
        raise InvalidInputError(f"intensity must be positive, got {n}")
    rng = make_rng(seed)
    count = poisson_variate(float(n), rng)
    pts = uniform_sample(m, rng, count) if count else np.zeros((0, m.ambient_dim))
    return PointCloud(m, pts, float(n), int(seed) & MASK64)


def fixed_cloud(m: ManifoldModel, points, label: str = "") -> PointCloud:
    """Wrap explicit coordinates as a cloud (for constructions and tests)."""
    pts = np.asarray(points, dtype=float).reshape(-1, m.ambient_dim)
    return PointCloud(m, pts, float(len(pts)), None, label)


def write_cloud_csv(points: np.ndarray, fh=None) -> str | None:
    """Write points as CSV with header ``x0,...``; returns text if ``fh`` is None."""
    points = np.asarray(points, dtype=float)
    out = io.StringIO() if fh is None else fh
    ncol = points.shape[1] if points.ndim == 2 else 0
    out.write(",".join(f"x{i}" for i in range(ncol)) + "\n")
    for row in points:
        out.write(",".join("%.17g" % v for v in row) + "\n")
    return out.getvalue() if fh is None else None


def read_cloud_csv(m: ManifoldModel, fh) -> PointCloud:
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None or len(header) != m.ambient_dim:
        raise InvalidInputError(f"expected {m.ambient_dim} columns in point CSV")
    rows = [[float(v) for v in row] for row in reader if row]
    return fixed_cloud(m, rows)
