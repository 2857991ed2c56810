"""Čech complexes of point clouds at a single radius.

A simplex is kept when the minimal enclosing geodesic ball of its vertices
has radius ``<= r`` (closed balls).  Candidates come from ordered clique
expansion on the ``2r`` neighbor graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, OutOfRegimeError
from .grid import SpatialGrid
from .manifold import ManifoldModel, lift, miniball_radii
from .sampler import PointCloud

# candidate simplices processed per miniball batch
_BATCH = 200_000


@dataclass
class CechComplex:
    """Simplices per dimension as lexicographically sorted index arrays.

    ``simplices[k]`` has shape ``(f_k, k + 1)`` with strictly increasing
    rows; ``radii[k]`` holds the enclosing-ball radius of each simplex.
    """

    manifold: ManifoldModel
    r: float
    dim_cap: int
    simplices: list
    radii: list
    cloud_id: str = ""
    method: str = "cech"
    meta: dict = field(default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return len(self.simplices[0]) if self.simplices else 0

    def f_vector(self) -> tuple:
        return f_vector(self)

    def simplex_set(self, k: int) -> set:
        if k >= len(self.simplices):
            return set()
        return {tuple(int(v) for v in row) for row in self.simplices[k]}

    def all_simplices(self) -> set:
        out = set()
        for k in range(len(self.simplices)):
            out |= self.simplex_set(k)
        return out

    def to_text(self) -> str:
        lines = []
        for block in self.simplices:
            lines.extend(" ".join(str(int(v)) for v in row) for row in block)
        return "\n".join(lines) + ("\n" if lines else "")


def f_vector(cx: CechComplex) -> tuple:
    """Simplex counts per dimension, trailing empty dimensions dropped."""
    counts = [len(block) for block in cx.simplices]
    while counts and counts[-1] == 0:
        counts.pop()
    return tuple(counts)


def euler_characteristic(cx: CechComplex) -> int:
    return sum((-1) ** k * f for k, f in enumerate(f_vector(cx)))


def check_radius(m: ManifoldModel, r: float) -> None:
    if not 0 < r <= m.convexity_radius:
        raise OutOfRegimeError(
            f"radius {r} outside (0, {m.convexity_radius:g}] for {m.describe()}"
        )


def _empty(m, r, dim_cap, cloud_id, n=0, method="cech"):
    simplices = [np.arange(n, dtype=np.int64).reshape(-1, 1)] + [
        np.zeros((0, k + 1), dtype=np.int64) for k in range(1, dim_cap + 1)
    ]
    radii = [np.zeros(n)] + [np.zeros(0) for _ in range(dim_cap)]
    return CechComplex(m, r, dim_cap, simplices, radii, cloud_id, method)


def edge_keys(edges: np.ndarray, n: int) -> np.ndarray:
    return edges[:, 0].astype(np.int64) * n + edges[:, 1]


def neighbor_graph(m: ManifoldModel, points: np.ndarray, r: float):
    """Edges ``i < j`` with distance ``<= 2r`` and their distances."""
    grid = SpatialGrid(m, points, 2 * r)
    return grid.pairs_within(2 * r)


def _expand(m, points, simplices, n, ekeys, up_ptr, up_idx):
    """Candidate (k+1)-cliques extending each k-simplex by a larger vertex."""
    k1 = simplices.shape[1]
    last = simplices[:, -1]
    cnt = up_ptr[last + 1] - up_ptr[last]
    total = int(cnt.sum())
    if total == 0:
        return np.zeros((0, k1 + 1), dtype=np.int64)
    rows = np.repeat(np.arange(len(simplices)), cnt)
    base = np.repeat(up_ptr[last] - (np.cumsum(cnt) - cnt), cnt)
    v = up_idx[np.arange(total) + base]
    ok = np.ones(total, dtype=bool)
    for col in range(k1 - 1):
        key = simplices[rows, col] * n + v
        pos = np.searchsorted(ekeys, key)
        pos = np.minimum(pos, len(ekeys) - 1)
        ok &= ekeys[pos] == key
    rows, v = rows[ok], v[ok]
    return np.column_stack([simplices[rows], v])


def build_complex(
    cloud: PointCloud, r: float, dim_cap: int | None = None, method: str = "cech"
) -> CechComplex:
    """Build ``C_r(cloud)`` up to dimension ``dim_cap`` (default ``d + 1``).

    ``method="cech"`` returns the full Čech complex.  ``method="delaunay"``
    returns its Delaunay–Čech subcomplex, which has the same homotopy type
    for points in general position and is far smaller at high density.
    """
    m = cloud.manifold
    check_radius(m, r)
    if dim_cap is None:
        dim_cap = m.d + 1
    if dim_cap < 0:
        raise InvalidInputError("dim_cap must be >= 0")
    if method == "delaunay":
        from .delaunay import delaunay_cech_complex

        return delaunay_cech_complex(cloud, r, dim_cap)
    if method != "cech":
        raise InvalidInputError(f"unknown complex method {method!r}")
    pts = cloud.points
    n = len(pts)
    cx = _empty(m, r, dim_cap, cloud.cloud_id, n)
    if n == 0 or dim_cap == 0:
        return cx
    edges, dist = neighbor_graph(m, pts, r)
    cx.simplices[1] = edges
    cx.radii[1] = dist / 2
    if dim_cap == 1 or len(edges) == 0:
        return cx
    ekeys = edge_keys(edges, n)
    # CSR of larger neighbors, edges are already sorted by (i, j)
    up_ptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(up_ptr, edges[:, 0] + 1, 1)
    up_ptr = np.cumsum(up_ptr)
    up_idx = edges[:, 1]
    current = edges
    for k in range(2, dim_cap + 1):
        kept, kept_r = [], []
        for lo in range(0, len(current), max(1, _BATCH // 8)):
            cand = _expand(m, pts, current[lo : lo + _BATCH // 8], n, ekeys, up_ptr, up_idx)
            for clo in range(0, len(cand), _BATCH):
                block = cand[clo : clo + _BATCH]
                rad = miniball_radii(m, lift(m, pts[block]))
                ok = rad <= r
                kept.append(block[ok])
                kept_r.append(rad[ok])
        if kept:
            current = np.concatenate(kept)
            cx.radii[k] = np.concatenate(kept_r)
        else:
            current = np.zeros((0, k + 1), dtype=np.int64)
        cx.simplices[k] = current
        if len(current) == 0:
            break
    return cx


def complex_from_simplices(m: ManifoldModel, simplices, r: float = 0.0, dim_cap=None):
    """Complex from explicit vertex tuples, closed under faces by the caller.

    Radii are set to zero; used for hand-built complexes and tests.
    """
    by_dim: dict = {}
    for s in simplices:
        t = tuple(sorted(int(v) for v in s))
        if len(set(t)) != len(t):
            raise InvalidInputError(f"repeated vertex in simplex {s}")
        by_dim.setdefault(len(t) - 1, set()).add(t)
    top = max(by_dim) if by_dim else 0
    if dim_cap is None:
        dim_cap = top + 1
    blocks, radii = [], []
    for k in range(dim_cap + 1):
        rows = sorted(by_dim.get(k, ()))
        arr = np.array(rows, dtype=np.int64).reshape(-1, k + 1)
        blocks.append(arr)
        radii.append(np.zeros(len(arr)))
    return CechComplex(m, r, dim_cap, blocks, radii, "explicit", "explicit")
