"""Uniform cell grid for fixed-radius neighbor queries.

Torus points are binned on the periodic box with at least ``cell_size`` wide
cells, sphere points on an ambient cube grid (chord length never exceeds the
geodesic distance, so adjacent ambient cells suffice).
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .manifold import ManifoldModel, distance

# keep the number of ambient sphere cells bounded
_MAX_CELLS_PER_AXIS = 4096


class SpatialGrid:
    """Cell list over a point set; queries return all pairs within a radius.

    ``cell_size`` bounds the query radius: any query radius up to
    ``cell_size`` only needs the 3^D block of cells around a point.
    """

    def __init__(self, m: ManifoldModel, points: np.ndarray, cell_size: float):
        self.m = m
        self.points = np.asarray(points, dtype=float).reshape(-1, m.ambient_dim)
        self.cell_size = float(cell_size)
        D = m.ambient_dim
        if m.is_torus:
            per_axis = max(1, int(math.floor(m.scale / self.cell_size)))
            self.per_axis = min(per_axis, _MAX_CELLS_PER_AXIS)
            self.width = m.scale / self.per_axis
            self.origin = 0.0
        else:
            span = 2 * m.scale
            per_axis = max(1, int(math.ceil(span / self.cell_size)))
            self.per_axis = min(per_axis, _MAX_CELLS_PER_AXIS)
            self.width = max(span / self.per_axis, self.cell_size)
            self.origin = -m.scale
        self._radix = self.per_axis ** np.arange(D - 1, -1, -1)
        cells = self._cells(self.points)
        keys = cells @ self._radix if len(cells) else np.zeros(0, dtype=np.int64)
        self.order = np.argsort(keys, kind="stable")
        self.sorted_keys = keys[self.order]
        offsets = np.array(list(itertools.product((-1, 0, 1), repeat=D)), dtype=np.int64)
        self.offsets = offsets

    def _cells(self, x: np.ndarray) -> np.ndarray:
        c = np.floor((x - self.origin) / self.width).astype(np.int64)
        return np.clip(c, 0, self.per_axis - 1)

    def cell_of(self, i: int) -> tuple:
        return tuple(self._cells(self.points[i : i + 1])[0])

    def _candidates(self, queries: np.ndarray):
        """Candidate (query index, point index) pairs from neighboring cells."""
        Q = len(queries)
        if Q == 0 or len(self.points) == 0:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        qc = self._cells(queries)
        nb = qc[:, None, :] + self.offsets[None, :, :]
        if self.m.is_torus:
            nb = np.mod(nb, self.per_axis)
            valid = np.ones(nb.shape[:2], dtype=bool)
        else:
            valid = np.all((nb >= 0) & (nb < self.per_axis), axis=2)
            nb = np.clip(nb, 0, self.per_axis - 1)
        keys = nb @ self._radix
        keys = np.where(valid, keys, -1)
        # the same neighbor cell can repeat when there are fewer than 3 cells per axis
        keys.sort(axis=1)
        dup = np.zeros_like(valid)
        dup[:, 1:] = keys[:, 1:] == keys[:, :-1]
        valid = (keys >= 0) & ~dup
        qidx = np.broadcast_to(np.arange(Q)[:, None], keys.shape)[valid]
        keys = keys[valid]
        start = np.searchsorted(self.sorted_keys, keys, side="left")
        stop = np.searchsorted(self.sorted_keys, keys, side="right")
        cnt = stop - start
        total = int(cnt.sum())
        qi = np.repeat(qidx, cnt)
        base = np.repeat(start - (np.cumsum(cnt) - cnt), cnt)
        pj = self.order[np.arange(total) + base]
        return qi, pj

    def pairs_within(self, radius: float, chunk: int = 20000) -> tuple[np.ndarray, np.ndarray]:
        """All index pairs ``i < j`` with ``distance <= radius`` and the distances."""
        if radius > self.cell_size * (1 + 1e-12):
            raise ValueError("query radius exceeds the grid cell size")
        I, J, Dist = [], [], []
        N = len(self.points)
        for lo in range(0, N, chunk):
            qi, pj = self._candidates(self.points[lo : lo + chunk])
            qi = qi + lo
            keep = qi < pj
            qi, pj = qi[keep], pj[keep]
            dist = distance(self.m, self.points[qi], self.points[pj])
            ok = dist <= radius
            I.append(qi[ok])
            J.append(pj[ok])
            Dist.append(np.atleast_1d(dist)[ok])
        if not I:
            return np.zeros((0, 2), dtype=np.int64), np.zeros(0)
        i = np.concatenate(I)
        j = np.concatenate(J)
        dd = np.concatenate(Dist)
        order = np.lexsort((j, i))
        return np.stack([i[order], j[order]], axis=1), dd[order]

    def query(self, queries, radius: float, chunk: int = 20000):
        """Pairs ``(query index, point index)`` with distance ``<= radius``."""
        if radius > self.cell_size * (1 + 1e-12):
            raise ValueError("query radius exceeds the grid cell size")
        queries = np.asarray(queries, dtype=float).reshape(-1, self.m.ambient_dim)
        QI, PJ, Dist = [], [], []
        for lo in range(0, len(queries), chunk):
            qi, pj = self._candidates(queries[lo : lo + chunk])
            dist = np.atleast_1d(distance(self.m, queries[lo + qi], self.points[pj]))
            ok = dist <= radius
            QI.append(qi[ok] + lo)
            PJ.append(pj[ok])
            Dist.append(dist[ok])
        if not QI:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0)
        return np.concatenate(QI), np.concatenate(PJ), np.concatenate(Dist)

    def nearest_distance(self, queries, radius: float) -> np.ndarray:
        """Distance from each query to the nearest point, or inf beyond ``radius``."""
        queries = np.asarray(queries, dtype=float).reshape(-1, self.m.ambient_dim)
        out = np.full(len(queries), np.inf)
        qi, _, dist = self.query(queries, radius)
        np.minimum.at(out, qi, dist)
        return out
