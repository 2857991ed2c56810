"""Betti numbers over GF(2) by boundary-matrix column reduction.

Columns start as sets of row positions and turn into Python-int bitsets
when fill-in makes them long.  Simplices are ordered by enclosing radius so that the reduction follows the filtration,
which keeps columns short, and dimensions are reduced top-down so the
pivots of one dimension clear columns of the next ("twist").  The rank of
the edge boundary is computed with union-find.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cech import CechComplex, f_vector
from .errors import InsufficientDimensionError, InvalidComplexError, InvariantError
from .manifold import ManifoldModel

# running audit of the Euler–Poincaré identity over every computation
AUDIT = {"complexes": 0, "failures": 0}


@dataclass
class BoundaryMatrix:
    """Boundary of dimension ``k``: column j lists the face rows of simplex j."""

    k: int
    columns: list
    n_rows: int

    def dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, len(self.columns)), dtype=np.uint8)
        for j, col in enumerate(self.columns):
            out[list(col), j] = 1
        return out


@dataclass
class BettiVector:
    betti: tuple
    euler: int
    trusted_upto: int

    def trusted(self) -> tuple:
        return self.betti[: self.trusted_upto + 1]

    def __getitem__(self, k):
        return self.betti[k]

    def __len__(self):
        return len(self.betti)


def _encoder(n: int, width: int):
    """Injective int64 encoding of sorted index rows, or None if too wide."""
    base = max(n, 1)
    if width * math.log2(base + 1) >= 62:
        return None
    powers = base ** np.arange(width - 1, -1, -1, dtype=np.int64)
    return lambda rows: rows.astype(np.int64) @ powers


def _face_lookup(faces: np.ndarray, simplices: np.ndarray, n: int) -> np.ndarray:
    """Row positions in ``faces`` of every facet of every simplex.

    Returns an array of shape ``(len(simplices), k + 1)``; raises
    :class:`InvalidComplexError` when a facet is missing.
    """
    k1 = simplices.shape[1]
    drop = [[c for c in range(k1) if c != i] for i in range(k1)]
    enc = _encoder(n, k1 - 1)
    out = np.empty((len(simplices), k1), dtype=np.int64)
    if enc is not None:
        fkeys = enc(faces)
        order = np.argsort(fkeys, kind="stable")
        skeys = fkeys[order]
        for i, cols in enumerate(drop):
            key = enc(simplices[:, cols])
            pos = np.minimum(np.searchsorted(skeys, key), max(len(skeys) - 1, 0))
            if len(skeys) == 0 or np.any(skeys[pos] != key):
                raise InvalidComplexError(f"complex is not closed under faces (dim {k1 - 1})")
            out[:, i] = order[pos]
        return out
    table = {tuple(row): i for i, row in enumerate(faces.tolist())}
    for j, row in enumerate(simplices.tolist()):
        for i, cols in enumerate(drop):
            key = tuple(row[c] for c in cols)
            if key not in table:
                raise InvalidComplexError(f"missing face {key} of simplex {tuple(row)}")
            out[j, i] = table[key]
    return out


def _check_rows(cx: CechComplex) -> None:
    for k, block in enumerate(cx.simplices):
        if len(block) == 0:
            continue
        if block.ndim != 2 or block.shape[1] != k + 1:
            raise InvalidComplexError(f"dimension {k} block has wrong shape {block.shape}")
        if k and np.any(np.diff(block, axis=1) <= 0):
            raise InvalidComplexError(f"dimension {k} simplices must be strictly increasing")
        if len(np.unique(block, axis=0)) != len(block):
            raise InvalidComplexError(f"duplicate simplices in dimension {k}")
    if cx.simplices and len(cx.simplices) > 1:
        n = cx.n_vertices
        for block in cx.simplices[1:]:
            if len(block) and (block.min() < 0 or block.max() >= n):
                raise InvalidComplexError("simplex refers to a missing vertex")


def _filtration_order(cx: CechComplex, k: int) -> np.ndarray:
    block = cx.simplices[k]
    radii = cx.radii[k] if k < len(cx.radii) and len(cx.radii[k]) == len(block) else None
    if radii is None or len(block) == 0:
        return np.arange(len(block))
    keys = [block[:, c] for c in range(block.shape[1] - 1, -1, -1)] + [radii]
    return np.lexsort(keys)


def boundary_matrix(cx: CechComplex, k: int) -> BoundaryMatrix:
    """Boundary of dimension ``k`` with rows and columns in stored order."""
    if k <= 0 or k >= len(cx.simplices):
        n_rows = len(cx.simplices[k - 1]) if 0 < k <= len(cx.simplices) else 0
        return BoundaryMatrix(k, [], n_rows)
    rows = _face_lookup(cx.simplices[k - 1], cx.simplices[k], cx.n_vertices)
    return BoundaryMatrix(k, [tuple(sorted(r)) for r in rows.tolist()], len(cx.simplices[k - 1]))


def _components(n: int, edges: np.ndarray) -> int:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    count = n
    for a, b in edges.tolist():
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            count -= 1
    return count


_DENSE_AT = 48


def _as_bits(col) -> int:
    if isinstance(col, int):
        return col
    bits = 0
    for rr in col:
        bits |= 1 << rr
    return bits


def _reduce_rank(columns, skip) -> tuple[int, set]:
    """Rank of a GF(2) matrix given as row-index columns; returns pivot rows too.

    Short columns are row sets and switch to Python-int bitsets once fill-in
    makes them long.  Only pivot columns are kept, so memory follows the rank
    and the fill-in rather than the number of rows.
    """
    pivot_col = {}
    for j, rows in enumerate(columns):
        if j in skip:
            continue
        col = set(rows)
        while col:
            low = col.bit_length() - 1 if isinstance(col, int) else max(col)
            other = pivot_col.get(low)
            if other is None:
                pivot_col[low] = col
                break
            if isinstance(col, set) and isinstance(other, set):
                col ^= other
                if len(col) > _DENSE_AT:
                    col = _as_bits(col)
            else:
                col = _as_bits(col) ^ _as_bits(other)
    return len(pivot_col), set(pivot_col)


def boundary_ranks(cx: CechComplex) -> list:
    """``rank[k]`` of the boundary map from dimension k to k-1 (rank[0] = 0)."""
    _check_rows(cx)
    top = len(cx.simplices) - 1
    while top > 0 and len(cx.simplices[top]) == 0:
        top -= 1
    ranks = [0] * (len(cx.simplices) + 1)
    cleared: set = set()
    for k in range(top, 1, -1):
        faces_pos = _face_lookup(cx.simplices[k - 1], cx.simplices[k], cx.n_vertices)
        row_order = _filtration_order(cx, k - 1)
        row_rank = np.empty(len(row_order), dtype=np.int64)
        row_rank[row_order] = np.arange(len(row_order))
        col_order = _filtration_order(cx, k)
        col_rows = row_rank[faces_pos[col_order]]
        # columns that are pivots of the dimension above reduce to zero
        skip = {j for j in range(len(col_order)) if int(col_order[j]) in cleared}
        rank, pivots = _reduce_rank(col_rows.tolist(), skip)
        ranks[k] = rank
        cleared = {int(row_order[p]) for p in pivots}
    if top >= 1:
        _face_lookup(cx.simplices[0], cx.simplices[1], cx.n_vertices)
        ranks[1] = cx.n_vertices - _components(cx.n_vertices, cx.simplices[1])
    return ranks


def betti_numbers(cx: CechComplex) -> BettiVector:
    """β_k = f_k − rank ∂_k − rank ∂_{k+1} for k = 0..dim_cap.

    β_{dim_cap} misses the boundary from dimension dim_cap + 1 and is
    reported but not trusted.
    """
    ranks = boundary_ranks(cx)
    dims = len(cx.simplices)
    f = [len(b) for b in cx.simplices]
    betti = tuple(f[k] - ranks[k] - ranks[k + 1] for k in range(dims))
    euler = sum((-1) ** k * fk for k, fk in enumerate(f))
    AUDIT["complexes"] += 1
    if any(b < 0 for b in betti) or sum((-1) ** k * b for k, b in enumerate(betti)) != euler:
        AUDIT["failures"] += 1
        raise InvariantError(f"Euler–Poincaré identity fails: f={f} betti={betti}")
    # β_{dim_cap} is exact only when nothing can exist one dimension higher
    top_empty = f[-1] == 0 if f else True
    delaunay_full = cx.method == "delaunay" and cx.dim_cap >= cx.manifold.d
    trusted = dims - 1 if (top_empty or delaunay_full) else dims - 2
    return BettiVector(betti, euler, max(trusted, -1))


def manifold_betti(m: ManifoldModel) -> BettiVector:
    if m.is_torus:
        betti = tuple(math.comb(m.d, k) for k in range(m.d + 1))
    else:
        betti = tuple(1 if k in (0, m.d) else 0 for k in range(m.d + 1))
    euler = sum((-1) ** k * b for k, b in enumerate(betti))
    return BettiVector(betti, euler, m.d)


def homology_match(cx: CechComplex, m: ManifoldModel, k: int, betti: BettiVector | None = None) -> bool:
    """Whether β_k of the complex equals β_k of the manifold."""
    if k < 0 or k >= cx.dim_cap:
        raise InsufficientDimensionError(f"β_{k} needs dim_cap > {k}, have {cx.dim_cap}")
    if betti is None:
        betti = betti_numbers(cx)
    mb = manifold_betti(m).betti
    target = mb[k] if k < len(mb) else 0
    return betti.betti[k] == target


def homology_matches(betti: BettiVector, m: ManifoldModel) -> list:
    """Match flags for k = 0..d given trusted Betti numbers."""
    mb = manifold_betti(m).betti
    return [betti.betti[k] == mb[k] if k < len(betti.betti) else False for k in range(m.d + 1)]
