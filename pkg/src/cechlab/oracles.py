"""Slow, independent reference implementations used to cross-check the library.

Nothing here shares code with the production paths beyond point validation:
enclosing balls use Welzl's move-to-front recursion on least-squares
circumballs, complexes enumerate every vertex subset, homology uses dense
elimination, and critical points are decided with a linear program.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linprog

# enclosure slack, relative to the ball radius
_TOL = 1e-10


def torus_lift(Y: np.ndarray, L: float) -> np.ndarray:
    """Choose, for every point, the periodic image closest to the first point."""
    d = Y.shape[1]
    shifts = np.array(list(itertools.product((-1, 0, 1), repeat=d)), dtype=float) * L
    out = [Y[0]]
    for y in Y[1:]:
        cands = y + shifts
        out.append(cands[np.argmin(np.linalg.norm(cands - Y[0], axis=1))])
    return np.array(out)


def _geo(kind: str, R: float, a: np.ndarray, b: np.ndarray) -> float:
    if kind == "torus":
        return float(np.linalg.norm(a - b))
    cosang = np.clip(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)), -1.0, 1.0)
    return float(R * math.acos(cosang))


def ball_through(kind: str, R: float, S: np.ndarray):
    """Smallest ball with all points of ``S`` on its boundary, as (flat center, radius)."""
    p0 = S[0]
    if len(S) == 1:
        return p0.copy(), 0.0
    A = S[1:] - p0
    rhs = 0.5 * np.sum(A * A, axis=1)
    x, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    c = p0 + x
    if kind == "torus":
        return c, float(np.linalg.norm(x))
    nc = np.linalg.norm(c)
    if nc < 1e-12:
        return None
    c = R * c / nc
    return c, _geo(kind, R, c, p0)


def welzl(kind: str, R: float, P: list, support: list = ()):
    """Minimal enclosing ball of ``P`` with ``support`` on the boundary."""
    support = list(support)
    dmax = len(P[0]) if P else (len(support[0]) if support else 0)
    if not P or len(support) == (dmax if kind == "torus" else dmax - 1) + 1:
        if not support:
            return None
        return ball_through(kind, R, np.array(support))
    p = P[0]
    ball = welzl(kind, R, P[1:], support)
    if ball is not None and _geo(kind, R, ball[0], p) <= ball[1] * (1 + _TOL) + 1e-15:
        return ball
    return welzl(kind, R, P[1:], support + [p])


def miniball_radius(kind: str, scale: float, Y: np.ndarray) -> float:
    Y = np.asarray(Y, dtype=float)
    if kind == "torus":
        Y = torus_lift(Y, scale)
    ball = welzl(kind, scale, [y for y in Y])
    return ball[1]


def pair_distance(kind: str, scale: float, a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if kind == "torus":
        diff = np.abs(a - b)
        diff = np.minimum(diff, scale - diff)
        return float(np.linalg.norm(diff))
    return _geo(kind, scale, a, b)


def brute_force_complex(kind: str, scale: float, pts: np.ndarray, r: float, dim_cap: int) -> set:
    """Every vertex subset with enclosing radius <= r, up to ``dim_cap + 1`` vertices."""
    n = len(pts)
    close = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            close[i, j] = pair_distance(kind, scale, pts[i], pts[j]) <= 2 * r
    out = {(i,) for i in range(n)}
    for size in range(2, dim_cap + 2):
        for sub in itertools.combinations(range(n), size):
            if not all(close[a, b] for a, b in itertools.combinations(sub, 2)):
                continue
            if miniball_radius(kind, scale, pts[list(sub)]) <= r:
                out.add(sub)
    return out


def gf2_rank(mat: np.ndarray) -> int:
    """Rank over GF(2) by row reduction of a 0/1 matrix."""
    A = (np.asarray(mat) % 2).astype(np.uint8).copy()
    rows, cols = A.shape
    rank = 0
    for c in range(cols):
        pivot = None
        for r in range(rank, rows):
            if A[r, c]:
                pivot = r
                break
        if pivot is None:
            continue
        A[[rank, pivot]] = A[[pivot, rank]]
        below = np.nonzero(A[:, c])[0]
        for r in below:
            if r != rank:
                A[r] ^= A[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def dense_betti(simplices: set, top: int) -> tuple:
    """Betti numbers 0..top of a face-closed set of vertex tuples."""
    by_dim = [sorted(s for s in simplices if len(s) == k + 1) for k in range(top + 2)]
    index = [{s: i for i, s in enumerate(block)} for block in by_dim]
    ranks = [0] * (top + 2)
    for k in range(1, top + 1):
        M = np.zeros((len(by_dim[k - 1]), len(by_dim[k])), dtype=np.uint8)
        for j, s in enumerate(by_dim[k]):
            for face in itertools.combinations(s, k):
                M[index[k - 1][face], j] = 1
        ranks[k] = gf2_rank(M) if M.size else 0
    return tuple(len(by_dim[k]) - ranks[k] - ranks[k + 1] for k in range(top + 1))


def _origin_in_hull_lp(V: np.ndarray) -> bool:
    """Feasibility of λ >= 0, Σλ = 1, Σ λ_i v_i = 0."""
    s, dim = V.shape
    A_eq = np.vstack([V.T, np.ones((1, s))])
    b_eq = np.concatenate([np.zeros(dim), [1.0]])
    res = linprog(np.zeros(s), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * s, method="highs")
    return res.status == 0


def brute_force_critical(kind: str, scale: float, pts: np.ndarray, k: int, r_lo: float,
                         r_hi: float) -> list:
    """All index-k critical points with radius in (r_lo, r_hi], by exhaustive search."""
    out = []
    n = len(pts)
    for sub in itertools.combinations(range(n), k + 1):
        Y = pts[list(sub)]
        if kind == "torus":
            Y = torus_lift(Y, scale)
        if any(pair_distance(kind, scale, a, b) > 2 * r_hi for a, b in itertools.combinations(Y, 2)):
            continue
        ball = ball_through(kind, scale, Y)
        if ball is None:
            continue
        c, rho = ball
        if kind == "torus":
            # affinely dependent sets give inconsistent least-squares centers
            if max(abs(np.linalg.norm(y - c) - rho) for y in Y) > 1e-9:
                continue
        elif max(abs(_geo(kind, scale, c, y) - rho) for y in Y) > 1e-9:
            continue
        if not r_lo < rho <= r_hi:
            continue
        others = [i for i in range(n) if i not in sub]
        c_wrapped = np.mod(c, scale) if kind == "torus" else c
        if any(pair_distance(kind, scale, c_wrapped, pts[i]) <= rho - 1e-12 for i in others):
            continue
        if kind == "torus":
            V = Y - c
        else:
            chat = c / np.linalg.norm(c)
            V = Y - np.outer(Y @ chat, chat)
        if not _origin_in_hull_lp(V):
            continue
        out.append((sub, rho, c_wrapped))
    return out
