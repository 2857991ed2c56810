"""Delaunay–Čech subcomplexes on the torus and the sphere.

The Delaunay–Čech complex keeps the Delaunay simplices whose enclosing-ball
radius is ``<= r``.  For points in general position it collapses onto the
same homotopy type as the Čech complex while having O(N) simplices, which is
what makes Monte Carlo sweeps at ``n = 10^4`` affordable.

Torus triangulations are computed on a padded copy of the cloud (periodic
images within a margin of the unit cell); every simplex touching the cell
must have its circumball inside the padded region, otherwise the margin
grows.  Sphere triangulations are the facets of the convex hull.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.spatial import ConvexHull, Delaunay, QhullError

from .cech import CechComplex, _empty, build_complex
from .manifold import ManifoldModel, _affine_circumcenter, lift, miniball_radii
from .sampler import PointCloud

# below this many points the padded triangulation is not worth certifying
_MIN_POINTS = 32


def _faces(top: np.ndarray, k: int) -> np.ndarray:
    """All k-faces of the rows of ``top`` (sorted rows, deduplicated)."""
    cols = list(itertools.combinations(range(top.shape[1]), k + 1))
    faces = np.concatenate([top[:, list(c)] for c in cols])
    faces.sort(axis=1)
    return np.unique(faces, axis=0)


def torus_delaunay(m: ManifoldModel, points: np.ndarray, margin: float):
    """Top-dimensional periodic Delaunay simplices as sorted index rows.

    Returns ``None`` when no certified triangulation exists within a full
    ring of periodic images.
    """
    L, d = m.scale, m.d
    n = len(points)
    while True:
        margin = min(margin, L)
        copies, index = [], []
        for shift in itertools.product((-1, 0, 1), repeat=d):
            q = points + L * np.array(shift, dtype=float)
            keep = np.all((q >= -margin) & (q < L + margin), axis=1)
            copies.append(q[keep])
            index.append(np.nonzero(keep)[0])
        Q = np.concatenate(copies)
        idx = np.concatenate(index)
        try:
            tri = Delaunay(Q)
        except QhullError:
            return None
        simp = tri.simplices
        inside = np.all((Q >= 0) & (Q < L), axis=1)
        touch = inside[simp].any(axis=1)
        simp = simp[touch]
        center, _, valid = _affine_circumcenter(Q[simp])
        rad = np.linalg.norm(center - Q[simp[:, 0]], axis=1)
        lo = center - rad[:, None]
        hi = center + rad[:, None]
        certified = valid.all() and np.all(lo >= -margin) and np.all(hi <= L + margin)
        if certified:
            rows = np.sort(idx[simp], axis=1)
            # a point adjacent to its own image cannot be a Čech simplex
            distinct = np.all(np.diff(rows, axis=1) > 0, axis=1)
            return np.unique(rows[distinct], axis=0)
        if margin >= L:
            return None
        margin *= 2


def sphere_delaunay(m: ManifoldModel, points: np.ndarray):
    """Spherical Delaunay simplices as convex-hull facets, or ``None``.

    Facets are Delaunay simplices exactly when the hull contains the
    center of the sphere strictly inside, so that every facet cuts off a
    cap smaller than a hemisphere.
    """
    try:
        hull = ConvexHull(points)
    except QhullError:
        return None
    if not np.all(hull.equations[:, -1] < -1e-12 * m.scale):
        return None
    if len(hull.vertices) != len(points):
        return None
    return np.unique(np.sort(hull.simplices, axis=1), axis=0)


def delaunay_top(cloud: PointCloud):
    """Top-dimensional Delaunay simplices of the cloud, cached on the cloud."""
    if "delaunay_top" in cloud.cache:
        return cloud.cache["delaunay_top"]
    m = cloud.manifold
    pts = cloud.points
    top = None
    if len(pts) >= max(_MIN_POINTS, m.d + 2):
        if m.is_torus:
            top = torus_delaunay(m, pts, margin=0.1 * m.scale)
        else:
            top = sphere_delaunay(m, pts)
    cloud.cache["delaunay_top"] = top
    return top


def delaunay_cech_complex(cloud: PointCloud, r: float, dim_cap: int) -> CechComplex:
    m = cloud.manifold
    pts = cloud.points
    n = len(pts)
    top = delaunay_top(cloud)
    if top is None:
        cx = build_complex(cloud, r, dim_cap, method="cech")
        cx.meta["fallback"] = True
        return cx
    cx = _empty(m, r, dim_cap, cloud.cloud_id, n, method="delaunay")
    for k in range(1, min(dim_cap, m.d) + 1):
        faces = _faces(top, k)
        rad = miniball_radii(m, lift(m, pts[faces]))
        ok = rad <= r
        cx.simplices[k] = faces[ok]
        cx.radii[k] = rad[ok]
    return cx


def delaunay_faces(cloud: PointCloud, k: int):
    """All k-faces of the Delaunay triangulation, or ``None`` if unavailable."""
    if k > cloud.manifold.d:
        return None
    top = delaunay_top(cloud)
    if top is None:
        return None
    return _faces(top, k)
