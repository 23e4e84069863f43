"""Numpy ray-cast backend (triangle-major).

Every arithmetic expression here is written componentwise in the exact shape
the compiled kernel uses, so both backends round identically and produce
bit-equal outputs. Do not replace the explicit products with np.dot/np.cross.
"""
from __future__ import annotations

import numpy as np

DET_EPS = 1e-12
T_MIN = 1e-9


def raycast(tri_const, dirs: np.ndarray, bounds=None):
    """Cast one ray per pixel against all triangles.

    tri_const: per-triangle constants from triangle_constants() (shared with
    the compiled backend). dirs: (h, w, 3) ray directions scaled so the ray
    parameter is camera z-depth. bounds: optional (n_tri, 4) int array of
    half-open pixel rectangles [j0, j1, i0, i1) limiting each triangle's
    candidate pixels; None tests every triangle against the full frame.

    Returns (t, tri, bu, bv): hit parameter (inf = miss), triangle id (-1 =
    miss), and the barycentric weights of the second and third vertices.
    """
    e1, e2, tvec, q, tq = tri_const
    h, w = dirs.shape[:2]
    best_t = np.full((h, w), np.inf)
    best_tri = np.full((h, w), -1, dtype=np.int32)
    best_u = np.zeros((h, w))
    best_v = np.zeros((h, w))

    dx, dy, dz = dirs[..., 0], dirs[..., 1], dirs[..., 2]
    n_tri = len(e1)
    for k in range(n_tri):
        if bounds is None:
            j0, j1, i0, i1 = 0, w, 0, h
        else:
            j0, j1, i0, i1 = bounds[k]
            if j0 >= j1 or i0 >= i1:
                continue
        sdx = dx[i0:i1, j0:j1]
        sdy = dy[i0:i1, j0:j1]
        sdz = dz[i0:i1, j0:j1]
        e1x, e1y, e1z = e1[k]
        e2x, e2y, e2z = e2[k]
        tx, ty, tz = tvec[k]
        qx, qy, qz = q[k]

        px = sdy * e2z - sdz * e2y
        py = sdz * e2x - sdx * e2z
        pz = sdx * e2y - sdy * e2x
        det = e1x * px + e1y * py + e1z * pz
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / det
            u = (tx * px + ty * py + tz * pz) * inv
            v = (sdx * qx + sdy * qy + sdz * qz) * inv
            t = tq[k] * inv
        ok = (
            (np.abs(det) >= DET_EPS)
            & (u >= 0.0)
            & (v >= 0.0)
            & (u + v <= 1.0)
            & (t > T_MIN)
        )
        win = ok & (t < best_t[i0:i1, j0:j1])
        if not np.any(win):
            continue
        best_t[i0:i1, j0:j1] = np.where(win, t, best_t[i0:i1, j0:j1])
        best_tri[i0:i1, j0:j1] = np.where(win, np.int32(k), best_tri[i0:i1, j0:j1])
        best_u[i0:i1, j0:j1] = np.where(win, u, best_u[i0:i1, j0:j1])
        best_v[i0:i1, j0:j1] = np.where(win, v, best_v[i0:i1, j0:j1])
    return best_t, best_tri, best_u, best_v
