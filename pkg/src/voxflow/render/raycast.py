"""Backend dispatch for per-pixel ray casting against a mesh."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._kernels import active_backend, native_module
from .._kernels import raycast_py
from ..errors import InvalidArgumentError
from ..geometry.camera import PinholeCamera
from ..geometry.mesh import TriangleMesh
from .bvh import build_bvh

_Z_EPS = 1e-6


@dataclass(frozen=True)
class RaycastResult:
    """Per-pixel first hit: ray parameter (= camera z-depth), triangle, barycentrics."""

    t: np.ndarray          # (h, w) f64, inf where the ray misses
    triangle: np.ndarray   # (h, w) i32, -1 where the ray misses
    bary_u: np.ndarray     # (h, w) weight of the triangle's second vertex
    bary_v: np.ndarray     # (h, w) weight of the third vertex

    @property
    def hit(self) -> np.ndarray:
        return self.triangle >= 0


def triangle_constants(vertices: np.ndarray, triangles: np.ndarray, origin: np.ndarray):
    """Per-triangle intersection constants, shared by both backends.

    Componentwise expressions only: both kernels must consume numerically
    identical values.
    """
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    e1 = b - a
    e2 = c - a
    tvec = origin - a
    q = np.empty_like(e1)
    q[:, 0] = tvec[:, 1] * e1[:, 2] - tvec[:, 2] * e1[:, 1]
    q[:, 1] = tvec[:, 2] * e1[:, 0] - tvec[:, 0] * e1[:, 2]
    q[:, 2] = tvec[:, 0] * e1[:, 1] - tvec[:, 1] * e1[:, 0]
    tq = e2[:, 0] * q[:, 0] + e2[:, 1] * q[:, 1] + e2[:, 2] * q[:, 2]
    return (
        np.ascontiguousarray(e1),
        np.ascontiguousarray(e2),
        np.ascontiguousarray(tvec),
        np.ascontiguousarray(q),
        np.ascontiguousarray(tq),
    )


def _pixel_bounds(mesh: TriangleMesh, camera: PinholeCamera) -> np.ndarray:
    """Half-open candidate rectangles [j0, j1, i0, i1) per triangle.

    A pixel can only hit a triangle if its center lies inside the projected
    triangle, so the projected bounding box plus a one-pixel guard band is a
    safe superset. Triangles touching the camera plane get the full frame.
    """
    u, v, z = camera.project(mesh.vertices)
    tri = mesh.triangles
    tu, tv_, tz = u[tri], v[tri], z[tri]
    unsafe = np.any(tz < _Z_EPS, axis=1)
    with np.errstate(invalid="ignore"):
        j0 = np.floor(tu.min(axis=1)).astype(np.int64) - 1
        j1 = np.ceil(tu.max(axis=1)).astype(np.int64) + 2
        i0 = np.floor(tv_.min(axis=1)).astype(np.int64) - 1
        i1 = np.ceil(tv_.max(axis=1)).astype(np.int64) + 2
    j0 = np.clip(np.where(unsafe, 0, j0), 0, camera.width)
    j1 = np.clip(np.where(unsafe, camera.width, j1), 0, camera.width)
    i0 = np.clip(np.where(unsafe, 0, i0), 0, camera.height)
    i1 = np.clip(np.where(unsafe, camera.height, i1), 0, camera.height)
    return np.stack([j0, j1, i0, i1], axis=1)


def cast_rays(mesh: TriangleMesh, camera: PinholeCamera, backend: str | None = None) -> RaycastResult:
    """First-hit ray cast of every pixel; both backends agree bit for bit."""
    origin, dirs = camera.pixel_rays()
    dirs = np.ascontiguousarray(dirs)
    if backend is None:
        backend = active_backend()
    if backend not in ("compiled", "python"):
        raise InvalidArgumentError(f"unknown raycast backend {backend!r}")
    if backend == "compiled" and native_module() is None:
        raise InvalidArgumentError("compiled backend requested but not built")
    if mesh.n_triangles == 0:
        h, w = camera.height, camera.width
        return RaycastResult(
            np.full((h, w), np.inf), np.full((h, w), -1, np.int32),
            np.zeros((h, w)), np.zeros((h, w)),
        )
    const = triangle_constants(mesh.vertices, mesh.triangles, origin)
    if backend == "compiled":
        bvh = build_bvh(mesh.vertices, mesh.triangles)
        t, tri, bu, bv = native_module().raycast_bvh(
            bvh.node_min, bvh.node_max, bvh.left, bvh.right, bvh.start, bvh.count,
            bvh.order, *const, np.ascontiguousarray(origin), dirs,
        )
    else:
        bounds = _pixel_bounds(mesh, camera)
        t, tri, bu, bv = raycast_py.raycast(const, dirs, bounds)
    return RaycastResult(t, tri, bu, bv)
