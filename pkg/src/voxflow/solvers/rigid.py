"""Single rigid transform explaining partial surface motion."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateGeometryError, InvalidArgumentError
from ..geometry.mesh import TriangleMesh
from ..geometry.transforms import RigidTransform

_COLLINEAR_TOL = 1e-9


@dataclass(frozen=True)
class MotionCompletionProblem:
    """A mesh whose motion is known only at a subset of its vertices.

    visible holds vertex indices (unique, any order); visible_motion is the
    known 3-vector motion of those vertices in meters, aligned with visible.
    """

    mesh: TriangleMesh
    visible: np.ndarray
    visible_motion: np.ndarray

    def __post_init__(self):
        vis = np.asarray(self.visible, dtype=np.int64).reshape(-1)
        motion = np.asarray(self.visible_motion, dtype=np.float64).reshape(-1, 3)
        if len(vis) == 0:
            raise InvalidArgumentError("at least one visible vertex is required")
        if len(vis) != len(motion):
            raise InvalidArgumentError(
                f"{len(vis)} visible indices but {len(motion)} motion vectors"
            )
        if vis.min() < 0 or vis.max() >= self.mesh.n_vertices:
            raise InvalidArgumentError("visible index outside the vertex range")
        if len(np.unique(vis)) != len(vis):
            raise InvalidArgumentError("visible indices must be unique")
        if not np.all(np.isfinite(motion)):
            raise InvalidArgumentError("visible motion must be finite")
        object.__setattr__(self, "visible", vis)
        object.__setattr__(self, "visible_motion", motion)

    @property
    def n_visible(self) -> int:
        return len(self.visible)

    def visible_mask(self) -> np.ndarray:
        mask = np.zeros(self.mesh.n_vertices, dtype=bool)
        mask[self.visible] = True
        return mask


def fit_rigid(problem: MotionCompletionProblem):
    """Least-squares SE(3) fit to the visible motion, applied to all vertices.

    Returns (transform, motion) where motion[i] = T(p_i) - p_i for every
    vertex of the mesh, visible or not.
    """
    src = problem.mesh.vertices[problem.visible]
    dst = src + problem.visible_motion
    if len(src) < 3:
        raise DegenerateGeometryError(
            f"rigid fit needs >= 3 visible vertices, got {len(src)}"
        )
    c_src = src.mean(axis=0)
    c_dst = dst.mean(axis=0)
    x = src - c_src
    y = dst - c_dst

    spread = np.linalg.svd(x, compute_uv=False)
    if spread[0] <= 0 or spread[1] <= _COLLINEAR_TOL * spread[0]:
        raise DegenerateGeometryError(
            "visible vertices are collinear; rotation about their axis is "
            "unconstrained"
        )

    u, _, vt = np.linalg.svd(x.T @ y)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    rotation = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    transform = RigidTransform(rotation, c_dst - rotation @ c_src)
    motion = transform.apply(problem.mesh.vertices) - problem.mesh.vertices
    return transform, motion
