"""Pinhole camera model.

Camera coordinates follow the computer-vision convention: x right, y down,
z forward (optical axis). Pixel (row i, col j) has its center at image
coordinates u = j, v = i, so u indexes columns and v rows.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError
from .transforms import RigidTransform


@dataclass(frozen=True)
class PinholeCamera:
    """Ideal pinhole (no distortion) with a camera-to-world pose."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    pose: RigidTransform

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise InvalidArgumentError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise InvalidArgumentError("principal point must lie inside the image")
        if self.width < 1 or self.height < 1:
            raise InvalidArgumentError("image dimensions must be positive")

    # -- camera-frame projection ------------------------------------------

    def project_cam(self, points_cam: np.ndarray):
        """Camera-frame points -> (u, v) pixels and z-depth. No bounds check."""
        p = np.asarray(points_cam, dtype=np.float64)
        z = p[..., 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            u = self.fx * p[..., 0] / z + self.cx
            v = self.fy * p[..., 1] / z + self.cy
        return u, v, z

    def unproject_cam(self, u, v, depth) -> np.ndarray:
        """Pixel coordinates + z-depth (meters) -> camera-frame points."""
        u = np.asarray(u, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        depth = np.asarray(depth, dtype=np.float64)
        x = (u - self.cx) / self.fx * depth
        y = (v - self.cy) / self.fy * depth
        return np.stack([x, y, np.broadcast_to(depth, x.shape)], axis=-1)

    # -- world-frame projection -------------------------------------------

    def world_to_cam(self, points_world: np.ndarray) -> np.ndarray:
        return self.pose.inverse().apply(points_world)

    def cam_to_world(self, points_cam: np.ndarray) -> np.ndarray:
        return self.pose.apply(points_cam)

    def project(self, points_world: np.ndarray):
        """World points -> (u, v, z-depth in camera frame)."""
        return self.project_cam(self.world_to_cam(points_world))

    def unproject(self, u, v, depth) -> np.ndarray:
        """Pixel + z-depth -> world points."""
        return self.cam_to_world(self.unproject_cam(u, v, depth))

    # -- rays --------------------------------------------------------------

    def pixel_rays(self):
        """World-space origin (3,) and per-pixel unit-z-scaled directions (h, w, 3).

        Directions are scaled so that the ray parameter equals camera z-depth:
        point(t) = origin + t * dir with dir_cam = ((u-cx)/fx, (v-cy)/fy, 1).
        """
        j, i = np.meshgrid(np.arange(self.width), np.arange(self.height))
        x = (j - self.cx) / self.fx
        y = (i - self.cy) / self.fy
        dirs_cam = np.stack([x, y, np.ones_like(x)], axis=-1)
        dirs = dirs_cam @ self.pose.rotation.T
        return self.pose.translation.copy(), dirs

    @property
    def center(self) -> np.ndarray:
        return self.pose.translation

    @property
    def optical_axis(self) -> np.ndarray:
        """World-space unit forward (+z) direction."""
        return self.pose.rotation[:, 2]

    def with_pose(self, pose: RigidTransform) -> "PinholeCamera":
        return PinholeCamera(self.fx, self.fy, self.cx, self.cy, self.width, self.height, pose)


def look_at_pose(eye, target, up=(0.0, 0.0, 1.0)) -> RigidTransform:
    """Camera-to-world pose with +z forward toward target and y roughly anti-up.

    With the y-down image convention, the world up vector maps to image "up"
    (negative v). Degenerate forward/up alignment falls back to up = (0, 1, 0).
    """
    eye = np.asarray(eye, dtype=np.float64).reshape(3)
    target = np.asarray(target, dtype=np.float64).reshape(3)
    up = np.asarray(up, dtype=np.float64).reshape(3)
    forward = target - eye
    norm = np.linalg.norm(forward)
    if norm < 1e-12:
        raise InvalidArgumentError("look_at: eye and target coincide")
    z = forward / norm
    x = np.cross(forward, up)
    if np.linalg.norm(x) < 1e-9:
        x = np.cross(forward, np.array([0.0, 1.0, 0.0]))
    x /= np.linalg.norm(x)
    y = np.cross(z, x)
    r = np.stack([x, y, z], axis=1)
    return RigidTransform(r, eye)
