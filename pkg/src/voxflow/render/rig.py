"""Virtual camera rigs sampled on a sphere around a target."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..constants import CAMERA_DISTANCE_RANGE, DEFAULT_INTRINSICS
from ..errors import InvalidArgumentError
from ..geometry.camera import PinholeCamera, look_at_pose
from ..geometry.primitives import icosphere


@dataclass(frozen=True)
class CameraRig:
    """Cameras sharing intrinsics, all aimed at one target point."""

    cameras: tuple
    target: np.ndarray

    def __post_init__(self):
        target = np.asarray(self.target, dtype=np.float64).reshape(3)
        cams = tuple(self.cameras)
        for idx, cam in enumerate(cams):
            to_target = target - cam.center
            dist = np.linalg.norm(to_target)
            if dist < 1e-12:
                raise InvalidArgumentError(f"camera {idx} sits on the target")
            miss = np.linalg.norm(np.cross(cam.optical_axis, to_target / dist))
            if miss > 1e-6 or cam.optical_axis @ to_target <= 0:
                raise InvalidArgumentError(f"camera {idx} does not aim at the target")
        object.__setattr__(self, "cameras", cams)
        object.__setattr__(self, "target", target)

    def __len__(self) -> int:
        return len(self.cameras)

    def __iter__(self):
        return iter(self.cameras)

    def __getitem__(self, i) -> PinholeCamera:
        return self.cameras[i]


def _fibonacci_directions(count: int) -> np.ndarray:
    i = np.arange(count, dtype=np.float64)
    z = 1.0 - (2.0 * i + 1.0) / count
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    golden = np.pi * (3.0 - np.sqrt(5.0))
    theta = golden * i
    return np.stack([r * np.cos(theta), r * np.sin(theta), z], axis=1)


def sample_camera_rig(target, radius, count: int = 42, intrinsics=None) -> CameraRig:
    """Cameras on a sphere of the given radius, all looking at target.

    count = 42 uses the once-subdivided icosahedron (exactly uniform);
    other counts fall back to Fibonacci-sphere spacing. radius may be a
    scalar or a per-camera sequence; values outside the recommended
    0.5-2.5 m working range trigger a warning, not an error.
    """
    if count < 1:
        raise InvalidArgumentError("camera count must be >= 1")
    target = np.asarray(target, dtype=np.float64).reshape(3)
    radii = np.broadcast_to(np.asarray(radius, dtype=np.float64), (count,))
    if np.any(radii <= 0):
        raise InvalidArgumentError("camera radius must be positive")
    lo, hi = CAMERA_DISTANCE_RANGE
    if radii.min() < lo or radii.max() > hi:
        warnings.warn(
            f"camera distance outside the recommended [{lo}, {hi}] m range",
            stacklevel=2,
        )
    if intrinsics is None:
        intrinsics = DEFAULT_INTRINSICS
    if count == 42:
        dirs = icosphere(1).vertices
    elif count == 1:
        dirs = np.array([[0.0, 0.0, 1.0]])
    else:
        dirs = _fibonacci_directions(count)
    cams = []
    for d, r in zip(dirs, radii):
        eye = target + d * r
        cams.append(
            PinholeCamera(
                intrinsics["fx"], intrinsics["fy"], intrinsics["cx"], intrinsics["cy"],
                intrinsics["width"], intrinsics["height"], look_at_pose(eye, target),
            )
        )
    return CameraRig(tuple(cams), target)
