"""Depth and scene-flow image containers.

Depth is kept at full float precision in memory (meters, 0 = invalid) and
quantized to u16 millimeters only when serialized, so downstream consumers
are not double-quantized. Flow vectors live in the source frame's camera
coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError
from ..geometry.camera import PinholeCamera


@dataclass(frozen=True)
class DepthMap:
    """Per-pixel z-depth in meters; 0 marks invalid (miss or out of range)."""

    camera: PinholeCamera
    depth: np.ndarray

    def __post_init__(self):
        d = np.ascontiguousarray(self.depth, dtype=np.float64)
        if d.shape != (self.camera.height, self.camera.width):
            raise InvalidArgumentError(
                f"depth shape {d.shape} != camera image size "
                f"({self.camera.height}, {self.camera.width})"
            )
        if not np.all(np.isfinite(d)) or d.min() < 0:
            raise InvalidArgumentError("depth values must be finite and nonnegative")
        object.__setattr__(self, "depth", d)

    @property
    def width(self) -> int:
        return self.camera.width

    @property
    def height(self) -> int:
        return self.camera.height

    @property
    def valid(self) -> np.ndarray:
        return self.depth > 0.0

    def to_millimeters(self) -> np.ndarray:
        """Quantized u16 depth; values rounding below 1 mm or above 65535 mm invalid."""
        mm = np.rint(self.depth * 1000.0)
        mm[(mm < 1.0) | (mm > 65535.0)] = 0.0
        return mm.astype(np.uint16)

    @staticmethod
    def from_millimeters(camera: PinholeCamera, mm: np.ndarray) -> "DepthMap":
        return DepthMap(camera, np.asarray(mm, dtype=np.float64) / 1000.0)


@dataclass(frozen=True)
class SceneFlowImage:
    """Per-pixel 3D motion (meters, source-camera coordinates) with a validity mask.

    Flow is stored as zeros on invalid pixels; serialization writes NaN there.
    """

    width: int
    height: int
    flow: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        f = np.ascontiguousarray(self.flow, dtype=np.float64)
        m = np.ascontiguousarray(self.valid, dtype=bool)
        if f.shape != (self.height, self.width, 3):
            raise InvalidArgumentError("flow must have shape (height, width, 3)")
        if m.shape != (self.height, self.width):
            raise InvalidArgumentError("validity mask must match image size")
        if not np.all(np.isfinite(f[m])):
            raise InvalidArgumentError("flow must be finite on valid pixels")
        f = f.copy()
        f[~m] = 0.0
        object.__setattr__(self, "flow", f)
        object.__setattr__(self, "valid", m)
