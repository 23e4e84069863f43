"""Point sets carrying per-point 3D motion vectors."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError


@dataclass(frozen=True)
class PointMotionSet:
    """Positions and their motion vectors, both (n, 3) in meters."""

    points: np.ndarray
    motions: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(self.points, dtype=np.float64).reshape(-1, 3)
        m = np.ascontiguousarray(self.motions, dtype=np.float64).reshape(-1, 3)
        if len(p) != len(m):
            raise InvalidArgumentError("points and motions length mismatch")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(m))):
            raise InvalidArgumentError("points and motions must be finite")
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "motions", m)

    def __len__(self) -> int:
        return len(self.points)
