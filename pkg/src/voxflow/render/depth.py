"""Depth rendering via per-pixel ray casting."""
from __future__ import annotations

from ..geometry.camera import PinholeCamera
from ..geometry.mesh import TriangleMesh
from .images import DepthMap
from .raycast import cast_rays

import numpy as np


def render_depth(mesh: TriangleMesh, camera: PinholeCamera, backend: str | None = None) -> DepthMap:
    """Z-depth of the nearest surface along each pixel ray; 0 where no hit.

    Deterministic: identical inputs give a bit-identical map on either
    backend.
    """
    result = cast_rays(mesh, camera, backend)
    depth = np.where(result.hit, result.t, 0.0)
    return DepthMap(camera, depth)
