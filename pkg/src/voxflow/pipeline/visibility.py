"""Which mesh vertices a camera actually sees, occlusions included."""
from __future__ import annotations

import numpy as np

from ..geometry.camera import PinholeCamera
from ..geometry.mesh import TriangleMesh
from ..render.depth import render_depth

# acceptance window around the rendered depth, as a multiple of the finest
# voxel size: generous enough for a vertex whose pixel is dominated by an
# adjacent triangle, tight enough to reject anything actually occluded
_DEPTH_TOLERANCE = 1.5 * 0.01


def make_visibility(mesh: TriangleMesh, camera: PinholeCamera,
                    tolerance: float = _DEPTH_TOLERANCE,
                    backend=None) -> np.ndarray:
    """Sorted indices of vertices visible from the camera.

    A vertex counts as visible when the depth rendered at its pixel matches
    its own z-depth within the tolerance; occluded vertices sit behind the
    rendered surface and fail the comparison.
    """
    depth_map = render_depth(mesh, camera, backend)
    u, v, z = camera.project(mesh.vertices)
    base_col = np.floor(u).astype(np.int64)
    base_row = np.floor(v).astype(np.int64)
    in_frame = ((z > 0.0)
                & (u > -0.5) & (u < camera.width - 0.5)
                & (v > -0.5) & (v < camera.height - 0.5))
    # a vertex projects between pixel centers, so test the four pixels of
    # its footprint: any one rendering at the vertex's own depth attests an
    # unobstructed sightline, while an occluder covers all four
    visible = np.zeros(mesh.n_vertices, dtype=bool)
    for d_row in (0, 1):
        for d_col in (0, 1):
            row = np.clip(base_row + d_row, 0, camera.height - 1)
            col = np.clip(base_col + d_col, 0, camera.width - 1)
            rendered = depth_map.depth[row, col]
            visible |= in_frame & (rendered > 0.0) \
                & (np.abs(rendered - z) <= tolerance)
    return np.flatnonzero(visible)
