"""Projective single-view TSDF and multi-view fusion.

The signed distance at a voxel is measured along the camera ray as
(measured depth - voxel z-depth) / voxel_size, so it is positive in front of
the surface and negative behind, clamped to the +-3 voxel truncation band.
Only voxels strictly inside the band and covered by a valid pixel are stored.
"""
from __future__ import annotations

import numpy as np

from ..constants import HIERARCHY_VOXEL_SIZES, TRUNCATION_VOXELS
from ..errors import InvalidArgumentError
from ..render.images import DepthMap
from .grid import (
    KIND_TSDF,
    ResolutionHierarchy,
    SparseVoxelGrid,
    WeightedTsdfGrid,
    empty_grid,
    pack_coords,
    unpack_keys,
)

# ray samples at half-voxel spacing covering slightly more than the
# truncation band, so rounding to lattice points cannot miss a voxel
_BAND_STEPS = np.arange(-7, 8, dtype=np.float64) * 0.5


def _candidate_coords(depth_map: DepthMap, voxel_size: float) -> np.ndarray:
    """Superset of voxel coordinates whose centers may fall in the band.

    Every voxel whose center has a valid nearest pixel and sits inside the
    truncation band must appear here; the projective test afterwards culls
    the rest, so over-enumeration is harmless but a miss is a hole in the
    grid. A voxel center can lie up to half a pixel footprint away from the
    ray it projects onto, so each ray sample is dilated by the footprint
    radius at the deepest measurement.
    """
    valid = depth_map.valid
    if not np.any(valid):
        return np.zeros((0, 3), dtype=np.int64)
    cam = depth_map.camera
    origin, dirs = cam.pixel_rays()
    d = depth_map.depth[valid]
    rays = dirs[valid]
    # z-depths sampled around the measured surface, clipped to stay in front
    z = d[:, None] + _BAND_STEPS[None, :] * voxel_size
    z = np.maximum(z, 1e-6)
    pos = origin + rays[:, None, :] * z[:, :, None]
    base = np.rint(pos / voxel_size).astype(np.int64).reshape(-1, 3)
    # neighboring rays sample mostly the same voxels; dedupe before the
    # 3x3x3 dilation multiplies the set (same final set, far fewer keys)
    base = unpack_keys(np.unique(pack_coords(base)))
    half_footprint = 0.5 * z.max() * max(1.0 / cam.fx, 1.0 / cam.fy)
    reach = int((half_footprint + 0.25 * voxel_size) / voxel_size + 1.0)
    span = np.arange(-reach, reach + 1, dtype=np.int64)
    offsets = np.stack(np.meshgrid(span, span, span, indexing="ij"),
                       axis=-1).reshape(-1, 3)
    keys = np.unique(np.concatenate([pack_coords(base + off) for off in offsets]))
    return unpack_keys(keys)


def projective_tsdf(depth_map: DepthMap, voxel_size: float) -> SparseVoxelGrid:
    """Single-view sparse TSDF on the world lattice voxel_size * Z^3.

    An all-invalid depth map yields an empty grid.
    """
    if not voxel_size > 0:
        raise InvalidArgumentError("voxel_size must be positive")
    coords = _candidate_coords(depth_map, voxel_size)
    if len(coords) == 0:
        return empty_grid(voxel_size)
    centers = coords.astype(np.float64) * voxel_size
    sdf, ok = _projective_sdf_at(depth_map, centers, voxel_size)
    return SparseVoxelGrid(voxel_size, np.zeros(3), KIND_TSDF, coords[ok], sdf[ok])


def _projective_sdf_at(depth_map: DepthMap, points: np.ndarray, voxel_size: float):
    """Clamped projective sdf of world points; ok marks storable entries."""
    cam = depth_map.camera
    u, v, z = cam.project(points)
    j = np.rint(u).astype(np.int64)
    i = np.rint(v).astype(np.int64)
    in_image = (z > 0) & (j >= 0) & (j < cam.width) & (i >= 0) & (i < cam.height)
    j_c = np.clip(j, 0, cam.width - 1)
    i_c = np.clip(i, 0, cam.height - 1)
    measured = depth_map.depth[i_c, j_c]
    sdf = (measured - z) / voxel_size
    ok = in_image & (measured > 0) & (np.abs(sdf) < TRUNCATION_VOXELS)
    return np.clip(sdf, -TRUNCATION_VOXELS, TRUNCATION_VOXELS), ok


def fuse_tsdf(depth_maps, voxel_size: float) -> WeightedTsdfGrid:
    """Weight-1 running average of per-view projective TSDFs.

    Per-voxel sums are accumulated in input order over the concatenated
    per-view entries, so the result is bit-identical for a fixed view order
    no matter how the per-view grids were computed.
    """
    depth_maps = list(depth_maps)
    if not depth_maps:
        raise InvalidArgumentError("fuse_tsdf needs at least one depth map")
    per_view = [projective_tsdf(dm, voxel_size) for dm in depth_maps]
    return merge_tsdf_grids(per_view, voxel_size)


def merge_tsdf_grids(grids, voxel_size: float) -> WeightedTsdfGrid:
    """Merge already-projected single-view grids by running average."""
    all_coords = np.concatenate([g.coords for g in grids] or [np.zeros((0, 3), np.int32)])
    all_values = np.concatenate([g.values for g in grids] or [np.zeros(0)])
    if len(all_coords) == 0:
        return WeightedTsdfGrid(empty_grid(voxel_size), np.zeros(0))
    keys = pack_coords(all_coords)
    uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    counts = np.bincount(inverse, minlength=len(uniq)).astype(np.float64)
    sums = np.bincount(inverse, weights=all_values, minlength=len(uniq))
    fused = sums / counts
    coords = all_coords[first]
    keep = np.abs(fused) < TRUNCATION_VOXELS
    grid = SparseVoxelGrid(voxel_size, np.zeros(3), KIND_TSDF, coords[keep], fused[keep])
    return WeightedTsdfGrid(grid, counts[keep])


def build_hierarchy(depth_maps) -> ResolutionHierarchy:
    """Independent fusion at each of the four canonical voxel sizes."""
    depth_maps = list(depth_maps)
    levels = tuple(fuse_tsdf(depth_maps, vs).grid for vs in HIERARCHY_VOXEL_SIZES)
    return ResolutionHierarchy(levels)
