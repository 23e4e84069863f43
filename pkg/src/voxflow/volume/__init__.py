from .grid import (
    KIND_MOTION,
    KIND_TSDF,
    ResolutionHierarchy,
    SparseVoxelGrid,
    WeightedTsdfGrid,
    pack_coords,
)
from .tsdf import build_hierarchy, fuse_tsdf, projective_tsdf
from .marching import marching_cubes

__all__ = [
    "SparseVoxelGrid",
    "WeightedTsdfGrid",
    "ResolutionHierarchy",
    "KIND_TSDF",
    "KIND_MOTION",
    "pack_coords",
    "projective_tsdf",
    "fuse_tsdf",
    "build_hierarchy",
    "marching_cubes",
]
