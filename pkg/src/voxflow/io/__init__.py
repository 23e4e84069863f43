from .formats import (
    read_animation,
    read_camera,
    read_depth,
    read_depth_millimeters,
    read_indices,
    read_obj,
    read_point_motion,
    read_scene_flow,
    read_sparse_voxels,
    write_animation,
    write_camera,
    write_depth,
    write_indices,
    write_obj,
    write_point_motion,
    write_scene_flow,
    write_sparse_voxels,
)

__all__ = [n for n in dir() if n.startswith(("read_", "write_"))]
