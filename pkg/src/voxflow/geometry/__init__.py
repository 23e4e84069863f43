from .transforms import (
    DualQuaternion,
    RigidTransform,
    dqb_blend,
    random_rotation,
    random_rotations,
)
from .mesh import (
    AnimationClip,
    TriangleMesh,
    compute_vertex_normals,
    count_boundary_edges,
    vertex_displacements,
)
from .camera import PinholeCamera, look_at_pose

__all__ = [
    "AnimationClip",
    "DualQuaternion",
    "PinholeCamera",
    "RigidTransform",
    "TriangleMesh",
    "compute_vertex_normals",
    "count_boundary_edges",
    "dqb_blend",
    "look_at_pose",
    "random_rotation",
    "random_rotations",
    "vertex_displacements",
]
