"""Inter-frame scene flow rendering.

Each source-visible pixel carries the barycentric interpolation of its hit
triangle's vertex displacements toward the target frame, expressed in the
source camera's coordinates. Occlusion in the target frame does not
invalidate a pixel; visibility is decided by the source frame alone.
"""
from __future__ import annotations

import numpy as np

from ..geometry.camera import PinholeCamera
from ..geometry.mesh import AnimationClip, vertex_displacements
from .images import SceneFlowImage
from .raycast import cast_rays


def render_scene_flow(clip: AnimationClip, src_frame: int, dst_frame: int,
                      camera: PinholeCamera, backend: str | None = None) -> SceneFlowImage:
    disp = vertex_displacements(clip, src_frame, dst_frame)
    result = cast_rays(clip.frame_mesh(src_frame), camera, backend)
    hit = result.hit
    tri = clip.mesh.triangles[np.where(hit, result.triangle, 0)]
    d0, d1, d2 = disp[tri[..., 0]], disp[tri[..., 1]], disp[tri[..., 2]]
    u = result.bary_u[..., None]
    v = result.bary_v[..., None]
    flow_world = (1.0 - u - v) * d0 + u * d1 + v * d2
    # displacement vectors rotate into camera coordinates (no translation)
    flow_cam = flow_world @ camera.pose.rotation
    flow_cam[~hit] = 0.0
    return SceneFlowImage(camera.width, camera.height, flow_cam, hit)
