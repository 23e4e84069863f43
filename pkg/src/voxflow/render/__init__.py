from .images import DepthMap, SceneFlowImage
from .depth import render_depth
from .flow import render_scene_flow
from .rig import CameraRig, sample_camera_rig

__all__ = [
    "DepthMap",
    "SceneFlowImage",
    "render_depth",
    "render_scene_flow",
    "CameraRig",
    "sample_camera_rig",
]
