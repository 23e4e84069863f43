from .arap import ArapConfig, ArapReport, arap_complete, arap_post_process, edge_weights
from .rigid import MotionCompletionProblem, fit_rigid

__all__ = [
    "ArapConfig",
    "ArapReport",
    "MotionCompletionProblem",
    "arap_complete",
    "arap_post_process",
    "edge_weights",
    "fit_rigid",
]
