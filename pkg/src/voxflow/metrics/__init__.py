from .motion import MotionEvalReport, eval_motion
from .shape import ShapeEvalReport, eval_shape, sample_surface

__all__ = [
    "MotionEvalReport",
    "ShapeEvalReport",
    "eval_motion",
    "eval_shape",
    "sample_surface",
]
