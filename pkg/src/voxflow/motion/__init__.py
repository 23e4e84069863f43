from .pointset import PointMotionSet
from .convert import inverse_distance_interpolate, sff_to_vmf, vmf_to_sff
from .generate import generate_vmf, vmf_hierarchy

__all__ = [
    "PointMotionSet",
    "inverse_distance_interpolate",
    "sff_to_vmf",
    "vmf_to_sff",
    "generate_vmf",
    "vmf_hierarchy",
]
