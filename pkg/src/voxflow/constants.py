"""Toolkit-wide defaults.

These are the canonical pipeline constants; modules import them instead of
hardcoding numbers so configuration introspection has one source of truth.
"""

# Nearest-neighbor count for inverse-distance interpolation and for binding
# vertex motion to voxels with dual quaternion blending.
DEFAULT_KNN = 3

# A point interpolates from the 8 voxel-center corners of its enclosing cell.
TRILINEAR_CORNERS = 8

# Signed distances are truncated at 3 voxels on either side of the surface
# and stored in voxel units.
TRUNCATION_VOXELS = 3.0

# Four independently generated resolution levels, finest to coarsest (meters).
HIERARCHY_VOXEL_SIZES = (0.01, 0.02, 0.04, 0.08)

# Virtual cameras sampled on a sphere around the subject.
DEFAULT_CAMERA_COUNT = 42
CAMERA_DISTANCE_RANGE = (0.5, 2.5)

# Temporal strides between source and target animation frames.
DEFAULT_FRAME_JUMPS = (1, 3, 7, 12)

# Animations are authored at this rate.
DEFAULT_FRAME_RATE = 25.0

# Depth-camera intrinsics (narrow-FOV depth mode of a Kinect-class sensor).
DEFAULT_INTRINSICS = {
    "fx": 504.0,
    "fy": 504.0,
    "cx": 319.5,
    "cy": 287.5,
    "width": 640,
    "height": 576,
}

# Distance below which an interpolation query is treated as coincident with a
# sample point (the 1/d weight singularity).
COINCIDENCE_EPS = 1e-9
