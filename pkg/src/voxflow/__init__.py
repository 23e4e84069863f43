"""voxflow: synthetic 4D data generation and evaluation for volumetric motion fields.

Depth rendering from animated meshes, sparse TSDF fusion at a four-level
resolution hierarchy, volumetric motion fields with dual quaternion blending,
classical motion-completion solvers, and the matching evaluation metrics.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateGeometryError,
    FormatError,
    InvalidArgumentError,
    SolverNumericalError,
    StageError,
    UnconstrainedComponentError,
    VoxflowError,
)

__all__ = [
    "__version__",
    "VoxflowError",
    "InvalidArgumentError",
    "DegenerateGeometryError",
    "UnconstrainedComponentError",
    "SolverNumericalError",
    "FormatError",
    "ConfigError",
    "StageError",
]
