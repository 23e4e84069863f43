"""Exception types shared across the toolkit."""


class VoxflowError(Exception):
    """Base class for all toolkit errors."""


class InvalidArgumentError(VoxflowError, ValueError):
    """An argument violates an operation's precondition."""


class DegenerateGeometryError(VoxflowError):
    """Input geometry cannot support the requested fit (e.g. collinear points)."""


class UnconstrainedComponentError(VoxflowError):
    """A connected component of free vertices has no path to any constraint."""

    def __init__(self, vertices):
        self.vertices = sorted(int(v) for v in vertices)
        preview = ", ".join(str(v) for v in self.vertices[:10])
        if len(self.vertices) > 10:
            preview += ", ..."
        super().__init__(
            f"{len(self.vertices)} free vertices are not edge-connected to any "
            f"constrained vertex: [{preview}]"
        )


class SolverNumericalError(VoxflowError):
    """A linear solve or factorization failed numerically."""


class FormatError(VoxflowError):
    """A binary or text artifact does not match its declared format."""


class ConfigError(VoxflowError):
    """A configuration file is malformed or contains unknown keys."""


class StageError(VoxflowError):
    """A pipeline stage failed; carries the stage name for reporting."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
