"""Versioned key/value run configuration.

The file format is INI with a fixed section/key vocabulary; anything not in
the vocabulary is an error so typos fail loudly instead of silently running
with defaults.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from ..constants import DEFAULT_INTRINSICS, HIERARCHY_VOXEL_SIZES
from ..errors import ConfigError
from ..solvers import ArapConfig

CONFIG_VERSION = 1

# section -> allowed keys
_SCHEMA = {
    "pipeline": {"version", "clip", "output", "seed"},
    "cameras": {"count", "radius", "input_view",
                "fx", "fy", "cx", "cy", "width", "height"},
    "frames": {"sources", "jumps"},
    "volume": {"voxel_sizes_cm"},
    "solver": {"weights", "max_iterations", "tolerance", "constraint_mode",
               "lambda_c", "lambda_data"},
}

DEFAULT_FRAME_JUMPS = (1, 3, 7, 12)


@dataclass(frozen=True)
class PipelineConfig:
    """Fully resolved run settings; every field has a concrete value."""

    clip_path: str
    output_dir: str
    seed: int = 0
    camera_count: int = 42
    camera_radius: float = 1.5
    input_view: int = 0
    intrinsics: dict = field(default_factory=lambda: dict(DEFAULT_INTRINSICS))
    source_frames: tuple = (0,)
    frame_jumps: tuple = DEFAULT_FRAME_JUMPS
    voxel_sizes: tuple = HIERARCHY_VOXEL_SIZES
    arap: ArapConfig = field(default_factory=ArapConfig)
    lambda_data: float = 1.0

    def __post_init__(self):
        if not self.clip_path:
            raise ConfigError("clip path is required")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        if self.camera_count < 1:
            raise ConfigError("camera count must be positive")
        if not self.camera_radius > 0:
            raise ConfigError("camera radius must be positive")
        if not 0 <= self.input_view < self.camera_count:
            raise ConfigError(
                f"input_view {self.input_view} outside [0, {self.camera_count})"
            )
        if len(self.source_frames) == 0:
            raise ConfigError("at least one source frame is required")
        if any(s < 0 for s in self.source_frames):
            raise ConfigError("source frames must be nonnegative")
        if len(self.frame_jumps) == 0:
            raise ConfigError("at least one frame jump is required")
        if any(j < 1 for j in self.frame_jumps):
            raise ConfigError("frame jumps must be positive integers")
        if len(self.voxel_sizes) == 0 or any(not v > 0 for v in self.voxel_sizes):
            raise ConfigError("voxel sizes must be positive")
        if not self.lambda_data > 0:
            raise ConfigError("lambda_data must be positive")

    def snapshot(self) -> dict:
        """Plain nested dict of the resolved settings, for the manifest."""
        return {
            "clip": self.clip_path,
            "output": self.output_dir,
            "seed": self.seed,
            "cameras": {
                "count": self.camera_count,
                "radius": self.camera_radius,
                "input_view": self.input_view,
                "intrinsics": dict(self.intrinsics),
            },
            "frames": {
                "sources": list(self.source_frames),
                "jumps": list(self.frame_jumps),
            },
            "voxel_sizes": list(self.voxel_sizes),
            "solver": {
                "weights": self.arap.weights,
                "max_iterations": self.arap.max_iterations,
                "tolerance": self.arap.tolerance,
                "constraint_mode": self.arap.constraint_mode,
                "lambda_c": self.arap.lambda_c,
                "lambda_data": self.lambda_data,
            },
        }


def _get(parser, section, key, cast, fallback):
    if not parser.has_option(section, key):
        return fallback
    raw = parser.get(section, key)
    try:
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: {exc}") from exc


def _int_list(raw: str) -> tuple:
    return tuple(int(tok) for tok in raw.replace(",", " ").split())


def load_arap_config(path) -> tuple:
    """Read a standalone [solver] file -> (ArapConfig, lambda_data)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read solver config: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed solver config: {exc}") from exc
    for section in parser.sections():
        if section != "solver":
            raise ConfigError(f"unknown section [{section}] in solver config")
        for key in parser.options(section):
            if key not in _SCHEMA["solver"]:
                raise ConfigError(f"unknown key '{key}' in [solver]")
    try:
        arap = ArapConfig(
            weights=_get(parser, "solver", "weights", str, "cotangent"),
            max_iterations=_get(parser, "solver", "max_iterations", int, 100),
            tolerance=_get(parser, "solver", "tolerance", float, 1e-6),
            constraint_mode=_get(parser, "solver", "constraint_mode", str, "hard"),
            lambda_c=_get(parser, "solver", "lambda_c", float, 1e4),
        )
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"solver config: {exc}") from exc
    return arap, _get(parser, "solver", "lambda_data", float, 1.0)


def load_config(path, seed=None, output_dir=None) -> PipelineConfig:
    """Parse and validate a config file; seed/output_dir override the file."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser.options(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key '{key}' in [{section}]")

    version = _get(parser, "pipeline", "version", int, None)
    if version != CONFIG_VERSION:
        raise ConfigError(
            f"config version must be {CONFIG_VERSION}, got {version}"
        )
    clip = _get(parser, "pipeline", "clip", str, "")
    if seed is None:
        seed = _get(parser, "pipeline", "seed", int, 0)
    if output_dir is None:
        output_dir = _get(parser, "pipeline", "output", str, "out")

    intrinsics = dict(DEFAULT_INTRINSICS)
    for key in ("fx", "fy", "cx", "cy"):
        intrinsics[key] = _get(parser, "cameras", key, float, intrinsics[key])
    for key in ("width", "height"):
        intrinsics[key] = _get(parser, "cameras", key, int, intrinsics[key])

    voxel_sizes_cm = _get(parser, "volume", "voxel_sizes_cm", _int_list,
                          None)
    if voxel_sizes_cm is None:
        voxel_sizes = HIERARCHY_VOXEL_SIZES
    else:
        voxel_sizes = tuple(0.01 * cm for cm in voxel_sizes_cm)

    try:
        arap = ArapConfig(
            weights=_get(parser, "solver", "weights", str, "cotangent"),
            max_iterations=_get(parser, "solver", "max_iterations", int, 100),
            tolerance=_get(parser, "solver", "tolerance", float, 1e-6),
            constraint_mode=_get(parser, "solver", "constraint_mode", str, "hard"),
            lambda_c=_get(parser, "solver", "lambda_c", float, 1e4),
        )
    except Exception as exc:
        raise ConfigError(f"solver config: {exc}") from exc

    return PipelineConfig(
        clip_path=clip,
        output_dir=str(output_dir),
        seed=int(seed),
        camera_count=_get(parser, "cameras", "count", int, 42),
        camera_radius=_get(parser, "cameras", "radius", float, 1.5),
        input_view=_get(parser, "cameras", "input_view", int, 0),
        intrinsics=intrinsics,
        source_frames=_get(parser, "frames", "sources", _int_list, (0,)),
        frame_jumps=_get(parser, "frames", "jumps", _int_list,
                         DEFAULT_FRAME_JUMPS),
        voxel_sizes=voxel_sizes,
        arap=arap,
        lambda_data=_get(parser, "solver", "lambda_data", float, 1.0),
    )
