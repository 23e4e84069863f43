from .benchmark import METHODS, format_table, load_problem, run_benchmark, write_problem
from .configfile import PipelineConfig, load_arap_config, load_config
from .datagen import run_datagen
from .manifest import RunManifest, file_digest, read_manifest, verify_manifest, write_manifest
from .visibility import make_visibility

__all__ = [
    "METHODS",
    "PipelineConfig",
    "RunManifest",
    "file_digest",
    "format_table",
    "load_arap_config",
    "load_config",
    "load_problem",
    "make_visibility",
    "read_manifest",
    "run_benchmark",
    "run_datagen",
    "verify_manifest",
    "write_manifest",
    "write_problem",
]
