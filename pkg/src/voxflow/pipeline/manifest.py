"""Run manifests: what was produced, from which settings, with which bytes.

The manifest deliberately excludes timings so that two runs with the same
settings produce byte-identical manifest files; timings go to a sidecar
file that is not itself listed in the manifest.
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field

from .. import __version__
from ..errors import FormatError

MANIFEST_NAME = "manifest.json"
TIMINGS_NAME = "timings.txt"


def file_digest(path) -> str:
    """64-bit BLAKE2b of the file's bytes, as 16 hex characters."""
    h = hashlib.blake2b(digest_size=8)
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    """Config snapshot plus per-artifact digests and per-stage timings."""

    config: dict
    artifacts: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    tool_version: str = __version__

    def record(self, out_dir, relpath):
        """Digest an artifact that was just written under out_dir."""
        self.artifacts[str(relpath)] = file_digest(os.path.join(out_dir, relpath))

    def to_json(self) -> str:
        body = {
            "artifacts": dict(sorted(self.artifacts.items())),
            "config": self.config,
            "tool_version": self.tool_version,
        }
        return json.dumps(body, sort_keys=True, indent=2) + "\n"


def write_manifest(manifest: RunManifest, out_dir) -> str:
    path = os.path.join(out_dir, MANIFEST_NAME)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(manifest.to_json())
    timings_path = os.path.join(out_dir, TIMINGS_NAME)
    with open(timings_path, "w", encoding="utf-8") as handle:
        for stage, seconds in manifest.timings.items():
            handle.write(f"{stage} = {seconds:.3f} s\n")
    return path


def read_manifest(path) -> RunManifest:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            body = json.load(handle)
        return RunManifest(
            config=body["config"],
            artifacts=dict(body["artifacts"]),
            tool_version=body["tool_version"],
        )
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"unreadable manifest {path}: {exc}") from exc


def verify_manifest(path) -> list:
    """Re-hash every listed artifact; returns a list of problem strings."""
    manifest = read_manifest(path)
    root = os.path.dirname(os.path.abspath(path))
    problems = []
    for relpath, expected in sorted(manifest.artifacts.items()):
        full = os.path.join(root, relpath)
        if not os.path.isfile(full):
            problems.append(f"missing: {relpath}")
        elif file_digest(full) != expected:
            problems.append(f"digest mismatch: {relpath}")
    return problems
