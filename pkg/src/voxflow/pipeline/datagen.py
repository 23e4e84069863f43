"""End-to-end artifact generation: cameras, depth, flow, fields, manifest.

Every stage hands its results to the next through files in the output
directory, so each stage can be re-run or checked in isolation, and the
whole run is reproducible byte for byte from the config alone.
"""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..errors import InvalidArgumentError, StageError
from ..io.formats import (
    read_animation,
    read_depth,
    read_sparse_voxels,
    write_camera,
    write_depth,
    write_scene_flow,
    write_sparse_voxels,
)
from ..motion.generate import generate_vmf
from ..render.depth import render_depth
from ..render.flow import render_scene_flow
from ..render.rig import sample_camera_rig
from ..volume.tsdf import fuse_tsdf, projective_tsdf
from .configfile import PipelineConfig
from .manifest import RunManifest, write_manifest

_CAMERA_FILE = "cameras/view{view:03d}.cam"
_DEPTH_FILE = "depth/view{view:03d}_frame{frame:03d}.depth"
_FLOW_FILE = "flow/frame{frame:03d}_jump{jump:02d}.sflow"
_PROJECTIVE_FILE = "tsdf/projective_frame{frame:03d}.svox"
_FUSED_FILE = "tsdf/fused_frame{frame:03d}_level{level}.svox"
_VMF_FILE = "motion/vmf_frame{frame:03d}_jump{jump:02d}_level{level}.svox"


def _frame_plan(config: PipelineConfig, n_frames: int):
    """(source, target) pairs plus the sorted set of frames to render.

    Jumps that run past the end of the clip are dropped; a source frame
    outside the clip is a configuration error.
    """
    for s in config.source_frames:
        if s >= n_frames:
            raise InvalidArgumentError(
                f"source frame {s} outside clip of {n_frames} frames"
            )
    pairs = [(s, s + j) for s in config.source_frames
             for j in config.frame_jumps if s + j < n_frames]
    needed = sorted({s for s, _ in pairs}
                    | {d for _, d in pairs}
                    | set(config.source_frames))
    return pairs, needed


def run_datagen(config: PipelineConfig, n_threads: int = 1) -> RunManifest:
    """Render and fuse every artifact for one clip; returns the manifest.

    The manifest (and the artifact bytes) depend only on the config and the
    clip, never on n_threads or scheduling order. On a stage failure the
    manifest of everything produced so far is still written.
    """
    out = config.output_dir
    manifest = RunManifest(config=config.snapshot())
    for sub in ("cameras", "depth", "flow", "tsdf", "motion"):
        os.makedirs(os.path.join(out, sub), exist_ok=True)

    state = {}

    def run_stage(name, body):
        start = time.perf_counter()
        try:
            body()
        except Exception as exc:
            write_manifest(manifest, out)
            raise StageError(name, exc) from exc
        manifest.timings[name] = time.perf_counter() - start

    def stage_load():
        state["clip"] = read_animation(config.clip_path)

    def stage_cameras():
        clip = state["clip"]
        pairs, needed = _frame_plan(config, clip.n_frames)
        state["pairs"], state["needed"] = pairs, needed
        # aim every camera at the midpoint of the whole clip's bounding box
        # so the subject stays in frame in every animation frame
        lo = clip.frames.min(axis=(0, 1))
        hi = clip.frames.max(axis=(0, 1))
        rig = sample_camera_rig((lo + hi) / 2.0, config.camera_radius,
                                config.camera_count, config.intrinsics)
        state["rig"] = rig
        for v, camera in enumerate(rig):
            rel = _CAMERA_FILE.format(view=v)
            write_camera(os.path.join(out, rel), camera)
            manifest.record(out, rel)

    def stage_depth():
        clip, rig = state["clip"], state["rig"]
        tasks = [(v, f) for v in range(len(rig)) for f in state["needed"]]

        def render_one(task):
            v, f = task
            rel = _DEPTH_FILE.format(view=v, frame=f)
            write_depth(os.path.join(out, rel),
                        render_depth(clip.frame_mesh(f), rig[v]))
            return rel

        workers = max(1, n_threads)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for rel in pool.map(render_one, tasks):
                manifest.record(out, rel)

    def stage_flow():
        clip = state["clip"]
        camera = state["rig"][config.input_view]
        for s, d in state["pairs"]:
            rel = _FLOW_FILE.format(frame=s, jump=d - s)
            write_scene_flow(os.path.join(out, rel),
                             render_scene_flow(clip, s, d, camera))
            manifest.record(out, rel)

    def stage_tsdf():
        rig = state["rig"]
        for s in config.source_frames:
            views = [read_depth(os.path.join(out, _DEPTH_FILE.format(view=v, frame=s)),
                                rig[v])
                     for v in range(len(rig))]
            rel = _PROJECTIVE_FILE.format(frame=s)
            write_sparse_voxels(os.path.join(out, rel),
                                projective_tsdf(views[config.input_view],
                                                config.voxel_sizes[0]))
            manifest.record(out, rel)
            for level, voxel_size in enumerate(config.voxel_sizes):
                rel = _FUSED_FILE.format(frame=s, level=level)
                write_sparse_voxels(os.path.join(out, rel),
                                    fuse_tsdf(views, voxel_size).grid)
                manifest.record(out, rel)

    def stage_motion():
        clip = state["clip"]
        for s, d in state["pairs"]:
            for level in range(len(config.voxel_sizes)):
                fused = read_sparse_voxels(
                    os.path.join(out, _FUSED_FILE.format(frame=s, level=level)))
                rel = _VMF_FILE.format(frame=s, jump=d - s, level=level)
                write_sparse_voxels(os.path.join(out, rel),
                                    generate_vmf(clip, s, d, fused))
                manifest.record(out, rel)

    run_stage("load-clip", stage_load)
    run_stage("cameras", stage_cameras)
    run_stage("depth", stage_depth)
    run_stage("flow", stage_flow)
    run_stage("tsdf", stage_tsdf)
    run_stage("motion", stage_motion)
    write_manifest(manifest, out)
    return manifest
