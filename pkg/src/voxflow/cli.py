"""Command-line surface over the rendering, fusion, solver, and eval stages.

Every subcommand exits 0 on success and nonzero with a stage-tagged message
on failure; artifacts use the binary formats defined in voxflow.io.
"""
from __future__ import annotations

import dataclasses
import json
import os
import sys
import time

import click
import numpy as np

from . import __version__
from .errors import VoxflowError
from .geometry.camera import PinholeCamera
from .io.formats import (
    read_animation,
    read_camera,
    read_depth,
    read_indices,
    read_obj,
    read_point_motion,
    read_sparse_voxels,
    write_camera,
    write_depth,
    write_indices,
    write_obj,
    write_point_motion,
    write_scene_flow,
    write_sparse_voxels,
)
from .metrics import eval_motion, eval_shape
from .motion.convert import sff_to_vmf, vmf_to_sff
from .motion.generate import generate_vmf
from .motion.pointset import PointMotionSet
from .pipeline import (
    format_table,
    load_arap_config,
    load_config,
    make_visibility,
    run_benchmark,
    run_datagen,
    verify_manifest,
)
from .pipeline.benchmark import METHODS
from .pipeline.manifest import MANIFEST_NAME
from .render.depth import render_depth
from .render.flow import render_scene_flow
from .render.rig import sample_camera_rig
from .solvers import (
    ArapConfig,
    MotionCompletionProblem,
    arap_complete,
    arap_post_process,
    fit_rigid,
)
from .volume.marching import marching_cubes
from .volume.tsdf import fuse_tsdf, projective_tsdf


def _fail(stage: str, exc: Exception):
    click.echo(f"error [{stage}]: {exc}", err=True)
    sys.exit(1)


def _guarded(stage: str, fn):
    try:
        return fn()
    except (VoxflowError, OSError) as exc:
        _fail(stage, exc)


def _load_mesh(mesh_path, clip_path, frame):
    if (mesh_path is None) == (clip_path is None):
        raise click.UsageError("pass exactly one of --mesh or --clip")
    if mesh_path is not None:
        return read_obj(mesh_path)
    return read_animation(clip_path).frame_mesh(frame)


def _write_report(pairs, path):
    text = "".join(f"{key} = {value}\n" for key, value in pairs)
    if path is not None:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
    click.echo(text, nl=False)


def _solver_settings(config_path):
    if config_path is None:
        return ArapConfig(), 1.0
    return load_arap_config(config_path)


def _visible_problem(mesh, visible_path, motion_path):
    visible = read_indices(visible_path)
    pms = read_point_motion(motion_path)
    if len(pms) != len(visible):
        raise VoxflowError(
            f"{len(visible)} visible indices but {len(pms)} motion vectors"
        )
    if not np.allclose(pms.points, mesh.vertices[visible], atol=1e-5):
        raise VoxflowError("motion file points do not match the visible vertices")
    return MotionCompletionProblem(mesh, visible, pms.motions)


@click.group()
@click.version_option(version=__version__, prog_name="voxflow")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Pipeline config file (run-datagen, solver defaults).")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--threads", type=int, default=1, show_default=True,
              help="Worker threads for parallel stages.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Override the config output directory.")
@click.pass_context
def main(ctx, config_path, seed, threads, out_dir):
    """Synthetic 4D data pipeline: render, fuse, solve, evaluate."""
    ctx.obj = {"config": config_path, "seed": seed,
               "threads": threads, "out": out_dir}


@main.command("gen-cameras")
@click.option("--count", type=int, default=42, show_default=True)
@click.option("--radius", type=float, default=1.5, show_default=True)
@click.option("--target", type=float, nargs=3, default=(0.0, 0.0, 0.0),
              show_default=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
def gen_cameras(count, radius, target, out_dir):
    """Sample a camera rig on a sphere around the target."""
    def body():
        rig = sample_camera_rig(np.asarray(target), radius, count)
        os.makedirs(out_dir, exist_ok=True)
        for v, camera in enumerate(rig):
            write_camera(os.path.join(out_dir, f"view{v:03d}.cam"), camera)
        click.echo(f"wrote {len(rig)} cameras to {out_dir}")
    _guarded("gen-cameras", body)


@main.command("render-depth")
@click.option("--mesh", "mesh_path", type=click.Path(), default=None)
@click.option("--clip", "clip_path", type=click.Path(), default=None)
@click.option("--frame", type=int, default=0, show_default=True)
@click.option("--camera", "camera_path", type=click.Path(), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def render_depth_cmd(mesh_path, clip_path, frame, camera_path, out_path):
    """Render a z-depth image of a mesh or clip frame."""
    def body():
        mesh = _load_mesh(mesh_path, clip_path, frame)
        camera = read_camera(camera_path)
        write_depth(out_path, render_depth(mesh, camera))
        click.echo(f"wrote {out_path}")
    _guarded("render-depth", body)


@main.command("render-flow")
@click.option("--clip", "clip_path", type=click.Path(), required=True)
@click.option("--src", type=int, required=True)
@click.option("--dst", type=int, required=True)
@click.option("--camera", "camera_path", type=click.Path(), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def render_flow_cmd(clip_path, src, dst, camera_path, out_path):
    """Render per-pixel camera-frame scene flow between two frames."""
    def body():
        clip = read_animation(clip_path)
        camera = read_camera(camera_path)
        write_scene_flow(out_path, render_scene_flow(clip, src, dst, camera))
        click.echo(f"wrote {out_path}")
    _guarded("render-flow", body)


@main.command("tsdf-project")
@click.option("--depth", "depth_path", type=click.Path(), required=True)
@click.option("--camera", "camera_path", type=click.Path(), required=True)
@click.option("--voxel-size", type=float, default=0.01, show_default=True,
              help="Voxel edge length in meters.")
@click.option("--out", "out_path", type=click.Path(), required=True)
def tsdf_project(depth_path, camera_path, voxel_size, out_path):
    """Single-view projective truncated signed distance grid."""
    def body():
        camera = read_camera(camera_path)
        depth_map = read_depth(depth_path, camera)
        write_sparse_voxels(out_path, projective_tsdf(depth_map, voxel_size))
        click.echo(f"wrote {out_path}")
    _guarded("tsdf-project", body)


@main.command("tsdf-fuse")
@click.option("--view", "views", type=(click.Path(), click.Path()),
              multiple=True, required=True,
              help="DEPTH CAMERA file pair; repeat per view.")
@click.option("--voxel-size", type=float, default=0.01, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def tsdf_fuse(views, voxel_size, out_path):
    """Fuse several depth views into one averaged distance grid."""
    def body():
        maps = [read_depth(d, read_camera(c)) for d, c in views]
        write_sparse_voxels(out_path, fuse_tsdf(maps, voxel_size).grid)
        click.echo(f"wrote {out_path}")
    _guarded("tsdf-fuse", body)


@main.command("vmf-gen")
@click.option("--clip", "clip_path", type=click.Path(), required=True)
@click.option("--src", type=int, required=True)
@click.option("--dst", type=int, required=True)
@click.option("--tsdf", "tsdf_path", type=click.Path(), required=True)
@click.option("--k", type=int, default=3, show_default=True)
@click.option("--rotation-mode", type=click.Choice(["identity", "one-ring"]),
              default="identity", show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def vmf_gen(clip_path, src, dst, tsdf_path, k, rotation_mode, out_path):
    """Volumetric motion field on the voxels of a distance grid."""
    def body():
        clip = read_animation(clip_path)
        grid = read_sparse_voxels(tsdf_path)
        write_sparse_voxels(out_path,
                            generate_vmf(clip, src, dst, grid, k, rotation_mode))
        click.echo(f"wrote {out_path}")
    _guarded("vmf-gen", body)


@main.command("convert")
@click.argument("direction", type=click.Choice(["sff2vmf", "vmf2sff"]))
@click.option("--in", "in_path", type=click.Path(), required=True)
@click.option("--tsdf", "tsdf_path", type=click.Path(), default=None,
              help="Target voxel set (sff2vmf only).")
@click.option("--points", "points_path", type=click.Path(), default=None,
              help="Query points file, a PMSN whose motions are ignored (vmf2sff only).")
@click.option("--k", type=int, default=3, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def convert(direction, in_path, tsdf_path, points_path, k, out_path):
    """Convert between point motion sets and volumetric motion fields."""
    def body():
        if direction == "sff2vmf":
            if tsdf_path is None:
                raise click.UsageError("sff2vmf needs --tsdf")
            sff = read_point_motion(in_path)
            grid = read_sparse_voxels(tsdf_path)
            write_sparse_voxels(out_path, sff_to_vmf(sff, grid, k))
        else:
            if points_path is None:
                raise click.UsageError("vmf2sff needs --points")
            vmf = read_sparse_voxels(in_path)
            queries = read_point_motion(points_path).points
            sff, _ = vmf_to_sff(vmf, queries)
            write_point_motion(out_path, sff)
        click.echo(f"wrote {out_path}")
    _guarded("convert", body)


@main.command("extract-mesh")
@click.option("--tsdf", "tsdf_path", type=click.Path(), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def extract_mesh(tsdf_path, out_path):
    """Zero-crossing surface of a distance grid as an OBJ mesh."""
    def body():
        mesh = marching_cubes(read_sparse_voxels(tsdf_path))
        write_obj(out_path, mesh)
        click.echo(f"wrote {out_path} ({mesh.n_triangles} triangles)")
    _guarded("extract-mesh", body)


@main.command("fit-rigid")
@click.option("--mesh", "mesh_path", type=click.Path(), default=None)
@click.option("--clip", "clip_path", type=click.Path(), default=None)
@click.option("--frame", type=int, default=0, show_default=True)
@click.option("--visible", "visible_path", type=click.Path(), required=True)
@click.option("--motion", "motion_path", type=click.Path(), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--report", "report_path", type=click.Path(), default=None)
def fit_rigid_cmd(mesh_path, clip_path, frame, visible_path, motion_path,
                  out_path, report_path):
    """Best single rigid transform explaining the visible motion."""
    def body():
        mesh = _load_mesh(mesh_path, clip_path, frame)
        problem = _visible_problem(mesh, visible_path, motion_path)
        start = time.perf_counter()
        transform, motion = fit_rigid(problem)
        wall = time.perf_counter() - start
        write_point_motion(out_path, PointMotionSet(mesh.vertices, motion))
        residual = np.linalg.norm(
            motion[problem.visible] - problem.visible_motion, axis=1)
        _write_report([
            ("iterations", 1),
            ("final_energy", float((residual ** 2).sum())),
            ("wall_time", f"{wall:.6f}"),
        ], report_path)
        click.echo(f"wrote {out_path}")
    _guarded("fit-rigid", body)


def _run_arap(kind, mesh, visible_path, motion_path, solver_config,
              lambda_override, out_path, report_path):
    arap_config, lambda_data = _solver_settings(solver_config)
    if lambda_override is not None:
        lambda_data = lambda_override
    if kind == "complete":
        problem = _visible_problem(mesh, visible_path, motion_path)
        motion, report = arap_complete(problem, arap_config, return_report=True)
    else:
        pms = read_point_motion(motion_path)
        if not np.allclose(pms.points, mesh.vertices, atol=1e-5):
            raise VoxflowError("motion file points do not match the mesh vertices")
        motion, report = arap_post_process(mesh, pms.motions, lambda_data,
                                           arap_config, return_report=True)
    write_point_motion(out_path, PointMotionSet(mesh.vertices, motion))
    _write_report([
        ("iterations", report.iterations),
        ("final_energy", report.final_energy),
        ("wall_time", f"{report.wall_time:.6f}"),
        ("converged", report.converged),
    ], report_path)
    click.echo(f"wrote {out_path}")


@main.command("deform-arap")
@click.option("--mesh", "mesh_path", type=click.Path(), default=None)
@click.option("--clip", "clip_path", type=click.Path(), default=None)
@click.option("--frame", type=int, default=0, show_default=True)
@click.option("--visible", "visible_path", type=click.Path(), required=True)
@click.option("--motion", "motion_path", type=click.Path(), required=True)
@click.option("--solver-config", type=click.Path(), default=None)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--report", "report_path", type=click.Path(), default=None)
def deform_arap(mesh_path, clip_path, frame, visible_path, motion_path,
                solver_config, out_path, report_path):
    """Complete hidden-vertex motion with an as-rigid-as-possible prior."""
    _guarded("deform-arap", lambda: _run_arap(
        "complete", _load_mesh(mesh_path, clip_path, frame), visible_path,
        motion_path, solver_config, None, out_path, report_path))


@main.command("arap-pp")
@click.option("--mesh", "mesh_path", type=click.Path(), default=None)
@click.option("--clip", "clip_path", type=click.Path(), default=None)
@click.option("--frame", type=int, default=0, show_default=True)
@click.option("--motion", "motion_path", type=click.Path(), required=True,
              help="Dense per-vertex motion to denoise.")
@click.option("--lambda-data", type=float, default=None,
              help="Data-term weight; overrides the solver config.")
@click.option("--solver-config", type=click.Path(), default=None)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--report", "report_path", type=click.Path(), default=None)
def arap_pp(mesh_path, clip_path, frame, motion_path, lambda_data,
            solver_config, out_path, report_path):
    """Smooth a dense motion field against the same deformation prior."""
    _guarded("arap-pp", lambda: _run_arap(
        "post-process", _load_mesh(mesh_path, clip_path, frame), None,
        motion_path, solver_config, lambda_data, out_path, report_path))


@main.command("make-visibility")
@click.option("--mesh", "mesh_path", type=click.Path(), default=None)
@click.option("--clip", "clip_path", type=click.Path(), default=None)
@click.option("--frame", type=int, default=0, show_default=True)
@click.option("--camera", "camera_path", type=click.Path(), required=True)
@click.option("--tolerance", type=float, default=0.015, show_default=True,
              help="Depth agreement window in meters.")
@click.option("--out", "out_path", type=click.Path(), required=True)
def make_visibility_cmd(mesh_path, clip_path, frame, camera_path, tolerance,
                        out_path):
    """Indices of the vertices visible from a camera."""
    def body():
        mesh = _load_mesh(mesh_path, clip_path, frame)
        camera = read_camera(camera_path)
        visible = make_visibility(mesh, camera, tolerance)
        write_indices(out_path, visible)
        click.echo(f"wrote {out_path} ({len(visible)} of {mesh.n_vertices} visible)")
    _guarded("make-visibility", body)


@main.command("eval-motion")
@click.option("--pred", "pred_path", type=click.Path(), required=True)
@click.option("--gt", "gt_path", type=click.Path(), required=True)
@click.option("--json", "as_json", is_flag=True, default=False)
@click.option("--out", "out_path", type=click.Path(), default=None)
def eval_motion_cmd(pred_path, gt_path, as_json, out_path):
    """End-point error and accuracy of a predicted motion set."""
    def body():
        report = eval_motion(read_point_motion(pred_path),
                             read_point_motion(gt_path))
        if as_json:
            text = json.dumps(dataclasses.asdict(report), sort_keys=True) + "\n"
            if out_path:
                with open(out_path, "w", encoding="utf-8") as handle:
                    handle.write(text)
            click.echo(text, nl=False)
        else:
            _write_report(sorted(dataclasses.asdict(report).items()), out_path)
    _guarded("eval-motion", body)


@main.command("eval-shape")
@click.option("--pred-mesh", type=click.Path(), required=True)
@click.option("--gt-mesh", type=click.Path(), required=True)
@click.option("--pred-tsdf", type=click.Path(), required=True)
@click.option("--gt-tsdf", type=click.Path(), required=True)
@click.option("--samples", type=int, default=30000, show_default=True)
@click.option("--sample-seed", type=int, default=0, show_default=True)
@click.option("--json", "as_json", is_flag=True, default=False)
@click.option("--out", "out_path", type=click.Path(), default=None)
def eval_shape_cmd(pred_mesh, gt_mesh, pred_tsdf, gt_tsdf, samples,
                   sample_seed, as_json, out_path):
    """Surface and volumetric agreement between two reconstructions."""
    def body():
        report = eval_shape(read_obj(pred_mesh), read_obj(gt_mesh),
                            read_sparse_voxels(pred_tsdf),
                            read_sparse_voxels(gt_tsdf),
                            samples=samples, seed=sample_seed)
        if as_json:
            text = json.dumps(dataclasses.asdict(report), sort_keys=True) + "\n"
            if out_path:
                with open(out_path, "w", encoding="utf-8") as handle:
                    handle.write(text)
            click.echo(text, nl=False)
        else:
            _write_report(sorted(dataclasses.asdict(report).items()), out_path)
    _guarded("eval-shape", body)


@main.command("run-datagen")
@click.pass_context
def run_datagen_cmd(ctx):
    """Produce the full artifact set for one clip (uses --config/--seed/--out)."""
    def body():
        if ctx.obj["config"] is None:
            raise click.UsageError("run-datagen needs --config")
        config = load_config(ctx.obj["config"], seed=ctx.obj["seed"],
                             output_dir=ctx.obj["out"])
        manifest = run_datagen(config, n_threads=ctx.obj["threads"])
        click.echo(f"wrote {len(manifest.artifacts)} artifacts to "
                   f"{config.output_dir}")
    _guarded("run-datagen", body)


@main.command("run-benchmark")
@click.option("--problem", "problems", type=click.Path(), multiple=True,
              required=True, help="Problem directory; repeat per problem.")
@click.option("--method", "methods", type=click.Choice(METHODS),
              multiple=True, help="Default: all methods.")
@click.option("--solver-config", type=click.Path(), default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
def run_benchmark_cmd(problems, methods, solver_config, out_path):
    """Hidden-vertex motion scores for the classical solvers."""
    def body():
        arap_config, lambda_data = _solver_settings(solver_config)
        chosen = methods if methods else METHODS
        results = run_benchmark(problems, chosen, arap_config, lambda_data)
        table = format_table(results, chosen)
        if out_path:
            with open(out_path, "w", encoding="utf-8") as handle:
                handle.write(table)
        click.echo(table, nl=False)
    _guarded("run-benchmark", body)


@main.command("verify-manifest")
@click.argument("path", type=click.Path())
def verify_manifest_cmd(path):
    """Re-hash every artifact a manifest lists; fail on any mismatch."""
    def body():
        target = path
        if os.path.isdir(target):
            target = os.path.join(target, MANIFEST_NAME)
        problems = verify_manifest(target)
        if problems:
            for problem in problems:
                click.echo(problem, err=True)
            sys.exit(1)
        click.echo("manifest ok")
    _guarded("verify-manifest", body)


if __name__ == "__main__":
    main()
