import json
import os

import numpy as np
import pytest

from synthclips import bent_tube_problem, translation_clip
from voxflow.errors import ConfigError, FormatError, InvalidArgumentError, StageError
from voxflow.geometry.camera import PinholeCamera, look_at_pose
from voxflow.geometry.mesh import TriangleMesh, compute_vertex_normals
from voxflow.geometry.primitives import icosphere, plane_sheet
from voxflow.geometry.transforms import RigidTransform, random_rotation
from voxflow.io.formats import read_sparse_voxels, write_animation
from voxflow.metrics.motion import MotionEvalReport
from voxflow.pipeline import (
    PipelineConfig,
    load_arap_config,
    load_config,
    load_problem,
    make_visibility,
    run_benchmark,
    run_datagen,
    verify_manifest,
    write_problem,
)
from voxflow.pipeline.manifest import MANIFEST_NAME, TIMINGS_NAME, RunManifest, file_digest, read_manifest, write_manifest
from voxflow.volume.marching import marching_cubes

SMALL_INTRINSICS = {"fx": 126.0, "fy": 126.0, "cx": 79.5, "cy": 71.5,
                    "width": 160, "height": 144}


def small_config(clip_path, out_dir, **overrides):
    settings = dict(clip_path=str(clip_path), output_dir=str(out_dir),
                    camera_count=6, camera_radius=1.2,
                    intrinsics=SMALL_INTRINSICS, frame_jumps=(1, 3),
                    voxel_sizes=(0.02, 0.04, 0.08))
    settings.update(overrides)
    return PipelineConfig(**settings)


_RUN_CACHE = []


def datagen_run(tmp_path_factory):
    """One shared small datagen run (clip path, output dir, manifest)."""
    if not _RUN_CACHE:
        root = tmp_path_factory.mktemp("datagen")
        clip_path = root / "clip.anim"
        clip = translation_clip(icosphere(2, radius=0.3), [0.01, 0.0, 0.005], 5)
        write_animation(clip_path, clip)
        out = root / "out"
        manifest = run_datagen(small_config(clip_path, out), n_threads=2)
        _RUN_CACHE.append((clip_path, out, manifest))
    return _RUN_CACHE[0]


class TestConfigFile:
    def write(self, tmp_path, text):
        path = tmp_path / "run.ini"
        path.write_text(text)
        return path

    def test_full_parse(self, tmp_path):
        path = self.write(tmp_path, """
[pipeline]
version = 1
clip = clip.anim
output = results
seed = 9

[cameras]
count = 12
radius = 2.0
input_view = 3
width = 320
height = 288

[frames]
sources = 0 2
jumps = 1 3 7 12

[volume]
voxel_sizes_cm = 1 2

[solver]
weights = uniform
max_iterations = 40
tolerance = 1e-5
constraint_mode = soft
lambda_c = 100.0
lambda_data = 2.5
""")
        config = load_config(path)
        assert config.clip_path == "clip.anim"
        assert config.output_dir == "results"
        assert config.seed == 9
        assert config.camera_count == 12
        assert config.input_view == 3
        assert config.intrinsics["width"] == 320
        assert config.intrinsics["fx"] == 504.0  # default preserved
        assert config.source_frames == (0, 2)
        assert config.frame_jumps == (1, 3, 7, 12)
        assert config.voxel_sizes == (0.01, 0.02)
        assert config.arap.weights == "uniform"
        assert config.arap.constraint_mode == "soft"
        assert config.lambda_data == 2.5

    def test_defaults(self, tmp_path):
        path = self.write(tmp_path, "[pipeline]\nversion = 1\nclip = c.anim\n")
        config = load_config(path)
        assert config.camera_count == 42
        assert config.frame_jumps == (1, 3, 7, 12)
        assert config.voxel_sizes == (0.01, 0.02, 0.04, 0.08)
        assert config.seed == 0

    def test_overrides_beat_file(self, tmp_path):
        path = self.write(tmp_path,
                          "[pipeline]\nversion = 1\nclip = c.anim\nseed = 3\n"
                          "output = from_file\n")
        config = load_config(path, seed=77, output_dir="elsewhere")
        assert config.seed == 77
        assert config.output_dir == "elsewhere"

    def test_unknown_section(self, tmp_path):
        path = self.write(tmp_path,
                          "[pipeline]\nversion = 1\nclip = c\n[rendering]\nx = 1\n")
        with pytest.raises(ConfigError, match="rendering"):
            load_config(path)

    def test_unknown_key(self, tmp_path):
        path = self.write(tmp_path,
                          "[pipeline]\nversion = 1\nclip = c\nthreads = 4\n")
        with pytest.raises(ConfigError, match="threads"):
            load_config(path)

    def test_version_required(self, tmp_path):
        with pytest.raises(ConfigError, match="version"):
            load_config(self.write(tmp_path, "[pipeline]\nclip = c\n"))
        with pytest.raises(ConfigError, match="version"):
            load_config(self.write(tmp_path, "[pipeline]\nversion = 2\nclip = c\n"))

    def test_missing_clip(self, tmp_path):
        with pytest.raises(ConfigError, match="clip"):
            load_config(self.write(tmp_path, "[pipeline]\nversion = 1\n"))

    def test_bad_values(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(self.write(
                tmp_path, "[pipeline]\nversion = 1\nclip = c\n[frames]\njumps = 0\n"))
        with pytest.raises(ConfigError):
            load_config(self.write(
                tmp_path,
                "[pipeline]\nversion = 1\nclip = c\n[cameras]\ninput_view = 9\ncount = 4\n"))
        with pytest.raises(ConfigError, match="fx"):
            load_config(self.write(
                tmp_path, "[pipeline]\nversion = 1\nclip = c\n[cameras]\nfx = wide\n"))

    def test_solver_config_file(self, tmp_path):
        path = self.write(tmp_path, "[solver]\nweights = uniform\nlambda_data = 4.0\n")
        arap, lambda_data = load_arap_config(path)
        assert arap.weights == "uniform"
        assert lambda_data == 4.0
        bad = self.write(tmp_path, "[solver]\nstiffness = 3\n")
        with pytest.raises(ConfigError, match="stiffness"):
            load_arap_config(bad)
        invalid = self.write(tmp_path, "[solver]\nmax_iterations = 0\n")
        with pytest.raises(ConfigError):
            load_arap_config(invalid)


class TestManifest:
    def test_digest_is_16_hex(self, tmp_path):
        target = tmp_path / "blob.bin"
        target.write_bytes(b"payload")
        digest = file_digest(target)
        assert len(digest) == 16
        int(digest, 16)
        assert file_digest(target) == digest
        target.write_bytes(b"payload2")
        assert file_digest(target) != digest

    def test_round_trip_and_verify(self, tmp_path):
        (tmp_path / "a.bin").write_bytes(b"aaa")
        manifest = RunManifest(config={"seed": 0})
        manifest.record(tmp_path, "a.bin")
        manifest.timings["stage"] = 1.25
        write_manifest(manifest, tmp_path)
        assert (tmp_path / TIMINGS_NAME).exists()

        loaded = read_manifest(tmp_path / MANIFEST_NAME)
        assert loaded.artifacts == manifest.artifacts
        assert loaded.config == {"seed": 0}
        assert verify_manifest(tmp_path / MANIFEST_NAME) == []

    def test_verify_reports_problems(self, tmp_path):
        (tmp_path / "a.bin").write_bytes(b"aaa")
        (tmp_path / "b.bin").write_bytes(b"bbb")
        manifest = RunManifest(config={})
        manifest.record(tmp_path, "a.bin")
        manifest.record(tmp_path, "b.bin")
        write_manifest(manifest, tmp_path)
        (tmp_path / "a.bin").write_bytes(b"tampered")
        (tmp_path / "b.bin").unlink()
        problems = verify_manifest(tmp_path / MANIFEST_NAME)
        assert problems == ["digest mismatch: a.bin", "missing: b.bin"]

    def test_manifest_json_is_stable(self):
        manifest = RunManifest(config={"b": 1, "a": 2})
        manifest.artifacts = {"z.bin": "00" * 8, "a.bin": "ff" * 8}
        body = json.loads(manifest.to_json())
        assert list(body) == ["artifacts", "config", "tool_version"]
        assert manifest.to_json() == manifest.to_json()

    def test_unreadable_manifest(self, tmp_path):
        bad = tmp_path / "manifest.json"
        bad.write_text("{not json")
        with pytest.raises(FormatError):
            read_manifest(bad)


class TestDatagen:
    def test_artifact_set(self, tmp_path_factory):
        _, out, manifest = datagen_run(tmp_path_factory)
        names = sorted(manifest.artifacts)
        assert len(names) == 36
        assert sum(n.startswith("cameras/") for n in names) == 6
        # 6 views x frames {0, 1, 3}
        assert sum(n.startswith("depth/") for n in names) == 18
        assert [n for n in names if n.startswith("flow/")] == [
            "flow/frame000_jump01.sflow", "flow/frame000_jump03.sflow"]
        assert sum(n.startswith("tsdf/") for n in names) == 4
        assert sum(n.startswith("motion/") for n in names) == 6
        for name in names:
            assert (out / name).is_file()

    def test_manifest_verifies(self, tmp_path_factory):
        _, out, _ = datagen_run(tmp_path_factory)
        assert verify_manifest(out / MANIFEST_NAME) == []

    def test_rerun_is_byte_identical(self, tmp_path_factory, tmp_path):
        clip_path, out, manifest = datagen_run(tmp_path_factory)
        again = run_datagen(small_config(clip_path, tmp_path / "out2"),
                            n_threads=5)
        assert again.artifacts == manifest.artifacts
        first = (out / MANIFEST_NAME).read_bytes()
        second = (tmp_path / "out2" / MANIFEST_NAME).read_bytes()
        # manifests differ only in the recorded output directory
        assert json.loads(first)["artifacts"] == json.loads(second)["artifacts"]

    def test_fused_grid_matches_analytic_sphere(self, tmp_path_factory):
        _, out, _ = datagen_run(tmp_path_factory)
        fused = read_sparse_voxels(out / "tsdf" / "fused_frame000_level0.svox")
        surface = marching_cubes(fused)
        err_vox = np.abs(np.linalg.norm(surface.vertices, axis=1) - 0.3)
        err_vox /= fused.voxel_size
        assert err_vox.mean() < 0.5
        assert err_vox.max() < 1.0

    def test_vmf_matches_rigid_translation(self, tmp_path_factory):
        _, out, _ = datagen_run(tmp_path_factory)
        for jump in (1, 3):
            vmf = read_sparse_voxels(
                out / "motion" / f"vmf_frame000_jump{jump:02d}_level0.svox")
            expected = np.array([0.01, 0.0, 0.005]) * jump
            assert np.abs(vmf.values - expected).max() < 1e-6

    def test_missing_clip_fails_in_load_stage(self, tmp_path):
        config = small_config(tmp_path / "nope.anim", tmp_path / "out")
        with pytest.raises(StageError) as err:
            run_datagen(config)
        assert err.value.stage == "load-clip"
        # the partial manifest is still written
        assert (tmp_path / "out" / MANIFEST_NAME).exists()

    def test_bad_source_frame_reported_with_stage(self, tmp_path):
        clip_path = tmp_path / "clip.anim"
        write_animation(clip_path,
                        translation_clip(icosphere(1, radius=0.3), [0.01, 0, 0], 3))
        config = small_config(clip_path, tmp_path / "out", source_frames=(9,))
        with pytest.raises(StageError) as err:
            run_datagen(config)
        assert err.value.stage == "cameras"
        assert "source frame 9" in str(err.value)


class TestVisibility:
    def test_sphere_hemisphere(self):
        mesh = icosphere(2, radius=0.3)
        pose = look_at_pose([0.0, 0.0, 1.5], [0.0, 0.0, 0.0])
        camera = PinholeCamera(504.0, 504.0, 319.5, 287.5, 640, 576, pose)
        # a loose depth window admits vertices a hair past the silhouette
        # (their occlusion depth gap is below the window), so resolve the
        # exact hemisphere with a 3 mm window
        visible = make_visibility(mesh, camera, tolerance=0.003)
        normals = compute_vertex_normals(mesh)
        view_dir = mesh.vertices - np.array([0.0, 0.0, 1.5])
        view_dir /= np.linalg.norm(view_dir, axis=1, keepdims=True)
        facing = np.einsum("nj,nj->n", normals, view_dir)
        assert len(visible) > 0
        assert np.all(facing[visible] < 0.0)
        clearly_facing = np.flatnonzero(facing < -0.45)
        assert np.isin(clearly_facing, visible).all()

    def test_occluded_by_plane(self):
        # a large sheet at z = 0.5 hides the sphere at the origin
        sphere = icosphere(2, radius=0.2)
        sheet = plane_sheet(8, 8, size_x=4.0, size_y=4.0, center=(0, 0, 0.5))
        v = np.concatenate([sphere.vertices, sheet.vertices])
        t = np.concatenate([sphere.triangles, sheet.triangles + sphere.n_vertices])
        mesh = TriangleMesh(v, t)
        pose = look_at_pose([0.0, 0.0, 1.5], [0.0, 0.0, 0.0])
        camera = PinholeCamera(504.0, 504.0, 319.5, 287.5, 640, 576, pose)
        visible = make_visibility(mesh, camera)
        assert not np.isin(np.arange(sphere.n_vertices), visible).any()

    def test_flat_sheet_fully_visible(self):
        sheet = plane_sheet(6, 6, size_x=0.5, size_y=0.5)
        pose = look_at_pose([0.0, 0.0, 1.0], [0.0, 0.0, 0.0])
        camera = PinholeCamera(504.0, 504.0, 319.5, 287.5, 640, 576, pose)
        visible = make_visibility(sheet, camera)
        assert np.array_equal(visible, np.arange(sheet.n_vertices))


class TestBenchmark:
    def test_problem_round_trip(self, tmp_path):
        mesh, visible, gt = bent_tube_problem()
        write_problem(tmp_path / "p", mesh, visible, gt)
        problem, loaded_gt = load_problem(tmp_path / "p")
        assert problem.mesh.n_vertices == mesh.n_vertices
        assert np.array_equal(problem.visible, np.sort(visible))
        assert np.abs(loaded_gt - gt).max() < 1e-6

    def test_rigid_problem_all_methods_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        mesh = icosphere(2, radius=0.25)
        move = RigidTransform(random_rotation(rng), rng.normal(scale=0.04, size=3))
        gt = move.apply(mesh.vertices) - mesh.vertices
        visible = rng.choice(mesh.n_vertices, size=60, replace=False)
        write_problem(tmp_path / "rigid", mesh, visible, gt)
        results = run_benchmark([str(tmp_path / "rigid")],
                                ("rigid", "arap", "arap-pp"))
        row = results["rigid"]
        for method, report in row.items():
            assert isinstance(report, MotionEvalReport), (method, report)
            assert report.epe < 1e-3
            assert report.acc5 == 1.0

    def test_bent_tube_ordering(self, tmp_path):
        mesh, visible, gt = bent_tube_problem()
        write_problem(tmp_path / "bend", mesh, visible, gt)
        results = run_benchmark([str(tmp_path / "bend")], ("rigid", "arap"))
        row = results["bend"]
        assert row["arap"].epe < row["rigid"].epe

    def test_failure_recorded_run_continues(self, tmp_path):
        # collinear visible set: the rigid fit must fail, the others keep going
        mesh, _, gt = bent_tube_problem()
        on_axis = np.flatnonzero(
            (np.abs(mesh.vertices[:, 0] - 0.1) < 1e-9)
            & (np.abs(mesh.vertices[:, 1]) < 1e-9))
        assert len(on_axis) >= 3
        write_problem(tmp_path / "bad", mesh, on_axis, gt)
        results = run_benchmark([str(tmp_path / "bad")], ("rigid", "arap"))
        row = results["bad"]
        assert isinstance(row["rigid"], str) and "failed" in row["rigid"]
        assert isinstance(row["arap"], MotionEvalReport)

    def test_empty_methods(self, tmp_path):
        mesh, visible, gt = bent_tube_problem()
        write_problem(tmp_path / "p", mesh, visible, gt)
        results = run_benchmark([str(tmp_path / "p")], ())
        assert results == {"p": {}}

    def test_unknown_method_rejected(self, tmp_path):
        mesh, visible, gt = bent_tube_problem()
        write_problem(tmp_path / "p", mesh, visible, gt)
        with pytest.raises(InvalidArgumentError):
            run_benchmark([str(tmp_path / "p")], ("icp",))
