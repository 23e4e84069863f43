import numpy as np
import pytest

from synthclips import sphere_tsdf
from voxflow.errors import InvalidArgumentError
from voxflow.geometry.mesh import TriangleMesh
from voxflow.geometry.primitives import icosphere
from voxflow.geometry.transforms import RigidTransform, random_rotation
from voxflow.metrics import eval_motion, eval_shape, sample_surface
from voxflow.motion.pointset import PointMotionSet
from voxflow.volume.grid import KIND_MOTION, KIND_TSDF, SparseVoxelGrid


def motion_pair(pred_vectors, gt_vectors):
    pred_vectors = np.atleast_2d(pred_vectors)
    points = np.zeros_like(pred_vectors, dtype=np.float64)
    return (PointMotionSet(points, pred_vectors),
            PointMotionSet(points, np.atleast_2d(gt_vectors)))


class TestEvalMotion:
    def test_identical(self):
        rng = np.random.default_rng(0)
        vectors = rng.normal(scale=0.1, size=(50, 3))
        pred, gt = motion_pair(vectors, vectors)
        report = eval_motion(pred, gt)
        assert report.epe == 0.0
        assert report.acc5 == 1.0 and report.acc10 == 1.0
        assert report.count == 50

    def test_one_centimeter_error(self):
        pred, gt = motion_pair([[0.01, 0.0, 0.0]], [[0.0, 0.0, 0.0]])
        report = eval_motion(pred, gt)
        assert report.epe == pytest.approx(1.0)
        assert report.acc5 == 1.0

    def test_matches_scalar_recomputation(self):
        rng = np.random.default_rng(1)
        p = rng.normal(scale=0.08, size=(1000, 3))
        g = rng.normal(scale=0.08, size=(1000, 3))
        pred, gt = motion_pair(p, g)
        report = eval_motion(pred, gt)

        errs, hits5, hits10 = [], 0, 0
        for i in range(1000):
            err = 100.0 * float(np.sqrt(((p[i] - g[i]) ** 2).sum()))
            mag = 100.0 * float(np.sqrt((g[i] ** 2).sum()))
            errs.append(err)
            hits5 += (err < 5.0) or (err < 0.05 * mag)
            hits10 += (err < 10.0) or (err < 0.10 * mag)
        assert abs(report.epe - np.mean(errs)) < 1e-9
        assert abs(report.acc5 - hits5 / 1000.0) < 1e-9
        assert abs(report.acc10 - hits10 / 1000.0) < 1e-9

    def test_relative_branch_rescues_large_motion(self):
        # 6 cm error on a 2 m motion: fails the absolute 5 cm test but
        # passes the 5 percent relative test
        pred, gt = motion_pair([[2.06, 0.0, 0.0]], [[2.0, 0.0, 0.0]])
        report = eval_motion(pred, gt)
        assert report.acc5 == 1.0

    def test_absolute_branch_only_for_zero_gt(self):
        pred, gt = motion_pair([[0.049, 0, 0], [0.051, 0, 0]], np.zeros((2, 3)))
        report = eval_motion(pred, gt)
        assert report.acc5 == 0.5
        assert report.acc10 == 1.0

    def test_thresholds_are_strict(self):
        pred, gt = motion_pair([[0.05, 0.0, 0.0]], [[0.0, 0.0, 0.0]])
        assert eval_motion(pred, gt).acc5 == 0.0

    def test_epe_symmetric_acc_not(self):
        pred, gt = motion_pair([[2.06, 0.0, 0.0]], [[2.0, 0.0, 0.0]])
        forward = eval_motion(pred, gt)
        backward = eval_motion(gt, pred)
        assert forward.epe == backward.epe
        # swapping sides changes the relative branch's reference magnitude
        assert forward.acc5 == 1.0 and backward.acc5 == 1.0  # 6 < 5% of 206
        tight_pred, tight_gt = motion_pair([[0.06, 0, 0]], [[1.0, 0, 0]])
        assert eval_motion(tight_pred, tight_gt).acc5 == 0.0  # 94 cm error
        assert eval_motion(tight_gt, tight_pred).acc5 == 0.0

    def test_acc5_never_exceeds_acc10(self):
        rng = np.random.default_rng(2)
        pred, gt = motion_pair(rng.normal(scale=0.05, size=(500, 3)),
                               rng.normal(scale=0.05, size=(500, 3)))
        report = eval_motion(pred, gt)
        assert report.acc5 <= report.acc10

    def test_length_mismatch(self):
        pred = PointMotionSet(np.zeros((2, 3)), np.zeros((2, 3)))
        gt = PointMotionSet(np.zeros((3, 3)), np.zeros((3, 3)))
        with pytest.raises(InvalidArgumentError):
            eval_motion(pred, gt)

    def test_point_mismatch(self):
        pred = PointMotionSet([[0.0, 0, 0]], np.zeros((1, 3)))
        gt = PointMotionSet([[1.0, 0, 0]], np.zeros((1, 3)))
        with pytest.raises(InvalidArgumentError):
            eval_motion(pred, gt)


class TestSampleSurface:
    def test_area_weighting(self):
        # one triangle with 4x the area of the other
        v = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0],
                      [10, 0, 0], [12, 0, 0], [10, 2, 0]])
        t = np.array([[0, 1, 2], [3, 4, 5]])
        pts, normals = sample_surface(TriangleMesh(v, t), 20000,
                                      np.random.default_rng(0))
        on_big = pts[:, 0] > 5.0
        assert abs(on_big.mean() - 0.8) < 0.02
        assert np.abs(np.linalg.norm(normals, axis=1) - 1.0).max() < 1e-12
        assert np.abs(pts[:, 2]).max() == 0.0

    def test_samples_inside_triangles(self):
        v = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0]])
        pts, _ = sample_surface(TriangleMesh(v, [[0, 1, 2]]), 5000,
                                np.random.default_rng(1))
        assert np.all(pts[:, 0] >= 0) and np.all(pts[:, 1] >= 0)
        assert np.all(pts[:, 0] + pts[:, 1] <= 1.0 + 1e-12)


class TestEvalShape:
    def test_self_comparison_is_exact(self):
        mesh = icosphere(3, radius=0.5)
        grid = sphere_tsdf(0.5)
        report = eval_shape(mesh, mesh, grid, grid, samples=2000)
        assert report.cd == 0.0
        assert report.snc == 1.0
        assert report.p2p == 0.0
        assert report.iou == 1.0
        assert report.l1_sdf == 0.0

    def test_concentric_spheres(self):
        inner = icosphere(3, radius=0.50)
        outer = icosphere(3, radius=0.52)
        report = eval_shape(inner, outer, sphere_tsdf(0.50), sphere_tsdf(0.52),
                            samples=30000)
        assert abs(report.cd - 2.0) < 0.1
        assert report.snc > 0.99
        assert abs(report.p2p - 2.0) < 0.1

    def test_constant_sdf_offset(self):
        mesh = icosphere(2, radius=0.5)
        base = sphere_tsdf(0.5)
        keep = base.values + 0.5 < 3.0
        gt = SparseVoxelGrid(base.voxel_size, base.origin, KIND_TSDF,
                             base.coords[keep], base.values[keep])
        pred = SparseVoxelGrid(base.voxel_size, base.origin, KIND_TSDF,
                               base.coords[keep], base.values[keep] + 0.5)
        report = eval_shape(mesh, mesh, pred, gt, samples=500)
        assert report.l1_sdf == 0.5

    def test_rigid_invariance_of_surface_metrics(self):
        rng = np.random.default_rng(3)
        pred = icosphere(2, radius=0.3)
        gt = icosphere(2, radius=0.33)
        grid = sphere_tsdf(0.3, voxel_size=0.02)
        base = eval_shape(pred, gt, grid, grid, samples=4000)
        move = RigidTransform(random_rotation(rng), rng.normal(size=3))
        moved = eval_shape(pred.with_vertices(move.apply(pred.vertices)),
                           gt.with_vertices(move.apply(gt.vertices)),
                           grid, grid, samples=4000)
        assert abs(base.cd - moved.cd) < 1e-6
        assert abs(base.p2p - moved.p2p) < 1e-6
        assert abs(base.snc - moved.snc) < 1e-6

    def test_iou_mutation_monotonic(self):
        mesh = icosphere(1, radius=0.5)
        coords = np.array([[x, 0, 0] for x in range(10)])
        values = np.full(10, -1.0)
        gt = SparseVoxelGrid(0.01, (0, 0, 0), KIND_TSDF, coords, values)
        scores = []
        for flips in range(5):
            mutated = values.copy()
            mutated[:flips] = 1.0
            pred = SparseVoxelGrid(0.01, (0, 0, 0), KIND_TSDF, coords, mutated)
            scores.append(eval_shape(mesh, mesh, pred, gt, samples=100).iou)
        assert scores[0] == 1.0
        assert all(a > b for a, b in zip(scores, scores[1:]))

    def test_iou_counts_absent_as_outside(self):
        mesh = icosphere(1, radius=0.5)
        gt = SparseVoxelGrid(0.01, (0, 0, 0), KIND_TSDF,
                             [[0, 0, 0], [1, 0, 0]], [-1.0, -1.0])
        pred = SparseVoxelGrid(0.01, (0, 0, 0), KIND_TSDF,
                               [[0, 0, 0]], [-1.0])
        report = eval_shape(mesh, mesh, pred, gt, samples=100)
        assert report.iou == 0.5

    def test_seed_recorded_and_deterministic(self):
        mesh = icosphere(2, radius=0.5)
        grid = sphere_tsdf(0.5, voxel_size=0.02)
        a = eval_shape(mesh, icosphere(2, radius=0.52), grid, grid,
                       samples=1000, seed=7)
        b = eval_shape(mesh, icosphere(2, radius=0.52), grid, grid,
                       samples=1000, seed=7)
        assert a == b
        assert a.seed == 7 and a.samples == 1000

    def test_error_names_the_empty_side(self):
        mesh = icosphere(1, radius=0.5)
        empty_mesh = TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
        grid = sphere_tsdf(0.5, voxel_size=0.02)
        with pytest.raises(InvalidArgumentError, match="prediction"):
            eval_shape(empty_mesh, mesh, grid, grid)
        with pytest.raises(InvalidArgumentError, match="ground-truth"):
            eval_shape(mesh, empty_mesh, grid, grid)
        empty_grid = SparseVoxelGrid(0.02, (0, 0, 0), KIND_TSDF,
                                     np.zeros((0, 3)), np.zeros(0))
        with pytest.raises(InvalidArgumentError, match="prediction"):
            eval_shape(mesh, mesh, empty_grid, grid)
        with pytest.raises(InvalidArgumentError, match="ground-truth"):
            eval_shape(mesh, mesh, grid, empty_grid)

    def test_disjoint_grids_error(self):
        mesh = icosphere(1, radius=0.5)
        a = SparseVoxelGrid(0.01, (0, 0, 0), KIND_TSDF, [[0, 0, 0]], [1.0])
        b = SparseVoxelGrid(0.01, (0, 0, 0), KIND_TSDF, [[5, 0, 0]], [1.0])
        with pytest.raises(InvalidArgumentError, match="share"):
            eval_shape(mesh, mesh, a, b)

    def test_grid_compatibility_checks(self):
        mesh = icosphere(1, radius=0.5)
        a = SparseVoxelGrid(0.01, (0, 0, 0), KIND_TSDF, [[0, 0, 0]], [1.0])
        coarse = SparseVoxelGrid(0.02, (0, 0, 0), KIND_TSDF, [[0, 0, 0]], [1.0])
        shifted = SparseVoxelGrid(0.01, (1, 0, 0), KIND_TSDF, [[0, 0, 0]], [1.0])
        motion = SparseVoxelGrid(0.01, (0, 0, 0), KIND_MOTION,
                                 [[0, 0, 0]], [[0.0, 0, 0]])
        with pytest.raises(InvalidArgumentError):
            eval_shape(mesh, mesh, a, coarse)
        with pytest.raises(InvalidArgumentError):
            eval_shape(mesh, mesh, a, shifted)
        with pytest.raises(InvalidArgumentError):
            eval_shape(mesh, mesh, motion, a)
