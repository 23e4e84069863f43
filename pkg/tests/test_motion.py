"""Inverse-distance and trilinear motion interpolation against brute-force oracles."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voxflow.constants import COINCIDENCE_EPS
from voxflow.errors import InvalidArgumentError
from voxflow.geometry.mesh import AnimationClip
from voxflow.geometry.primitives import icosphere, tube
from voxflow.geometry.transforms import RigidTransform, random_rotation
from voxflow.motion.convert import (
    inverse_distance_interpolate,
    knn,
    sff_to_vmf,
    vmf_to_sff,
)
from voxflow.motion.generate import generate_vmf, vmf_hierarchy
from voxflow.motion.pointset import PointMotionSet
from voxflow.render import render_depth, sample_camera_rig
from voxflow.volume import KIND_MOTION, SparseVoxelGrid, build_hierarchy

rng = np.random.default_rng(31)


def eq1_oracle(points, motions, queries, k):
    """Scalar-loop restatement of the inverse-distance weighting rule."""
    out = np.zeros((len(queries), motions.shape[1]))
    for qi, q in enumerate(queries):
        d = np.linalg.norm(points - q, axis=1)
        order = np.lexsort((np.arange(len(points)), d))[:k]
        dd = d[order]
        if dd[0] < COINCIDENCE_EPS:
            out[qi] = motions[order[0]]
        else:
            w = 1.0 / dd
            w /= w.sum()
            out[qi] = w @ motions[order]
    return out


class TestInverseDistance:
    def test_worked_two_point_example(self):
        # weights 1/0.5 and 1/1.5 normalize to 0.75 and 0.25
        points = np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
        motions = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        out = inverse_distance_interpolate(points, motions,
                                           np.array([[0.5, 0.0, 0.0]]), k=2)
        assert np.abs(out[0] - [0.75, 0.25, 0.0]).max() < 1e-12

    def test_matches_brute_force(self):
        points = rng.normal(size=(200, 3))
        motions = rng.normal(size=(200, 3))
        queries = rng.normal(size=(64, 3))
        for k in (1, 3, 7):
            out = inverse_distance_interpolate(points, motions, queries, k=k)
            ref = eq1_oracle(points, motions, queries, k)
            assert np.abs(out - ref).max() < 1e-9

    def test_constant_field_preserved(self):
        points = rng.normal(size=(50, 3))
        motions = np.tile([0.1, -0.2, 0.3], (50, 1))
        out = inverse_distance_interpolate(points, motions,
                                           rng.normal(size=(20, 3)), k=3)
        assert np.abs(out - [0.1, -0.2, 0.3]).max() < 1e-12

    def test_coincident_query_copies_point(self):
        points = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        motions = np.array([[1.0, 2.0, 3.0], [9.0, 9.0, 9.0], [8.0, 8.0, 8.0]])
        out = inverse_distance_interpolate(points, motions, points[:1], k=3)
        assert np.array_equal(out[0], [1.0, 2.0, 3.0])

    def test_duplicate_points_lowest_index_wins(self):
        points = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]])
        motions = np.array([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [3.0, 0.0, 0.0]])
        out = inverse_distance_interpolate(points, motions,
                                           np.array([[0.0, 0.0, 0.0]]), k=2)
        assert np.array_equal(out[0], [1.0, 0.0, 0.0])

    def test_equivariant_under_rotation(self):
        points = rng.normal(size=(40, 3))
        motions = rng.normal(size=(40, 3))
        queries = rng.normal(size=(15, 3))
        R = random_rotation(rng)
        a = inverse_distance_interpolate(points, motions, queries, k=3) @ R.T
        b = inverse_distance_interpolate(points @ R.T, motions @ R.T,
                                         queries @ R.T, k=3)
        assert np.abs(a - b).max() < 1e-9

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2 ** 31 - 1), st.integers(1, 6))
    def test_output_in_convex_hull_of_neighbors(self, seed, k):
        r = np.random.default_rng(seed)
        points = r.normal(size=(30, 3))
        motions = r.normal(size=(30, 3))
        queries = r.normal(size=(8, 3))
        out = inverse_distance_interpolate(points, motions, queries, k=k)
        d, idx = knn(points, queries, k)
        neigh = motions[idx]
        lo = neigh.min(axis=1) - 1e-12
        hi = neigh.max(axis=1) + 1e-12
        assert np.all(out >= lo) and np.all(out <= hi)


class TestSffToVmf:
    def test_lattice_positions_and_grid_kind(self):
        sff = PointMotionSet(rng.normal(size=(20, 3)), rng.normal(size=(20, 3)))
        positions = np.array([[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [0.5, 0.5, 1.0]])
        vmf = sff_to_vmf(sff, positions, k=3, voxel_size=0.5)
        assert vmf.kind == KIND_MOTION
        assert np.array_equal(vmf.coords, [[0, 0, 0], [1, 0, 0], [1, 1, 2]])
        ref = eq1_oracle(sff.points, sff.motions, positions, 3)
        got = vmf.values[vmf.find(np.array([[0, 0, 0], [1, 0, 0], [1, 1, 2]]))]
        assert np.abs(got - ref).max() < 1e-9

    def test_off_lattice_positions_rejected(self):
        sff = PointMotionSet(np.zeros((1, 3)), np.zeros((1, 3)))
        with pytest.raises(InvalidArgumentError):
            sff_to_vmf(sff, np.array([[0.3, 0.0, 0.0]]), voxel_size=0.5)

    def test_empty_sff_rejected(self):
        sff = PointMotionSet(np.zeros((0, 3)), np.zeros((0, 3)))
        with pytest.raises(InvalidArgumentError):
            sff_to_vmf(sff, np.zeros((1, 3)), voxel_size=0.5)

    def test_lattice_rotation_equivariance(self):
        # cyclic axis rotation keeps integer lattice points on the lattice
        R = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        assert abs(np.linalg.det(R) - 1.0) < 1e-15
        points = rng.normal(size=(30, 3))
        motions = rng.normal(size=(30, 3))
        positions = rng.integers(-5, 6, size=(10, 3)).astype(np.float64) * 0.02
        a = sff_to_vmf(PointMotionSet(points, motions), positions,
                       voxel_size=0.02)
        b = sff_to_vmf(PointMotionSet(points @ R.T, motions @ R.T),
                       positions @ R.T, voxel_size=0.02)
        qa = positions
        ia = a.find(np.rint(qa / 0.02).astype(np.int64))
        ib = b.find(np.rint((qa @ R.T) / 0.02).astype(np.int64))
        assert np.abs(a.values[ia] @ R.T - b.values[ib]).max() < 1e-9


class TestVmfToSff:
    def grid_from(self, coords, values, vs=0.1):
        return SparseVoxelGrid(vs, (0.0, 0.0, 0.0), KIND_MOTION,
                               np.asarray(coords), np.asarray(values, dtype=np.float64))

    def full_cube(self, vs=0.1):
        coords = np.array([(i, j, k) for i in (0, 1) for j in (0, 1) for k in (0, 1)])
        values = rng.normal(size=(8, 3))
        return self.grid_from(coords, values, vs), coords, values

    def test_query_at_center_is_exact(self):
        grid, coords, values = self.full_cube()
        sff, extrap = vmf_to_sff(grid, coords * 0.1)
        assert np.abs(sff.motions - values).max() < 1e-12
        assert not extrap.any()

    def test_cube_center_is_mean(self):
        grid, coords, values = self.full_cube()
        sff, _ = vmf_to_sff(grid, np.array([[0.05, 0.05, 0.05]]))
        assert np.abs(sff.motions[0] - values.mean(axis=0)).max() < 1e-12

    def test_trilinear_matches_brute_force(self):
        grid, coords, values = self.full_cube()
        q = rng.uniform(0.0, 0.1, size=(40, 3))
        sff, extrap = vmf_to_sff(grid, q)
        assert not extrap.any()
        f = q / 0.1
        ref = np.zeros((len(q), 3))
        for n, (i, j, k) in enumerate(coords):
            w = (np.where(i, f[:, 0], 1 - f[:, 0])
                 * np.where(j, f[:, 1], 1 - f[:, 1])
                 * np.where(k, f[:, 2], 1 - f[:, 2]))
            ref += w[:, None] * values[n]
        assert np.abs(sff.motions - ref).max() < 1e-12

    def test_constant_grid_constant_output(self):
        coords = np.stack(np.meshgrid(*(np.arange(3),) * 3, indexing="ij"),
                          axis=-1).reshape(-1, 3)
        grid = self.grid_from(coords, np.tile([1.0, 2.0, 3.0], (27, 1)))
        sff, _ = vmf_to_sff(grid, rng.uniform(0.0, 0.2, size=(30, 3)))
        assert np.abs(sff.motions - [1.0, 2.0, 3.0]).max() < 1e-12

    def test_partial_cube_renormalizes(self):
        grid, coords, values = self.full_cube()
        # drop one corner; weights of the remaining 7 renormalize
        keep = np.ones(8, bool)
        keep[3] = False
        grid7 = self.grid_from(coords[keep], values[keep])
        q = np.array([[0.03, 0.06, 0.02]])
        f = q[0] / 0.1
        w = np.array([
            (f[0] if i else 1 - f[0]) * (f[1] if j else 1 - f[1])
            * (f[2] if k else 1 - f[2])
            for (i, j, k) in coords
        ])
        w[3] = 0.0
        w /= w.sum()
        ref = w @ values
        sff, extrap = vmf_to_sff(grid7, q)
        assert not extrap[0]
        assert np.abs(sff.motions[0] - ref).max() < 1e-12

    def test_empty_cell_falls_back_to_nearest(self):
        grid = self.grid_from([[0, 0, 0], [4, 0, 0]],
                              [[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]])
        sff, extrap = vmf_to_sff(grid, np.array([[0.21, 0.02, 0.0]]))
        assert extrap[0]
        # nearest stored voxel is (4, 0, 0) at 0.4 m
        assert np.array_equal(sff.motions[0], [2.0, 2.0, 2.0])

    def test_convex_hull_bound_full_cube(self):
        grid, coords, values = self.full_cube()
        q = rng.uniform(0.0, 0.1, size=(100, 3))
        sff, _ = vmf_to_sff(grid, q)
        assert np.all(sff.motions >= values.min(axis=0) - 1e-12)
        assert np.all(sff.motions <= values.max(axis=0) + 1e-12)

    def test_round_trip_preserves_constant(self):
        points = rng.normal(scale=0.05, size=(60, 3))
        motions = np.tile([0.02, 0.01, -0.03], (60, 1))
        coords = np.stack(np.meshgrid(*(np.arange(-3, 4),) * 3, indexing="ij"),
                          axis=-1).reshape(-1, 3)
        vmf = sff_to_vmf(PointMotionSet(points, motions),
                         coords.astype(np.float64) * 0.02, voxel_size=0.02)
        back, _ = vmf_to_sff(vmf, points)
        assert np.abs(back.motions - [0.02, 0.01, -0.03]).max() < 1e-12

    def test_tsdf_grid_rejected(self):
        from voxflow.volume.grid import KIND_TSDF
        g = SparseVoxelGrid(0.1, (0, 0, 0), KIND_TSDF,
                            np.array([[0, 0, 0]]), np.array([0.5]))
        with pytest.raises(InvalidArgumentError):
            vmf_to_sff(g, np.zeros((1, 3)))


def sphere_clip(motion):
    mesh = icosphere(2, radius=0.25)
    frames = np.stack([mesh.vertices, mesh.vertices + motion])
    return AnimationClip(mesh, frames)


def small_tsdf_voxels():
    ax = np.arange(-15, 16, 3)
    coords = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), axis=-1).reshape(-1, 3)
    pos = coords * 0.02
    keep = np.abs(np.linalg.norm(pos, axis=1) - 0.25) < 0.06
    from voxflow.volume.grid import KIND_TSDF
    sdf = (np.linalg.norm(pos[keep], axis=1) - 0.25) / 0.02
    return SparseVoxelGrid(0.02, (0, 0, 0), KIND_TSDF, coords[keep],
                           np.clip(sdf, -2.9, 2.9))


class TestGenerateVmf:
    def test_rigid_translation(self):
        t = np.array([0.03, -0.01, 0.02])
        vmf = generate_vmf(sphere_clip(t), 0, 1, small_tsdf_voxels())
        assert np.abs(vmf.values - t).max() < 1e-12

    def test_zero_motion(self):
        vmf = generate_vmf(sphere_clip(np.zeros(3)), 0, 1, small_tsdf_voxels())
        assert np.abs(vmf.values).max() == 0.0

    def test_identity_mode_equals_inverse_distance(self):
        mesh = icosphere(2, radius=0.25)
        disp = rng.normal(scale=0.01, size=mesh.vertices.shape)
        clip = AnimationClip(mesh, np.stack([mesh.vertices, mesh.vertices + disp]))
        voxels = small_tsdf_voxels()
        vmf = generate_vmf(clip, 0, 1, voxels, k=3)
        ref = eq1_oracle(mesh.vertices, disp, voxels.voxel_positions(), 3)
        assert np.abs(vmf.values - ref).max() < 1e-9

    def test_coords_inherit_tsdf_voxels(self):
        voxels = small_tsdf_voxels()
        vmf = generate_vmf(sphere_clip(np.zeros(3)), 0, 1, voxels)
        assert np.array_equal(vmf.coords, voxels.coords)
        assert vmf.voxel_size == voxels.voxel_size

    def test_one_ring_mode_recovers_global_rigid_motion(self):
        mesh = icosphere(2, radius=0.25)
        R = random_rotation(np.random.default_rng(5))
        # keep the rotation small enough that the mesh stays put roughly
        T = RigidTransform(R, np.array([0.02, 0.0, -0.01]))
        frames = np.stack([mesh.vertices, T.apply(mesh.vertices)])
        clip = AnimationClip(mesh, frames)
        voxels = small_tsdf_voxels()
        vmf = generate_vmf(clip, 0, 1, voxels, rotation_mode="one-ring")
        pos = voxels.voxel_positions()
        expected = T.apply(pos) - pos
        assert np.abs(vmf.values - expected).max() < 1e-9

    def test_bad_frame_or_mode(self):
        clip = sphere_clip(np.zeros(3))
        with pytest.raises(InvalidArgumentError):
            generate_vmf(clip, 0, 5, small_tsdf_voxels())
        with pytest.raises(InvalidArgumentError):
            generate_vmf(clip, 0, 1, small_tsdf_voxels(), rotation_mode="magic")


_HIER_CACHE = []


def hierarchy_setup():
    if not _HIER_CACHE:
        mesh = icosphere(3, radius=0.5)
        rig = sample_camera_rig([0.0, 0.0, 0.0], 1.5, 6)
        from voxflow.geometry.camera import PinholeCamera
        cams = [PinholeCamera(126.0, 126.0, 79.5, 71.5, 160, 144, c.pose)
                for c in rig]
        depths = [render_depth(mesh, c) for c in cams]
        hierarchy = build_hierarchy(depths)
        t = np.array([0.01, 0.02, -0.01])
        clip = AnimationClip(mesh, np.stack([mesh.vertices, mesh.vertices + t]))
        _HIER_CACHE.append((clip, hierarchy, t))
    return _HIER_CACHE[0]


class TestVmfHierarchy:
    def test_levels_share_tsdf_coords_and_translation_is_constant(self):
        clip, hierarchy, t = hierarchy_setup()
        grids = vmf_hierarchy(clip, 0, 1, hierarchy)
        assert len(grids) == 4
        for vmf, tsdf in zip(grids, hierarchy):
            assert np.array_equal(vmf.coords, tsdf.coords)
            assert np.abs(vmf.values - t).max() < 1e-12

    def test_cross_level_consistency_smooth_clip(self):
        clip, hierarchy, _ = hierarchy_setup()
        mesh = clip.mesh
        # smooth spatially varying motion: gentle sine displacement
        disp = 0.02 * np.sin(mesh.vertices * 4.0)
        smooth = AnimationClip(mesh, np.stack([mesh.vertices,
                                               mesh.vertices + disp]))
        grids = vmf_hierarchy(smooth, 0, 1, hierarchy)
        fine, coarse = grids[0], grids[1]
        pos = fine.voxel_positions()[::7]
        approx, extrap = vmf_to_sff(coarse, pos)
        exact, _ = vmf_to_sff(fine, pos)
        keep = ~extrap
        assert keep.sum() > 50
        err = np.linalg.norm(approx.motions[keep] - exact.motions[keep], axis=1)
        assert err.max() < 0.02
