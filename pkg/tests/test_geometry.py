"""Collision geometry tests, anchored by a rejection-sampling oracle."""

from __future__ import annotations

import numpy as np
import pytest

from curiflight.geometry import (
    Box,
    Cylinder,
    EllipsoidModel,
    PointCloud,
    WindowPanel,
    ellipsoid_points,
    intersection_fraction,
    unit_ball_points,
)


def rot_y(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rejection_fraction(model, position, attitude, obstacles, n=1_000_000, seed=0):
    """Independent oracle: uniform points inside the ellipsoid via rejection
    from its bounding box, then the same membership test."""
    rng = np.random.default_rng(seed)
    shape = attitude @ np.diag([model.radius_l, model.radius_l, model.height_h]) @ attitude.T
    inv = np.linalg.inv(shape)
    # bounding half-extents of the ellipsoid: row norms of the shape matrix
    half = np.linalg.norm(shape, axis=1)
    pts = rng.uniform(-half, half, size=(n, 3))
    inside = np.linalg.norm(pts @ inv.T, axis=1) <= 1.0
    pts = pts[inside] + np.asarray(position)
    hit = np.zeros(len(pts), dtype=bool)
    for obstacle in obstacles:
        hit |= obstacle.contains(pts)
    return float(np.mean(hit))


class TestEllipsoidPoints:
    def test_sphere_points_inside_unit_ball(self):
        model = EllipsoidModel(radius_l=1.0, height_h=1.0, sample_count=2048)
        cloud = ellipsoid_points(model, np.zeros(3), np.eye(3))
        assert len(cloud) == 2048
        assert np.all(np.linalg.norm(cloud.points, axis=1) <= 1.0 + 1e-12)

    def test_rotated_bounding_box(self):
        """90 degree pitch swaps the long axis into z: box 0.2 x 0.6 x 0.6."""
        model = EllipsoidModel(radius_l=0.3, height_h=0.1, sample_count=4096)
        cloud = ellipsoid_points(model, np.zeros(3), rot_y(np.pi / 2.0))
        extents = cloud.points.max(axis=0) - cloud.points.min(axis=0)
        assert np.allclose(extents, [0.2, 0.6, 0.6], atol=0.02)

    def test_translation_moves_cloud(self):
        model = EllipsoidModel()
        at_origin = ellipsoid_points(model, np.zeros(3), np.eye(3))
        offset = np.array([1.0, -2.0, 0.5])
        moved = ellipsoid_points(model, offset, np.eye(3))
        assert np.allclose(moved.points, at_origin.points + offset, atol=1e-12)

    def test_cloud_length_matches_sample_count(self):
        model = EllipsoidModel(sample_count=600)
        cloud = ellipsoid_points(model, np.zeros(3), np.eye(3))
        assert len(cloud) == model.sample_count

    def test_rejects_small_sample_count(self):
        with pytest.raises(ValueError):
            EllipsoidModel(sample_count=100)

    def test_rejects_flat_or_inverted_shape(self):
        with pytest.raises(ValueError):
            EllipsoidModel(radius_l=0.1, height_h=0.2)
        with pytest.raises(ValueError):
            EllipsoidModel(radius_l=0.1, height_h=0.0)

    def test_ball_cache_is_write_protected(self):
        pts = unit_ball_points(512)
        assert pts is unit_ball_points(512)
        with pytest.raises(ValueError):
            pts[0, 0] = 5.0


class TestIntersectionFraction:
    def test_disjoint_is_zero(self):
        model = EllipsoidModel()
        cloud = ellipsoid_points(model, np.zeros(3), np.eye(3))
        box = Box(center=np.array([10.0, 0.0, 0.0]), half_extents=np.array([1.0, 1.0, 1.0]))
        assert intersection_fraction(cloud, [box]) == 0.0

    def test_contained_is_one(self):
        model = EllipsoidModel()
        cloud = ellipsoid_points(model, np.zeros(3), np.eye(3))
        box = Box(center=np.zeros(3), half_extents=np.array([5.0, 5.0, 5.0]))
        assert intersection_fraction(cloud, [box]) == 1.0

    def test_no_obstacles_is_zero(self):
        model = EllipsoidModel()
        cloud = ellipsoid_points(model, np.zeros(3), np.eye(3))
        assert intersection_fraction(cloud, []) == 0.0

    def test_half_space_symmetry_against_rejection_oracle(self):
        """Unit sphere centered on the face of a half-space box."""
        model = EllipsoidModel(radius_l=1.0, height_h=1.0, sample_count=2048)
        position = np.zeros(3)
        half_space = Box(
            center=np.array([0.0, 0.0, -100.0]),
            half_extents=np.array([200.0, 200.0, 100.0]),
        )
        cloud = ellipsoid_points(model, position, np.eye(3))
        got = intersection_fraction(cloud, [half_space])
        assert got == pytest.approx(0.5, abs=0.03)
        oracle = rejection_fraction(model, position, np.eye(3), [half_space])
        assert got == pytest.approx(oracle, abs=0.03)

    def test_tilted_partial_overlap_against_rejection_oracle(self):
        model = EllipsoidModel(radius_l=0.28, height_h=0.08, sample_count=2048)
        attitude = rot_y(0.6) @ rot_z(0.3)
        position = np.array([0.1, -0.05, 0.02])
        box = Box(center=np.array([0.25, 0.0, 0.0]), half_extents=np.array([0.2, 0.5, 0.1]))
        cloud = ellipsoid_points(model, position, attitude)
        got = intersection_fraction(cloud, [box])
        oracle = rejection_fraction(model, position, attitude, [box])
        assert 0.0 < got < 1.0
        assert got == pytest.approx(oracle, abs=0.03)

    def test_sample_count_convergence(self):
        """More samples track the high-resolution oracle at least as well."""
        position = np.array([0.1, 0.0, 0.0])
        box = Box(center=np.array([0.3, 0.0, 0.0]), half_extents=np.array([0.2, 0.3, 0.2]))
        oracle = rejection_fraction(EllipsoidModel(), position, np.eye(3), [box])
        errors = {}
        for count in (512, 8192):
            model = EllipsoidModel(sample_count=count)
            cloud = ellipsoid_points(model, position, np.eye(3))
            errors[count] = abs(intersection_fraction(cloud, [box]) - oracle)
        assert errors[8192] <= 0.02
        assert errors[512] <= 0.05

    def test_monotone_in_obstacle_size(self):
        model = EllipsoidModel()
        cloud = ellipsoid_points(model, np.zeros(3), np.eye(3))
        previous = -1.0
        for half in (0.05, 0.1, 0.2, 0.4):
            box = Box(center=np.array([0.2, 0.0, 0.0]), half_extents=np.full(3, half))
            fraction = intersection_fraction(cloud, [box])
            assert fraction >= previous
            previous = fraction

    def test_rotation_about_cylinder_axis_invariant(self):
        """Spinning the whole configuration about the column leaves overlap alone."""
        model = EllipsoidModel()
        column = Cylinder(center=np.zeros(3), radius=0.3, height=4.0)
        position = np.array([0.35, 0.0, 0.0])
        attitude = rot_y(0.4)
        base = intersection_fraction(ellipsoid_points(model, position, attitude), [column])
        for theta in (0.7, 2.1, -1.3):
            Rz = rot_z(theta)
            moved = ellipsoid_points(model, Rz @ position, Rz @ attitude)
            frac = intersection_fraction(moved, [column])
            # the cloud rotates rigidly with the body, so the point set is a
            # different sample of the same region: sampling tolerance applies
            assert abs(frac - base) <= 0.02

    def test_translation_equivariance(self):
        model = EllipsoidModel()
        box = Box(center=np.array([0.2, 0.1, 0.0]), half_extents=np.array([0.2, 0.2, 0.1]))
        base = intersection_fraction(ellipsoid_points(model, np.zeros(3), np.eye(3)), [box])
        shift = np.array([1.5, -0.75, 2.0])
        shifted_box = Box(center=box.center + shift, half_extents=box.half_extents)
        moved = intersection_fraction(ellipsoid_points(model, shift, np.eye(3)), [shifted_box])
        assert abs(moved - base) <= 5.0 / model.sample_count

    def test_union_not_double_counted(self):
        """Two copies of the same obstacle give the same fraction as one."""
        model = EllipsoidModel()
        cloud = ellipsoid_points(model, np.zeros(3), np.eye(3))
        box = Box(center=np.array([0.2, 0.0, 0.0]), half_extents=np.array([0.2, 0.2, 0.2]))
        assert intersection_fraction(cloud, [box, box]) == intersection_fraction(cloud, [box])

    def test_empty_cloud_rejected(self):
        with pytest.raises(ValueError):
            intersection_fraction(PointCloud(np.zeros((0, 3))), [])


class TestWindowPanel:
    def panel(self, angle=0.4):
        return WindowPanel(center=np.array([2.0, 0.0, 1.5]), angle=angle)

    def test_gap_center_is_free(self):
        panel = self.panel()
        assert not panel.contains(np.array([[2.0, 0.0, 1.5]]))[0]

    def test_wall_body_is_solid(self):
        panel = self.panel()
        # a meter above the gap, still in the wall plane
        assert panel.contains(np.array([[2.0, 0.0, 2.5]]))[0]

    def test_points_off_the_slab_are_free(self):
        panel = self.panel()
        assert not panel.contains(np.array([[1.5, 0.0, 2.5]]))[0]
        assert not panel.contains(np.array([[2.2, 0.0, 2.5]]))[0]

    def test_gap_rotates_with_angle(self):
        # just inside the half-width along the rotated gap axis
        angle = 0.5
        panel = self.panel(angle)
        u = 0.42
        along = np.array([2.0, u * np.cos(angle), 1.5 + u * np.sin(angle)])
        upright = np.array([2.0, u, 1.5])
        assert not panel.contains(along[None, :])[0]
        assert panel.contains(upright[None, :])[0]

    def test_gap_must_fit_in_panel(self):
        with pytest.raises(ValueError):
            WindowPanel(center=np.zeros(3), angle=0.0, gap_width=9.0)
