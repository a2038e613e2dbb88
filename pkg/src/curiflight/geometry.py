"""Ellipsoid body model, obstacle primitives and collision fractions.

The vehicle body is the ellipsoid

    E(X, R) = { R S R^T d + X : |d| <= 1 },    S = diag(l, l, h),

approximated by a fixed deterministic point cloud: a low-discrepancy Halton
sequence on the unit cube mapped onto the unit ball (inverse-CDF radial map),
then pushed through R S R^T and translated. Collision severity against an
obstacle set is the fraction of cloud points inside any obstacle, which makes
the collision reward proportional to penetration depth rather than binary.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.stats import qmc


@dataclass(frozen=True)
class EllipsoidModel:
    """Body ellipsoid: lateral radius l, half-height h, cloud resolution."""

    radius_l: float = 0.28
    height_h: float = 0.08
    sample_count: int = 2048

    def __post_init__(self) -> None:
        if not (self.radius_l >= self.height_h > 0.0):
            raise ValueError("need radius_l >= height_h > 0")
        if self.sample_count < 500:
            raise ValueError("sample_count must be at least 500")

    @property
    def shape_matrix(self) -> np.ndarray:
        return np.diag([self.radius_l, self.radius_l, self.height_h])


@dataclass(frozen=True)
class PointCloud:
    """World-frame sample points of the body ellipsoid."""

    points: np.ndarray  # (n, 3)

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("points must be (n, 3)")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]


@lru_cache(maxsize=8)
def unit_ball_points(count: int) -> np.ndarray:
    """Deterministic low-discrepancy points filling the unit ball.

    Unscrambled Halton points on [0, 1)^3 mapped with the standard
    area-preserving transform: z uniform on [-1, 1], azimuth uniform,
    radius ~ u^(1/3). Cached per count; callers must not mutate the result.
    """
    sampler = qmc.Halton(d=3, scramble=False)
    u = sampler.random(count)
    z = 2.0 * u[:, 0] - 1.0
    phi = 2.0 * np.pi * u[:, 1]
    r = np.cbrt(u[:, 2])
    s = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    pts = np.stack([r * s * np.cos(phi), r * s * np.sin(phi), r * z], axis=1)
    pts.setflags(write=False)
    return pts


def ellipsoid_points(model: EllipsoidModel, position: np.ndarray, attitude: np.ndarray) -> PointCloud:
    """Sample the body ellipsoid at the given pose.

    Every returned point p satisfies |S^-1 R^T (p - X)| <= 1.
    """
    position = np.asarray(position, dtype=float)
    if position.shape != (3,) or not np.all(np.isfinite(position)):
        raise ValueError("position must be a finite 3-vector")
    attitude = np.asarray(attitude, dtype=float)
    if attitude.shape != (3, 3) or not np.all(np.isfinite(attitude)):
        raise ValueError("attitude must be a finite 3x3 matrix")
    ball = unit_ball_points(model.sample_count)
    transform = attitude @ model.shape_matrix @ attitude.T
    return PointCloud(points=ball @ transform.T + position)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box."""

    center: np.ndarray
    half_extents: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.center, dtype=float)
        h = np.asarray(self.half_extents, dtype=float)
        if c.shape != (3,) or h.shape != (3,) or not np.all(np.isfinite(c)) or not np.all(np.isfinite(h)):
            raise ValueError("center and half_extents must be finite 3-vectors")
        if np.any(h <= 0.0):
            raise ValueError("half_extents must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "half_extents", h)

    def contains(self, points: np.ndarray) -> np.ndarray:
        d = np.abs(points - self.center)
        return np.all(d <= self.half_extents, axis=1)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.center - self.half_extents, self.center + self.half_extents


@dataclass(frozen=True)
class Cylinder:
    """Vertical (z-aligned) cylinder; height is the full extent."""

    center: np.ndarray
    radius: float
    height: float

    def __post_init__(self) -> None:
        c = np.asarray(self.center, dtype=float)
        if c.shape != (3,) or not np.all(np.isfinite(c)):
            raise ValueError("center must be a finite 3-vector")
        if not (self.radius > 0.0 and self.height > 0.0):
            raise ValueError("radius and height must be positive")
        object.__setattr__(self, "center", c)

    def contains(self, points: np.ndarray) -> np.ndarray:
        d = points - self.center
        radial = d[:, 0] ** 2 + d[:, 1] ** 2 <= self.radius**2
        axial = np.abs(d[:, 2]) <= self.height / 2.0
        return radial & axial

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        r = np.array([self.radius, self.radius, self.height / 2.0])
        return self.center - r, self.center + r


@dataclass(frozen=True)
class WindowPanel:
    """Wall slab with a rotated rectangular gap, as four boxes around a hole.

    The slab is normal to the world x axis. In the wall plane the gap is a
    width x height rectangle rotated by ``angle`` about the x axis; membership
    tests run in that rotated local frame, where the four boxes surrounding
    the hole are axis-aligned. Panel half-extents are sized to cover the whole
    flight-region cross-section so the gap is the only way through.
    """

    center: np.ndarray
    angle: float
    gap_width: float = 0.9
    gap_height: float = 0.3
    thickness: float = 0.1
    panel_half_u: float = 4.0
    panel_half_v: float = 4.0

    def __post_init__(self) -> None:
        c = np.asarray(self.center, dtype=float)
        if c.shape != (3,) or not np.all(np.isfinite(c)):
            raise ValueError("center must be a finite 3-vector")
        object.__setattr__(self, "center", c)
        if not (self.gap_width > 0.0 and self.gap_height > 0.0 and self.thickness > 0.0):
            raise ValueError("gap dimensions and thickness must be positive")
        if self.gap_width / 2.0 >= self.panel_half_u or self.gap_height / 2.0 >= self.panel_half_v:
            raise ValueError("gap must fit inside the panel extents")

    def local_boxes(self) -> list[tuple[float, float, float, float]]:
        """(u_min, u_max, v_min, v_max) of the four boxes around the gap."""
        u, v = self.panel_half_u, self.panel_half_v
        hw, hh = self.gap_width / 2.0, self.gap_height / 2.0
        return [
            (-u, -hw, -v, v),  # left of the gap
            (hw, u, -v, v),  # right of the gap
            (-hw, hw, hh, v),  # above
            (-hw, hw, -v, -hh),  # below
        ]

    def contains(self, points: np.ndarray) -> np.ndarray:
        d = points - self.center
        in_slab = np.abs(d[:, 0]) <= self.thickness / 2.0
        # Rotate wall-plane coordinates (y, z) by -angle into the gap frame.
        c, s = np.cos(self.angle), np.sin(self.angle)
        u = c * d[:, 1] + s * d[:, 2]
        v = -s * d[:, 1] + c * d[:, 2]
        in_material = np.zeros(len(points), dtype=bool)
        for u0, u1, v0, v1 in self.local_boxes():
            in_material |= (u >= u0) & (u <= u1) & (v >= v0) & (v <= v1)
        return in_slab & in_material

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        reach = float(np.hypot(self.panel_half_u, self.panel_half_v))
        lo = self.center - np.array([self.thickness / 2.0, reach, reach])
        hi = self.center + np.array([self.thickness / 2.0, reach, reach])
        return lo, hi


Obstacle = Union[Box, Cylinder, WindowPanel]


def intersection_fraction(cloud: PointCloud, obstacles) -> float:
    """Fraction of cloud points inside the union of the obstacles.

    Returns a value in [0, 1]; 0 for an empty obstacle list. Monotone
    non-decreasing in the obstacle set and invariant under rigid motions
    applied to cloud and obstacles together.
    """
    if len(cloud) == 0:
        raise ValueError("empty point cloud")
    inside = np.zeros(len(cloud), dtype=bool)
    for obstacle in obstacles:
        if not np.all(inside):
            inside |= obstacle.contains(cloud.points)
    return float(np.count_nonzero(inside)) / len(cloud)
