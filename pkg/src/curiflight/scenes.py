"""Flight scenes: tilted-window, slalom and unstructured obstacle courses.

A scene bundles the obstacle set, the flight region, start and goal poses and
the termination rule. Scene families are sampled per episode during training
(obstacle parameters are randomized), while evaluation may pin them.

Conventions shared by all families: flight along +x from a hover at the
region's near end, origin-centred lateral axis y, vertical z. Termination
priority is collision > out_of_region > goal_reached > step_limit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import (
    Box,
    Cylinder,
    EllipsoidModel,
    PointCloud,
    WindowPanel,
    ellipsoid_points,
    intersection_fraction,
    unit_ball_points,
)

TERMINATION_CAUSES = ("collision", "out_of_region", "goal_reached", "step_limit")

SCENE_TYPES = ("narrow_window", "slalom_path", "unstructured")

# Shared course geometry. The region is a 6 x 4 x 3 m box; all families start
# hovering at its near end and fly toward +x.
REGION_LO = (-1.0, -2.0, 0.0)
REGION_HI = (5.0, 2.0, 3.0)
START_POSITION = (0.0, 0.0, 1.5)

# Tilted window defaults: wall position, gap size, training randomization.
WINDOW_WALL_X = 2.0
WINDOW_GOAL_X = 3.5
WINDOW_GAP_WIDTH = 0.9
WINDOW_GAP_HEIGHT = 0.3
WINDOW_THICKNESS = 0.1
WINDOW_ANGLE_RANGE = (0.2, 0.7)
WINDOW_DISTANCE_RANGE = (-0.3, 0.4)

# Slalom defaults: two vertical columns either side of the track midpoint.
SLALOM_MID_X = 2.0
SLALOM_GOAL = (4.0, 0.0, 1.5)
SLALOM_COLUMN_RADIUS = 0.15
SLALOM_OFFSET_RANGE = (-0.3, 0.3)

# Unstructured generator: obstacle zone, goal zone, corridor search effort.
UNSTRUCTURED_MAX_OBSTACLES = 6
UNSTRUCTURED_OBSTACLE_X = (0.8, 3.2)
UNSTRUCTURED_GOAL_X = (3.4, 4.4)
UNSTRUCTURED_CLEARANCE = 0.6
CORRIDOR_MARGIN = 0.05
CORRIDOR_STEP = 0.05
CORRIDOR_TRIES = 30
GENERATOR_RETRIES = 40


class SceneGenerationError(RuntimeError):
    """Raised when no feasible unstructured scene is found within budget."""


@dataclass(frozen=True)
class Region:
    """Axis-aligned flight region."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self) -> None:
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != (3,) or hi.shape != (3,) or np.any(hi <= lo):
            raise ValueError("region needs lo < hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def center(self) -> np.ndarray:
        return (self.lo + self.hi) / 2.0

    @property
    def half(self) -> np.ndarray:
        return (self.hi - self.lo) / 2.0

    def contains(self, position: np.ndarray) -> bool:
        return bool(np.all(position >= self.lo) and np.all(position <= self.hi))


@dataclass(frozen=True)
class TerminationEvent:
    cause: str
    step: int

    def __post_init__(self) -> None:
        if self.cause not in TERMINATION_CAUSES:
            raise ValueError(f"unknown termination cause {self.cause!r}")


class SlalomProgress:
    """Tracks the ordered half-plane crossings required by the slalom goal.

    The first forward crossing of each column's x plane records which side
    the vehicle passed on; the goal only counts once both columns have been
    passed on opposite sides (either left-right or right-left).
    """

    def __init__(self, plane_x: tuple[float, float], column_y: tuple[float, float]):
        self.plane_x = plane_x
        self.column_y = column_y
        self.sides: list[float] = [0.0, 0.0]

    def update(self, prev_position: np.ndarray, position: np.ndarray) -> None:
        for i in range(2):
            if self.sides[i] == 0.0 and prev_position[0] < self.plane_x[i] <= position[0]:
                side = np.sign(position[1] - self.column_y[i])
                self.sides[i] = side if side != 0.0 else 1.0

    def satisfied(self) -> bool:
        return self.sides[0] * self.sides[1] < 0.0

    def copy(self) -> "SlalomProgress":
        out = SlalomProgress(self.plane_x, self.column_y)
        out.sides = list(self.sides)
        return out


@dataclass(frozen=True)
class Scene:
    """One realized flight task."""

    scene_type: str
    obstacles: tuple
    start_position: np.ndarray
    goal_position: np.ndarray
    goal_attitude: np.ndarray
    flight_region: Region
    obstacle_params: dict
    goal_radius: float = 0.3
    max_episode_steps: int = 300
    feasible_corridor: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.scene_type not in SCENE_TYPES:
            raise ValueError(f"unknown scene type {self.scene_type!r}")
        start = np.asarray(self.start_position, dtype=float)
        goal = np.asarray(self.goal_position, dtype=float)
        object.__setattr__(self, "start_position", start)
        object.__setattr__(self, "goal_position", goal)
        object.__setattr__(self, "goal_attitude", np.asarray(self.goal_attitude, dtype=float))
        if not self.flight_region.contains(start):
            raise ValueError("start_position outside flight region")
        if not self.flight_region.contains(goal):
            raise ValueError("goal_position outside flight region")
        if not (self.goal_radius > 0.0):
            raise ValueError("goal_radius must be positive")
        if self.max_episode_steps < 1:
            raise ValueError("max_episode_steps must be at least 1")
        for obstacle in self.obstacles:
            if isinstance(obstacle, WindowPanel):
                # The panel is a wall of the course; only its slab needs to
                # stay inside the region along the flight axis.
                if not (
                    self.flight_region.lo[0] <= obstacle.center[0] - obstacle.thickness / 2.0
                    and obstacle.center[0] + obstacle.thickness / 2.0 <= self.flight_region.hi[0]
                ):
                    raise ValueError("window slab outside flight region")
            else:
                lo, hi = obstacle.bounds()
                if np.any(lo < self.flight_region.lo - 1e-9) or np.any(hi > self.flight_region.hi + 1e-9):
                    raise ValueError("obstacle outside flight region")

    def make_progress(self) -> Optional[SlalomProgress]:
        if self.scene_type != "slalom_path":
            return None
        p = self.obstacle_params
        return SlalomProgress(
            plane_x=(p["column_x"][0], p["column_x"][1]),
            column_y=(p["column_y"][0], p["column_y"][1]),
        )

    def obstacle_features(self) -> np.ndarray:
        """Raw scene parameters exposed to the policy (pre-normalization)."""
        p = self.obstacle_params
        if self.scene_type == "narrow_window":
            return np.array([p["angle"], p["distance"]])
        if self.scene_type == "slalom_path":
            return np.array(
                [p["column_x"][0], p["column_y"][0], p["column_x"][1], p["column_y"][1]]
            )
        feats = np.zeros(7 * UNSTRUCTURED_MAX_OBSTACLES + 3)
        for i, obstacle in enumerate(self.obstacles):
            base = 7 * i
            if isinstance(obstacle, Cylinder):
                feats[base] = 1.0
                feats[base + 1 : base + 4] = obstacle.center
                feats[base + 4 : base + 7] = (
                    obstacle.radius,
                    obstacle.radius,
                    obstacle.height / 2.0,
                )
            else:
                feats[base + 1 : base + 4] = obstacle.center
                feats[base + 4 : base + 7] = obstacle.half_extents
        feats[-3:] = self.goal_position
        return feats

    def obstacle_feature_scales(self) -> np.ndarray:
        """Per-entry normalization scales matching obstacle_features()."""
        half = self.flight_region.half
        if self.scene_type == "narrow_window":
            return np.array([1.0, half[1]])
        if self.scene_type == "slalom_path":
            return np.array([half[0], half[1], half[0], half[1]])
        scales = np.ones(7 * UNSTRUCTURED_MAX_OBSTACLES + 3)
        for i in range(UNSTRUCTURED_MAX_OBSTACLES):
            scales[7 * i + 1 : 7 * i + 4] = half
        scales[-3:] = half
        return scales


def rotation_about_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def make_window_scene(
    angle: Optional[float] = None,
    lateral_distance: Optional[float] = None,
    rng: Optional[np.random.Generator] = None,
    *,
    angle_range: Optional[tuple[float, float]] = WINDOW_ANGLE_RANGE,
    distance_range: Optional[tuple[float, float]] = WINDOW_DISTANCE_RANGE,
    goal_radius: float = 0.3,
    max_episode_steps: int = 300,
) -> Scene:
    """Wall with a tilted rectangular gap; goal behind it, tilted to match.

    Parameters left as None are drawn uniformly from their range using rng.
    Explicit values are validated against the ranges, which default to the
    training randomization intervals; pass None for a range to construct
    out-of-range scenes (failure sweeps, diagnostics).
    """
    if angle is None or lateral_distance is None:
        if rng is None:
            raise ValueError("drawing window parameters requires an rng")
        if angle is None:
            angle = float(rng.uniform(*(angle_range or WINDOW_ANGLE_RANGE)))
        if lateral_distance is None:
            lateral_distance = float(rng.uniform(*(distance_range or WINDOW_DISTANCE_RANGE)))
    if angle_range is not None and not (angle_range[0] <= angle <= angle_range[1]):
        raise ValueError(f"window angle {angle} outside configured range {angle_range}")
    if distance_range is not None and not (distance_range[0] <= lateral_distance <= distance_range[1]):
        raise ValueError(
            f"window distance {lateral_distance} outside configured range {distance_range}"
        )
    region = Region(np.array(REGION_LO), np.array(REGION_HI))
    panel = WindowPanel(
        center=np.array([WINDOW_WALL_X, lateral_distance, START_POSITION[2]]),
        angle=angle,
        gap_width=WINDOW_GAP_WIDTH,
        gap_height=WINDOW_GAP_HEIGHT,
        thickness=WINDOW_THICKNESS,
    )
    return Scene(
        scene_type="narrow_window",
        obstacles=(panel,),
        start_position=np.array(START_POSITION),
        goal_position=np.array([WINDOW_GOAL_X, lateral_distance, START_POSITION[2]]),
        goal_attitude=rotation_about_x(angle),
        flight_region=region,
        obstacle_params={"angle": float(angle), "distance": float(lateral_distance)},
        goal_radius=goal_radius,
        max_episode_steps=max_episode_steps,
    )


def make_slalom_scene(
    column_separation: float = 1.5,
    column_offsets: Optional[tuple[float, float]] = (0.0, 0.0),
    rng: Optional[np.random.Generator] = None,
    *,
    offset_range: tuple[float, float] = SLALOM_OFFSET_RANGE,
    goal_radius: float = 0.3,
    max_episode_steps: int = 300,
) -> Scene:
    """Two vertical columns to be passed on opposite sides, goal beyond.

    column_offsets = None draws both lateral offsets from offset_range.
    """
    if column_separation <= 2.0 * SLALOM_COLUMN_RADIUS:
        raise ValueError("column_separation must exceed the column diameter")
    if column_offsets is None:
        if rng is None:
            raise ValueError("drawing column offsets requires an rng")
        column_offsets = tuple(rng.uniform(*offset_range, size=2))
    region = Region(np.array(REGION_LO), np.array(REGION_HI))
    x1 = SLALOM_MID_X - column_separation / 2.0
    x2 = SLALOM_MID_X + column_separation / 2.0
    height = region.hi[2] - region.lo[2]
    mid_z = (region.hi[2] + region.lo[2]) / 2.0
    columns = tuple(
        Cylinder(center=np.array([x, y, mid_z]), radius=SLALOM_COLUMN_RADIUS, height=height)
        for x, y in ((x1, column_offsets[0]), (x2, column_offsets[1]))
    )
    return Scene(
        scene_type="slalom_path",
        obstacles=columns,
        start_position=np.array(START_POSITION),
        goal_position=np.array(SLALOM_GOAL),
        goal_attitude=np.eye(3),
        flight_region=region,
        obstacle_params={
            "column_x": (x1, x2),
            "column_y": (float(column_offsets[0]), float(column_offsets[1])),
            "separation": float(column_separation),
        },
        goal_radius=goal_radius,
        max_episode_steps=max_episode_steps,
    )


def _point_obstacle_distance(point: np.ndarray, obstacle) -> float:
    if isinstance(obstacle, Box):
        excess = np.maximum(np.abs(point - obstacle.center) - obstacle.half_extents, 0.0)
        return float(np.linalg.norm(excess))
    if isinstance(obstacle, Cylinder):
        d = point - obstacle.center
        radial = max(float(np.hypot(d[0], d[1])) - obstacle.radius, 0.0)
        axial = max(abs(float(d[2])) - obstacle.height / 2.0, 0.0)
        return float(np.hypot(radial, axial))
    raise TypeError(f"unsupported obstacle {type(obstacle).__name__}")


def _corridor_points(waypoints: np.ndarray) -> np.ndarray:
    points = [waypoints[0]]
    for a, b in zip(waypoints[:-1], waypoints[1:]):
        length = float(np.linalg.norm(b - a))
        n = max(int(np.ceil(length / CORRIDOR_STEP)), 1)
        for k in range(1, n + 1):
            points.append(a + (b - a) * (k / n))
    return np.asarray(points)


def _corridor_clear(waypoints: np.ndarray, obstacles, clearance: float) -> bool:
    for point in _corridor_points(waypoints):
        for obstacle in obstacles:
            if _point_obstacle_distance(point, obstacle) < clearance:
                return False
    return True


def check_corridor_feasibility(scene: Scene, ellipsoid: EllipsoidModel) -> bool:
    """Verify the stored corridor with the collision machinery itself.

    Sweeps a ball of radius radius_l (a conservative envelope covering the
    body ellipsoid at every attitude) along the corridor and requires zero
    intersection fraction at every sample point.
    """
    if scene.feasible_corridor is None:
        return False
    ball = unit_ball_points(512) * ellipsoid.radius_l
    for point in _corridor_points(scene.feasible_corridor):
        cloud = PointCloud(points=ball + point)
        if intersection_fraction(cloud, scene.obstacles) > 0.0:
            return False
    return True


def make_unstructured_scene(
    seed: int,
    obstacle_count: Optional[int] = None,
    *,
    count_range: tuple[int, int] = (3, 6),
    ellipsoid: Optional[EllipsoidModel] = None,
    goal_radius: float = 0.3,
    max_episode_steps: int = 300,
) -> Scene:
    """Randomized boxes and columns with a certified free corridor.

    The generator resamples the layout until some start-to-goal corridor
    (straight line or one intermediate waypoint) keeps a conservative
    clearance of radius_l + margin everywhere; the corridor that passed is
    stored on the scene as the feasibility certificate.
    """
    if ellipsoid is None:
        ellipsoid = EllipsoidModel()
    if count_range[0] < 1 or count_range[1] > UNSTRUCTURED_MAX_OBSTACLES:
        raise ValueError(f"count_range must lie within [1, {UNSTRUCTURED_MAX_OBSTACLES}]")
    rng = np.random.default_rng(seed)
    region = Region(np.array(REGION_LO), np.array(REGION_HI))
    start = np.array(START_POSITION)
    clearance = ellipsoid.radius_l + CORRIDOR_MARGIN

    for _ in range(GENERATOR_RETRIES):
        count = (
            int(obstacle_count)
            if obstacle_count is not None
            else int(rng.integers(count_range[0], count_range[1] + 1))
        )
        goal = np.array(
            [
                rng.uniform(*UNSTRUCTURED_GOAL_X),
                rng.uniform(-1.2, 1.2),
                rng.uniform(0.9, 2.1),
            ]
        )
        obstacles = []
        guard = 0
        while len(obstacles) < count and guard < 200:
            guard += 1
            center_xy = np.array(
                [rng.uniform(*UNSTRUCTURED_OBSTACLE_X), rng.uniform(-1.5, 1.5)]
            )
            if rng.random() < 0.5:
                half = rng.uniform(0.1, 0.4, size=3)
                cz = rng.uniform(region.lo[2] + half[2], region.hi[2] - half[2])
                candidate = Box(
                    center=np.array([center_xy[0], center_xy[1], cz]), half_extents=half
                )
            else:
                radius = rng.uniform(0.1, 0.3)
                height = rng.uniform(1.0, region.hi[2] - region.lo[2])
                cz = rng.uniform(region.lo[2] + height / 2.0, region.hi[2] - height / 2.0)
                candidate = Cylinder(
                    center=np.array([center_xy[0], center_xy[1], cz]),
                    radius=radius,
                    height=height,
                )
            if (
                _point_obstacle_distance(start, candidate) >= UNSTRUCTURED_CLEARANCE
                and _point_obstacle_distance(goal, candidate) >= UNSTRUCTURED_CLEARANCE
            ):
                obstacles.append(candidate)
        if len(obstacles) < count:
            continue

        candidates = [np.array([start, goal])]
        for _ in range(CORRIDOR_TRIES):
            waypoint = np.array(
                [
                    rng.uniform(1.0, 3.0),
                    rng.uniform(-1.6, 1.6),
                    rng.uniform(0.4, 2.6),
                ]
            )
            candidates.append(np.array([start, waypoint, goal]))
        corridor = next(
            (c for c in candidates if _corridor_clear(c, obstacles, clearance)), None
        )
        if corridor is None:
            continue

        return Scene(
            scene_type="unstructured",
            obstacles=tuple(obstacles),
            start_position=start,
            goal_position=goal,
            goal_attitude=np.eye(3),
            flight_region=region,
            obstacle_params={"seed": int(seed), "count": count},
            goal_radius=goal_radius,
            max_episode_steps=max_episode_steps,
            feasible_corridor=corridor,
        )
    raise SceneGenerationError(f"no feasible layout found for seed {seed}")


@dataclass(frozen=True)
class SceneConfig:
    """Declarative scene family: either pinned parameters or draw ranges.

    With randomize=True each call to sample_scene draws fresh obstacle
    parameters (window pose, column offsets, or a generator seed); with
    randomize=False the pinned values are used verbatim, range checks off,
    so evaluation can deliberately construct out-of-range scenes.
    """

    scene_type: str = "narrow_window"
    randomize: bool = True
    angle: float = 0.3
    distance: float = 0.0
    angle_range: tuple[float, float] = WINDOW_ANGLE_RANGE
    distance_range: tuple[float, float] = WINDOW_DISTANCE_RANGE
    column_separation: float = 1.5
    column_offsets: tuple[float, float] = (0.0, 0.0)
    column_offset_range: tuple[float, float] = SLALOM_OFFSET_RANGE
    seed: int = 0
    obstacle_count_range: tuple[int, int] = (3, 6)
    goal_radius: float = 0.3
    max_episode_steps: int = 300

    def __post_init__(self) -> None:
        if self.scene_type not in SCENE_TYPES:
            raise ValueError(f"unknown scene type {self.scene_type!r}")


def sample_scene(config: SceneConfig, rng: Optional[np.random.Generator] = None) -> Scene:
    """Realize one scene from the family description."""
    if config.randomize and rng is None:
        raise ValueError("randomized scene families need an rng")
    common = dict(
        goal_radius=config.goal_radius, max_episode_steps=config.max_episode_steps
    )
    if config.scene_type == "narrow_window":
        if config.randomize:
            return make_window_scene(
                None,
                None,
                rng,
                angle_range=config.angle_range,
                distance_range=config.distance_range,
                **common,
            )
        return make_window_scene(
            config.angle, config.distance, angle_range=None, distance_range=None, **common
        )
    if config.scene_type == "slalom_path":
        return make_slalom_scene(
            config.column_separation,
            None if config.randomize else config.column_offsets,
            rng,
            offset_range=config.column_offset_range,
            **common,
        )
    seed = int(rng.integers(2**31 - 1)) if config.randomize else config.seed
    return make_unstructured_scene(seed, count_range=config.obstacle_count_range, **common)


def check_termination(
    state,
    scene: Scene,
    step: int,
    ellipsoid: EllipsoidModel,
    progress: Optional[SlalomProgress] = None,
) -> Optional[TerminationEvent]:
    """Evaluate the termination rule at the current state.

    Priority: collision > out_of_region > goal_reached > step_limit. Returns
    None while the episode continues.
    """
    cloud = ellipsoid_points(ellipsoid, state.position, state.attitude)
    if intersection_fraction(cloud, scene.obstacles) > 0.0:
        return TerminationEvent("collision", step)
    if not scene.flight_region.contains(state.position):
        return TerminationEvent("out_of_region", step)
    at_goal = np.linalg.norm(state.position - scene.goal_position) <= scene.goal_radius
    if at_goal and (progress is None or progress.satisfied()):
        return TerminationEvent("goal_reached", step)
    if step >= scene.max_episode_steps:
        return TerminationEvent("step_limit", step)
    return None
