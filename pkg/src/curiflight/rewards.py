"""Sparse extrinsic reward terms.

The goal term penalizes distance to the target pose and residual motion,

    r_goal = lx |X - X_g| + lr |R - R_g|_F + lv |V| + lw |omega|,

with all four weights non-positive, so 0 is the maximum and is attained
exactly at the goal pose at rest. The collision term is proportional to the
penetration fraction of the body point cloud. Extrinsic reward is event
gated: collisions and goal arrivals pay goal + collision terms, leaving the
flight region pays the goal term only, and every other step pays exactly 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import QuadState
from .geometry import EllipsoidModel, ellipsoid_points, intersection_fraction
from .scenes import Scene

EXTRINSIC_EVENTS = ("none", "collision", "goal_reached", "out_of_region")


@dataclass(frozen=True)
class RewardWeights:
    """Reward weights plus the goal pose they are measured against.

    Penalty weights must be non-positive; the curiosity weight non-negative.
    success_bonus is a flat terminal bonus the environment adds when the
    goal event fires (kept out of extrinsic_reward so the goal term's
    "0 at the exact goal" property is preserved).
    """

    lambda_x: float = -1.0
    lambda_r: float = -0.5
    lambda_v: float = -0.05
    lambda_omega: float = -0.02
    lambda_obstacle: float = -10.0
    lambda_curiosity: float = 4.0
    success_bonus: float = 6.0
    goal_position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    goal_attitude: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self) -> None:
        for name in ("lambda_x", "lambda_r", "lambda_v", "lambda_omega", "lambda_obstacle"):
            if getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be non-positive")
        if self.lambda_curiosity < 0.0:
            raise ValueError("lambda_curiosity must be non-negative")
        object.__setattr__(self, "goal_position", np.asarray(self.goal_position, dtype=float))
        object.__setattr__(self, "goal_attitude", np.asarray(self.goal_attitude, dtype=float))

    def for_scene(self, scene: Scene) -> "RewardWeights":
        """Same weights, goal pose taken from the scene."""
        return replace(
            self, goal_position=scene.goal_position, goal_attitude=scene.goal_attitude
        )


def goal_reward(state: QuadState, weights: RewardWeights) -> float:
    """Weighted distance-to-goal penalty; <= 0, equal to 0 at the goal at rest."""
    position_term = weights.lambda_x * float(np.linalg.norm(state.position - weights.goal_position))
    attitude_term = weights.lambda_r * float(
        np.linalg.norm(state.attitude - weights.goal_attitude)
    )
    velocity_term = weights.lambda_v * float(np.linalg.norm(state.linear_velocity))
    rate_term = weights.lambda_omega * float(np.linalg.norm(state.angular_velocity))
    return position_term + attitude_term + velocity_term + rate_term


def collision_reward(
    state: QuadState, scene: Scene, ellipsoid: EllipsoidModel, weights: RewardWeights
) -> float:
    """lambda_obstacle times the penetration fraction of the body cloud."""
    cloud = ellipsoid_points(ellipsoid, state.position, state.attitude)
    return weights.lambda_obstacle * intersection_fraction(cloud, scene.obstacles)


def extrinsic_reward(
    state: QuadState,
    scene: Scene,
    ellipsoid: EllipsoidModel,
    weights: RewardWeights,
    event: str,
) -> float:
    """Event-gated extrinsic reward.

    none -> 0; collision and goal_reached -> goal + collision terms;
    out_of_region -> goal term only. Unknown tags are rejected.
    """
    if event not in EXTRINSIC_EVENTS:
        raise ValueError(f"unknown event tag {event!r}")
    if event == "none":
        return 0.0
    if event == "out_of_region":
        return goal_reward(state, weights)
    return goal_reward(state, weights) + collision_reward(state, scene, ellipsoid, weights)
