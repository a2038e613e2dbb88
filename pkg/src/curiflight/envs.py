"""Markov decision process glue: observations, actions and the episode loop.

Observations are normalized feature vectors: region-centred position scaled
by the region half-extents, the raw rotation matrix entries, velocity scaled
by a nominal top speed, then the scene's obstacle parameters divided by their
declared scales. Policy actions are 4-vectors in [-1, 1]^4 mapped to a
commanded attitude (roll, pitch, yaw through a ZYX Euler composition) and a
thrust fraction.

The environment is deliberately strict about termination: once an episode
ends the caller must reset. State snapshots capture pose and task progress
but not the step counter, so restored branches still count against the same
episode step budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from . import dynamics
from .curiosity import VELOCITY_SCALE
from .dynamics import AttitudeThrustAction, QuadParams, QuadState
from .geometry import EllipsoidModel
from .rewards import RewardWeights, extrinsic_reward, goal_reward
from .scenes import Scene, SlalomProgress, TerminationEvent, check_termination

ACTION_DIM = 4


@dataclass(frozen=True)
class ActionSpace:
    """Mapping from normalized policy outputs to attitude-thrust setpoints.

    action[0:2] are roll and pitch in units of max_tilt_deg, action[2] is yaw
    in units of max_yaw_deg, action[3] maps [-1, 1] onto thrust fraction
    [0, 1].
    """

    max_tilt_deg: float = 60.0
    max_yaw_deg: float = 180.0

    def __post_init__(self) -> None:
        if not (0.0 < self.max_tilt_deg <= 90.0):
            raise ValueError("max_tilt_deg must lie in (0, 90]")
        if not (0.0 < self.max_yaw_deg <= 180.0):
            raise ValueError("max_yaw_deg must lie in (0, 180]")

    @property
    def angle_scales_deg(self) -> np.ndarray:
        return np.array([self.max_tilt_deg, self.max_tilt_deg, self.max_yaw_deg])

    def command(self, action: np.ndarray, params: QuadParams) -> AttitudeThrustAction:
        a = np.clip(np.asarray(action, dtype=float), -1.0, 1.0)
        if a.shape != (ACTION_DIM,):
            raise ValueError(f"action must have shape ({ACTION_DIM},)")
        roll, pitch = np.radians(a[:2] * self.max_tilt_deg)
        yaw = np.radians(a[2] * self.max_yaw_deg)
        thrust = (a[3] + 1.0) / 2.0 * params.thrust_max
        return AttitudeThrustAction(
            commanded_attitude=euler_zyx(roll, pitch, yaw), thrust=float(thrust)
        )


def euler_zyx(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    cr, sr = np.cos(roll), np.sin(roll)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cy, sy = np.cos(yaw), np.sin(yaw)
    return np.array(
        [
            [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
            [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
            [-sp, cp * sr, cp * cr],
        ]
    )


def observe(state: QuadState, scene: Scene) -> np.ndarray:
    """Normalized observation vector for a state in a scene (float32)."""
    region = scene.flight_region
    position = (state.position - region.center) / region.half
    velocity = state.linear_velocity / VELOCITY_SCALE
    obstacle = scene.obstacle_features() / scene.obstacle_feature_scales()
    return np.concatenate(
        [position, state.attitude.reshape(-1), velocity, obstacle]
    ).astype(np.float32)


def observation_dim(scene: Scene) -> int:
    return 15 + scene.obstacle_features().shape[0]


def denormalize_observation(obs: np.ndarray, scene: Scene) -> dict:
    """Recover raw features from an observation (inverse of observe)."""
    region = scene.flight_region
    obs = np.asarray(obs, dtype=float)
    return {
        "position": obs[0:3] * region.half + region.center,
        "attitude": obs[3:12].reshape(3, 3),
        "velocity": obs[12:15] * VELOCITY_SCALE,
        "obstacle_features": obs[15:] * scene.obstacle_feature_scales(),
    }


@dataclass(frozen=True)
class EnvSnapshot:
    """Restorable mid-episode point: pose, observation and task progress."""

    state: QuadState
    observation: np.ndarray
    progress: Optional[SlalomProgress]


@dataclass(frozen=True)
class StepResult:
    observation: np.ndarray
    reward: float
    event: Optional[TerminationEvent]
    state: QuadState


class FlightEnv:
    """Scene + vehicle dynamics + termination and terminal rewards.

    scene_source may be a fixed Scene or a callable rng -> Scene sampled at
    every reset. Rewards are 0 at every non-terminal step; terminal events
    pay the event-gated extrinsic reward, the success bonus at the goal, and
    the goal-distance term when the step budget runs out.
    """

    def __init__(
        self,
        scene_source: Union[Scene, Callable],
        params: QuadParams,
        ellipsoid: EllipsoidModel,
        weights: RewardWeights,
        action_space: ActionSpace = ActionSpace(),
    ):
        self._scene_source = scene_source
        self.params = params
        self.ellipsoid = ellipsoid
        self.base_weights = weights
        self.action_space = action_space
        self.scene: Optional[Scene] = None
        self.state: Optional[QuadState] = None
        self.weights: Optional[RewardWeights] = None
        self.progress: Optional[SlalomProgress] = None
        self.step_count = 0
        self.done = True

    def reset(self, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        if callable(self._scene_source):
            if rng is None:
                raise ValueError("a scene sampler needs an rng at reset")
            self.scene = self._scene_source(rng)
        else:
            self.scene = self._scene_source
        self.weights = self.base_weights.for_scene(self.scene)
        self.state = QuadState.at_rest(self.scene.start_position)
        self.progress = self.scene.make_progress()
        self.step_count = 0
        self.done = False
        return observe(self.state, self.scene)

    def step(self, action: np.ndarray) -> StepResult:
        if self.done:
            raise RuntimeError("episode finished; call reset() first")
        command = self.action_space.command(action, self.params)
        prev_position = self.state.position
        self.state = dynamics.step(self.state, command, self.params)
        self.step_count += 1
        if self.progress is not None:
            self.progress.update(prev_position, self.state.position)
        event = check_termination(
            self.state, self.scene, self.step_count, self.ellipsoid, self.progress
        )
        reward = 0.0
        if event is not None:
            self.done = True
            if event.cause == "step_limit":
                # Out of time: pay the goal-distance term, like leaving the
                # region, so idling never beats informative failures.
                reward = goal_reward(self.state, self.weights)
            else:
                reward = extrinsic_reward(
                    self.state, self.scene, self.ellipsoid, self.weights, event.cause
                )
                if event.cause == "goal_reached":
                    reward += self.weights.success_bonus
        return StepResult(
            observation=observe(self.state, self.scene),
            reward=float(reward),
            event=event,
            state=self.state,
        )

    def snapshot(self) -> EnvSnapshot:
        return EnvSnapshot(
            state=self.state,
            observation=observe(self.state, self.scene),
            progress=self.progress.copy() if self.progress is not None else None,
        )

    def restore(self, snap: EnvSnapshot) -> np.ndarray:
        """Rewind pose and progress; the step budget keeps counting."""
        if self.scene is None:
            raise RuntimeError("reset() before restore()")
        self.state = snap.state
        self.progress = snap.progress.copy() if snap.progress is not None else None
        self.done = False
        return snap.observation


@dataclass
class Episode:
    """Transitions of one episode in execution order.

    states holds the visited states (initial state plus one per step); with
    branched exploration the sequence can jump where the environment was
    rewound, so per-transition observation pairs are stored explicitly.
    """

    states: list
    observations: np.ndarray  # (T, obs_dim), observation before each step
    actions: np.ndarray  # (T, ACTION_DIM)
    rewards: np.ndarray  # (T,)
    next_observations: np.ndarray  # (T, obs_dim)
    cause: str

    def __len__(self) -> int:
        return self.actions.shape[0]

    @property
    def episode_return(self) -> float:
        return float(self.rewards.sum())


class EpisodeRecorder:
    """Accumulates transitions during a rollout."""

    def __init__(self, initial_state: QuadState):
        self.states = [initial_state]
        self.observations = []
        self.actions = []
        self.rewards = []
        self.next_observations = []

    def record(self, obs, action, result: StepResult) -> None:
        self.states.append(result.state)
        self.observations.append(np.asarray(obs, dtype=np.float32))
        self.actions.append(np.asarray(action, dtype=np.float32))
        self.rewards.append(result.reward)
        self.next_observations.append(result.observation)

    def finish(self, cause: str) -> Episode:
        return Episode(
            states=self.states,
            observations=np.asarray(self.observations, dtype=np.float32),
            actions=np.asarray(self.actions, dtype=np.float32),
            rewards=np.asarray(self.rewards, dtype=np.float64),
            next_observations=np.asarray(self.next_observations, dtype=np.float32),
            cause=cause,
        )
