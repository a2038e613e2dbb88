"""Exploration rollouts: plain action noise and branch-structure episodes.

Standard policy exploration (SPE) perturbs every action with Gaussian noise.
Branch-structure exploration (BSE) widens the visited-state distribution
instead of just the action distribution: the episode starts with a segment
under the baseline noisy policy whose states are recorded as branch points;
one is chosen uniformly, the environment is rewound to it, a short branch is
flown with elevated noise, and the episode then continues under the baseline
policy from wherever the branch ended. Transitions from all segments are
kept, so the replay stream contains both on-policy behaviour and the
perturbed reachable set around it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .envs import ACTION_DIM, ActionSpace, Episode, EpisodeRecorder, FlightEnv

STRATEGIES = ("spe", "bse")


@dataclass(frozen=True)
class ExplorationConfig:
    strategy: str = "bse"
    noise_std: float = 0.1
    init_steps: int = 30
    branch_count: int = 1
    branch_length: int = 15
    branch_noise_std: float = 0.3

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown exploration strategy {self.strategy!r}")
        if self.noise_std < 0.0 or self.branch_noise_std < 0.0:
            raise ValueError("noise levels must be non-negative")
        if self.init_steps < 0:
            raise ValueError("init_steps must be non-negative")
        if self.strategy == "bse" and self.branch_count < 1:
            raise ValueError("bse needs branch_count >= 1")
        if self.strategy == "bse" and self.branch_length < 1:
            raise ValueError("bse needs branch_length >= 1")


def noisy_action(policy_action: np.ndarray, noise_std: float, rng: np.random.Generator) -> np.ndarray:
    """Gaussian action-space noise, re-clipped to the box bounds."""
    a = policy_action + rng.normal(0.0, noise_std, size=ACTION_DIM)
    return np.clip(a, -1.0, 1.0)


def attitude_noise(
    action: np.ndarray,
    std_deg: float,
    rng: np.random.Generator,
    action_space: ActionSpace = ActionSpace(),
) -> np.ndarray:
    """Perturb the attitude angles of an action by Gaussian noise in degrees.

    Models imperfect attitude tracking during evaluation: roll, pitch and yaw
    each receive independent noise of the given standard deviation; thrust is
    untouched. The result is re-clipped, so reconstruction still yields a
    valid rotation. std_deg = 0 returns the action unchanged.
    """
    if std_deg < 0.0:
        raise ValueError("std_deg must be non-negative")
    out = np.asarray(action, dtype=float).copy()
    if std_deg == 0.0:
        return out
    noise_deg = rng.normal(0.0, std_deg, size=3)
    out[:3] = np.clip(out[:3] + noise_deg / action_space.angle_scales_deg, -1.0, 1.0)
    return out


def rollout_spe(policy, env: FlightEnv, config: ExplorationConfig, rng: np.random.Generator) -> Episode:
    """One episode under the policy with baseline Gaussian action noise."""
    obs = env.reset(rng)
    recorder = EpisodeRecorder(env.state)
    while True:
        action = noisy_action(policy(obs), config.noise_std, rng)
        result = env.step(action)
        recorder.record(obs, action, result)
        obs = result.observation
        if result.event is not None:
            return recorder.finish(result.event.cause)


def rollout_bse(policy, env: FlightEnv, config: ExplorationConfig, rng: np.random.Generator) -> Episode:
    """One branch-structure episode.

    Runs init_steps under baseline noise while snapshotting every visited
    state, then for each branch rewinds to a uniformly chosen snapshot and
    applies branch_noise_std for up to branch_length steps; finally continues
    under baseline noise until termination. Terminating inside any segment
    ends the episode immediately.
    """
    obs = env.reset(rng)
    recorder = EpisodeRecorder(env.state)
    snapshots = [env.snapshot()]

    for _ in range(config.init_steps):
        action = noisy_action(policy(obs), config.noise_std, rng)
        result = env.step(action)
        recorder.record(obs, action, result)
        obs = result.observation
        if result.event is not None:
            return recorder.finish(result.event.cause)
        snapshots.append(env.snapshot())

    for _ in range(config.branch_count):
        pick = int(rng.integers(len(snapshots)))
        obs = env.restore(snapshots[pick])
        for _ in range(config.branch_length):
            action = noisy_action(policy(obs), config.branch_noise_std, rng)
            result = env.step(action)
            recorder.record(obs, action, result)
            obs = result.observation
            if result.event is not None:
                return recorder.finish(result.event.cause)

    while True:
        action = noisy_action(policy(obs), config.noise_std, rng)
        result = env.step(action)
        recorder.record(obs, action, result)
        obs = result.observation
        if result.event is not None:
            return recorder.finish(result.event.cause)


def rollout(policy, env: FlightEnv, config: ExplorationConfig, rng: np.random.Generator) -> Episode:
    if config.strategy == "spe":
        return rollout_spe(policy, env, config, rng)
    return rollout_bse(policy, env, config, rng)
