"""Twin-delayed deterministic policy-gradient learner.

Two critics are regressed onto the shared target

    G = v + gamma * (1 - terminal) * min(Q'_1, Q'_2)(s', pi'(s') + eps),

where eps is clipped Gaussian target-policy smoothing noise and v is either
the one-step reward or a within-episode discounted return (selectable).
Taking the pairwise minimum counters overestimation; the actor follows the
deterministic policy gradient through the first critic and is updated only
every policy_delay critic updates, together with the Polyak-averaged targets

    theta' <- rho * theta + (1 - rho) * theta'.

Training is episodic: a rollout is collected by the exploration module, the
curiosity bonus is folded into the terminal transition, all transitions are
stored, and then one critic update per environment step is performed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .curiosity import (
    EpisodeMemory,
    channels_from_states,
    curiosity_reward,
    record_episode,
)
from .envs import ACTION_DIM, Episode, FlightEnv
from .exploration import ExplorationConfig, rollout
from .networks import (
    AdamState,
    MlpSpec,
    ParameterSet,
    adam_step,
    backward_from_trace,
    forward,
    forward_trace,
    init_params,
    input_gradient_from_trace,
    make_adam,
    params_from_bytes,
    params_to_bytes,
)

TARGET_VALUE_MODES = ("one_step", "mc_return")

_BUNDLE_MAGIC = b"CFTD"
_BUNDLE_VERSION = 1


@dataclass(frozen=True)
class TD3Config:
    # Defaults are tuned for the desk-scale scenes: episodes are a few hundred
    # steps, rewards arrive only at termination, and the whole run has to fit
    # in a CPU-hour, which favours Monte-Carlo targets, a discount that still
    # carries terminal signal back to the first step, and compact networks.
    gamma: float = 0.995
    rho: float = 0.005
    policy_delay: int = 2
    batch_size: int = 128
    buffer_capacity: int = 200_000
    warmup: int = 1000
    actor_lr: float = 3e-4
    critic_lr: float = 3e-4
    smoothing_std: float = 0.2
    smoothing_clip: float = 0.5
    target_value_mode: str = "mc_return"
    hidden: tuple[int, ...] = (128, 128)
    actor_final_scale: float = 0.01

    def __post_init__(self) -> None:
        if not (0.0 <= self.gamma <= 1.0):
            raise ValueError("gamma must lie in [0, 1]")
        if not (0.0 < self.rho <= 1.0):
            raise ValueError("rho must lie in (0, 1]")
        if self.policy_delay < 1:
            raise ValueError("policy_delay must be at least 1")
        if self.batch_size < 1 or self.buffer_capacity < 1:
            raise ValueError("batch_size and buffer_capacity must be positive")
        if self.warmup < 0:
            raise ValueError("warmup must be non-negative")
        if self.smoothing_std < 0.0 or self.smoothing_clip < 0.0:
            raise ValueError("smoothing parameters must be non-negative")
        if self.target_value_mode not in TARGET_VALUE_MODES:
            raise ValueError(f"target_value_mode must be one of {TARGET_VALUE_MODES}")


@dataclass
class Batch:
    observations: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_observations: np.ndarray
    terminals: np.ndarray
    mc_returns: np.ndarray


class ReplayBuffer:
    """Fixed-capacity ring buffer over preallocated float32 arrays."""

    def __init__(self, capacity: int, obs_dim: int, action_dim: int = ACTION_DIM):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.observations = np.zeros((capacity, obs_dim), dtype=np.float32)
        self.actions = np.zeros((capacity, action_dim), dtype=np.float32)
        self.rewards = np.zeros(capacity, dtype=np.float32)
        self.next_observations = np.zeros((capacity, obs_dim), dtype=np.float32)
        self.terminals = np.zeros(capacity, dtype=np.float32)
        self.mc_returns = np.zeros(capacity, dtype=np.float32)
        self.index = 0
        self.size = 0

    def __len__(self) -> int:
        return self.size

    def add(self, obs, action, reward, next_obs, terminal, mc_return) -> None:
        i = self.index
        self.observations[i] = obs
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_observations[i] = next_obs
        self.terminals[i] = 1.0 if terminal else 0.0
        self.mc_returns[i] = mc_return
        self.index = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, rng: np.random.Generator, batch_size: int) -> Batch:
        """Uniform-with-replacement minibatch."""
        if self.size == 0:
            raise ValueError("cannot sample from an empty buffer")
        idx = rng.integers(0, self.size, size=batch_size)
        return Batch(
            observations=self.observations[idx],
            actions=self.actions[idx],
            rewards=self.rewards[idx],
            next_observations=self.next_observations[idx],
            terminals=self.terminals[idx],
            mc_returns=self.mc_returns[idx],
        )


@dataclass
class LearnerBundle:
    """Live and target networks, optimizer states and the update counter."""

    actor_spec: MlpSpec
    critic_spec: MlpSpec
    actor: ParameterSet
    critic1: ParameterSet
    critic2: ParameterSet
    target_actor: ParameterSet
    target_critic1: ParameterSet
    target_critic2: ParameterSet
    opt_actor: AdamState
    opt_critic1: AdamState
    opt_critic2: AdamState
    config: TD3Config
    noise_rng: np.random.Generator
    step_count: int = 0

    @property
    def obs_dim(self) -> int:
        return self.actor_spec.input_dim


def make_bundle(obs_dim: int, config: TD3Config, rng: np.random.Generator) -> LearnerBundle:
    """Fresh learner: bounded actor, linear critics, targets equal to live."""
    actor_spec = MlpSpec(
        input_dim=obs_dim,
        output_dim=ACTION_DIM,
        hidden=config.hidden,
        output_activation="bounded",
    )
    critic_spec = MlpSpec(
        input_dim=obs_dim + ACTION_DIM,
        output_dim=1,
        hidden=config.hidden,
        output_activation="identity",
    )
    actor = init_params(actor_spec, rng, final_layer_scale=config.actor_final_scale)
    critic1 = init_params(critic_spec, rng)
    critic2 = init_params(critic_spec, rng)
    return LearnerBundle(
        actor_spec=actor_spec,
        critic_spec=critic_spec,
        actor=actor,
        critic1=critic1,
        critic2=critic2,
        target_actor=actor.copy(),
        target_critic1=critic1.copy(),
        target_critic2=critic2.copy(),
        opt_actor=make_adam(actor_spec.param_count),
        opt_critic1=make_adam(critic_spec.param_count),
        opt_critic2=make_adam(critic_spec.param_count),
        config=config,
        noise_rng=rng,
    )


def make_policy(bundle: LearnerBundle):
    """Deterministic policy closure over the live actor parameters."""

    def policy(obs: np.ndarray) -> np.ndarray:
        return forward(bundle.actor_spec, bundle.actor.values, obs)

    return policy


def compute_target(bundle: LearnerBundle, batch: Batch) -> np.ndarray:
    """Regression target for a batch.

    In mc_return mode the stored discounted tail already estimates the value
    of the remainder of the episode, so it is the target as-is; bootstrapping
    a critic estimate on top of it would count the tail twice. In one_step
    mode this is the standard clipped double-Q target.
    """
    cfg = bundle.config
    if cfg.target_value_mode == "mc_return":
        return batch.mc_returns.astype(np.float64)
    next_action = forward(bundle.actor_spec, bundle.target_actor.values, batch.next_observations)
    if cfg.smoothing_std > 0.0:
        noise = bundle.noise_rng.normal(
            0.0, cfg.smoothing_std, size=next_action.shape
        ).astype(np.float32)
        np.clip(noise, -cfg.smoothing_clip, cfg.smoothing_clip, out=noise)
        next_action = np.clip(next_action + noise, -1.0, 1.0)
    x = np.concatenate([batch.next_observations, next_action], axis=1)
    q1 = forward(bundle.critic_spec, bundle.target_critic1.values, x)[:, 0]
    q2 = forward(bundle.critic_spec, bundle.target_critic2.values, x)[:, 0]
    return batch.rewards + cfg.gamma * (1.0 - batch.terminals) * np.minimum(q1, q2)


def critic_update(bundle: LearnerBundle, batch: Batch) -> float:
    """One mean-squared regression step of both critics onto the shared target."""
    targets = compute_target(bundle, batch)
    x = np.concatenate([batch.observations, batch.actions], axis=1)
    n = x.shape[0]
    loss = 0.0
    for critic, opt in (
        (bundle.critic1, bundle.opt_critic1),
        (bundle.critic2, bundle.opt_critic2),
    ):
        out, trace = forward_trace(bundle.critic_spec, critic.values, x)
        residual = out[:, 0] - targets
        loss += float(np.mean(residual**2))
        gout = (2.0 / n) * residual[:, None]
        gparams, _ = backward_from_trace(bundle.critic_spec, critic.values, trace, gout)
        adam_step(critic, gparams, opt, bundle.config.critic_lr)
    return loss / 2.0


def soft_update(target: ParameterSet, live: ParameterSet, rho: float) -> None:
    """Polyak average: target <- rho * live + (1 - rho) * target, in place."""
    target.values *= 1.0 - rho
    target.values += rho * live.values


def actor_and_target_update(bundle: LearnerBundle, batch: Batch) -> None:
    """Deterministic policy-gradient ascent on Q1, then target averaging."""
    obs = batch.observations
    n = obs.shape[0]
    action, trace_a = forward_trace(bundle.actor_spec, bundle.actor.values, obs)
    x = np.concatenate([obs, action], axis=1)
    _, trace_c = forward_trace(bundle.critic_spec, bundle.critic1.values, x)
    gout = np.full((n, 1), -1.0 / n, dtype=x.dtype)
    gx = input_gradient_from_trace(bundle.critic_spec, bundle.critic1.values, trace_c, gout)
    gaction = gx[:, obs.shape[1] :]
    gparams, _ = backward_from_trace(bundle.actor_spec, bundle.actor.values, trace_a, gaction)
    adam_step(bundle.actor, gparams, bundle.opt_actor, bundle.config.actor_lr)
    rho = bundle.config.rho
    soft_update(bundle.target_actor, bundle.actor, rho)
    soft_update(bundle.target_critic1, bundle.critic1, rho)
    soft_update(bundle.target_critic2, bundle.critic2, rho)


def learner_step(bundle: LearnerBundle, buffer: ReplayBuffer, rng: np.random.Generator):
    """One critic update; every policy_delay-th call also updates actor/targets."""
    batch = buffer.sample(rng, bundle.config.batch_size)
    loss = critic_update(bundle, batch)
    bundle.step_count += 1
    actor_updated = bundle.step_count % bundle.config.policy_delay == 0
    if actor_updated:
        actor_and_target_update(bundle, batch)
    return loss, actor_updated


def discounted_tails(rewards: np.ndarray, gamma: float) -> np.ndarray:
    """Within-episode discounted return from each step to the episode end."""
    tails = np.empty_like(rewards, dtype=np.float64)
    acc = 0.0
    for i in range(len(rewards) - 1, -1, -1):
        acc = rewards[i] + gamma * acc
        tails[i] = acc
    return tails


def store_episode(buffer: ReplayBuffer, episode: Episode, gamma: float) -> None:
    """Append all transitions; only the final one is terminal."""
    tails = discounted_tails(episode.rewards, gamma)
    last = len(episode) - 1
    for t in range(len(episode)):
        buffer.add(
            episode.observations[t],
            episode.actions[t],
            episode.rewards[t],
            episode.next_observations[t],
            t == last,
            tails[t],
        )


@dataclass
class EpisodeStats:
    episode: int
    episode_return: float
    length: int
    cause: str
    curiosity: float
    critic_loss: float
    updates: int
    buffer_size: int
    dtw_seconds: float


def train_episode(
    bundle: LearnerBundle,
    env: FlightEnv,
    exploration: ExplorationConfig,
    memory: EpisodeMemory,
    buffer: ReplayBuffer,
    rng: np.random.Generator,
    distance_cap: float = 5.0,
    max_channel_samples: int = 200,
    episode_index: int = 0,
) -> EpisodeStats:
    """Collect one exploration episode, attach curiosity, store, update.

    The curiosity bonus lambda_c * r_cur is added to the terminal transition
    before storage, then one critic update runs per environment step taken
    (delayed actor/target updates inside), gated on the warmup fill level.
    """
    episode = rollout(make_policy(bundle), env, exploration, rng)
    t0 = time.perf_counter()
    channels = channels_from_states(
        episode.states, env.scene.flight_region, max_channel_samples
    )
    novelty = curiosity_reward(channels, memory, distance_cap)
    dtw_seconds = time.perf_counter() - t0
    record_episode(memory, channels)
    episode.rewards[-1] += env.base_weights.lambda_curiosity * novelty
    store_episode(buffer, episode, bundle.config.gamma)

    losses = []
    updates = 0
    if len(buffer) >= bundle.config.warmup:
        for _ in range(len(episode)):
            loss, _ = learner_step(bundle, buffer, rng)
            losses.append(loss)
            updates += 1
    return EpisodeStats(
        episode=episode_index,
        episode_return=episode.episode_return,
        length=len(episode),
        cause=episode.cause,
        curiosity=novelty,
        critic_loss=float(np.mean(losses)) if losses else float("nan"),
        updates=updates,
        buffer_size=len(buffer),
        dtw_seconds=dtw_seconds,
    )


def save_bundle(path, bundle: LearnerBundle) -> None:
    """Write the six networks, optimizer states and step counter.

    Layout: magic, version u32, step_count u64, six network blocks (actor,
    critic1, critic2, then their targets), three optimizer blocks (actor,
    critic1, critic2) as u64 t + f32 m + f32 v. Written atomically.
    """
    import os
    import struct

    parts = [_BUNDLE_MAGIC, struct.pack("<IQ", _BUNDLE_VERSION, bundle.step_count)]
    for spec, params in (
        (bundle.actor_spec, bundle.actor),
        (bundle.critic_spec, bundle.critic1),
        (bundle.critic_spec, bundle.critic2),
        (bundle.actor_spec, bundle.target_actor),
        (bundle.critic_spec, bundle.target_critic1),
        (bundle.critic_spec, bundle.target_critic2),
    ):
        parts.append(params_to_bytes(spec, params, bundle.step_count))
    for opt in (bundle.opt_actor, bundle.opt_critic1, bundle.opt_critic2):
        parts.append(struct.pack("<QQ", opt.t, opt.m.shape[0]))
        parts.append(opt.m.astype("<f4", copy=False).tobytes())
        parts.append(opt.v.astype("<f4", copy=False).tobytes())
    blob = b"".join(parts)
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(blob)
    os.replace(tmp, path)


def load_bundle(path, config: TD3Config, noise_rng: np.random.Generator) -> LearnerBundle:
    """Read a bundle written by save_bundle; specs come from the file."""
    import struct

    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:4] != _BUNDLE_MAGIC:
        raise ValueError("not a learner checkpoint")
    version, step_count = struct.unpack_from("<IQ", buf, 4)
    if version != _BUNDLE_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    offset = 16
    nets = []
    for _ in range(6):
        spec, params, _, offset = params_from_bytes(buf, offset)
        nets.append((spec, params))
    opts = []
    for _ in range(3):
        t, n = struct.unpack_from("<QQ", buf, offset)
        offset += 16
        m = np.frombuffer(buf, dtype="<f4", count=n, offset=offset).copy()
        offset += 4 * n
        v = np.frombuffer(buf, dtype="<f4", count=n, offset=offset).copy()
        offset += 4 * n
        opts.append(AdamState(m=m, v=v, t=int(t)))
    actor_spec = nets[0][0]
    critic_spec = nets[1][0]
    return LearnerBundle(
        actor_spec=actor_spec,
        critic_spec=critic_spec,
        actor=nets[0][1],
        critic1=nets[1][1],
        critic2=nets[2][1],
        target_actor=nets[3][1],
        target_critic1=nets[4][1],
        target_critic2=nets[5][1],
        opt_actor=opts[0],
        opt_critic1=opts[1],
        opt_critic2=opts[2],
        config=config,
        noise_rng=noise_rng,
        step_count=int(step_count),
    )
