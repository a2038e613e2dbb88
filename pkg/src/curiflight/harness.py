"""Run-level drivers: training loop, robustness evaluation, replay.

Everything here is deterministic given the run config. Wall-clock timings are
recorded under keys prefixed with ``wall_`` so downstream comparisons can
strip them; all other logged values reproduce bit-for-bit across runs with
the same config on the same machine.
"""

from __future__ import annotations

import csv
import json
import os
import time

import numpy as np

from .config import RunConfig, serialize_config
from .curiosity import EpisodeMemory, dtw_bruteforce_from_samples, dtw_from_samples
from .envs import FlightEnv, observe
from .exploration import attitude_noise
from .networks import layer_views
from .rewards import RewardWeights
from .scenes import sample_scene
from .td3 import (
    LearnerBundle,
    ReplayBuffer,
    load_bundle,
    make_bundle,
    make_policy,
    save_bundle,
    train_episode,
)

BRUTEFORCE_LIMIT = 8


def _ensure_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)


def build_env(config: RunConfig) -> FlightEnv:
    """Environment whose scenes are drawn per-reset from the scene config."""
    weights = RewardWeights(
        lambda_x=config.reward.lambda_x,
        lambda_r=config.reward.lambda_r,
        lambda_v=config.reward.lambda_v,
        lambda_omega=config.reward.lambda_omega,
        lambda_obstacle=config.reward.lambda_obstacle,
        lambda_curiosity=config.reward.lambda_curiosity,
        success_bonus=config.reward.success_bonus,
    )
    return FlightEnv(
        scene_source=lambda rng: sample_scene(config.scene, rng),
        params=config.quad,
        ellipsoid=config.body,
        weights=weights,
        action_space=config.action,
    )


def probe_observation_dim(config: RunConfig) -> int:
    env = build_env(config)
    obs = env.reset(np.random.default_rng(config.seed))
    return int(obs.shape[0])


def _bias_actor_toward_hover(bundle: LearnerBundle, config: RunConfig) -> None:
    """Bias the fresh actor's thrust output to the hover point.

    The action map centers thrust at half throttle, well above the weight of
    the airframe, so an untrained actor climbs out of the flight region within
    a second and every early episode terminates at the ceiling. Starting the
    thrust channel at hover keeps early rollouts inside the region where the
    exploration noise can actually sample the scene.
    """
    hover = 2.0 * config.quad.mass * config.quad.gravity / config.quad.thrust_max - 1.0
    bias = layer_views(bundle.actor_spec, bundle.actor.values)[-1][1]
    bias[3] = np.arctanh(hover)
    bundle.target_actor = bundle.actor.copy()


def smoothed_returns(returns, window: int):
    """Trailing mean over the last `window` episodes (shorter at the start)."""
    values = np.asarray(returns, dtype=np.float64)
    out = np.empty_like(values)
    cumulative = np.concatenate([[0.0], np.cumsum(values)])
    for i in range(len(values)):
        lo = max(0, i + 1 - window)
        out[i] = (cumulative[i + 1] - cumulative[lo]) / (i + 1 - lo)
    return out


def cmd_train(config: RunConfig, out_dir: str, quiet: bool = False) -> dict:
    """Train a policy per the config; write logs and checkpoints to out_dir.

    Produces:
      config_resolved.cfg   the exact config the run used
      train_log.jsonl       one JSON record per episode
      learning_curve.csv    wall_minutes, episode, smoothed_return
      checkpoint_ep*.bin    periodic snapshots
      checkpoint_final.bin  bundle after the last episode
    """
    _ensure_dir(out_dir)
    with open(os.path.join(out_dir, "config_resolved.cfg"), "w", encoding="utf-8") as fh:
        fh.write(serialize_config(config))

    seeds = np.random.SeedSequence(config.seed).spawn(2)
    init_rng = np.random.default_rng(seeds[0])
    train_rng = np.random.default_rng(seeds[1])

    obs_dim = probe_observation_dim(config)
    bundle = make_bundle(obs_dim, config.learner, init_rng)
    _bias_actor_toward_hover(bundle, config)
    env = build_env(config)
    memory = EpisodeMemory(config.curiosity.capacity)
    buffer = ReplayBuffer(config.learner.buffer_capacity, obs_dim)

    returns = []
    wall_marks = []
    started = time.perf_counter()
    log_path = os.path.join(out_dir, "train_log.jsonl")
    with open(log_path, "w", encoding="utf-8") as log:
        for episode in range(config.train.episodes):
            tick = time.perf_counter()
            stats = train_episode(
                bundle,
                env,
                config.explore,
                memory,
                buffer,
                train_rng,
                distance_cap=config.curiosity.distance_cap,
                max_channel_samples=config.curiosity.max_samples,
                episode_index=episode,
            )
            wall = time.perf_counter() - tick
            returns.append(stats.episode_return)
            wall_marks.append(time.perf_counter() - started)
            record = {
                "episode": episode,
                "return": stats.episode_return,
                "length": stats.length,
                "cause": stats.cause,
                "curiosity": stats.curiosity,
                "critic_loss": None if np.isnan(stats.critic_loss) else stats.critic_loss,
                "updates": stats.updates,
                "buffer_size": stats.buffer_size,
                "wall_seconds": wall,
                "wall_dtw_seconds": stats.dtw_seconds,
            }
            log.write(json.dumps(record) + "\n")
            if (episode + 1) % config.train.checkpoint_every == 0:
                save_bundle(
                    os.path.join(out_dir, f"checkpoint_ep{episode + 1:05d}.bin"), bundle
                )
            if not quiet and (episode + 1) % 50 == 0:
                recent = float(np.mean(returns[-50:]))
                print(
                    f"episode {episode + 1}/{config.train.episodes}"
                    f"  mean_return(50)={recent:.3f}  cause={stats.cause}",
                    flush=True,
                )

    final_path = os.path.join(out_dir, "checkpoint_final.bin")
    save_bundle(final_path, bundle)

    curve_path = os.path.join(out_dir, "learning_curve.csv")
    smooth = smoothed_returns(returns, config.train.smoothing_window) if returns else []
    with open(curve_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["wall_minutes", "episode", "smoothed_return"])
        for i, value in enumerate(smooth):
            writer.writerow([f"{wall_marks[i] / 60.0:.4f}", i, f"{value:.6f}"])

    return {
        "out_dir": out_dir,
        "episodes": config.train.episodes,
        "checkpoint": final_path,
        "final_smoothed_return": float(smooth[-1]) if len(smooth) else float("nan"),
        "returns": returns,
    }


def _load_bundle_for(config: RunConfig, checkpoint: str) -> LearnerBundle:
    noise_rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(2)[0])
    return load_bundle(checkpoint, config.learner, noise_rng)


def run_episode(env: FlightEnv, policy, rng, noise_deg: float = 0.0, action_space=None):
    """One deterministic-policy episode, optional commanded-attitude noise.

    Returns (cause, episode_return, steps, final_position_error).
    """
    space = action_space if action_space is not None else env.action_space
    obs = env.reset(rng)
    total = 0.0
    steps = 0
    cause = "step_limit"
    while True:
        action = policy(obs)
        if noise_deg > 0.0:
            action = attitude_noise(action, noise_deg, rng, space)
        result = env.step(action)
        total += result.reward
        steps += 1
        obs = result.observation
        if result.event is not None:
            cause = result.event.cause
            break
    error = float(np.linalg.norm(result.state.position - env.scene.goal_position))
    return cause, total, steps, error


def cmd_eval(
    config: RunConfig,
    checkpoint: str,
    out_dir: str,
    noise_levels=None,
    trials: int | None = None,
    quiet: bool = False,
) -> dict:
    """Evaluate a checkpoint across attitude-noise levels.

    Writes episodes.csv (per-trial rows) plus report.json / report.csv with
    per-level success_rate, avg_reward, and mean position error over the
    successful trials. Success rates are recomputable from episodes.csv.
    """
    _ensure_dir(out_dir)
    levels = tuple(config.eval.noise_deg if noise_levels is None else noise_levels)
    n_trials = config.eval.trials if trials is None else trials

    bundle = _load_bundle_for(config, checkpoint)
    policy = make_policy(bundle)
    env = build_env(config)

    rows = []
    report = []
    for level_idx, noise in enumerate(levels):
        causes = []
        rewards = []
        errors = []
        for trial in range(n_trials):
            rng = np.random.default_rng([config.seed, level_idx, trial])
            cause, total, steps, error = run_episode(env, policy, rng, noise_deg=noise)
            causes.append(cause)
            rewards.append(total)
            errors.append(error)
            rows.append(
                {
                    "noise_deg": noise,
                    "trial": trial,
                    "cause": cause,
                    "reward": total,
                    "steps": steps,
                    "position_error": error,
                }
            )
        success = np.asarray([c == "goal_reached" for c in causes], dtype=bool)
        level_report = {
            "noise_deg": noise,
            "trials": n_trials,
            "success_rate": float(np.mean(success)) if n_trials else float("nan"),
            "avg_reward": float(np.mean(rewards)) if n_trials else float("nan"),
            "position_error": float(np.mean(np.asarray(errors)[success]))
            if success.any()
            else float("nan"),
        }
        report.append(level_report)
        if not quiet:
            print(
                f"noise {noise:.1f} deg: success_rate={level_report['success_rate']:.3f}"
                f"  avg_reward={level_report['avg_reward']:.3f}",
                flush=True,
            )

    with open(os.path.join(out_dir, "episodes.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["noise_deg", "trial", "cause", "reward", "steps", "position_error"]
        )
        writer.writeheader()
        writer.writerows(rows)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump({"levels": report}, fh, indent=2)
        fh.write("\n")
    with open(os.path.join(out_dir, "report.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=["noise_deg", "trials", "success_rate", "avg_reward", "position_error"],
        )
        writer.writeheader()
        writer.writerows(report)
    return {"levels": report, "out_dir": out_dir}


def cmd_replay(config: RunConfig, checkpoint: str, out_path: str) -> dict:
    """Replay one deterministic episode and dump the trajectory as CSV."""
    bundle = _load_bundle_for(config, checkpoint)
    policy = make_policy(bundle)
    env = build_env(config)

    rng = np.random.default_rng(config.seed)
    obs = env.reset(rng)
    dt = config.quad.control_dt
    rows = []
    state = env.state
    rows.append(_trajectory_row(0, 0.0, state, None, 0.0, ""))
    step = 0
    while True:
        action = policy(obs)
        result = env.step(action)
        step += 1
        rows.append(
            _trajectory_row(
                step,
                step * dt,
                result.state,
                action,
                result.reward,
                "" if result.event is None else result.event.cause,
            )
        )
        obs = result.observation
        if result.event is not None:
            cause = result.event.cause
            break

    directory = os.path.dirname(out_path)
    if directory:
        _ensure_dir(directory)
    header = (
        ["step", "time", "x", "y", "z", "vx", "vy", "vz"]
        + [f"r{i}{j}" for i in range(3) for j in range(3)]
        + ["a0", "a1", "a2", "a3", "reward", "event"]
    )
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return {"steps": step, "cause": cause, "trajectory": out_path}


def _trajectory_row(step, t, state, action, reward, event):
    act = ["", "", "", ""] if action is None else [f"{a:.6f}" for a in action]
    return (
        [step, f"{t:.3f}"]
        + [f"{v:.6f}" for v in state.position]
        + [f"{v:.6f}" for v in state.linear_velocity]
        + [f"{v:.9f}" for v in state.attitude.reshape(-1)]
        + act
        + [f"{reward:.6f}", event]
    )


def _load_series(path: str) -> np.ndarray:
    data = np.loadtxt(path, delimiter="," if path.endswith(".csv") else None, ndmin=2)
    return np.ascontiguousarray(data, dtype=np.float64)


def cmd_dtw_oracle(file_a: str, file_b: str, quiet: bool = False) -> dict:
    """Compare the DTW recursion against exhaustive path search on two files.

    Each file holds one sample per row (whitespace or comma separated). The
    exhaustive check only runs when both series have at most 8 samples.
    """
    a = _load_series(file_a)
    b = _load_series(file_b)
    dp = dtw_from_samples(a, b)
    out = {"dp": dp, "bruteforce": None, "difference": None}
    if len(a) <= BRUTEFORCE_LIMIT and len(b) <= BRUTEFORCE_LIMIT:
        brute = dtw_bruteforce_from_samples(a, b)
        out["bruteforce"] = brute
        out["difference"] = abs(dp - brute)
    lines = [f"dp = {dp!r}"]
    if out["bruteforce"] is None:
        lines.append(
            f"bruteforce skipped: series longer than {BRUTEFORCE_LIMIT} samples"
        )
    else:
        lines.append(f"bruteforce = {out['bruteforce']!r}")
        lines.append(f"difference = {out['difference']!r}")
    if not quiet:
        print("\n".join(lines), flush=True)
    return out
