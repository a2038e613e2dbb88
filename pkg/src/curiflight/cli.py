"""Command line front end.

    curiflight train --config run.cfg --out runs/window
    curiflight eval  --config run.cfg --checkpoint runs/window/checkpoint_final.bin \
                     --out runs/window/eval --noise-deg 0 1.5 3 --trials 200
    curiflight replay --config run.cfg --checkpoint ... --out trajectory.csv
    curiflight dtw-oracle a.csv b.csv
"""

from __future__ import annotations

import argparse
import dataclasses

from . import harness
from .config import default_config, load_config, load_scene_config


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="run config file (defaults used if omitted)")
    parser.add_argument("--scene", help="scene config file overriding scene.* settings")
    parser.add_argument("--seed", type=int, help="override run.seed")


def _resolve_config(args):
    config = load_config(args.config) if args.config else default_config()
    if getattr(args, "scene", None):
        config = dataclasses.replace(config, scene=load_scene_config(args.scene))
    if getattr(args, "seed", None) is not None:
        config = dataclasses.replace(config, seed=args.seed)
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curiflight",
        description="Curiosity-driven reinforcement learning for quadrotor flight.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train a policy and write logs/checkpoints")
    _add_config_args(train)
    train.add_argument("--out", required=True, help="output directory")
    train.add_argument("--episodes", type=int, help="override train.episodes")

    evaluate = sub.add_parser("eval", help="evaluate a checkpoint under attitude noise")
    _add_config_args(evaluate)
    evaluate.add_argument("--checkpoint", required=True)
    evaluate.add_argument("--out", required=True, help="output directory")
    evaluate.add_argument(
        "--noise-deg", type=float, nargs="+", help="noise levels in degrees"
    )
    evaluate.add_argument("--trials", type=int, help="episodes per noise level")

    replay = sub.add_parser("replay", help="replay one episode to a trajectory CSV")
    _add_config_args(replay)
    replay.add_argument("--checkpoint", required=True)
    replay.add_argument("--out", required=True, help="trajectory CSV path")

    oracle = sub.add_parser(
        "dtw-oracle", help="check the DTW recursion against exhaustive search"
    )
    oracle.add_argument("file_a", help="first series, one sample per row")
    oracle.add_argument("file_b", help="second series, one sample per row")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "train":
        config = _resolve_config(args)
        if args.episodes is not None:
            config = dataclasses.replace(
                config, train=dataclasses.replace(config.train, episodes=args.episodes)
            )
        result = harness.cmd_train(config, args.out)
        print(f"final checkpoint: {result['checkpoint']}")
        return 0
    if args.command == "eval":
        config = _resolve_config(args)
        harness.cmd_eval(
            config,
            args.checkpoint,
            args.out,
            noise_levels=args.noise_deg,
            trials=args.trials,
        )
        return 0
    if args.command == "replay":
        config = _resolve_config(args)
        result = harness.cmd_replay(config, args.checkpoint, args.out)
        print(f"wrote {result['trajectory']} ({result['steps']} steps, {result['cause']})")
        return 0
    if args.command == "dtw-oracle":
        harness.cmd_dtw_oracle(args.file_a, args.file_b)
        return 0
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    raise SystemExit(main())
