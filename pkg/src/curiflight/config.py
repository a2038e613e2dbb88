"""Flat dotted-key run configuration.

The on-disk format is plain text, one `section.key = value` assignment per
line, `#` comment lines and blank lines ignored:

    learner.gamma = 0.99
    scene.type = narrow_window
    eval.noise_deg = 0.0, 1.5, 3.0

Every key is checked against the schema derived from the config dataclasses;
unknown keys, duplicate keys and ill-typed values are hard errors, so a typo
can never silently fall back to a default. serialize_config emits every key
in schema order and round-trips losslessly through parse_config.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, replace

import numpy as np

from .curiosity import CuriosityParams
from .dynamics import QuadParams
from .envs import ActionSpace
from .exploration import ExplorationConfig
from .geometry import EllipsoidModel
from .rewards import RewardWeights
from .scenes import SceneConfig
from .td3 import TD3Config


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    episodes: int = 2000
    checkpoint_every: int = 500
    smoothing_window: int = 50

    def __post_init__(self) -> None:
        if self.episodes < 0:
            raise ValueError("episodes must be non-negative")
        if self.checkpoint_every < 1 or self.smoothing_window < 1:
            raise ValueError("checkpoint_every and smoothing_window must be positive")


@dataclass(frozen=True)
class EvalConfig:
    noise_deg: tuple[float, ...] = (0.0, 1.5, 3.0)
    trials: int = 200

    def __post_init__(self) -> None:
        if any(n < 0.0 for n in self.noise_deg):
            raise ValueError("noise levels must be non-negative")
        if self.trials < 0:
            raise ValueError("trials must be non-negative")


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    quad: QuadParams = field(default_factory=QuadParams)
    body: EllipsoidModel = field(default_factory=EllipsoidModel)
    action: ActionSpace = field(default_factory=ActionSpace)
    reward: RewardWeights = field(default_factory=RewardWeights)
    curiosity: CuriosityParams = field(default_factory=CuriosityParams)
    learner: TD3Config = field(default_factory=TD3Config)
    explore: ExplorationConfig = field(default_factory=ExplorationConfig)
    scene: SceneConfig = field(default_factory=SceneConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)


# Sections in serialization order: (section name, RunConfig attribute, class,
# fields excluded from the file format).
_SECTIONS = [
    ("run", None, None, ()),
    ("quad", "quad", QuadParams, ()),
    ("body", "body", EllipsoidModel, ()),
    ("action", "action", ActionSpace, ()),
    ("reward", "reward", RewardWeights, ("goal_position", "goal_attitude")),
    ("curiosity", "curiosity", CuriosityParams, ()),
    ("learner", "learner", TD3Config, ()),
    ("explore", "explore", ExplorationConfig, ()),
    ("scene", "scene", SceneConfig, ()),
    ("train", "train", TrainConfig, ()),
    ("eval", "eval", EvalConfig, ()),
]

# Friendlier key spellings for a few fields.
_KEY_ALIASES = {("scene", "scene_type"): "type"}


def _field_key(section: str, field_name: str) -> str:
    return f"{section}.{_KEY_ALIASES.get((section, field_name), field_name)}"


def _schema():
    """key -> (section, field name, default value). 'run.seed' is special."""
    schema = {"run.seed": ("run", "seed", 0)}
    for section, attr, cls, excluded in _SECTIONS:
        if cls is None:
            continue
        defaults = cls()
        for f in dataclasses.fields(cls):
            if f.name in excluded:
                continue
            schema[_field_key(section, f.name)] = (section, f.name, getattr(defaults, f.name))
    return schema


_SCHEMA = _schema()


def _parse_value(key: str, text: str, default):
    kind = type(default)
    try:
        if kind is bool:
            low = text.strip().lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(f"expected a boolean, got {text!r}")
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        if kind is str:
            return text.strip()
        if kind is tuple:
            parts = [p.strip() for p in text.split(",") if p.strip()]
            element = int if (default and isinstance(default[0], int)) else float
            return tuple(element(p) for p in parts)
    except ValueError as err:
        raise ConfigError(f"bad value for {key}: {err}") from None
    raise ConfigError(f"unsupported value type for {key}")


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_config(text: str) -> RunConfig:
    """Parse config text; unknown keys, duplicates and bad types are errors."""
    assignments: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in assignments:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        assignments[key] = value.strip()

    values: dict[str, dict] = {section: {} for section, *_ in _SECTIONS}
    for key, raw_value in assignments.items():
        section, field_name, default = _SCHEMA[key]
        values[section][field_name] = _parse_value(key, raw_value, default)

    seed = values["run"].get("seed", 0)
    kwargs = {"seed": seed}
    try:
        for section, attr, cls, _ in _SECTIONS:
            if cls is None:
                continue
            kwargs[attr] = cls(**values[section])
    except ValueError as err:
        raise ConfigError(str(err)) from None
    return RunConfig(**kwargs)


def serialize_config(config: RunConfig) -> str:
    """Emit every schema key in order; parse(serialize(c)) == c."""
    lines = [f"run.seed = {config.seed}"]
    for section, attr, cls, excluded in _SECTIONS:
        if cls is None:
            continue
        obj = getattr(config, attr)
        for f in dataclasses.fields(cls):
            if f.name in excluded:
                continue
            lines.append(
                f"{_field_key(section, f.name)} = {_format_value(getattr(obj, f.name))}"
            )
    return "\n".join(lines) + "\n"


def default_config() -> RunConfig:
    return RunConfig()


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def parse_scene_config(text: str) -> SceneConfig:
    """Parse a scene description block (scene.* keys only)."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key = line.partition("=")[0].strip()
        if not key.startswith("scene."):
            raise ConfigError(f"line {lineno}: scene files may only set scene.* keys")
    return parse_config(text).scene


def load_scene_config(path) -> SceneConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scene_config(fh.read())


def config_equal(a: RunConfig, b: RunConfig) -> bool:
    """Field-wise equality through the serialized form."""
    return serialize_config(a) == serialize_config(b)
