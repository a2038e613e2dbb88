"""Curiosity-driven deep RL for aggressive quadrotor flight.

The package couples a minimal rigid-body flight simulator with a TD3 learner
whose reward mixes sparse task terms with an episode-novelty bonus computed
from dynamic time warping distances against recent flight memory.
"""

from .config import (
    ConfigError,
    EvalConfig,
    RunConfig,
    TrainConfig,
    default_config,
    load_config,
    parse_config,
    serialize_config,
)
from .curiosity import (
    CuriosityParams,
    EpisodeMemory,
    StateChannelSeries,
    channels_from_states,
    curiosity_reward,
    dtw_distance,
    dtw_distance_bruteforce,
    record_episode,
)
from .dynamics import AttitudeThrustAction, QuadParams, QuadState, step
from .envs import ActionSpace, FlightEnv, observe
from .exploration import ExplorationConfig, attitude_noise, rollout
from .geometry import (
    Box,
    Cylinder,
    EllipsoidModel,
    PointCloud,
    WindowPanel,
    ellipsoid_points,
    intersection_fraction,
)
from .rewards import RewardWeights, collision_reward, extrinsic_reward, goal_reward
from .scenes import (
    Scene,
    SceneConfig,
    check_corridor_feasibility,
    make_slalom_scene,
    make_unstructured_scene,
    make_window_scene,
    sample_scene,
)
from .td3 import (
    LearnerBundle,
    ReplayBuffer,
    TD3Config,
    load_bundle,
    make_bundle,
    make_policy,
    save_bundle,
    train_episode,
)

__version__ = "0.1.0"

__all__ = [
    "ActionSpace",
    "AttitudeThrustAction",
    "Box",
    "ConfigError",
    "CuriosityParams",
    "Cylinder",
    "EllipsoidModel",
    "EpisodeMemory",
    "EvalConfig",
    "ExplorationConfig",
    "FlightEnv",
    "LearnerBundle",
    "PointCloud",
    "QuadParams",
    "QuadState",
    "ReplayBuffer",
    "RewardWeights",
    "RunConfig",
    "Scene",
    "SceneConfig",
    "StateChannelSeries",
    "TD3Config",
    "TrainConfig",
    "WindowPanel",
    "attitude_noise",
    "channels_from_states",
    "check_corridor_feasibility",
    "collision_reward",
    "curiosity_reward",
    "default_config",
    "dtw_distance",
    "dtw_distance_bruteforce",
    "ellipsoid_points",
    "extrinsic_reward",
    "goal_reward",
    "intersection_fraction",
    "load_bundle",
    "load_config",
    "make_bundle",
    "make_policy",
    "make_slalom_scene",
    "make_unstructured_scene",
    "make_window_scene",
    "observe",
    "parse_config",
    "record_episode",
    "rollout",
    "sample_scene",
    "save_bundle",
    "serialize_config",
    "step",
    "train_episode",
]
