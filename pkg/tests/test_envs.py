"""Environment glue: observations, action mapping, episode mechanics."""

from __future__ import annotations

import numpy as np
import pytest

from curiflight.dynamics import QuadParams, QuadState
from curiflight.envs import (
    ACTION_DIM,
    ActionSpace,
    EnvSnapshot,
    EpisodeRecorder,
    FlightEnv,
    denormalize_observation,
    euler_zyx,
    observation_dim,
    observe,
)
from curiflight.geometry import EllipsoidModel
from curiflight.rewards import RewardWeights, extrinsic_reward, goal_reward
from curiflight.scenes import (
    make_slalom_scene,
    make_unstructured_scene,
    make_window_scene,
)

PARAMS = QuadParams()
ELLIPSOID = EllipsoidModel()


def hover_action(params=PARAMS):
    """Identity attitude plus thrust that exactly cancels gravity."""
    a3 = 2.0 * params.mass * params.gravity / params.thrust_max - 1.0
    return np.array([0.0, 0.0, 0.0, a3])


def make_env(scene_source, weights=None):
    return FlightEnv(
        scene_source=scene_source,
        params=PARAMS,
        ellipsoid=ELLIPSOID,
        weights=weights if weights is not None else RewardWeights(),
    )


class TestObserve:
    def test_layout_at_start(self):
        scene = make_window_scene(0.3, 0.1)
        obs = observe(QuadState.at_rest(scene.start_position), scene)
        assert obs.dtype == np.float32
        # Region is [-1, 5] x [-2, 2] x [0, 3]; start (0, 0, 1.5).
        assert np.allclose(obs[0:3], [-2.0 / 3.0, 0.0, 0.0])
        assert np.allclose(obs[3:12], np.eye(3).reshape(-1))
        assert np.allclose(obs[12:15], 0.0)
        assert np.allclose(obs[15:], [0.3, 0.1 / 2.0], atol=1e-7)

    def test_velocity_scaling(self):
        scene = make_window_scene(0.3, 0.0)
        state = QuadState(
            position=scene.start_position,
            attitude=np.eye(3),
            linear_velocity=np.array([5.0, -2.0, 1.0]),
            angular_velocity=np.zeros(3),
        )
        obs = observe(state, scene)
        assert np.allclose(obs[12:15], [0.5, -0.2, 0.1])

    def test_dimension_per_scene_type(self):
        window = make_window_scene(0.3, 0.0)
        slalom = make_slalom_scene(1.5, (0.0, 0.0))
        unstructured = make_unstructured_scene(seed=0)
        assert observation_dim(window) == 17
        assert observation_dim(slalom) == 19
        assert observation_dim(unstructured) == 60
        for scene in (window, slalom, unstructured):
            obs = observe(QuadState.at_rest(scene.start_position), scene)
            assert obs.shape == (observation_dim(scene),)

    def test_denormalize_inverts_observe(self):
        scene = make_window_scene(0.4, -0.2)
        state = QuadState(
            position=np.array([1.0, 0.5, 2.0]),
            attitude=euler_zyx(0.2, -0.1, 0.3),
            linear_velocity=np.array([3.0, 0.0, -1.0]),
            angular_velocity=np.zeros(3),
        )
        raw = denormalize_observation(observe(state, scene), scene)
        assert np.allclose(raw["position"], state.position, atol=1e-6)
        assert np.allclose(raw["attitude"], state.attitude, atol=1e-6)
        assert np.allclose(raw["velocity"], state.linear_velocity, atol=1e-6)
        assert np.allclose(raw["obstacle_features"], [0.4, -0.2], atol=1e-6)

    def test_scene_parameters_only_move_obstacle_slots(self):
        state = QuadState.at_rest(np.array([0.0, 0.0, 1.5]))
        a = observe(state, make_window_scene(0.3, 0.0))
        b = observe(state, make_window_scene(0.5, 0.0))
        assert np.array_equal(a[:15], b[:15])
        assert a[15] != b[15]
        assert a[16] == b[16]


class TestActionSpace:
    def test_full_scale_mapping(self):
        space = ActionSpace()
        command = space.command(np.array([1.0, 0.0, 0.0, 1.0]), PARAMS)
        assert command.thrust == PARAMS.thrust_max
        assert np.allclose(command.commanded_attitude, euler_zyx(np.radians(60.0), 0.0, 0.0))

    def test_zero_action_is_level_half_thrust(self):
        command = ActionSpace().command(np.zeros(4), PARAMS)
        assert np.allclose(command.commanded_attitude, np.eye(3))
        assert command.thrust == pytest.approx(PARAMS.thrust_max / 2.0)

    def test_out_of_range_actions_clip(self):
        space = ActionSpace()
        wild = space.command(np.array([5.0, -3.0, 2.0, 9.0]), PARAMS)
        edge = space.command(np.array([1.0, -1.0, 1.0, 1.0]), PARAMS)
        assert np.allclose(wild.commanded_attitude, edge.commanded_attitude)
        assert wild.thrust == edge.thrust

    def test_wrong_shape_rejected(self):
        with pytest.raises(ValueError, match="shape"):
            ActionSpace().command(np.zeros(3), PARAMS)

    def test_limit_validation(self):
        with pytest.raises(ValueError):
            ActionSpace(max_tilt_deg=0.0)
        with pytest.raises(ValueError):
            ActionSpace(max_tilt_deg=95.0)
        with pytest.raises(ValueError):
            ActionSpace(max_yaw_deg=200.0)

    def test_euler_zyx_composition(self):
        def rx(a):
            c, s = np.cos(a), np.sin(a)
            return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])

        def ry(a):
            c, s = np.cos(a), np.sin(a)
            return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])

        def rz(a):
            c, s = np.cos(a), np.sin(a)
            return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])

        roll, pitch, yaw = 0.3, -0.4, 1.1
        assert np.allclose(euler_zyx(roll, pitch, yaw), rz(yaw) @ ry(pitch) @ rx(roll))
        # Pure yaw of 90 degrees carries +x onto +y.
        assert np.allclose(euler_zyx(0.0, 0.0, np.pi / 2) @ [1, 0, 0], [0, 1, 0],
                           atol=1e-12)


class TestFlightEnv:
    def test_reset_returns_start_observation(self):
        scene = make_window_scene(0.3, 0.0)
        env = make_env(scene)
        obs = env.reset()
        assert np.array_equal(obs, observe(QuadState.at_rest(scene.start_position), scene))
        assert env.step_count == 0
        assert not env.done

    def test_step_before_reset_raises(self):
        env = make_env(make_window_scene(0.3, 0.0))
        with pytest.raises(RuntimeError, match="reset"):
            env.step(hover_action())

    def test_hover_action_holds_position(self):
        env = make_env(make_window_scene(0.3, 0.0))
        env.reset()
        for _ in range(50):
            result = env.step(hover_action())
            assert result.event is None
            assert result.reward == 0.0
        assert np.allclose(env.state.position, [0.0, 0.0, 1.5], atol=1e-9)

    def test_scene_sampler_called_each_reset(self):
        def sampler(rng):
            return make_window_scene(None, None, rng)

        env = make_env(sampler)
        rng = np.random.default_rng(0)
        angles = {env.reset(rng) is not None and env.scene.obstacle_params["angle"]
                  for _ in range(5)}
        assert len(angles) > 1

    def test_scene_sampler_requires_rng(self):
        env = make_env(lambda rng: make_window_scene(0.3, 0.0))
        with pytest.raises(ValueError, match="rng"):
            env.reset()

    def test_out_of_region_pays_goal_term(self):
        scene = make_window_scene(0.3, 0.0)
        env = make_env(scene)
        env.reset()
        state = QuadState(
            position=np.array([4.99, 0.0, 1.5]),
            attitude=np.eye(3),
            linear_velocity=np.array([3.0, 0.0, 0.0]),
            angular_velocity=np.zeros(3),
        )
        env.restore(EnvSnapshot(state=state, observation=observe(state, scene),
                                progress=None))
        result = env.step(hover_action())
        assert result.event.cause == "out_of_region"
        expected = extrinsic_reward(result.state, scene, ELLIPSOID, env.weights,
                                    "out_of_region")
        assert result.reward == pytest.approx(expected)
        assert result.reward < 0.0
        assert env.done

    def test_goal_pays_extrinsic_plus_bonus(self):
        scene = make_window_scene(0.3, 0.0, goal_radius=0.3)
        env = make_env(scene)
        env.reset()
        near_goal = QuadState.at_rest(scene.goal_position + np.array([-0.25, 0.0, 0.0]))
        env.restore(EnvSnapshot(state=near_goal,
                                observation=observe(near_goal, scene), progress=None))
        result = env.step(hover_action())
        assert result.event.cause == "goal_reached"
        expected = extrinsic_reward(result.state, scene, ELLIPSOID, env.weights,
                                    "goal_reached") + env.weights.success_bonus
        assert result.reward == pytest.approx(expected)

    def test_step_limit_pays_goal_distance(self):
        scene = make_window_scene(0.3, 0.0, max_episode_steps=3)
        env = make_env(scene)
        env.reset()
        for _ in range(2):
            assert env.step(hover_action()).event is None
        result = env.step(hover_action())
        assert result.event.cause == "step_limit"
        assert result.reward == pytest.approx(goal_reward(result.state, env.weights))

    def test_step_after_terminal_raises(self):
        scene = make_window_scene(0.3, 0.0, max_episode_steps=1)
        env = make_env(scene)
        env.reset()
        env.step(hover_action())
        with pytest.raises(RuntimeError, match="finished"):
            env.step(hover_action())

    def test_goal_weights_follow_scene(self):
        scene = make_window_scene(0.5, 0.2)
        env = make_env(scene)
        env.reset()
        assert np.allclose(env.weights.goal_position, scene.goal_position)
        assert np.allclose(env.weights.goal_attitude, scene.goal_attitude)
        # The template the env was built with stays untouched.
        assert np.allclose(env.base_weights.goal_position, np.zeros(3))

    def test_restore_before_reset_raises(self):
        env = make_env(make_window_scene(0.3, 0.0))
        state = QuadState.at_rest(np.array([0.0, 0.0, 1.5]))
        snap = EnvSnapshot(state=state, observation=np.zeros(17, dtype=np.float32),
                           progress=None)
        with pytest.raises(RuntimeError, match="reset"):
            env.restore(snap)

    def test_restore_replays_identically(self):
        env = make_env(make_window_scene(0.3, 0.0))
        env.reset()
        actions = [np.array([0.02 * k, 0.05, 0.0, 0.1]) for k in range(6)]
        for a in actions[:3]:
            env.step(a)
        snap = env.snapshot()
        first = [env.step(a).state.position for a in actions[3:]]
        env.restore(snap)
        second = [env.step(a).state.position for a in actions[3:]]
        for p, q in zip(first, second):
            assert np.array_equal(p, q)

    def test_restore_keeps_step_budget(self):
        # Rewinding the pose must not refund spent steps: the budget is a
        # property of the episode, not of the trajectory suffix.
        scene = make_window_scene(0.3, 0.0, max_episode_steps=5)
        env = make_env(scene)
        env.reset()
        snap = env.snapshot()
        for _ in range(4):
            env.step(hover_action())
        env.restore(snap)
        result = env.step(hover_action())
        assert result.event.cause == "step_limit"


class TestEpisodeRecorder:
    def test_accumulates_in_execution_order(self):
        scene = make_window_scene(0.3, 0.0)
        env = make_env(scene)
        obs = env.reset()
        recorder = EpisodeRecorder(env.state)
        for k in range(3):
            action = np.array([0.0, 0.02 * k, 0.0, 0.1])
            result = env.step(action)
            recorder.record(obs, action, result)
            obs = result.observation
        episode = recorder.finish("step_limit")
        assert len(episode) == 3
        assert len(episode.states) == 4
        assert episode.observations.shape == (3, 17)
        assert episode.actions.shape == (3, ACTION_DIM)
        assert episode.next_observations.shape == (3, 17)
        assert episode.rewards.shape == (3,)
        assert episode.cause == "step_limit"
        assert episode.observations.dtype == np.float32
        assert episode.rewards.dtype == np.float64
        # Chained transitions: next observation of step k is the observation
        # fed to step k+1.
        assert np.array_equal(episode.next_observations[0], episode.observations[1])
        assert episode.episode_return == pytest.approx(episode.rewards.sum())
