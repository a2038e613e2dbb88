"""Config file format: parsing, validation, lossless round trips."""

from __future__ import annotations

import dataclasses

import pytest

from curiflight.config import (
    ConfigError,
    RunConfig,
    config_equal,
    default_config,
    load_config,
    parse_config,
    parse_scene_config,
    serialize_config,
)


class TestRoundTrip:
    def test_defaults_round_trip(self):
        config = default_config()
        assert config_equal(parse_config(serialize_config(config)), config)

    def test_modified_config_round_trips(self):
        config = default_config()
        config = dataclasses.replace(
            config,
            seed=17,
            learner=dataclasses.replace(config.learner, gamma=0.95, hidden=(48, 32)),
            scene=dataclasses.replace(config.scene, scene_type="slalom_path",
                                      randomize=False),
            eval=dataclasses.replace(config.eval, noise_deg=(0.0, 2.5)),
        )
        parsed = parse_config(serialize_config(config))
        assert parsed.seed == 17
        assert parsed.learner.gamma == 0.95
        assert parsed.learner.hidden == (48, 32)
        assert parsed.scene.scene_type == "slalom_path"
        assert parsed.scene.randomize is False
        assert parsed.eval.noise_deg == (0.0, 2.5)
        assert config_equal(parsed, config)

    def test_serialization_is_stable(self):
        text = serialize_config(default_config())
        assert serialize_config(parse_config(text)) == text

    def test_goal_pose_not_part_of_file_format(self):
        # The goal pose is scene state, filled per episode; a config file
        # must not be able to pin it.
        text = serialize_config(default_config())
        assert "goal_position" not in text
        assert "goal_attitude" not in text
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config("reward.goal_position = 1, 2, 3")


class TestParsing:
    def test_empty_text_gives_defaults(self):
        assert config_equal(parse_config(""), RunConfig())

    def test_partial_file_keeps_other_defaults(self):
        config = parse_config("learner.gamma = 0.9\n")
        assert config.learner.gamma == 0.9
        assert config.learner.rho == default_config().learner.rho
        assert config.seed == 0

    def test_comments_and_blank_lines_ignored(self):
        text = "# header\n\n   \nrun.seed = 4  \n# learner.gamma = 0.5\n"
        config = parse_config(text)
        assert config.seed == 4
        assert config.learner.gamma == default_config().learner.gamma

    def test_unknown_key_reports_line(self):
        with pytest.raises(ConfigError, match=r"line 2.*learner\.gama"):
            parse_config("run.seed = 1\nlearner.gama = 0.5\n")

    def test_duplicate_key_reports_line(self):
        with pytest.raises(ConfigError, match="line 3.*duplicate"):
            parse_config("run.seed = 1\n# comment\nrun.seed = 2\n")

    def test_missing_equals_sign(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_config("run.seed 5\n")

    def test_bad_value_type(self):
        with pytest.raises(ConfigError, match=r"bad value for learner\.gamma"):
            parse_config("learner.gamma = fast\n")

    def test_bool_spellings(self):
        for text, expected in [("true", True), ("1", True), ("yes", True),
                               ("false", False), ("0", False), ("no", False)]:
            config = parse_config(f"scene.randomize = {text}\n")
            assert config.scene.randomize is expected
        with pytest.raises(ConfigError, match="boolean"):
            parse_config("scene.randomize = maybe\n")

    def test_float_tuple_value(self):
        config = parse_config("eval.noise_deg = 0, 1.5, 3\n")
        assert config.eval.noise_deg == (0.0, 1.5, 3.0)

    def test_int_tuple_value(self):
        config = parse_config("learner.hidden = 128, 64\n")
        assert config.learner.hidden == (128, 64)
        assert all(isinstance(h, int) for h in config.learner.hidden)

    def test_scene_type_alias(self):
        config = parse_config("scene.type = unstructured\n")
        assert config.scene.scene_type == "unstructured"
        assert "scene.type = " in serialize_config(config)
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config("scene.scene_type = unstructured\n")

    def test_dataclass_validation_becomes_config_error(self):
        with pytest.raises(ConfigError, match="gamma"):
            parse_config("learner.gamma = 1.5\n")

    def test_load_config_from_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("run.seed = 9\ntrain.episodes = 3\n")
        config = load_config(path)
        assert config.seed == 9
        assert config.train.episodes == 3


class TestSceneConfigFiles:
    def test_scene_file_parses_scene_keys(self):
        scene = parse_scene_config(
            "scene.type = narrow_window\nscene.randomize = false\nscene.angle = 0.4\n"
        )
        assert scene.scene_type == "narrow_window"
        assert scene.randomize is False
        assert scene.angle == 0.4

    def test_scene_file_rejects_other_sections(self):
        with pytest.raises(ConfigError, match=r"scene\.\* keys"):
            parse_scene_config("scene.angle = 0.4\nrun.seed = 3\n")

    def test_scene_file_allows_comments(self):
        scene = parse_scene_config("# held-out window\nscene.angle = 0.25\n")
        assert scene.angle == 0.25
