from __future__ import annotations

from pathlib import Path

import pytest

from visquant import (
    Architecture,
    ConfigError,
    RunConfig,
    SplitSetting,
    default_output_dir,
    read_config_file,
)


@pytest.fixture
def config_file(tmp_path: Path) -> Path:
    path = tmp_path / "run.conf"
    path.write_text(
        "# a small world\n"
        "seed = 7\n"
        "learning-rate = 0.2   # dashes are accepted\n"
        "\n"
        "fractions = 0.8, 0.1, 0.1\n"
        "exclude_heldout_distractors = yes\n"
        "arch = qsan\n",
        encoding="utf-8",
    )
    return path


class TestConfigFile:
    def test_parse(self, config_file: Path) -> None:
        assert read_config_file(config_file) == {
            "seed": 7,
            "learning_rate": 0.2,
            "fractions": (0.8, 0.1, 0.1),
            "exclude_heldout_distractors": True,
            "arch": "qsan",
        }

    def test_missing(self, tmp_path: Path) -> None:
        with pytest.raises(ConfigError):
            read_config_file(tmp_path / "nope.conf")

    @pytest.mark.parametrize("line", ["seed 7", "colour = red", "seed = seven", "fractions = 0.5, 0.5"])
    def test_invalid_lines(self, tmp_path: Path, line: str) -> None:
        path = tmp_path / "bad.conf"
        path.write_text(line + "\n", encoding="utf-8")

        with pytest.raises(ConfigError):
            read_config_file(path)


class TestRunConfig:
    def test_flags_win(self, config_file: Path) -> None:
        config = RunConfig.from_sources(
            "train", {"seed": 3, "learning_rate": None, "config": str(config_file)}, config_file
        )

        assert config.seed == 3
        assert config.get("learning_rate") == 0.2
        assert "config" not in config.values

    def test_derived_settings(self, config_file: Path) -> None:
        config = RunConfig.from_sources("train", {"batch_size": "4", "dim": 8}, config_file)

        train = config.train_config()
        assert (train.learning_rate, train.batch_size, train.seed) == (0.2, 4, 7)

        spec = config.split_spec()
        assert spec.fractions == (0.8, 0.1, 0.1)
        assert spec.setting is SplitSetting.UNC
        assert spec.exclude_heldout_distractors

        assert config.architecture() is Architecture.QSAN
        assert config.synth_config().dim == 8

        model = config.model_spec(Architecture.QSAN, d_visual=8, slots=4)
        assert (model.d_visual, model.slots, model.seed) == (8, 4, 7)

    def test_dot_config(self) -> None:
        dots = RunConfig.from_sources("dotsim", {"size": 48, "radius": 2}).dot_config()

        assert (dots.height, dots.width, dots.radius) == (48, 48, 2)

    def test_bad_values(self) -> None:
        with pytest.raises(ConfigError):
            RunConfig.from_sources("train", {"batch_size": "many"})

        with pytest.raises(ConfigError):
            RunConfig.from_sources("split", {"setting": "sideways"}).split_spec()

        with pytest.raises(ConfigError):
            RunConfig.from_sources("train", {}).architecture()

        with pytest.raises(ConfigError):
            RunConfig.from_sources("train", {"arch": "transformer"}).architecture()

    def test_to_dict(self, config_file: Path) -> None:
        config = RunConfig.from_sources("split", {"out": "somewhere"}, config_file)
        data = config.to_dict()

        assert data["command"] == "split"
        assert data["fractions"] == [0.8, 0.1, 0.1]
        assert "out" not in data


class TestOutputDirectory:
    def test_environment(self, monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
        monkeypatch.setenv("VISQUANT_OUTPUT_DIR", str(tmp_path))

        assert default_output_dir() == tmp_path
        assert RunConfig("generate").output_dir == tmp_path

    def test_default(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.delenv("VISQUANT_OUTPUT_DIR", raising=False)

        assert default_output_dir() == Path("runs")
        assert RunConfig("generate", {"out": "elsewhere"}).output_dir == Path("elsewhere")
