"""Unit tests for run configuration loading."""

import pytest

from comclip.composition import SubimageConfig, WeightingMode
from comclip.core.config import CACHE_DIR_ENV, RunConfig, load_run_config
from comclip.errors import UsageError


@pytest.fixture(autouse=True)
def _no_env_cache(monkeypatch):
    monkeypatch.delenv(CACHE_DIR_ENV, raising=False)


class TestRunConfig:
    def test_defaults(self):
        config = RunConfig()

        assert config.backend == "mock"
        assert config.mock_dim == 512
        assert config.parser == "rule_based"
        assert config.aligner == "lexical"
        assert config.llm == "none"
        assert config.captioner == "none"
        assert config.cache_dir is None
        assert config.parallelism >= 1
        assert config.spacy_model == "en_core_web_sm"
        assert config.memo_entries == 50_000
        assert not config.needs_llm

    def test_needs_llm(self):
        assert RunConfig(parser="llm").needs_llm
        assert RunConfig(aligner="llm").needs_llm

    def test_unknown_field_rejected(self):
        with pytest.raises(ValueError):
            RunConfig(backnd="mock")

    def test_frozen(self):
        with pytest.raises(ValueError):
            RunConfig().seed = 3


class TestLoadRunConfig:
    """defaults < YAML < environment < overrides."""

    def test_no_file(self):
        assert load_run_config() == RunConfig()

    def test_yaml_values(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text(
            "backend: mock\nmock_dim: 32\nseed: 7\n"
            "composition:\n  weighting_mode: raw_similarity\n  subimage_config: omit_object\n",
            encoding="utf-8",
        )

        config = load_run_config(path)

        assert config.mock_dim == 32
        assert config.seed == 7
        assert config.composition.weighting_mode is WeightingMode.RAW_SIMILARITY
        assert config.composition.subimage_config is SubimageConfig.OMIT_OBJECT

    def test_overrides_win_and_none_is_ignored(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("seed: 7\nparallelism: 2\n", encoding="utf-8")

        config = load_run_config(path, {"seed": 11, "parallelism": None})

        assert config.seed == 11
        assert config.parallelism == 2

    def test_composition_block_merged_one_level(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("composition:\n  fill: blur\n  logit_scale: 50\n", encoding="utf-8")

        config = load_run_config(path, {"composition": {"weighting_mode": "raw_similarity"}})

        assert config.composition.label == "full/blur/raw_similarity/scale=50"

    def test_env_cache_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv(CACHE_DIR_ENV, str(tmp_path / "env"))

        assert load_run_config().cache_dir == tmp_path / "env"
        assert load_run_config(overrides={"cache_dir": tmp_path / "cli"}).cache_dir == tmp_path / "cli"

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("", encoding="utf-8")

        assert load_run_config(path) == RunConfig()

    def test_missing_file(self, tmp_path):
        with pytest.raises(UsageError, match="not found"):
            load_run_config(tmp_path / "absent.yaml")

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("seed: [1, 2\n", encoding="utf-8")

        with pytest.raises(UsageError, match="Invalid YAML"):
            load_run_config(path)

    def test_non_mapping(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n", encoding="utf-8")

        with pytest.raises(UsageError, match="mapping"):
            load_run_config(path)

    @pytest.mark.parametrize(
        "overrides",
        [
            {"mock_dim": 4},
            {"parser": "spacy"},
            {"memo_entries": 0},
            {"composition": {"logit_scale": -1}},
            {"bogus": 1},
        ],
    )
    def test_invalid_values(self, overrides):
        with pytest.raises(UsageError, match="Invalid configuration"):
            load_run_config(overrides=overrides)
