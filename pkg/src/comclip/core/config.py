"""Run configuration: defaults < YAML file < environment < explicit overrides."""

import logging
import os
from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, Field, ValidationError

from comclip.composition.models import CompositionConfig
from comclip.errors import UsageError

logger = logging.getLogger(__name__)

CACHE_DIR_ENV = "COMCLIP_CACHE_DIR"


def _default_parallelism() -> int:
    return os.cpu_count() or 1


class RunConfig(BaseModel):
    """Everything a run needs besides its dataset: composition, services, cache, seed."""

    composition: CompositionConfig = Field(default_factory=CompositionConfig)

    backend: str = Field(default="mock", description="Registered encoder backend name")
    mock_dim: int = Field(default=512, ge=8)
    encoder_endpoint: str | None = None
    encoder_model: str = "clip"
    encoder_dim: int = Field(default=512, ge=2)
    encoder_fixtures: Path | None = None

    llm: Literal["none", "http", "claude", "replay"] = "none"
    llm_endpoint: str | None = None
    llm_max_in_flight: int = Field(default=4, ge=1)
    llm_timeout_s: float = Field(default=30.0, gt=0.0)
    llm_retries: int = Field(default=2, ge=0)
    llm_fixtures: Path | None = None

    captioner: Literal["none", "http", "replay"] = "none"
    captioner_endpoint: str | None = None
    captioner_max_in_flight: int = Field(default=4, ge=1)
    captioner_fixtures: Path | None = None

    parser: Literal["rule_based", "llm"] = "rule_based"
    spacy_model: str = Field(default="en_core_web_sm", description="spaCy pipeline for rule-based parsing")
    aligner: Literal["lexical", "llm"] = "lexical"

    record_fixtures: bool = Field(default=False, description="Call live services and record replies")
    cache_dir: Path | None = None
    seed: int = 0
    parallelism: int = Field(default_factory=_default_parallelism, ge=1)
    memo_entries: int = Field(default=50_000, ge=1, description="Results kept per in-memory memo table")
    blur_radius_fraction: float = Field(default=0.05, ge=0.0)
    crop_tight: bool = False

    model_config = {"frozen": True, "extra": "forbid"}

    @property
    def needs_llm(self) -> bool:
        return self.parser == "llm" or self.aligner == "llm"


def _read_yaml(path: Path) -> dict[str, Any]:
    if not path.is_file():
        raise UsageError(f"Config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise UsageError(f"Invalid YAML in config file {path}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise UsageError(f"Config file {path} must contain a mapping")
    return data


def _merge(base: dict[str, Any], extra: dict[str, Any]) -> dict[str, Any]:
    """Shallow merge, one level deep for the nested ``composition`` block."""
    merged = dict(base)
    for key, value in extra.items():
        if key == "composition" and isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = {**merged[key], **value}
        else:
            merged[key] = value
    return merged


def load_run_config(
    path: str | Path | None = None, overrides: dict[str, Any] | None = None
) -> RunConfig:
    """
    Build a `RunConfig` from an optional YAML file, the environment and overrides.

    Overrides whose value is None are ignored, so CLI options left unset do
    not clobber the file.

    Raises:
        UsageError: On a missing or malformed file, or invalid values.
    """
    data: dict[str, Any] = _read_yaml(Path(path)) if path is not None else {}

    env_cache = os.environ.get(CACHE_DIR_ENV)
    if env_cache:
        data["cache_dir"] = env_cache

    if overrides:
        data = _merge(data, {k: v for k, v in overrides.items() if v is not None})

    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        fields = ", ".join(".".join(str(p) for p in err["loc"]) for err in e.errors())
        raise UsageError(f"Invalid configuration ({fields}): {e}") from e
    logger.debug("Run config: %s", config.model_dump(mode="json"))
    return config
