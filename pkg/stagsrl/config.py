"""
Configuration management for the supertag SRL toolkit.

Process settings come from environment variables (prefix ``STAGSRL_``) and an
optional ``.env`` file. Run configuration is resolved per command from
language presets, an optional INI-style config file and command-line flags.
"""
import configparser
import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from .errors import ConfigError, InputFileError
from .models import SrlConfig, SynthConfig, TaggerConfig
from .supertags.tags import ObligatorySet

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Process-wide settings loaded from the environment."""

    # STAGSRL_LOG
    log: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    progress: bool = False
    threads: int = Field(1, ge=1)

    app_name: str = "stagsrl"
    app_version: str = "1.0.0"

    model_config = SettingsConfigDict(
        env_prefix="STAGSRL_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    """
    Get cached settings instance.

    Raises:
        ConfigError: a ``STAGSRL_*`` variable holds an invalid value
    """
    try:
        return Settings()
    except ValidationError as exc:
        raise ConfigError(f"environment: {_first_error(exc)}") from None


# ============== Language presets ==============

class LanguagePreset(BaseModel):
    model_config = ConfigDict(frozen=True)

    lang: Literal["en", "es"]
    obligatory: List[str]
    verb_pos_prefixes: List[str]
    d_w: int
    tagger_use_pos: bool

    def obligatory_set(self) -> ObligatorySet:
        return ObligatorySet(frozenset(self.obligatory), tuple(self.verb_pos_prefixes))


PRESETS: Dict[str, LanguagePreset] = {
    "en": LanguagePreset(
        lang="en", obligatory=["SBJ", "OBJ", "PRD", "VC"], verb_pos_prefixes=["V"],
        d_w=100, tagger_use_pos=True,
    ),
    # predicted coarse POS hurts Spanish supertagging
    "es": LanguagePreset(
        lang="es", obligatory=["dc", "suj", "cd", "cpred"], verb_pos_prefixes=["v"],
        d_w=300, tagger_use_pos=False,
    ),
}


# ============== Run configuration ==============

class RunConfig(BaseModel):
    """Everything one CLI invocation needs, after presets, config file and flags are merged."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    command: str
    lang: Literal["en", "es"] = "en"
    input: Optional[Path] = None
    output: Optional[Path] = None
    gold: Optional[Path] = None
    dev: Optional[Path] = None
    dev_stags: Optional[Path] = None
    checkpoint: Optional[Path] = None
    embeddings: Optional[Path] = None
    dump_tags: Optional[Path] = None
    model: Literal["0", "1", "2", "tag"] = "1"
    seed: int = 0
    threads: int = Field(1, ge=1)
    predicates: str = "gold"
    stags: str = "gold"
    format: Literal["jsonl", "csv"] = "jsonl"
    labels: Literal["supertag", "pos"] = "supertag"
    sentences: int = Field(100, ge=0)
    runs: int = Field(1, ge=1)
    skip_invalid: bool = False
    no_stags: bool = False
    compare_reference: bool = False
    model2_optional_flags: bool = False
    predicted_syntax: bool = False
    sense: bool = False
    series: bool = False
    overrides: Dict[str, Any] = Field(default_factory=dict)

    @property
    def preset(self) -> LanguagePreset:
        return PRESETS[self.lang]

    def canonical(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))


RUN_FIELDS = set(RunConfig.model_fields) - {"command", "overrides"}
HYPERPARAMETER_FIELDS = (
    set(TaggerConfig.model_fields) | set(SrlConfig.model_fields) | set(SynthConfig.model_fields)
)


def _read_config_file(path: Path, command: str) -> Dict[str, str]:
    """``[common]`` then ``[<command>]`` values; later sections win."""
    if not path.is_file():
        raise InputFileError(f"no such config file: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    values: Dict[str, str] = {}
    for section in ("common", command):
        if parser.has_section(section):
            values.update(parser.items(section))
    return values


def resolve_run_config(
    command: str,
    flags: Mapping[str, Any],
    config_path: Optional[Path] = None,
) -> RunConfig:
    """
    Merge config file and flags into a ``RunConfig``; flags win.
    Keys that are not run options are kept as hyperparameter overrides.

    Raises:
        ConfigError: unknown key or invalid value
        InputFileError: the config file does not exist
    """
    merged: Dict[str, Any] = {"command": command}
    overrides: Dict[str, Any] = {}
    if config_path is not None:
        for key, value in _read_config_file(Path(config_path), command).items():
            key = key.replace("-", "_")
            if key in RUN_FIELDS:
                merged[key] = value
            elif key in HYPERPARAMETER_FIELDS:
                overrides[key] = value
            else:
                raise ConfigError(f"unknown config key {key!r}")
    for key, value in flags.items():
        if key in RUN_FIELDS and value is not None:
            merged[key] = value
    merged["overrides"] = overrides
    try:
        return RunConfig(**merged)
    except ValidationError as exc:
        raise ConfigError(_first_error(exc)) from None


def _first_error(exc: ValidationError) -> str:
    error = exc.errors()[0]
    where = ".".join(str(p) for p in error.get("loc", ())) or "config"
    return f"{where}: {error.get('msg', 'invalid value')}"


def _build(model_cls, base: Dict[str, Any], overrides: Mapping[str, Any]):
    values = dict(base)
    values.update({k: v for k, v in overrides.items() if k in model_cls.model_fields})
    try:
        return model_cls(**values)
    except ValidationError as exc:
        raise ConfigError(_first_error(exc)) from None


def tagger_config(run: RunConfig) -> TaggerConfig:
    base = {
        "d_w": run.preset.d_w,
        "use_pos": run.preset.tagger_use_pos and run.labels == "supertag",
        "seed": run.seed,
        "label_kind": run.labels,
        "stag_model": run.model if run.labels == "supertag" else None,
    }
    cfg = _build(TaggerConfig, base, run.overrides)
    if cfg.label_kind == "pos" and cfg.use_pos:
        raise ConfigError("a POS tagger cannot read POS tags as input (set use_pos = false)")
    return cfg


def srl_config(run: RunConfig) -> SrlConfig:
    base = {
        "d_w": run.preset.d_w,
        "seed": run.seed,
        "stag_model": run.model,
        "use_supertags": not run.no_stags,
    }
    return _build(SrlConfig, base, run.overrides)


def synth_config(run: RunConfig) -> SynthConfig:
    return _build(SynthConfig, {"sentence_count": run.sentences, "seed": run.seed}, run.overrides)
