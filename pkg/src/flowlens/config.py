"""Run configuration: a single YAML file with nested sections.

Every tunable in the pipeline lives here with its default, and the effective
values are echoed into the analysis file's provenance block. Unknown keys at
any nesting level are errors, to catch typos early.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field, fields
from typing import Any, Mapping, Optional, Sequence

import yaml

from .errors import ConfigError

_HEX_COLOR = re.compile(r"^#[0-9A-Fa-f]{6}$")

# Environment variables that override the two remote-backend endpoints.
EMBED_URL_ENV = "FLOWLENS_EMBED_URL"
CHAT_URL_ENV = "FLOWLENS_CHAT_URL"


def _build(cls, section: str, data: Mapping[str, Any]):
    """Construct a config dataclass from a mapping, rejecting unknown keys."""
    allowed = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(unknown)}")
    return cls(**data)


@dataclass(frozen=True)
class CorpusConfig:
    exercise_id: str = ""
    prompt_text: str = ""
    input_example: str = ""
    output_example: str = ""
    scrub_max_len: int = 8


@dataclass(frozen=True)
class NormalizeConfig:
    allowlist: Sequence[str] = field(default_factory=tuple)
    output_functions: Sequence[str] = field(default_factory=lambda: ("print",))


@dataclass(frozen=True)
class EmbedConfig:
    # dim defaults to 256 for the local backend and 768 for a remote one;
    # leave unset to take the backend default.
    dim: Optional[int] = None
    seed: int = 42
    context_decay: float = 0.3
    remote_url: Optional[str] = None
    batch_size: int = 64
    max_retries: int = 3
    max_in_flight: int = 4
    fallback_local: bool = False

    def effective_dim(self) -> int:
        if self.dim is not None:
            return self.dim
        return 768 if self.remote_url else 256


@dataclass(frozen=True)
class ClusterConfig:
    theta_coarse: float = 0.25
    theta_fine: float = 0.10


@dataclass(frozen=True)
class AlignConfig:
    min_agreement: float = 0.30
    min_coverage: float = 0.20


@dataclass(frozen=True)
class LabelConfig:
    chat_url: Optional[str] = None
    model: str = ""
    prompt_file: Optional[str] = None
    max_tokens: int = 512
    max_concurrency: int = 4
    max_retries: int = 3


@dataclass(frozen=True)
class ViewConfig:
    color_incorrect: str = "#D32F2F"
    color_correct: str = "#388E3C"
    page_size: int = 50


@dataclass(frozen=True)
class ServeConfig:
    session_timeout_s: int = 7200
    cors_origin: str = "*"


_SECTIONS = {
    "corpus": CorpusConfig,
    "normalize": NormalizeConfig,
    "embed": EmbedConfig,
    "cluster": ClusterConfig,
    "align": AlignConfig,
    "label": LabelConfig,
    "view": ViewConfig,
    "serve": ServeConfig,
}


@dataclass(frozen=True)
class Config:
    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    normalize: NormalizeConfig = field(default_factory=NormalizeConfig)
    embed: EmbedConfig = field(default_factory=EmbedConfig)
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    align: AlignConfig = field(default_factory=AlignConfig)
    label: LabelConfig = field(default_factory=LabelConfig)
    view: ViewConfig = field(default_factory=ViewConfig)
    serve: ServeConfig = field(default_factory=ServeConfig)

    def effective(self) -> dict:
        """Nested plain-dict echo of every knob, for the provenance block."""
        out: dict = {}
        for name, section in (
            ("corpus", self.corpus),
            ("normalize", self.normalize),
            ("embed", self.embed),
            ("cluster", self.cluster),
            ("align", self.align),
            ("label", self.label),
            ("view", self.view),
            ("serve", self.serve),
        ):
            vals = {f.name: getattr(section, f.name) for f in fields(section)}
            for key, val in vals.items():
                if isinstance(val, tuple):
                    vals[key] = list(val)
            out[name] = vals
        out["embed"]["dim"] = self.embed.effective_dim()
        return out


def from_mapping(data: Mapping[str, Any]) -> Config:
    unknown = sorted(set(data) - set(_SECTIONS))
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(unknown)}")
    sections = {}
    for name, cls in _SECTIONS.items():
        raw = data.get(name, {})
        if raw is None:
            raw = {}
        if not isinstance(raw, Mapping):
            raise ConfigError(f"section [{name}] must be a mapping")
        if name == "normalize":
            raw = dict(raw)
            for key in ("allowlist", "output_functions"):
                if key in raw:
                    val = raw[key]
                    if not isinstance(val, (list, tuple)) or not all(
                        isinstance(x, str) for x in val
                    ):
                        raise ConfigError(f"normalize.{key} must be a list of strings")
                    raw[key] = tuple(val)
        sections[name] = _build(cls, name, raw)
    cfg = Config(**sections)
    validate(cfg)
    return cfg


def load(path: str, env: Optional[Mapping[str, str]] = None) -> Config:
    """Load a YAML config file, applying endpoint overrides from env vars."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise ConfigError(f"{path}: top level must be a mapping")
    data = {k: (dict(v) if isinstance(v, Mapping) else v) for k, v in data.items()}
    env = os.environ if env is None else env
    if env.get(EMBED_URL_ENV):
        data.setdefault("embed", {})["remote_url"] = env[EMBED_URL_ENV]
    if env.get(CHAT_URL_ENV):
        data.setdefault("label", {})["chat_url"] = env[CHAT_URL_ENV]
    return from_mapping(data)


def validate(cfg: Config) -> None:
    """Reject self-contradictory settings. Raises ConfigError."""
    if cfg.cluster.theta_fine >= cfg.cluster.theta_coarse:
        raise ConfigError(
            f"cluster.theta_fine ({cfg.cluster.theta_fine}) must be smaller "
            f"than cluster.theta_coarse ({cfg.cluster.theta_coarse})"
        )
    if cfg.cluster.theta_coarse <= 0 or cfg.cluster.theta_fine <= 0:
        raise ConfigError("cluster thresholds must be positive")
    if cfg.embed.dim is not None and cfg.embed.dim <= 0:
        raise ConfigError("embed.dim must be positive")
    if cfg.embed.batch_size < 1:
        raise ConfigError("embed.batch_size must be at least 1")
    if cfg.embed.max_in_flight < 1:
        raise ConfigError("embed.max_in_flight must be at least 1")
    if not 0.0 <= cfg.embed.context_decay <= 1.0:
        raise ConfigError("embed.context_decay must be in [0, 1]")
    for knob, val in (
        ("align.min_agreement", cfg.align.min_agreement),
        ("align.min_coverage", cfg.align.min_coverage),
    ):
        if not 0.0 <= val <= 1.0:
            raise ConfigError(f"{knob} must be in [0, 1]")
    for knob, val in (
        ("view.color_incorrect", cfg.view.color_incorrect),
        ("view.color_correct", cfg.view.color_correct),
    ):
        if not _HEX_COLOR.match(val):
            raise ConfigError(f"{knob} must be a #RRGGBB color, got {val!r}")
    if cfg.view.page_size < 1:
        raise ConfigError("view.page_size must be at least 1")
    if cfg.corpus.scrub_max_len < 0:
        raise ConfigError("corpus.scrub_max_len must be non-negative")
    if cfg.serve.session_timeout_s < 1:
        raise ConfigError("serve.session_timeout_s must be at least 1")
    if cfg.label.max_concurrency < 1:
        raise ConfigError("label.max_concurrency must be at least 1")
