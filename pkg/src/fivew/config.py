"""Run configuration: every tunable threshold, backend wiring per pipeline
role, default paths, and the random seed — with a lossless JSON file form.

The `FIVEW_CONFIG` environment variable may name a config file that is used
whenever no explicit path is given.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Optional

from . import backends as be
from .paraphrase import ParaphraseSettings
from .textmetrics import BleuConfig, CASEFOLD
from .verdict import Thresholds

log = logging.getLogger(__name__)

ENV_CONFIG = "FIVEW_CONFIG"

ROLE_NAMES = tuple(role.value for role in be.BackendRole)


class ConfigError(ValueError):
    """Unusable configuration file or backend descriptor."""


@dataclass(frozen=True)
class ThresholdSet:
    """All numeric knobs in one place.

    med_threshold: minimum word edit distance a paraphrase must exceed.
    tau_support: token-F1 at or above which an answered question supports.
    confidence_floor: reader confidence below which a verdict abstains.
    bleu_max_ngram: highest n-gram order scored.
    epsilon: substitute for zero n-gram precisions.
    epsilon_floor: lower clamp on scores entering the inverse (diversity).
    """

    med_threshold: int = 2
    tau_support: float = 0.5
    confidence_floor: float = 0.1
    bleu_max_ngram: int = 4
    epsilon: float = 0.01
    epsilon_floor: float = 0.01

    def __post_init__(self) -> None:
        if self.med_threshold < 0:
            raise ConfigError("med_threshold must be >= 0")
        if not 0.0 <= self.tau_support <= 1.0:
            raise ConfigError("tau_support must lie in [0, 1]")
        if not 0.0 <= self.confidence_floor <= 1.0:
            raise ConfigError("confidence_floor must lie in [0, 1]")
        if self.bleu_max_ngram < 1:
            raise ConfigError("bleu_max_ngram must be >= 1")
        if not 0.0 < self.epsilon <= 1.0:
            raise ConfigError("epsilon must lie in (0, 1]")
        if not 0.0 < self.epsilon_floor <= 1.0:
            raise ConfigError("epsilon_floor must lie in (0, 1]")


@dataclass(frozen=True)
class RunConfig:
    backends: Mapping[str, str] = field(default_factory=dict)
    thresholds: ThresholdSet = field(default_factory=ThresholdSet)
    paths: Mapping[str, str] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "backends", MappingProxyType(dict(self.backends)))
        object.__setattr__(self, "paths", MappingProxyType(dict(self.paths)))
        for role in self.backends:
            if role not in ROLE_NAMES:
                raise ConfigError(f"unknown backend role {role!r}")

    # -- derived views ---------------------------------------------------

    def bleu_config(self) -> BleuConfig:
        return BleuConfig(
            max_ngram=self.thresholds.bleu_max_ngram,
            smoothing=self.thresholds.epsilon,
            epsilon_floor=self.thresholds.epsilon_floor,
            normalization=frozenset({CASEFOLD}),
        )

    def verdict_thresholds(self) -> Thresholds:
        return Thresholds(
            tau_support=self.thresholds.tau_support,
            confidence_floor=self.thresholds.confidence_floor,
        )

    def paraphrase_settings(self, n: int = 5, jobs: int = 1) -> ParaphraseSettings:
        return ParaphraseSettings(
            n=n,
            med_threshold=self.thresholds.med_threshold,
            bleu=self.bleu_config(),
            jobs=jobs,
        )

    def backend_spec(self, role: be.BackendRole, default: str = "mock") -> str:
        return self.backends.get(role.value, default)


DEFAULT_CONFIG = RunConfig()


# --- file form ---------------------------------------------------------------


def config_to_dict(config: RunConfig) -> dict:
    return {
        "backends": dict(config.backends),
        "thresholds": {
            "med_threshold": config.thresholds.med_threshold,
            "tau_support": config.thresholds.tau_support,
            "confidence_floor": config.thresholds.confidence_floor,
            "bleu_max_ngram": config.thresholds.bleu_max_ngram,
            "epsilon": config.thresholds.epsilon,
            "epsilon_floor": config.thresholds.epsilon_floor,
        },
        "paths": dict(config.paths),
        "seed": config.seed,
    }


def config_from_dict(raw: Mapping) -> RunConfig:
    if not isinstance(raw, Mapping):
        raise ConfigError("config root must be an object")
    unknown = set(raw) - {"backends", "thresholds", "paths", "seed"}
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    thresholds_raw = raw.get("thresholds", {})
    if not isinstance(thresholds_raw, Mapping):
        raise ConfigError("thresholds must be an object")
    known = {
        "med_threshold",
        "tau_support",
        "confidence_floor",
        "bleu_max_ngram",
        "epsilon",
        "epsilon_floor",
    }
    bad = set(thresholds_raw) - known
    if bad:
        raise ConfigError(f"unknown threshold fields: {sorted(bad)}")
    try:
        thresholds = ThresholdSet(**thresholds_raw)
        return RunConfig(
            backends=raw.get("backends", {}),
            thresholds=thresholds,
            paths=raw.get("paths", {}),
            seed=int(raw.get("seed", 0)),
        )
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def render_config(config: RunConfig) -> str:
    return json.dumps(config_to_dict(config), indent=2, ensure_ascii=False) + "\n"


def parse_config(text: str) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


def save_config(config: RunConfig, path: "str | Path") -> None:
    Path(path).write_text(render_config(config), encoding="utf-8")


def load_config(path: "str | Path") -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def resolve_config(explicit_path: Optional[str] = None) -> RunConfig:
    """Explicit path, else $FIVEW_CONFIG, else built-in defaults."""
    if explicit_path:
        return load_config(explicit_path)
    env_path = os.environ.get(ENV_CONFIG, "").strip()
    if env_path:
        log.debug("loading config from %s=%s", ENV_CONFIG, env_path)
        return load_config(env_path)
    return DEFAULT_CONFIG


# --- backend descriptors ------------------------------------------------------
#
# Descriptor strings wire a pipeline role to an implementation:
#   "mock"                   rule-based stand-in
#   "mock:cover=0.5"         reader stand-in with a relaxed coverage bar
#   "remote:<base_url>"      HTTP backend speaking the wire protocol
#   "scripted:<path>"        canned transcript from a JSON file


def _load_transcript(path: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load transcript {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"transcript {path} must be a JSON object")
    return raw


def _scripted_backend(role: be.BackendRole, path: str):
    raw = _load_transcript(path)
    if role is be.BackendRole.QA:
        script = {}
        for question, item in raw.items():
            try:
                answer, score = item
                script[question] = (str(answer), float(score))
            except (TypeError, ValueError) as exc:
                raise ConfigError(
                    f"transcript {path}: entry for {question!r} must be [answer, score]"
                ) from exc
        return be.ScriptedQA(script)
    if role is be.BackendRole.PARAPHRASE:
        script = {}
        for claim, items in raw.items():
            if not isinstance(items, list):
                raise ConfigError(
                    f"transcript {path}: entry for {claim!r} must be a list"
                )
            script[claim] = [str(x) for x in items]
        return be.ScriptedParaphrase(script)
    raise ConfigError(f"scripted backends are not available for role {role.value!r}")


def _mock_backend(role: be.BackendRole, args: str):
    options = {}
    if args:
        for part in args.split(","):
            key, sep, value = part.partition("=")
            if not sep:
                raise ConfigError(f"malformed mock option {part!r}")
            options[key.strip()] = value.strip()
    if role is be.BackendRole.QA:
        cover = options.pop("cover", None)
        if options:
            raise ConfigError(f"unknown mock options: {sorted(options)}")
        if cover is None:
            return be.MockQA()
        try:
            return be.MockQA(min_cover=float(cover))
        except ValueError as exc:
            raise ConfigError(f"bad mock cover value {cover!r}") from exc
    if options:
        raise ConfigError(f"unknown mock options: {sorted(options)}")
    return {
        be.BackendRole.PARAPHRASE: be.MockParaphrase,
        be.BackendRole.NLI: be.MockNLI,
        be.BackendRole.SRL: be.MockSRL,
        be.BackendRole.QG: be.MockQG,
    }[role]()


def backend_from_spec(role: be.BackendRole, spec: str):
    """Instantiate the backend a descriptor string names for `role`."""
    spec = spec.strip()
    if not spec:
        raise ConfigError(f"empty backend descriptor for role {role.value!r}")
    kind, sep, rest = spec.partition(":")
    if kind == "mock":
        return _mock_backend(role, rest if sep else "")
    if kind == "remote":
        if not rest:
            raise ConfigError(f"remote descriptor needs a URL: {spec!r}")
        descriptor = be.BackendDescriptor(
            role=role, kind=be.BackendKind.REMOTE, endpoint=rest
        )
        return be.make_backend(descriptor)
    if kind == "scripted":
        if not rest:
            raise ConfigError(f"scripted descriptor needs a file path: {spec!r}")
        return _scripted_backend(role, rest)
    raise ConfigError(f"unknown backend descriptor {spec!r}")
