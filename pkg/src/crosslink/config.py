"""Experiment configuration: paper-default hyperparameters, flat
key=value config files with dotted section keys, and environment
overrides.

Config file syntax: one "section.key=value" per line, '#' comments and
blank lines ignored. Any key can be overridden by an environment
variable named CROSSLINK_<KEY> with dots replaced by double
underscores and letters uppercased, e.g. rcca.k_proj ->
CROSSLINK_RCCA__K_PROJ.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields

from crosslink.errors import ConfigError

ENV_PREFIX = "CROSSLINK_"

VARIANTS = ("full", "attrs_only", "struct_only", "no_projection")
POOLS = ("all", "test")


@dataclass
class ExperimentConfig:
    # data
    users_x: str = ""
    edges_x: str = ""
    users_y: str = ""
    edges_y: str = ""
    pairs: str = ""
    # pipeline variant
    variant: str = "full"
    # embedding dimensions
    d_c: int = 100
    d_w: int = 100
    d_t: int = 100
    d_s: int = 100
    # preprocessing
    rare_min_count: int = 10
    qgrams: tuple = (2, 3)
    # level hyperparameters
    lambda_smooth: float = 0.1
    alpha: float | None = None  # defaults to 1/d_t
    beta: float | None = None  # defaults to 1/d_t
    topic_iters: int = 200
    char_epochs: int = 200
    char_batch_size: int = 64
    char_learning_rate: float = 1e-3
    cbow_window: int = 5
    cbow_negatives: int = 5
    cbow_epochs: int = 30
    struct_negatives: int = 5
    struct_samples_per_edge: int = 100
    # projection
    k_proj: int = 25
    reg: float = 1e5
    # evaluation
    n_train: int = 200
    n_test: int = 500
    top_k: int = 3
    repetitions: int = 10
    candidate_pool: str = "all"
    # master seed
    seed: int = 0

    def resolved_alpha(self) -> float:
        return self.alpha if self.alpha is not None else 1.0 / self.d_t

    def resolved_beta(self) -> float:
        return self.beta if self.beta is not None else 1.0 / self.d_t

    def validate(self) -> None:
        if self.variant not in VARIANTS:
            raise ConfigError(
                f"variant must be one of {VARIANTS}, got {self.variant!r}"
            )
        if self.candidate_pool not in POOLS:
            raise ConfigError(
                f"eval.candidate_pool must be one of {POOLS}, got "
                f"{self.candidate_pool!r}"
            )
        for name in ("d_c", "d_w", "d_t", "d_s", "k_proj", "top_k",
                     "repetitions", "topic_iters", "n_train", "n_test"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not 0.0 <= self.lambda_smooth <= 1.0:
            raise ConfigError(
                f"word.lambda must lie in [0, 1], got {self.lambda_smooth}"
            )
        if self.reg < 0:
            raise ConfigError(f"rcca.reg must be nonnegative, got {self.reg}")
        if self.d_t < 2:
            raise ConfigError(f"dims.d_t must be >= 2, got {self.d_t}")
        for q in self.qgrams:
            if q < 2:
                raise ConfigError(f"q-gram lengths must be >= 2, got {q}")

    def to_dict(self) -> dict:
        out = {}
        for key, (attr, parse) in CONFIG_KEYS.items():
            val = getattr(self, attr)
            if parse is _parse_qgrams:
                val = ",".join(str(q) for q in val)
            out[key] = val
        return out


def _parse_qgrams(raw: str) -> tuple:
    if not raw.strip():
        return ()
    return tuple(int(p) for p in raw.split(","))


def _parse_optional_float(raw: str):
    return None if raw.strip().lower() in ("", "auto") else float(raw)


# config-file key -> (attribute, parser)
CONFIG_KEYS = {
    "data.users_x": ("users_x", str),
    "data.edges_x": ("edges_x", str),
    "data.users_y": ("users_y", str),
    "data.edges_y": ("edges_y", str),
    "data.pairs": ("pairs", str),
    "variant": ("variant", str),
    "dims.d_c": ("d_c", int),
    "dims.d_w": ("d_w", int),
    "dims.d_t": ("d_t", int),
    "dims.d_s": ("d_s", int),
    "preprocess.rare_min_count": ("rare_min_count", int),
    "preprocess.qgrams": ("qgrams", _parse_qgrams),
    "word.lambda": ("lambda_smooth", float),
    "topic.alpha": ("alpha", _parse_optional_float),
    "topic.beta": ("beta", _parse_optional_float),
    "topic.iters": ("topic_iters", int),
    "char.epochs": ("char_epochs", int),
    "char.batch_size": ("char_batch_size", int),
    "char.learning_rate": ("char_learning_rate", float),
    "word.window": ("cbow_window", int),
    "word.negatives": ("cbow_negatives", int),
    "word.epochs": ("cbow_epochs", int),
    "struct.negatives": ("struct_negatives", int),
    "struct.samples_per_edge": ("struct_samples_per_edge", int),
    "rcca.k_proj": ("k_proj", int),
    "rcca.reg": ("reg", float),
    "eval.n_train": ("n_train", int),
    "eval.n_test": ("n_test", int),
    "eval.top_k": ("top_k", int),
    "eval.repetitions": ("repetitions", int),
    "eval.candidate_pool": ("candidate_pool", str),
    "seed": ("seed", int),
}


def env_name(key: str) -> str:
    return ENV_PREFIX + key.replace(".", "__").upper()


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse key=value lines into a raw {key: string} dict."""
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key=value'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown config key {key!r}")
        raw[key] = value.strip()
    return raw


def load_config(
    path=None, overrides: dict | None = None, use_env: bool = True
) -> ExperimentConfig:
    """Build an ExperimentConfig from a file, the environment, and overrides.

    Precedence, lowest to highest: defaults, config file, environment
    variables, explicit overrides (CLI flags).
    """
    raw: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                raw.update(parse_config_text(fh.read(), source=str(path)))
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from None
    if use_env:
        for key in CONFIG_KEYS:
            env_val = os.environ.get(env_name(key))
            if env_val is not None:
                raw[key] = env_val
    if overrides:
        for key, value in overrides.items():
            if key not in CONFIG_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            raw[key] = str(value)

    cfg = ExperimentConfig()
    for key, value in raw.items():
        attr, parse = CONFIG_KEYS[key]
        try:
            setattr(cfg, attr, parse(value))
        except (ValueError, TypeError):
            raise ConfigError(f"invalid value for {key}: {value!r}") from None
    cfg.validate()
    return cfg
