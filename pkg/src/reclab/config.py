"""Evaluator configuration: one TOML file plus RECLAB_* environment overrides.

Recognized keys (and their override variables):

==================  ========================  ===========================
key                 environment variable      default
==================  ========================  ===========================
host                RECLAB_HOST               127.0.0.1
port                RECLAB_PORT               7000
advertised_host     RECLAB_ADVERTISED_HOST    host (or 127.0.0.1 for 0.0.0.0)
data_dir            RECLAB_DATA_DIR           reclab-data
datasets_file       RECLAB_DATASETS_FILE      none
recommenders_file   RECLAB_RECOMMENDERS_FILE  none
web_root            RECLAB_WEB_ROOT           none
poll_interval       RECLAB_POLL_INTERVAL      2.0 seconds
train_timeout       RECLAB_TRAIN_TIMEOUT      3600 seconds
recommend_timeout   RECLAB_RECOMMEND_TIMEOUT  3600 seconds
retries             RECLAB_RETRIES            3
==================  ========================  ===========================

Relative paths in the file are resolved against the file's directory.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ENV_PREFIX = "RECLAB_"

_PATH_KEYS = ("data_dir", "datasets_file", "recommenders_file", "web_root")


class ConfigError(Exception):
    """Raised for unreadable or malformed configuration."""


@dataclass(frozen=True)
class EvaluatorConfig:
    host: str = "127.0.0.1"
    port: int = 7000
    advertised_host: str | None = None
    data_dir: str = "reclab-data"
    datasets_file: str | None = None
    recommenders_file: str | None = None
    web_root: str | None = None
    poll_interval: float = 2.0
    train_timeout: float = 3600.0
    recommend_timeout: float = 3600.0
    retries: int = 3


def _coerce(name: str, raw, target_type) -> object:
    try:
        if target_type is int:
            return int(raw)
        if target_type is float:
            return float(raw)
        return str(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config key {name!r}: cannot read {raw!r}") from exc


def load_config(path: str | Path | None = None, environ=None) -> EvaluatorConfig:
    """Build the evaluator configuration from a TOML file and the environment.

    Environment variables override file values; both override defaults.
    """
    environ = os.environ if environ is None else environ
    data: dict = {}
    base_dir = Path.cwd()
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        base_dir = path.parent
        try:
            with open(path, "rb") as handle:
                data = tomllib.load(handle)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid TOML: {exc}") from exc

    known = {f.name: f for f in fields(EvaluatorConfig)}
    unknown = set(data) - set(known)
    if unknown:
        raise ConfigError(f"config file has unknown keys: {sorted(unknown)}")

    values: dict = {}
    for name, spec in known.items():
        target = {"port": int, "retries": int}.get(name)
        if target is None:
            target = float if name.endswith(("_interval", "_timeout")) else str
        env_name = ENV_PREFIX + name.upper()
        if env_name in environ:
            values[name] = _coerce(name, environ[env_name], target)
        elif name in data:
            values[name] = _coerce(name, data[name], target)

    for key in _PATH_KEYS:
        if key in values and values[key]:
            p = Path(values[key])
            if not p.is_absolute():
                values[key] = str(base_dir / p)

    return EvaluatorConfig(**values)


def load_recommender_registry(path: str | Path) -> dict[str, str]:
    """Parse the recommender registry file: TOML mapping id -> base URI."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"recommender registry not found: {path}")
    with open(path, "rb") as handle:
        raw = tomllib.load(handle)
    registry: dict[str, str] = {}
    for rid, uri in raw.items():
        if not isinstance(uri, str) or not uri:
            raise ConfigError(
                f"recommender registry {path}: {rid!r} must map to a base URI string"
            )
        registry[rid] = uri.rstrip("/")
    return registry
