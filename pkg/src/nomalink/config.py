"""Experiment configuration: one versioned JSON document for every run.

The configuration is a tree of frozen dataclasses with the repository's
default operating point baked in.  JSON documents may override any
subset of fields; unknown keys are rejected with their full dotted path
so typos never silently fall back to defaults.  A short content hash of
the canonical form is stamped into every output file, which is what
makes reruns byte-comparable.
"""

import dataclasses
import hashlib
import json
import typing
from dataclasses import dataclass, field

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Malformed or inconsistent configuration document."""


@dataclass(frozen=True)
class QuantSection:
    bits_near: int = 2
    bits_far: int = 2
    bound_s: float = 5.0
    bound_d: float = 1.0


@dataclass(frozen=True)
class LinkSection:
    rho_near: float = 0.3
    rho_far: float = 0.7
    gain_near_db: float = 14.0
    gain_far_db: float = 6.0
    p_max_watts: float = 1e6
    bandwidth_hz: float = 1e6
    superposition: str = "sqrt"


@dataclass(frozen=True)
class TrainSection:
    epochs: int = 2000
    batch_size: int = 4
    learning_rate: float = 0.1
    dataset_size: int = 64
    snr_train_near_db: float = 14.0
    snr_train_far_db: float = 6.0
    hidden: tuple = (32, 32, 32)


@dataclass(frozen=True)
class SweepSection:
    snr_near_lo_db: float = 0.0
    snr_near_hi_db: float = 28.0
    snr_far_lo_db: float = -8.0
    snr_far_hi_db: float = 20.0
    grid_step_db: float = 2.0
    n_symbols: int = 20000
    kind: str = "awgn"
    estimation_error_delta: float = 0.0


@dataclass(frozen=True)
class RequirementCase:
    name: str = "high"
    xi_req_far: float = 0.75
    rate_req_near: float = 0.075
    rate_req_far: float = 5.0


@dataclass(frozen=True)
class RegionSection:
    gain_near_db: float = 20.0
    gain_far_db: float = 16.0
    bandwidth_hz: float = 12.0
    p_max_watts: float = 1e6
    xi_req_near: float = 0.6
    xi_req_far: float = 0.7
    text_k_symbols: int = 128
    image_compression: float = 0.33
    grid_points: int = 2048
    sweep_points: int = 33
    power_level_lo: float = 0.6
    power_level_hi: float = 0.84
    power_sweep_points: int = 13
    cases: tuple = (
        RequirementCase("high", 0.75, 0.075, 5.0),
        RequirementCase("med", 0.68, 0.069, 4.13),
        RequirementCase("low", 0.65, 0.063, 3.13),
    )


@dataclass(frozen=True)
class ExperimentConfig:
    schema: int = SCHEMA_VERSION
    seed: int = 0
    quant: QuantSection = field(default_factory=QuantSection)
    link: LinkSection = field(default_factory=LinkSection)
    train: TrainSection = field(default_factory=TrainSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    region: RegionSection = field(default_factory=RegionSection)


_SCALARS = {int, float, str, bool}


def _coerce_scalar(value, target, path):
    if target is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if target is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if not isinstance(value, target):
        raise ConfigError(f"{path}: expected {target.__name__}, got {value!r}")
    return value


def _build(cls, data, path):
    """Recursively build dataclass cls from a JSON mapping."""
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'}: expected an object, got {data!r}")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in names:
            dotted = f"{path}.{key}" if path else key
            raise ConfigError(f"unknown config field: {dotted}")
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name not in data:
            continue
        sub = f"{path}.{f.name}" if path else f.name
        target = hints[f.name]
        value = data[f.name]
        if dataclasses.is_dataclass(target):
            kwargs[f.name] = _build(target, value, sub)
        elif target in _SCALARS:
            kwargs[f.name] = _coerce_scalar(value, target, sub)
        elif target is tuple:
            if not isinstance(value, list):
                raise ConfigError(f"{sub}: expected a list, got {value!r}")
            if f.name == "cases":
                kwargs[f.name] = tuple(
                    _build(RequirementCase, v, f"{sub}[{i}]")
                    for i, v in enumerate(value))
            elif f.name == "hidden":
                kwargs[f.name] = tuple(
                    _coerce_scalar(v, int, f"{sub}[{i}]")
                    for i, v in enumerate(value))
            else:
                kwargs[f.name] = tuple(value)
        else:
            raise ConfigError(f"{sub}: unsupported field type {target!r}")
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path or 'config'}: {exc}") from exc


def config_from_dict(data: dict) -> ExperimentConfig:
    cfg = _build(ExperimentConfig, data, "")
    if cfg.schema != SCHEMA_VERSION:
        raise ConfigError(
            f"schema: expected version {SCHEMA_VERSION}, got {cfg.schema}")
    return cfg


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)


def _jsonify(value):
    if isinstance(value, dict):
        return {k: _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    return value


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """Plain JSON-level document; feeding it back to config_from_dict
    reproduces the configuration."""
    return _jsonify(dataclasses.asdict(cfg))


def canonical_json(cfg: ExperimentConfig) -> str:
    return json.dumps(config_to_dict(cfg), sort_keys=True,
                      separators=(",", ":"))


def config_hash(cfg: ExperimentConfig) -> str:
    """ 12 hex chars identifying the full configuration content."""
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()[:12]
