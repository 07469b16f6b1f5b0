"""Experiment configuration: a flat key/value JSON document with per-system
defaults, strict key checking, and range validation."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .errors import ConfigError
from .systems import Grid1D

# defaults per system; every optional key must appear here for both systems
_DEFAULTS = {
    "fhn": {
        "grid_points": 101,          # state is the stacked pair [u; v] -> n = 202
        "domain_length": 20.0,
        "dt": 0.01,
        "time_steps": 5120,
        "train_trajectories": 4,
        "val_trajectories": 1,
        "test_trajectories": 1,
        "horizon": 5000,
        "checkpoint_stride": 1000,
        "latent_dim": 2,
        "z_list": [1, 2, 4, 6, 8, 10],
        "ae_hidden": [100, 100, 100],
        "ae_epochs": 5000,
        "stepper_hidden": [128, 128, 128, 128, 128, 128],
        "stepper_epochs": 20000,
        "step_multiples": [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024],
        "batch_size": 32,
        "learning_rate": 1e-3,
        "activation": "relu",
        "normalize": "standardize",
        "interpolant": "cubic",
        "cv_horizon": None,
        "seed": 0,
        "substeps": 4,
        "fhn_epsilon": 0.015,
        "ks_uxx_coefficient": 0.5,
        "ic_modes": 5,
        "ic_amplitude": 0.5,
        "ic_bump_amplitude": [0.8, 1.2],
        "ic_bump_width": [0.08, 0.16],
        "ic_bump_center": [0.3, 0.7],
    },
    "ks": {
        "grid_points": 120,
        "domain_length": 22.0,
        "dt": 0.05,
        "time_steps": 5121,
        "train_trajectories": 10,
        "val_trajectories": 5,
        "test_trajectories": 5,
        "horizon": 5000,
        "checkpoint_stride": 1000,
        "latent_dim": 8,
        "z_list": [1, 2, 4, 6, 8, 10],
        "ae_hidden": [120, 120, 100],
        "ae_epochs": 5000,
        "stepper_hidden": [1024, 1024, 1024],
        "stepper_epochs": 20000,
        "step_multiples": [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024],
        "batch_size": 32,
        "learning_rate": 1e-3,
        "activation": "relu",
        "normalize": "standardize",
        "interpolant": "cubic",
        "cv_horizon": None,
        "seed": 0,
        "substeps": 4,
        "fhn_epsilon": 0.015,
        "ks_uxx_coefficient": 0.5,
        "ic_modes": 5,
        "ic_amplitude": 0.5,
        "ic_bump_amplitude": [0.8, 1.2],
        "ic_bump_width": [0.08, 0.16],
        "ic_bump_center": [0.3, 0.7],
    },
}

_KNOWN_KEYS = frozenset(_DEFAULTS["fhn"]) | {"system"}


def _require(cond: bool, key: str, message: str):
    if not cond:
        raise ConfigError(f"{key}: {message}")


def _as_int(value, key, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{key}: must be >= {minimum}, got {value}")
    return value


def _as_float(value, key, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    value = float(value)
    if positive and not value > 0:
        raise ConfigError(f"{key}: must be positive, got {value}")
    return value


def _as_int_list(value, key, minimum=1):
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"{key}: expected a non-empty list of integers, got {value!r}")
    return [_as_int(v, f"{key}[{i}]", minimum=minimum) for i, v in enumerate(value)]


def _as_range(value, key):
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                       for v in value)):
        raise ConfigError(f"{key}: expected [low, high], got {value!r}")
    lo, hi = float(value[0]), float(value[1])
    if lo > hi:
        raise ConfigError(f"{key}: low {lo} exceeds high {hi}")
    return [lo, hi]


class ExperimentConfig:
    """Validated flat configuration with appendix defaults applied.

    Unknown keys are rejected; missing optional keys take the per-system
    default; out-of-range values raise ConfigError naming the key.
    """

    def __init__(self, values: dict):
        self._values = dict(values)
        for key in sorted(values):
            setattr(self, key, values[key])

    def __repr__(self):
        return f"ExperimentConfig(system={self.system!r})"

    @property
    def state_dim(self) -> int:
        return 2 * self.grid_points if self.system == "fhn" else self.grid_points

    def to_dict(self) -> dict:
        return dict(self._values)

    def fingerprint(self) -> str:
        canonical = json.dumps(self._values, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def grid(self) -> Grid1D:
        if self.system == "fhn":
            return Grid1D(self.grid_points, self.domain_length, periodic=False)
        return Grid1D(self.grid_points, self.domain_length, periodic=True,
                      x0=-0.5 * self.domain_length)

    def ic_params(self) -> dict:
        return {"ic_modes": self.ic_modes, "ic_amplitude": self.ic_amplitude,
                "ic_bump_amplitude": tuple(self.ic_bump_amplitude),
                "ic_bump_width": tuple(self.ic_bump_width),
                "ic_bump_center": tuple(self.ic_bump_center)}

    def forecaster_params(self, coder: str = "autoencoder") -> dict:
        return {
            "coder": coder,
            "latent_dim": self.latent_dim,
            "ae_hidden": tuple(self.ae_hidden),
            "ae_epochs": self.ae_epochs,
            "stepper_hidden": tuple(self.stepper_hidden),
            "stepper_epochs": self.stepper_epochs,
            "step_multiples": tuple(self.step_multiples),
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "normalize": self.normalize,
            "interpolant": self.interpolant,
            "cv_horizon": self.cv_horizon,
            "seed": self.seed,
        }


def apply_overrides(values: dict, overrides) -> dict:
    """Apply key=value override strings; values parse as JSON, else strings."""
    out = dict(values)
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        key = key.strip()
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def parse_config(source, overrides=None) -> ExperimentConfig:
    """Parse and validate a configuration from a path, JSON text, or dict."""
    if isinstance(source, dict):
        raw = dict(source)
    else:
        text = Path(source).read_text() if Path(str(source)).exists() else str(source)
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON configuration: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a JSON object")
    raw = apply_overrides(raw, overrides)

    unknown = set(raw) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    if "system" not in raw:
        raise ConfigError("system: required key is missing")
    system = raw["system"]
    if system not in _DEFAULTS:
        raise ConfigError(f"system: must be one of {sorted(_DEFAULTS)}, got {system!r}")

    values = dict(_DEFAULTS[system])
    values.update(raw)
    values["system"] = system
    _validate(values)
    return ExperimentConfig(values)


def _validate(v: dict) -> None:
    _as_int(v["grid_points"], "grid_points", minimum=4)
    if v["system"] == "ks" and v["grid_points"] % 2 != 0:
        raise ConfigError(f"grid_points: spectral solver needs an even count, "
                          f"got {v['grid_points']}")
    _as_float(v["domain_length"], "domain_length", positive=True)
    _as_float(v["dt"], "dt", positive=True)
    _as_int(v["time_steps"], "time_steps", minimum=2)
    for key in ("train_trajectories", "val_trajectories", "test_trajectories"):
        _as_int(v[key], key, minimum=1)
    _as_int(v["horizon"], "horizon", minimum=0)
    _require(v["horizon"] <= v["time_steps"] - 1, "horizon",
             f"must be <= time_steps-1 = {v['time_steps'] - 1}, got {v['horizon']}")
    _as_int(v["checkpoint_stride"], "checkpoint_stride", minimum=1)

    state_dim = 2 * v["grid_points"] if v["system"] == "fhn" else v["grid_points"]
    _as_int(v["latent_dim"], "latent_dim", minimum=1)
    _require(v["latent_dim"] < state_dim, "latent_dim",
             f"must be smaller than the state dimension {state_dim}, got {v['latent_dim']}")
    for i, z in enumerate(_as_int_list(v["z_list"], "z_list")):
        _require(z < state_dim, f"z_list[{i}]",
                 f"must be smaller than the state dimension {state_dim}, got {z}")

    _as_int_list(v["ae_hidden"], "ae_hidden")
    _as_int_list(v["stepper_hidden"], "stepper_hidden")
    _as_int(v["ae_epochs"], "ae_epochs", minimum=0)
    _as_int(v["stepper_epochs"], "stepper_epochs", minimum=0)
    _as_int(v["batch_size"], "batch_size", minimum=1)
    _as_float(v["learning_rate"], "learning_rate", positive=True)

    multiples = _as_int_list(v["step_multiples"], "step_multiples")
    if len(set(multiples)) != len(multiples):
        raise ConfigError(f"step_multiples: entries must be distinct, got {multiples}")
    for s in multiples:
        _require(s & (s - 1) == 0, "step_multiples",
                 f"every step must be a power of two, got {s}")
    _require(max(multiples) < v["time_steps"], "step_multiples",
             f"largest step {max(multiples)} must be below time_steps "
             f"{v['time_steps']} to form pairs")

    _require(v["activation"] in ("relu", "identity"), "activation",
             f"must be 'relu' or 'identity', got {v['activation']!r}")
    _require(v["normalize"] in ("standardize", "none"), "normalize",
             f"must be 'standardize' or 'none', got {v['normalize']!r}")
    _require(v["interpolant"] in ("cubic", "linear"), "interpolant",
             f"must be 'cubic' or 'linear', got {v['interpolant']!r}")
    if v["cv_horizon"] is not None:
        _as_int(v["cv_horizon"], "cv_horizon", minimum=1)
        _require(v["cv_horizon"] <= v["time_steps"] - 1, "cv_horizon",
                 f"must be <= time_steps-1 = {v['time_steps'] - 1}")
    _as_int(v["seed"], "seed", minimum=0)
    _as_int(v["substeps"], "substeps", minimum=1)
    _as_float(v["fhn_epsilon"], "fhn_epsilon", positive=True)
    _as_float(v["ks_uxx_coefficient"], "ks_uxx_coefficient")
    _as_int(v["ic_modes"], "ic_modes", minimum=1)
    _as_float(v["ic_amplitude"], "ic_amplitude", positive=True)
    for key in ("ic_bump_amplitude", "ic_bump_width", "ic_bump_center"):
        v[key] = _as_range(v[key], key)
