"""Strict parsing of experiment configurations.

A configuration is a flat mapping read from YAML or JSON. Unknown keys,
wrong types and values that would violate an invariant of the module they
feed are rejected with a ``ConfigError`` naming the key, before any
computation starts.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

import yaml

from core.exceptions import ConfigError, InvalidArgumentError
from core.forward import ProfileFactory
from core.grid import make_grid, make_k_grid
from core.transform import BOUNDARY_MODE_NAMES, BoundaryMode

logger = logging.getLogger(__name__)

REPRESENTATIONS = ("h2", "l2")
SWEEP_KEYS = ("epsilon", "lambda", "delta")


@dataclass(frozen=True)
class ExperimentConfig:
    profile: str = "bump"
    profile_file: str | None = None
    amplitude: float = 0.5
    center: float | None = None
    width: float = 0.2
    z_max: float = 1.0
    n_nodes: int = 201
    k_min: float = 1.0
    k_max: float = 3.0
    n_k: int = 11
    epsilons: tuple[float, ...] = (0.1,)
    lambdas: tuple[float, ...] = (2.0,)
    R: float = 50.0
    gamma: float | str = "auto"
    max_iters: int = 5000
    grad_tol: float = 1e-8
    deltas: tuple[float, ...] = (0.0,)
    seed: int = 0
    boundary_mode: str = BoundaryMode.FORWARD_CONSISTENT.value
    representation: str = "h2"
    verify_samples: int = 100
    verify_lambdas: tuple[float, ...] = (1.0, 2.0, 3.0, 5.0, 8.0)
    carleman_lambdas: tuple[float, ...] = (2.0, 4.0, 8.0, 16.0)
    snapshot_every: int = 25
    threads: int = 0
    data_source: str | None = None
    output_dir: str = "results"
    s3_endpoint_url: str | None = None
    swept: tuple[str, ...] = field(default=(), compare=False)

    def _single(self, key: str, values: tuple[float, ...]) -> float:
        if len(values) != 1:
            raise ConfigError(f"key '{key}' holds a list {list(values)}; only the sweep command accepts lists")
        return values[0]

    @property
    def epsilon(self) -> float:
        return self._single("epsilon", self.epsilons)

    @property
    def lam(self) -> float:
        return self._single("lambda", self.lambdas)

    @property
    def delta(self) -> float:
        return self._single("delta", self.deltas)

    def profile_params(self) -> dict[str, Any]:
        if self.profile == "file":
            return {"path": self.profile_file}
        if self.profile == "flat":
            return {}
        return {"amplitude": self.amplitude, "center": self.center, "width": self.width}

    def sweep_points(self) -> list["ExperimentConfig"]:
        """One single-valued config per combination of the list-valued keys."""
        return [
            replace(self, epsilons=(eps,), lambdas=(lam,), deltas=(delta,))
            for eps in self.epsilons
            for lam in self.lambdas
            for delta in self.deltas
        ]

    def to_dict(self) -> dict[str, Any]:
        """Resolved configuration under the documented key names."""
        raw = asdict(self)
        raw.pop("swept")
        for key, name in (("epsilon", "epsilons"), ("lambda", "lambdas"), ("delta", "deltas")):
            values = raw.pop(name)
            raw[key] = list(values) if key in self.swept else values[0]
        raw["verify_lambdas"] = list(raw["verify_lambdas"])
        raw["carleman_lambdas"] = list(raw["carleman_lambdas"])
        return raw


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


class ConfigValidator:
    """Turns a raw mapping into an ``ExperimentConfig`` or raises ``ConfigError``."""

    KEYS = (
        "profile", "profile_file", "amplitude", "center", "width",
        "z_max", "n_nodes", "k_min", "k_max", "n_k",
        "epsilon", "lambda", "R", "gamma", "max_iters", "grad_tol",
        "delta", "seed", "boundary_mode", "representation",
        "verify_samples", "verify_lambdas", "carleman_lambdas", "snapshot_every",
        "threads", "data_source", "output_dir", "s3_endpoint_url",
    )

    def _number(self, raw: dict, key: str, default: float, low: float | None = None,
                high: float | None = None, low_open: bool = False, high_open: bool = False) -> float:
        value = raw.get(key, default)
        if not _is_number(value):
            raise ConfigError(f"key '{key}' must be a number, got {value!r}")
        value = float(value)
        if low is not None and (value < low or (low_open and value == low)):
            raise ConfigError(f"key '{key}' must be {'>' if low_open else '>='} {low}, got {value}")
        if high is not None and (value > high or (high_open and value == high)):
            raise ConfigError(f"key '{key}' must be {'<' if high_open else '<='} {high}, got {value}")
        return value

    def _integer(self, raw: dict, key: str, default: int, low: int) -> int:
        value = raw.get(key, default)
        if not _is_number(value) or int(value) != value:
            raise ConfigError(f"key '{key}' must be an integer, got {value!r}")
        if value < low:
            raise ConfigError(f"key '{key}' must be >= {low}, got {value}")
        return int(value)

    def _number_list(self, raw: dict, key: str, default: tuple[float, ...], **bounds) -> tuple[float, ...]:
        value = raw.get(key, list(default) if len(default) > 1 else default[0])
        items = value if isinstance(value, list) else [value]
        if not items:
            raise ConfigError(f"key '{key}' must not be an empty list")
        return tuple(self._number({key: item}, key, 0.0, **bounds) for item in items)

    def _optional_str(self, raw: dict, key: str) -> str | None:
        value = raw.get(key)
        if value is not None and not isinstance(value, str):
            raise ConfigError(f"key '{key}' must be a string, got {value!r}")
        return value

    def _choice(self, raw: dict, key: str, default: str, choices) -> str:
        value = raw.get(key, default)
        if value not in choices:
            raise ConfigError(f"key '{key}' must be one of {list(choices)}, got {value!r}")
        return value

    def validate(self, raw: dict[str, Any]) -> ExperimentConfig:
        """
        Validate *raw* strictly and resolve defaults.

        Args:
            raw: Flat mapping of documented keys

        Returns:
            The resolved ExperimentConfig

        Raises:
            ConfigError: On the first unknown key or invalid value
        """
        if not isinstance(raw, dict):
            raise ConfigError(f"configuration must be a mapping, got {type(raw).__name__}")
        for key in raw:
            if key not in self.KEYS:
                raise ConfigError(f"unknown configuration key '{key}'")

        defaults = ExperimentConfig()
        gamma = raw.get("gamma", "auto")
        if gamma != "auto":
            gamma = self._number(raw, "gamma", 0.0, low=0.0, high=1.0, low_open=True, high_open=True)
        center = raw.get("center")
        if center is not None:
            center = self._number(raw, "center", 0.0)

        config = ExperimentConfig(
            profile=self._choice(raw, "profile", defaults.profile, ProfileFactory.NAMES),
            profile_file=self._optional_str(raw, "profile_file"),
            amplitude=self._number(raw, "amplitude", defaults.amplitude, low=0.0),
            center=center,
            width=self._number(raw, "width", defaults.width, low=0.0, low_open=True),
            z_max=self._number(raw, "z_max", defaults.z_max, low=0.0, low_open=True),
            n_nodes=self._integer(raw, "n_nodes", defaults.n_nodes, 5),
            k_min=self._number(raw, "k_min", defaults.k_min, low=0.0, low_open=True),
            k_max=self._number(raw, "k_max", defaults.k_max, low=0.0, low_open=True),
            n_k=self._integer(raw, "n_k", defaults.n_k, 3),
            epsilons=self._number_list(raw, "epsilon", defaults.epsilons, low=0.0, low_open=True),
            lambdas=self._number_list(raw, "lambda", defaults.lambdas, low=1.0),
            R=self._number(raw, "R", defaults.R, low=0.0, low_open=True),
            gamma=gamma,
            max_iters=self._integer(raw, "max_iters", defaults.max_iters, 1),
            grad_tol=self._number(raw, "grad_tol", defaults.grad_tol, low=0.0, low_open=True),
            deltas=self._number_list(raw, "delta", defaults.deltas, low=0.0, high=1.0, high_open=True),
            seed=self._integer(raw, "seed", defaults.seed, 0),
            boundary_mode=BoundaryMode.parse(
                self._choice(raw, "boundary_mode", defaults.boundary_mode, BOUNDARY_MODE_NAMES)
            ).value,
            representation=self._choice(raw, "representation", defaults.representation, REPRESENTATIONS),
            verify_samples=self._integer(raw, "verify_samples", defaults.verify_samples, 1),
            verify_lambdas=self._number_list(raw, "verify_lambdas", defaults.verify_lambdas, low=1.0),
            carleman_lambdas=self._number_list(raw, "carleman_lambdas", defaults.carleman_lambdas, low=1.0),
            snapshot_every=self._integer(raw, "snapshot_every", defaults.snapshot_every, 0),
            threads=self._integer(raw, "threads", defaults.threads, 0),
            data_source=self._optional_str(raw, "data_source"),
            output_dir=self._optional_str(raw, "output_dir") or defaults.output_dir,
            s3_endpoint_url=self._optional_str(raw, "s3_endpoint_url"),
            swept=tuple(key for key in SWEEP_KEYS if isinstance(raw.get(key), list)),
        )
        self._check_cross_field(config)
        return config

    def _check_cross_field(self, config: ExperimentConfig) -> None:
        if config.profile == "file":
            if not config.profile_file:
                raise ConfigError("key 'profile_file' is required when profile is 'file'")
            if not Path(config.profile_file).is_file():
                raise ConfigError(f"key 'profile_file' points to a missing file: {config.profile_file}")
        try:
            grid = make_grid(config.z_max, config.n_nodes)
            make_k_grid(config.k_min, config.k_max, config.n_k)
            if config.profile != "file":
                ProfileFactory.create_profile(config.profile, grid, **config.profile_params())
        except InvalidArgumentError as exc:
            raise ConfigError(f"invalid configuration: {exc}") from exc

    def is_valid(self, raw: dict[str, Any]) -> bool:
        try:
            self.validate(raw)
        except ConfigError:
            return False
        return True


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a YAML (or ``.json``) mapping from *path*."""
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as handle:
            data = json.load(handle) if path.suffix == ".json" else yaml.safe_load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except (yaml.YAMLError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from exc
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping")
    return data


def load_config(path: str | Path | None, **overrides: Any) -> ExperimentConfig:
    """Validate the file at *path* (or the defaults) and apply the non-None CLI overrides."""
    raw = load_config_file(path) if path is not None else {}
    config = ConfigValidator().validate(raw)
    changes = {key: value for key, value in overrides.items() if value is not None}
    if changes:
        config = ConfigValidator().validate({**config.to_dict(), **changes})
        logger.debug("config overrides applied %s", changes)
    return config
