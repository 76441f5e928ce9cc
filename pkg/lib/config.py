"""
Run configuration.

A RunConfig comes from an optional JSON file plus command-line overrides.
Parsing is strict: unknown keys, wrong types and unknown commands raise
ConfigError, so an archived config replays exactly.
"""

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from lib.errors import ConfigError
from lib.measures import EPS_LIST, Measure, measure_from_config
from lib.trials import DEFAULT_SEED

logger = logging.getLogger(__name__)

CONFIG_DIR = Path(__file__).parent.parent / "configs"
DATA_DIR = Path(__file__).parent.parent / "data"
OUTPUT_DIR = DATA_DIR / "runs"

COMMANDS = ("evolve", "kernel", "verify", "sharpness", "hypotheses", "positivity", "spectrum")
KERNEL_METHODS = ("subordination", "spectral")
POSITIVITY_PATHS = ("spectral", "kernel", "discrete")

# time grids used when the config leaves `times` unset
DEFAULT_TIMES = {
    "evolve": (1.0, 5.0, 10.0),
    "kernel": (0.5, 1.0, 2.0),
    "positivity": (0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 10.0, 20.0),
    "spectrum": (0.5, 1.0, 2.0),
}

# measure flags on the command line, by parameter name
MEASURE_FLAGS = ("alpha", "beta", "m", "c1", "c2")


@dataclass(frozen=True)
class MeasureConfig:
    family: str = "gaussian"
    dimension: int = 1
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"family": self.family, "dimension": self.dimension, "params": dict(sorted(self.params.items()))}

    def build(self) -> Measure:
        return measure_from_config(self.to_dict())

    @classmethod
    def from_dict(cls, data) -> "MeasureConfig":
        if not isinstance(data, dict):
            raise ConfigError(f"Measure config must be an object, got {type(data).__name__}")
        unknown = set(data) - {"family", "dimension", "params"}
        if unknown:
            raise ConfigError(f"Unknown measure config keys: {sorted(unknown)}")
        params = data.get("params") or {}
        if not isinstance(params, dict):
            raise ConfigError("Measure params must be an object")
        try:
            return cls(
                family=str(data.get("family", "gaussian")),
                dimension=_integer(data.get("dimension", 1)),
                params={str(k): float(v) for k, v in params.items()},
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Bad measure config value: {e}") from e


def load_measure_config(path: Path | str) -> MeasureConfig:
    """Read a measure config; bare names resolve against configs/."""
    path = Path(path)
    if not path.exists() and (CONFIG_DIR / path).exists():
        path = CONFIG_DIR / path
    return MeasureConfig.from_dict(_read_json(path))


# --- Field parsers ---


def _integer(value) -> int:
    if isinstance(value, bool) or not float(value).is_integer():
        raise ValueError(f"expected an integer, got {value!r}")
    return int(value)


def _positive(value) -> float:
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise ValueError(f"expected a positive number, got {value!r}")
    return value


def _positive_int(value) -> int:
    value = _integer(value)
    if value < 1:
        raise ValueError(f"expected a positive integer, got {value!r}")
    return value


def _floats(value) -> tuple[float, ...]:
    if isinstance(value, str):
        return tuple(float(v) for v in parse_grid(value))
    return tuple(float(v) for v in value)


def _optional(parser):
    return lambda value: None if value is None else parser(value)


def _choice(options):
    def parse(value):
        if value not in options:
            raise ValueError(f"expected one of {options}, got {value!r}")
        return value

    return parse


def _methods(value) -> tuple[str, ...]:
    items = value.split(",") if isinstance(value, str) else list(value)
    methods = tuple(m.strip() for m in items if m.strip())
    if not methods or any(m not in KERNEL_METHODS for m in methods):
        raise ValueError(f"methods must be drawn from {KERNEL_METHODS}, got {value!r}")
    return methods


def _box(value) -> tuple[float, float]:
    if isinstance(value, str):
        value = value.split(":")
    lo, hi = (float(v) for v in value)
    if not hi > lo:
        raise ValueError(f"box needs lo < hi, got {value!r}")
    return lo, hi


def _grid_spec(value) -> str:
    parse_grid(value)
    return str(value)


def _flag(value) -> bool:
    if not isinstance(value, bool):
        raise ValueError(f"expected true/false, got {value!r}")
    return value


def parse_grid(spec) -> np.ndarray:
    """"lo:hi:count" (inclusive linspace) or a comma list of numbers."""
    if not isinstance(spec, str):
        raise ValueError(f"grid spec must be a string, got {spec!r}")
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid spec must be lo:hi:count, got {spec!r}")
        lo, hi, count = float(parts[0]), float(parts[1]), _positive_int(parts[2])
        return np.linspace(lo, hi, count)
    return np.array([float(v) for v in spec.split(",") if v.strip()])


_PARSERS = {
    "seed": _integer,
    "max_degree": _positive_int,
    "quadrature_nodes": _positive_int,
    "times": _optional(_floats),
    "grid": _grid_spec,
    "methods": _methods,
    "tolerance": _positive,
    "suite_size": _positive_int,
    "eps_list": _floats,
    "c": _optional(_positive),
    "c_factor": _positive,
    "gamma": float,
    "gamma1": float,
    "ns": lambda v: tuple(_positive_int(n) for n in v),
    "box": _box,
    "path": _choice(POSITIVITY_PATHS),
    "samples": _positive_int,
    "R": _positive,
    "h": _positive,
    "tail_tolerance": _positive,
    "k": _positive_int,
    "output": str,
    "ledger": _flag,
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    measure: MeasureConfig = field(default_factory=MeasureConfig)
    output: str = str(OUTPUT_DIR)
    seed: int = DEFAULT_SEED
    max_degree: int = 40
    quadrature_nodes: int = 80
    times: tuple[float, ...] | None = None
    grid: str = "-1:1:3"
    methods: tuple[str, ...] = KERNEL_METHODS
    tolerance: float = 1e-3
    suite_size: int = 10
    eps_list: tuple[float, ...] = EPS_LIST
    c: float | None = None
    c_factor: float = 1.05
    gamma: float = -0.5
    gamma1: float = -0.25
    ns: tuple[int, ...] = (10, 100, 1000, 10000)
    box: tuple[float, float] = (-1.0, 1.0)
    path: str = "spectral"
    samples: int = 201
    R: float = 8.0
    h: float = 0.01
    tail_tolerance: float = 1e-12
    k: int = 4
    ledger: bool = True

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"Unknown command {self.command!r}; expected one of {COMMANDS}")
        if not isinstance(self.measure, MeasureConfig):
            raise ConfigError("measure must be a MeasureConfig")

    @property
    def time_grid(self) -> tuple[float, ...]:
        times = self.times if self.times is not None else DEFAULT_TIMES.get(self.command, (1.0,))
        if any(t <= 0 for t in times) or any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError(f"times must be positive and increasing, got {times}")
        return tuple(times)

    @property
    def grid_points(self) -> np.ndarray:
        return parse_grid(self.grid)

    def to_dict(self) -> dict:
        """Everything that determines the artifacts; output location and ledger are left out."""
        data = {f.name: getattr(self, f.name) for f in fields(self) if f.name not in ("output", "ledger")}
        data["measure"] = self.measure.to_dict()
        for key, value in data.items():
            if isinstance(value, tuple):
                data[key] = list(value)
        return data

    @property
    def config_hash(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _read_json(path: Path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ConfigError(f"Config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid JSON: {e}") from e


def run_config_from_dict(data: dict) -> RunConfig:
    """Strictly parse a run config object."""
    if not isinstance(data, dict):
        raise ConfigError(f"Run config must be an object, got {type(data).__name__}")
    allowed = {f.name for f in fields(RunConfig)}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"Unknown run config keys: {sorted(unknown)}")
    if "command" not in data:
        raise ConfigError("Run config needs a command")

    values = {"command": data["command"]}
    measure = data.get("measure")
    if isinstance(measure, str):
        values["measure"] = load_measure_config(measure)
    elif measure is not None:
        values["measure"] = MeasureConfig.from_dict(measure)
    for key, raw in data.items():
        if key in ("command", "measure"):
            continue
        try:
            values[key] = _PARSERS[key](raw)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Bad value for {key}: {e}") from e
    return RunConfig(**values)


def load_run_config(path: Path | str) -> RunConfig:
    config = run_config_from_dict(_read_json(Path(path)))
    logger.debug("Loaded %s config from %s", config.command, path)
    return config


def merge_cli_overrides(config: RunConfig | None, namespace) -> RunConfig:
    """
    Apply flags from an argparse namespace on top of config.

    A flag left at None keeps the config value. --measure / --dim and the
    parameter flags rebuild the measure; parameters carry over only while
    the family stays the same.
    """
    args = vars(namespace)
    command = args.get("command")
    if config is None:
        config = RunConfig(command=command)
    elif command and command != config.command:
        raise ConfigError(f"Config file is for {config.command!r}, not {command!r}")

    updates = {}
    for key, parser in _PARSERS.items():
        raw = args.get(key)
        if raw is None:
            continue
        try:
            updates[key] = parser(raw)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Bad value for --{key}: {e}") from e
    if args.get("t") is not None:
        updates["times"] = _PARSERS["times"](args["t"])
    if args.get("no_ledger"):
        updates["ledger"] = False

    measure = config.measure
    if args.get("measure_config"):
        measure = load_measure_config(args["measure_config"])
    family = args.get("measure")
    params_given = {name: float(args[name]) for name in MEASURE_FLAGS if args.get(name) is not None}
    if family or args.get("dim") is not None or params_given:
        family = family or measure.family
        params = dict(measure.params) if family == measure.family else {}
        params.update(params_given)
        try:
            dimension = _integer(args["dim"]) if args.get("dim") is not None else measure.dimension
        except ValueError as e:
            raise ConfigError(f"Bad value for --dim: {e}") from e
        measure = MeasureConfig(family=family, dimension=dimension, params=params)
    updates["measure"] = measure
    return replace(config, **updates)
