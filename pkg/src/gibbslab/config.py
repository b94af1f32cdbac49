"""YAML experiment configuration with unit-annotated keys and line-anchored errors.

A config file has top-level ``experiment``, ``seed`` and ``workers`` keys and
one section named after the experiment kind. Keys carrying a physical
quantity end in their unit: ``_energy`` (units of the system energy scale),
``_inverse_energy`` for inverse temperatures, and ``_ratio`` or ``_rel`` for
dimensionless ratios. Unknown keys are errors so typos never fall back to
defaults silently.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field

import yaml

from .circuit import MAX_QUBITS
from .hamiltonians import MAX_BATH_SPINS, MAX_DENSE_DIM

KINDS = ("theorem1", "counting", "algorithm", "dynamics", "oracle-compare", "kernel", "temperature")

# acceptance mix: (system dimension, bath spins, instances); d = 4096 is left out for runtime
THEOREM1_SIZES = [[2, 6, 30], [2, 7, 30], [2, 8, 30], [2, 9, 25], [2, 10, 10],
                  [4, 6, 25], [4, 7, 25], [4, 8, 20], [4, 9, 5]]

DEFAULTS = {
    "theorem1": {
        "instances": 200,
        "sizes": THEOREM1_SIZES,
        "v_over_delta_ratios": [1e-3, 3e-3, 1e-2, 3e-2, 1e-1],
        "eta_energy": 1.0,
        "disorder_rel": 0.05,
        "epsilon_points": 32,
    },
    "counting": {
        "bath_spins": [12, 14, 16],
        "lambdas": [5.0, 10.0, 20.0],
        "realizations": 1,
        "window_widths_eta_ratio": [1.0, 2.0, 3.0, 4.0],
        "window_positions": 12,
        "disorder_rel": 0.05,
        "hs_norm_energy": 1.0,
    },
    "algorithm": {
        "system_qubits": 1,
        "bath_spins": [10, 12],
        "lambda": 20.0,
        "q": 3,
        "r_minus_q": [8, 10, 12],
        "realizations": 4,
        "beta_inverse_energy": None,
        "beta_grid_points": 5,
        "beta_grid_bath_spins": 14,
        "beta_grid_q": 4,
        "beta_grid_r": 12,
    },
    "dynamics": {
        "instances": 4,
        "states_per_instance": 5,
        "bath_spins": 10,
        "v_over_delta_ratio": 1e-3,
        "time_samples": 1000,
        "haar_samples": 500,
        "epsilon_prime_ratio": 0.1,
    },
    "oracle-compare": {
        "plans": 20,
        "max_total_qubits": 12,
    },
    "kernel": {
        "r_max": 20,
        "r_minus_q_max": 12,
    },
    "temperature": {
        "samples": 100,
        "bath_spins": 12,
        "lambda": 20.0,
        "q": 6,
        "hs_norm_energy": 1.0,
    },
}


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is 1-based when the offending key came from a file."""

    def __init__(self, message, line=None, source=None):
        self.line, self.source = line, source
        where = f"{source or '<config>'}:{line}: " if line else ""
        super().__init__(where + message)


class ResourceError(MemoryError):
    """A requested size exceeds a hard dense-simulation cap."""


@dataclass
class ExperimentConfig:
    kind: str
    seed: int = 0
    workers: int = 1
    params: dict = field(default_factory=dict)
    source: str = None
    lines: dict = field(default_factory=dict, repr=False)

    def resolved(self) -> dict:
        return {"experiment": self.kind, "seed": self.seed, "workers": self.workers, self.kind: self.params}

    def line_of(self, key):
        return self.lines.get((self.kind, key))


def _to_python(node, path, lines):
    """Convert a composed YAML node, recording the line of every mapping key."""
    if isinstance(node, yaml.MappingNode):
        out = {}
        for k, v in node.value:
            key = k.value
            if key in out:
                raise ConfigError(f"duplicate key {key!r}", k.start_mark.line + 1)
            lines[path + (key,)] = k.start_mark.line + 1
            out[key] = _to_python(v, path + (key,), lines)
        return out
    if isinstance(node, yaml.SequenceNode):
        return [_to_python(v, path, lines) for v in node.value]
    return yaml.safe_load(yaml.serialize(node))


def parse_text(text: str, source: str = None) -> tuple:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise ConfigError(f"YAML syntax: {exc.problem}", line, source) from None
    lines = {}
    data = _to_python(node, (), lines) if node is not None else {}
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", 1, source)
    return data, lines


def load(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return from_mapping(*parse_text(text, str(path)), source=str(path))


def from_mapping(data: dict, lines: dict = None, source: str = None, kind: str = None) -> ExperimentConfig:
    lines = lines or {}
    data = dict(data)
    kind = data.pop("experiment", kind)
    if kind not in KINDS:
        raise ConfigError(f"experiment must be one of {', '.join(KINDS)}, got {kind!r}",
                          lines.get(("experiment",)), source)
    seed = data.pop("seed", 0)
    workers = data.pop("workers", 1)
    section = data.pop(kind, {}) or {}
    if data:
        key = sorted(data)[0]
        raise ConfigError(f"unknown top-level key {key!r}", lines.get((key,)), source)
    if not isinstance(section, dict):
        raise ConfigError(f"section {kind!r} must be a mapping", lines.get((kind,)), source)
    params = copy.deepcopy(DEFAULTS[kind])
    for key, value in section.items():
        if key not in params:
            raise ConfigError(f"unknown key {key!r} for experiment {kind!r}", lines.get((kind, key)), source)
        params[key] = value
    cfg = ExperimentConfig(kind, seed, workers, params, source, {k[-2:] if len(k) > 1 else k: v
                                                                   for k, v in lines.items()})
    validate(cfg)
    return cfg


def _err(cfg, key, message):
    line = cfg.lines.get((cfg.kind, key)) or cfg.lines.get((key,))
    return ConfigError(f"{key}: {message}", line, cfg.source)


def _int(cfg, key, lo=None, hi=None, value=None):
    v = cfg.params[key] if value is None else value
    if isinstance(v, bool) or not isinstance(v, int):
        raise _err(cfg, key, f"expected an integer, got {v!r}")
    if lo is not None and v < lo:
        raise _err(cfg, key, f"must be >= {lo}, got {v}")
    if hi is not None and v > hi:
        raise _err(cfg, key, f"must be <= {hi}, got {v}")
    return v


def _num(cfg, key, lo=None, lo_open=False, hi=None, hi_open=False, value=None):
    v = cfg.params[key] if value is None else value
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise _err(cfg, key, f"expected a number, got {v!r}")
    if lo is not None and (v <= lo if lo_open else v < lo):
        raise _err(cfg, key, f"must be {'>' if lo_open else '>='} {lo}, got {v}")
    if hi is not None and (v >= hi if hi_open else v > hi):
        raise _err(cfg, key, f"must be {'<' if hi_open else '<='} {hi}, got {v}")
    return float(v)


def _grid(cfg, key):
    v = cfg.params[key]
    if not isinstance(v, list):
        raise _err(cfg, key, f"expected a list, got {v!r}")
    if not v:
        raise _err(cfg, key, "sweep grid is empty")
    return v


def _cap_bath(cfg, key, m):
    if m > MAX_BATH_SPINS:
        raise ResourceError(f"{key}: {m} bath spins exceed the cap of {MAX_BATH_SPINS}")


def validate(cfg: ExperimentConfig) -> None:
    p, k = cfg.params, cfg.kind
    if isinstance(cfg.seed, bool) or not isinstance(cfg.seed, int) or cfg.seed < 0:
        raise ConfigError(f"seed must be a nonnegative integer, got {cfg.seed!r}", cfg.lines.get(("seed",)),
                          cfg.source)
    if isinstance(cfg.workers, bool) or not isinstance(cfg.workers, int) or cfg.workers < 1:
        raise ConfigError(f"workers must be a positive integer, got {cfg.workers!r}", cfg.lines.get(("workers",)),
                          cfg.source)
    if k == "theorem1":
        _int(cfg, "instances", 1)
        sizes = _grid(cfg, "sizes")
        for entry in sizes:
            if not (isinstance(entry, list) and len(entry) == 3 and all(isinstance(x, int) for x in entry)):
                raise _err(cfg, "sizes", f"entries are [system_dim, bath_spins, count], got {entry!r}")
            d_s, m, count = entry
            if d_s < 2 or d_s & (d_s - 1) or m < 1 or count < 1:
                raise _err(cfg, "sizes", f"invalid entry {entry!r}")
            _cap_bath(cfg, "sizes", m)
            if d_s << m > MAX_DENSE_DIM:
                raise ResourceError(f"sizes: dimension {d_s << m} exceeds the dense cap {MAX_DENSE_DIM}")
        for v in _grid(cfg, "v_over_delta_ratios"):
            _num(cfg, "v_over_delta_ratios", 0, True, 0.5, True, value=v)
        _num(cfg, "eta_energy", 0, True)
        _num(cfg, "disorder_rel", 0, False, 1, True)
        _int(cfg, "epsilon_points", 1)
    elif k == "counting":
        for m in _grid(cfg, "bath_spins"):
            _int(cfg, "bath_spins", 1, value=m)
            _cap_bath(cfg, "bath_spins", m)
        for lam in _grid(cfg, "lambdas"):
            _num(cfg, "lambdas", 0, True, value=lam)
        _int(cfg, "realizations", 1)
        for w in _grid(cfg, "window_widths_eta_ratio"):
            _num(cfg, "window_widths_eta_ratio", 0, True, value=w)
        _int(cfg, "window_positions", 1)
        _num(cfg, "disorder_rel", 0, False, 1, True)
        _num(cfg, "hs_norm_energy", 0, True)
    elif k == "algorithm":
        _int(cfg, "system_qubits", 1, 4)
        for m in _grid(cfg, "bath_spins"):
            _int(cfg, "bath_spins", 1, value=m)
            _cap_bath(cfg, "bath_spins", m)
        _num(cfg, "lambda", 0, True)
        _int(cfg, "q", 1, 28)
        for x in _grid(cfg, "r_minus_q"):
            _int(cfg, "r_minus_q", 0, 28 - p["q"], value=x)
        _int(cfg, "realizations", 1)
        if p["beta_inverse_energy"] is not None:
            _num(cfg, "beta_inverse_energy")
        _int(cfg, "beta_grid_points", 0)
        _int(cfg, "beta_grid_bath_spins", 1, MAX_BATH_SPINS)
        _int(cfg, "beta_grid_q", 1, 28)
        _int(cfg, "beta_grid_r", p["beta_grid_q"], 28)
    elif k == "dynamics":
        _int(cfg, "instances", 1)
        _int(cfg, "states_per_instance", 1)
        m = _int(cfg, "bath_spins", 1)
        if 2 << m > MAX_DENSE_DIM:
            raise ResourceError(f"bath_spins: dimension {2 << m} exceeds the dense cap {MAX_DENSE_DIM}")
        _num(cfg, "v_over_delta_ratio", 0, True, 0.5, True)
        _int(cfg, "time_samples", 100)
        _int(cfg, "haar_samples", 100)
        _num(cfg, "epsilon_prime_ratio", 0, True)
    elif k == "oracle-compare":
        _int(cfg, "plans", 1)
        total = _int(cfg, "max_total_qubits", 4)
        if total > MAX_QUBITS:
            raise ResourceError(f"max_total_qubits: {total} exceeds the dense cap {MAX_QUBITS}")
    elif k == "kernel":
        _int(cfg, "r_max", 1, 28)
        _int(cfg, "r_minus_q_max", 0, 27)
    elif k == "temperature":
        _int(cfg, "samples", 1)
        _int(cfg, "bath_spins", 1)
        _num(cfg, "lambda", 0, True)
        _int(cfg, "q", 1, 28)
        _num(cfg, "hs_norm_energy", 0, True)
