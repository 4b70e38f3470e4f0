"""Flat ``key = value`` configuration files with unit suffixes.

Example::

    # section.key = value, '#' starts a comment
    params.q = 32
    params.t-ecca = 20us
    params.t-cot-max = 12ms
    params.bandwidth = 1MHz
    channel.kind = gamma
    channel.snr-db = 10
    sim.periods = 100000

Durations accept s/ms/us/µs/ns, frequencies Hz/kHz/MHz/GHz; bare numbers
are SI. Everything is converted to SI on ingest.
"""

from __future__ import annotations

import itertools
import math
import re
from decimal import Decimal
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import ChannelModel, Empirical, GammaFading, PointMass
from .exceptions import ConfigError
from .params import LbtParams, validate
from .policy import StoppingPolicy
from .sim import BATCHES, PHASE_CAP, SimConfig

DEFAULTS = {
    "params.q": "32",
    "params.t-ecca": "20us",
    "params.t-cot-max": "12ms",
    "params.tau": "0.1",
    "params.p": "0.5",
    "params.bandwidth": "1MHz",
    "channel.kind": "gamma",
    "channel.k": "1",
    "channel.snr-db": "10",
    "channel.r0": "1",
    "channel.samples-file": "",
    "channel.log-base": "2",
    "solver.method": "fixed_point",
    "solver.lambda0": "0",
    "solver.tol": "",
    "solver.max-iter": "100000",
    "sim.periods": "100000",
    "sim.seed": "0",
    "sim.batches": str(BATCHES),
    "sim.phase-cap": str(PHASE_CAP),
    "sim.policy": "optimal",
    "sim.threshold": "0",
    "sim.phases": "1",
    "sim.baseline-probes": "true",
    "sim.mode": "exact",
    "sim.jobs": "1",
    "sweep.thresholds": "0:5:50",
    "fig2.tuples": "12ms/32/0.5; 1.5ms/4/0.5; 1.5ms/32/0.5",
    "fig2.thresholds": "0:5:50",
    "fig3.p": "0.1:1.0:10",
    "fig3.k": "1, 4",
    "regopt.q": "4:32",
    "regopt.cot-fractions": "1.0",
}

# decimal exponents, applied exactly so '20us' == 20e-6
_UNITS = {
    "": 0,
    "s": 0,
    "ms": -3,
    "us": -6,
    "µs": -6,
    "ns": -9,
    "hz": 0,
    "khz": 3,
    "mhz": 6,
    "ghz": 9,
}
_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([a-zA-Zµ]*)\s*$")


def _decimal(text: str) -> Decimal:
    m = _QUANTITY.match(str(text))
    if not m:
        raise ConfigError(f"cannot parse quantity {text!r}")
    unit = m.group(2).lower()
    if unit not in _UNITS:
        raise ConfigError(f"unknown unit {m.group(2)!r} in {text!r}")
    return Decimal(m.group(1)).scaleb(_UNITS[unit])


def parse_quantity(text: str) -> float:
    """``'20us'`` -> 2e-05, ``'1 MHz'`` -> 1e6, ``'0.5'`` -> 0.5."""
    return float(_decimal(text))


def parse_bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def parse_int(text: str) -> int:
    # exact, so 64-bit seeds survive
    value = _decimal(text)
    if value != value.to_integral_value():
        raise ConfigError(f"not an integer: {text!r}")
    return int(value)


def parse_list(text: str) -> list[float]:
    """Comma list ``'0.1, 0.5'`` or inclusive linspace ``'start:stop:count'``.

    Two-field ``'a:b'`` is the integer range a..b inclusive.
    """
    text = str(text).strip()
    if ":" in text and "," not in text:
        parts = text.split(":")
        if len(parts) == 2:
            lo, hi = (parse_int(p) for p in parts)
            return [float(v) for v in range(lo, hi + 1)]
        if len(parts) == 3:
            lo, hi = parse_quantity(parts[0]), parse_quantity(parts[1])
            return [float(v) for v in np.linspace(lo, hi, parse_int(parts[2]))]
        raise ConfigError(f"bad range {text!r}")
    values = [parse_quantity(p) for p in text.split(",") if p.strip()]
    if not values:
        raise ConfigError("empty list")
    return values


def parse_text(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value
    return out


def load(path=None, overrides=None) -> dict[str, str]:
    """Defaults, then the file at ``path``, then ``overrides``."""
    flat = dict(DEFAULTS)
    if path is not None:
        try:
            flat.update(parse_text(Path(path).read_text(encoding="utf-8")))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if overrides:
        flat.update({k: str(v) for k, v in overrides.items()})
    unknown = [k for k in flat if k not in DEFAULTS and not k.startswith("sweep.axis.")]
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return flat


def build_params(flat: dict[str, str]) -> LbtParams:
    return LbtParams(
        q=parse_int(flat["params.q"]),
        t_ecca=parse_quantity(flat["params.t-ecca"]),
        t_cot_max=parse_quantity(flat["params.t-cot-max"]),
        tau=parse_quantity(flat["params.tau"]),
        p=parse_quantity(flat["params.p"]),
        bandwidth=parse_quantity(flat["params.bandwidth"]),
    )


def checked_params(flat: dict[str, str]) -> LbtParams:
    params = build_params(flat)
    report = validate(params)
    if not report.ok:
        raise ConfigError("invalid parameters: " + "; ".join(report.violations))
    return params


def parse_log_base(text: str) -> float:
    t = str(text).strip().lower()
    if t == "e":
        return math.e
    if t == "2":
        return 2.0
    raise ConfigError(f"log-base must be 2 or e, got {text!r}")


def build_channel(flat: dict[str, str]) -> ChannelModel:
    kind = flat["channel.kind"].strip().lower()
    try:
        if kind in ("gamma", "gammafading"):
            return GammaFading(
                k=parse_quantity(flat["channel.k"]),
                snr_db=parse_quantity(flat["channel.snr-db"]),
                log_base=parse_log_base(flat["channel.log-base"]),
            )
        if kind in ("point", "pointmass"):
            return PointMass(parse_quantity(flat["channel.r0"]))
        if kind == "empirical":
            if not flat["channel.samples-file"]:
                raise ConfigError("channel.samples-file is required for an empirical channel")
            return Empirical.from_file(flat["channel.samples-file"])
    except (ValueError, OSError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid channel: {exc}") from exc
    raise ConfigError(f"unknown channel.kind {kind!r}")


def build_policy(flat: dict[str, str], optimal_cutoff=None) -> StoppingPolicy:
    kind = flat["sim.policy"].strip().lower()
    if kind == "optimal":
        if optimal_cutoff is None:
            raise ConfigError("optimal policy needs a solved threshold")
        return StoppingPolicy.threshold(optimal_cutoff)
    if kind == "threshold":
        return StoppingPolicy.threshold(parse_quantity(flat["sim.threshold"]))
    if kind == "always":
        return StoppingPolicy.always_transmit()
    if kind == "forced":
        return StoppingPolicy.forced(parse_int(flat["sim.phases"]))
    raise ConfigError(f"unknown sim.policy {kind!r}")


def build_sim_config(flat: dict[str, str], policy: StoppingPolicy, params=None, model=None) -> SimConfig:
    mode = flat["sim.mode"].strip().lower()
    if mode not in ("exact", "fast"):
        raise ConfigError(f"sim.mode must be exact or fast, got {mode!r}")
    try:
        return SimConfig(
            params=params if params is not None else checked_params(flat),
            model=model if model is not None else build_channel(flat),
            policy=policy,
            periods=parse_int(flat["sim.periods"]),
            seed=parse_int(flat["sim.seed"]),
            baseline_probes=parse_bool(flat["sim.baseline-probes"]),
            batches=parse_int(flat["sim.batches"]),
            phase_cap=parse_int(flat["sim.phase-cap"]),
            fast=mode == "fast",
            n_jobs=parse_int(flat["sim.jobs"]),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def parse_fig2_tuples(text: str) -> list[tuple[float, int, float]]:
    """``'12ms/32/0.5; 1.5ms/4/0.5'`` -> [(t_cot_max, q, p), ...]."""
    out = []
    for item in str(text).split(";"):
        if not item.strip():
            continue
        parts = item.split("/")
        if len(parts) != 3:
            raise ConfigError(f"fig2 tuple must be t_cot_max/q/p, got {item!r}")
        out.append((parse_quantity(parts[0]), parse_int(parts[1]), parse_quantity(parts[2])))
    if not out:
        raise ConfigError("fig2.tuples is empty")
    return out


@dataclass(frozen=True)
class ExperimentSpec:
    """A base configuration plus parameter axes to take the product over."""

    name: str
    base: dict
    axes: tuple[tuple[str, tuple[str, ...]], ...] = ()
    outputs: str | None = None

    def __post_init__(self):
        for path, values in self.axes:
            if path not in DEFAULTS:
                raise ConfigError(f"axis {path!r} does not name a config field")
            if not values:
                raise ConfigError(f"axis {path!r} has no values")

    @classmethod
    def from_flat(cls, name: str, flat: dict[str, str], outputs=None) -> "ExperimentSpec":
        prefix = "sweep.axis."
        axes = tuple(
            (key[len(prefix):], tuple(v.strip() for v in value.split(",") if v.strip()))
            for key, value in flat.items()
            if key.startswith(prefix)
        )
        base = {k: v for k, v in flat.items() if not k.startswith(prefix)}
        return cls(name, base, axes, outputs)

    @property
    def axis_names(self) -> list[str]:
        return [path for path, _ in self.axes]

    def expand(self):
        """Yield ``(assignment, flat_config)`` for every point of the axis product."""
        names = self.axis_names
        for combo in itertools.product(*(values for _, values in self.axes)):
            assignment = dict(zip(names, combo))
            yield assignment, {**self.base, **assignment}
