"""Monte Carlo simulation of ECCA channel access with a stopping policy.

Each period repeats: draw the ECCA counter Z uniformly from {1..q}, run
T_ecca slots (each clear with probability p) until Z clear slots have been
seen, probe the link for tau * T_cot,max and draw R, then ask the policy.
On transmit the remaining (1 - tau) * T_cot,max carries (1-tau) T W R bits.

Periods are split into a fixed number of batches. Batch ``b`` draws from a
Philox stream keyed on ``(seed, b)``, so results depend only on
``(seed, periods, batches)`` and never on how batches are scheduled.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channel import ChannelModel
from .exceptions import PhaseCapExceeded
from .params import LbtParams
from .policy import ALWAYS, THRESHOLD, StoppingPolicy

log = logging.getLogger(__name__)

PHASE_CAP = 10**6
BATCHES = 30


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent counter-based stream for ``(seed, *key)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key])))


def derive_seed(seed: int, index: int) -> int:
    """64-bit seed for the ``index``-th run of a sweep."""
    state = np.random.SeedSequence([seed, 0x5EED, index]).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])


@dataclass(frozen=True)
class SimConfig:
    params: LbtParams
    model: ChannelModel
    policy: StoppingPolicy
    periods: int = 100_000
    seed: int = 0
    baseline_probes: bool = True
    batches: int = BATCHES
    phase_cap: int = PHASE_CAP
    fast: bool = False
    n_jobs: int = 1

    def __post_init__(self):
        if self.periods < 1:
            raise ValueError("periods must be >= 1")
        if self.batches < 1:
            raise ValueError("batches must be >= 1")
        if self.phase_cap < 1:
            raise ValueError("phase_cap must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    def replace(self, **changes) -> "SimConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class SimReport:
    total_bits: float
    total_time: float
    throughput: float
    throughput_stderr: float
    mean_ecca_phases_per_period: float
    phases_stderr: float
    mean_ecca_checks_per_phase: float
    checks_stderr: float
    mean_period_duration: float
    duration_stderr: float
    periods: int
    capped_periods: int
    seed: int
    batches: int


def ecca_phase_checks(z, p: float, rng: np.random.Generator, fast: bool = False) -> np.ndarray:
    """Number of ECCA slots needed to count each counter in ``z`` down to zero.

    The exact path draws every slot; ``fast`` samples the equivalent
    negative binomial (failures before ``z`` clear slots) directly.
    """
    z = np.asarray(z, dtype=np.int64)
    if fast:
        return z + rng.negative_binomial(z, p)
    remaining = z.copy()
    checks = np.zeros_like(z)
    live = np.flatnonzero(remaining > 0)
    while live.size:
        checks[live] += 1
        clear = rng.random(live.size) < p
        remaining[live[clear]] -= 1
        live = live[remaining[live] > 0]
    return checks


def _never_transmits(config: SimConfig) -> bool:
    policy = config.policy
    return policy.kind == THRESHOLD and config.model.stop_probability(policy.cutoff) == 0.0


def _simulate(config: SimConfig, rng: np.random.Generator, m: int):
    """Simulate ``m`` periods; returns per-period arrays and a capped mask."""
    params, model, policy = config.params, config.model, config.policy
    bits = np.zeros(m)
    time = np.zeros(m)
    phases = np.zeros(m, dtype=np.int64)
    checks = np.zeros(m, dtype=np.int64)
    capped = np.zeros(m, dtype=bool)
    if _never_transmits(config):
        # a cutoff above the channel support can never be met
        capped[:] = True
        phases[:] = config.phase_cap
        return bits, time, phases, checks, capped

    always = policy.kind == ALWAYS
    probe_time = params.tau * params.t_cot_max
    data_time = params.transmission_time
    if always and not config.baseline_probes:
        probe_time, data_time = 0.0, params.t_cot_max

    active = np.arange(m)
    phase = 0
    while active.size:
        phase += 1
        n = active.size
        z = rng.integers(1, params.q + 1, size=n)
        x = ecca_phase_checks(z, params.p, rng, config.fast)
        rate = np.asarray(model.sample(rng, n), dtype=float)
        checks[active] += x
        phases[active] += 1
        time[active] += x * params.t_ecca + probe_time
        tx = policy.transmit(rate, phase)
        done = active[tx]
        time[done] += data_time
        bits[done] = data_time * params.bandwidth * rate[tx]
        active = active[~tx]
        if active.size and phase >= config.phase_cap:
            capped[active] = True
            break
    return bits, time, phases, checks, capped


def run_period(config: SimConfig, rng: np.random.Generator):
    """Simulate one period; returns (bits, seconds, n_phases, n_checks)."""
    bits, time, phases, checks, capped = _simulate(config, rng, 1)
    if capped[0]:
        raise PhaseCapExceeded(
            f"period exceeded {config.phase_cap} ECCA phases under {config.policy}",
            phases=int(phases[0]),
        )
    return float(bits[0]), float(time[0]), int(phases[0]), int(checks[0])


def _batch_sizes(periods: int, batches: int) -> list[int]:
    batches = min(batches, periods)
    base, extra = divmod(periods, batches)
    return [base + (1 if b < extra else 0) for b in range(batches)]


def _run_batch(config: SimConfig, b: int, size: int) -> np.ndarray:
    bits, time, phases, checks, capped = _simulate(config, make_rng(config.seed, b), size)
    ok = ~capped
    return np.array(
        [
            bits[ok].sum(),
            time[ok].sum(),
            phases[ok].sum(),
            checks[ok].sum(),
            ok.sum(),
            capped.sum(),
        ],
        dtype=float,
    )


def _ratio_stderr(num: np.ndarray, den: np.ndarray) -> float:
    keep = den > 0
    if keep.sum() < 2:
        return float("nan")
    ratios = num[keep] / den[keep]
    return float(np.std(ratios, ddof=1) / np.sqrt(ratios.size))


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else float("nan")


def run(config: SimConfig) -> SimReport:
    """Simulate ``config.periods`` periods and aggregate with batch means."""
    sizes = _batch_sizes(config.periods, config.batches)
    if config.n_jobs > 1:
        with ThreadPoolExecutor(config.n_jobs) as pool:
            rows = list(pool.map(lambda a: _run_batch(config, *a), enumerate(sizes)))
    else:
        rows = [_run_batch(config, b, size) for b, size in enumerate(sizes)]
    stats = np.vstack(rows)
    bits, time, phases, checks, done, capped = stats.T
    total_bits, total_time = float(bits.sum()), float(time.sum())
    n_done = float(done.sum())
    if capped.sum():
        log.warning("%d periods hit the %d-phase cap", int(capped.sum()), config.phase_cap)
    return SimReport(
        total_bits=total_bits,
        total_time=total_time,
        throughput=_ratio(total_bits, total_time),
        throughput_stderr=_ratio_stderr(bits, time),
        mean_ecca_phases_per_period=_ratio(float(phases.sum()), n_done),
        phases_stderr=_ratio_stderr(phases, done),
        mean_ecca_checks_per_phase=_ratio(float(checks.sum()), float(phases.sum())),
        checks_stderr=_ratio_stderr(checks, phases),
        mean_period_duration=_ratio(total_time, n_done),
        duration_stderr=_ratio_stderr(time, done),
        periods=config.periods,
        capped_periods=int(capped.sum()),
        seed=config.seed,
        batches=len(sizes),
    )


def sweep_thresholds(config: SimConfig, thresholds) -> list[tuple[float, SimReport]]:
    """One :func:`run` per threshold policy, each on its own derived seed."""
    thresholds = [float(t) for t in thresholds]
    if any(t < 0 for t in thresholds):
        raise ValueError("thresholds must be nonnegative")
    if thresholds != sorted(thresholds):
        raise ValueError("thresholds must be sorted")
    out = []
    for i, th in enumerate(thresholds):
        cfg = config.replace(policy=StoppingPolicy.threshold(th), seed=derive_seed(config.seed, i))
        out.append((th, run(cfg)))
    return out
