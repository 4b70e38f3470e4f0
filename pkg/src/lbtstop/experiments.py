"""Experiment drivers behind the CLI: threshold sweeps, figure data, regulation grid.

Every driver returns plain rows (lists) matching a fixed header so the CLI
can write them straight to CSV.
"""

from __future__ import annotations

import csv
import io
import sys
from dataclasses import dataclass

import numpy as np

from . import config as cfg
from .analysis import baseline_throughput
from .channel import GammaFading
from .params import LbtParams, validate
from .policy import StoppingPolicy
from .sim import SimReport, derive_seed, run, sweep_thresholds
from .solver import optimal_policy, regulation_optimum, solve_fixed_point

SIM_COLUMNS = [
    "threshold_bpshz",
    "throughput_bps",
    "stderr_bps",
    "mean_phases",
    "mean_checks",
    "periods",
    "seed",
]
SOLVE_COLUMNS = ["lambda_star_bps", "threshold_bpshz", "iterations", "residual_bps", "method", "zeta"]
FIG2_COLUMNS = ["t_cot_max_ms", "q", "p", "solver_threshold_bpshz"] + SIM_COLUMNS
FIG3_COLUMNS = [
    "p",
    "k",
    "lambda_star_bps",
    "optimal_bps",
    "optimal_stderr_bps",
    "baseline_bps",
    "baseline_stderr_bps",
    "baseline_noprobe_bps",
    "baseline_noprobe_stderr_bps",
    "analytic_baseline_bps",
    "analytic_baseline_noprobe_bps",
    "gain",
    "dominates",
    "periods",
    "seed",
]
REGOPT_COLUMNS = ["q", "t_cot_max_ms", "lambda_star_bps", "best"]


def fmt(value) -> str:
    """Locale-independent, round-trippable cell text."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(header, rows, out=None) -> str:
    text = to_csv(header, rows)
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def sim_row(threshold, report: SimReport) -> list:
    return [
        threshold,
        report.throughput,
        report.throughput_stderr,
        report.mean_ecca_phases_per_period,
        report.mean_ecca_checks_per_phase,
        report.periods,
        report.seed,
    ]


def policy_threshold(policy: StoppingPolicy) -> float:
    if policy.kind == "threshold":
        return policy.cutoff
    if policy.kind == "always":
        return 0.0
    return float("nan")


@dataclass(frozen=True)
class Fig2Curve:
    t_cot_max: float
    q: int
    p: float
    solver_threshold: float
    lambda_star: float
    thresholds: tuple[float, ...]
    reports: tuple[SimReport, ...]

    @property
    def throughputs(self) -> np.ndarray:
        return np.array([r.throughput for r in self.reports])

    @property
    def argmax_threshold(self) -> float:
        return self.thresholds[int(np.argmax(self.throughputs))]

    @property
    def max_throughput(self) -> float:
        return float(np.max(self.throughputs))

    @property
    def argmax_offset(self) -> int:
        """Grid steps between the simulated argmax and the grid point nearest the solver threshold."""
        grid = np.asarray(self.thresholds)
        nearest = int(np.argmin(np.abs(grid - self.solver_threshold)))
        return int(np.argmax(self.throughputs)) - nearest

    @property
    def interior(self) -> bool:
        i = int(np.argmax(self.throughputs))
        return 0 < i < len(self.thresholds) - 1


def fig2(flat: dict[str, str]) -> list[Fig2Curve]:
    """Throughput versus stopping threshold, one curve per (t_cot_max, q, p)."""
    base = cfg.build_params(flat)
    model = cfg.build_channel(flat)
    thresholds = cfg.parse_list(flat["fig2.thresholds"])
    seed = cfg.parse_int(flat["sim.seed"])
    curves = []
    for i, (cot, q, p) in enumerate(cfg.parse_fig2_tuples(flat["fig2.tuples"])):
        params = base.replace(t_cot_max=cot, q=q, p=p)
        report = validate(params)
        if not report.ok:
            raise cfg.ConfigError(f"fig2 tuple {i}: " + "; ".join(report.violations))
        result = solve_fixed_point(params, model)
        sim_cfg = cfg.build_sim_config(
            {**flat, "sim.seed": str(derive_seed(seed, i))},
            StoppingPolicy.threshold(0.0),
            params=params,
            model=model,
        )
        sweep = sweep_thresholds(sim_cfg, thresholds)
        curves.append(
            Fig2Curve(
                cot, q, p, result.threshold, result.lambda_star,
                tuple(t for t, _ in sweep), tuple(r for _, r in sweep),
            )
        )
    return curves


def fig2_rows(curves: list[Fig2Curve]) -> list[list]:
    rows = []
    for c in curves:
        for th, rep in zip(c.thresholds, c.reports):
            rows.append([c.t_cot_max * 1e3, c.q, c.p, c.solver_threshold] + sim_row(th, rep))
    return rows


@dataclass(frozen=True)
class Fig3Point:
    p: float
    k: float
    lambda_star: float
    optimal: SimReport
    baseline: SimReport
    baseline_noprobe: SimReport
    analytic_baseline: float
    analytic_baseline_noprobe: float

    @property
    def gain(self) -> float:
        """Relative throughput gain of optimal stopping over the probing baseline."""
        return self.optimal.throughput / self.baseline.throughput - 1.0

    @property
    def dominates(self) -> bool:
        margin = 3.0 * np.hypot(self.optimal.throughput_stderr, self.baseline.throughput_stderr)
        return self.optimal.throughput >= self.baseline.throughput - margin


def fig3(flat: dict[str, str]) -> list[Fig3Point]:
    """Optimal stopping against always-transmit over a (p, k) grid."""
    base = cfg.checked_params(flat)
    ref = cfg.build_channel(flat)
    if not isinstance(ref, GammaFading):
        raise cfg.ConfigError("fig3 needs channel.kind = gamma")
    seed = cfg.parse_int(flat["sim.seed"])
    points = []
    idx = 0
    for k in cfg.parse_list(flat["fig3.k"]):
        model = GammaFading(k=k, snr_db=ref.snr_db, log_base=ref.log_base)
        for p in cfg.parse_list(flat["fig3.p"]):
            params: LbtParams = base.replace(p=float(np.round(p, 12)))
            result = solve_fixed_point(params, model)
            reports = []
            for policy, probes in (
                (optimal_policy(result), True),
                (StoppingPolicy.always_transmit(), True),
                (StoppingPolicy.always_transmit(), False),
            ):
                sim_cfg = cfg.build_sim_config(
                    {**flat, "sim.seed": str(derive_seed(seed, idx))},
                    policy,
                    params=params,
                    model=model,
                ).replace(baseline_probes=probes)
                reports.append(run(sim_cfg))
                idx += 1
            points.append(
                Fig3Point(
                    params.p, k, result.lambda_star, *reports,
                    baseline_throughput(params, model, True),
                    baseline_throughput(params, model, False),
                )
            )
    return points


def fig3_rows(points: list[Fig3Point]) -> list[list]:
    return [
        [
            pt.p, pt.k, pt.lambda_star,
            pt.optimal.throughput, pt.optimal.throughput_stderr,
            pt.baseline.throughput, pt.baseline.throughput_stderr,
            pt.baseline_noprobe.throughput, pt.baseline_noprobe.throughput_stderr,
            pt.analytic_baseline, pt.analytic_baseline_noprobe,
            pt.gain, pt.dominates, pt.optimal.periods, pt.optimal.seed,
        ]
        for pt in points
    ]


def regopt(flat: dict[str, str]):
    base = cfg.build_params(flat)
    q_values = [int(q) for q in cfg.parse_list(flat["regopt.q"])]
    fractions = cfg.parse_list(flat["regopt.cot-fractions"])
    if any(not 0 < f <= 1 for f in fractions):
        raise cfg.ConfigError("regopt.cot-fractions must lie in (0, 1]")
    if any(not 4 <= q <= 32 for q in q_values):
        raise cfg.ConfigError("regopt.q must lie in 4..32")
    return regulation_optimum(
        base.t_ecca, base.tau, base.p, cfg.build_channel(flat), base.bandwidth,
        q_values=q_values, cot_fractions=fractions,
    )


def regopt_rows(result) -> list[list]:
    return [
        [pt.q, pt.t_cot_max * 1e3, pt.lambda_star, pt == result.best]
        for pt in result.table
    ]
