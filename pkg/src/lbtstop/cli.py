"""Command-line entry point: ``lbtstop <command> [--config PATH] ...``.

Exit codes: 0 success, 2 invalid configuration, 3 solver failure,
4 simulation guard tripped.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import config as cfg
from . import experiments as ex
from .analysis import (
    baseline_throughput,
    expected_ecca_checks,
    expected_period_duration,
    expected_stopped_bits,
    expected_stopped_duration,
    fixed_point_map_g,
    stopped_mean_rate,
)
from .exceptions import ConfigError, DegenerateInputError, PhaseCapExceeded, SolverError
from .params import validate, zeta
from .sim import run, sweep_thresholds
from .solver import BISECTION, FIXED_POINT, solve

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_GUARD = 4

log = logging.getLogger("lbtstop")


def _flat(args) -> dict[str, str]:
    overrides = {}
    if args.seed is not None:
        overrides["sim.seed"] = str(args.seed)
    if args.periods is not None:
        overrides["sim.periods"] = str(args.periods)
    if args.log_base is not None:
        overrides["channel.log-base"] = args.log_base
    for item in args.set or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    return cfg.load(args.config, overrides)


def _solve(params, model, flat, method=None):
    method = method or flat["solver.method"].strip().lower()
    kwargs = {}
    if flat["solver.tol"]:
        kwargs["tol"] = cfg.parse_quantity(flat["solver.tol"])
    if method == FIXED_POINT:
        kwargs["lambda0"] = cfg.parse_quantity(flat["solver.lambda0"])
        kwargs["max_iter"] = cfg.parse_int(flat["solver.max-iter"])
    elif method != BISECTION:
        raise ConfigError(f"solver.method must be {FIXED_POINT} or {BISECTION}, got {method!r}")
    return solve(params, model, method, **kwargs)


def cmd_validate(args, flat):
    params = cfg.build_params(flat)
    report = validate(params)
    print(report)
    if not report.ok:
        return EXIT_CONFIG
    cfg.build_channel(flat)
    return EXIT_OK


def cmd_solve(args, flat):
    params = cfg.checked_params(flat)
    model = cfg.build_channel(flat)
    fp = _solve(params, model, flat, FIXED_POINT)
    bi = _solve(params, model, flat, BISECTION)
    z = zeta(params)
    rows = [[r.lambda_star, r.threshold, r.iterations, r.residual, r.method, z] for r in (fp, bi)]
    agree = abs(fp.lambda_star - bi.lambda_star) <= 1e-9 * max(fp.lambda_star, bi.lambda_star, 1e-300)
    if args.format == "csv":
        ex.write_csv(ex.SOLVE_COLUMNS, rows)
    else:
        print(f"zeta            = {z:.12g}")
        print(f"lambda*         = {fp.lambda_star:.12g} bits/s")
        print(f"threshold       = {fp.threshold:.12g} bits/s/Hz")
        print(f"iterations      = {fp.iterations} (fixed point), {bi.iterations} (bisection)")
        print(f"bisection       = {bi.lambda_star:.12g} bits/s")
        print(f"methods agree   = {'yes' if agree else 'NO'}")
    if args.out:
        ex.write_csv(ex.SOLVE_COLUMNS, rows, args.out)
    return EXIT_OK if agree else EXIT_SOLVER


def cmd_analyze(args, flat):
    params = cfg.checked_params(flat)
    model = cfg.build_channel(flat)
    result = _solve(params, model, flat)
    lam = result.lambda_star if args.lam is None else args.lam
    values = [
        ("zeta", zeta(params)),
        ("expected_checks_per_phase", expected_ecca_checks(params)),
        ("expected_period_duration_n1_s", expected_period_duration(params, 1)),
        ("mean_rate_bpshz", model.mean),
        ("baseline_bps", baseline_throughput(params, model, True)),
        ("baseline_noprobe_bps", baseline_throughput(params, model, False)),
        ("lambda_star_bps", result.lambda_star),
        ("lambda_bps", lam),
        ("g_of_lambda_bps", fixed_point_map_g(params, model, lam)),
    ]
    try:
        values += [
            ("stopped_duration_s", expected_stopped_duration(params, model, lam)),
            ("expected_phases", 1.0 / model.stop_probability(lam / params.bandwidth)),
            ("stopped_bits", expected_stopped_bits(params, model, lam)),
            ("stopped_mean_rate_bpshz", stopped_mean_rate(model, lam / params.bandwidth)),
        ]
    except DegenerateInputError as exc:
        log.warning("%s", exc)
    for name, value in values:
        print(f"{name:<32}{value:.12g}")
    if args.out:
        ex.write_csv(["quantity", "value"], values, args.out)
    return EXIT_OK


def _sim_config(flat):
    params = cfg.checked_params(flat)
    model = cfg.build_channel(flat)
    cutoff = None
    if flat["sim.policy"].strip().lower() == "optimal":
        cutoff = _solve(params, model, flat).threshold
    return cfg.build_sim_config(flat, cfg.build_policy(flat, cutoff), params, model)


def cmd_simulate(args, flat):
    sim_cfg = _sim_config(flat)
    report = run(sim_cfg)
    ex.write_csv(ex.SIM_COLUMNS, [ex.sim_row(ex.policy_threshold(sim_cfg.policy), report)], args.out)
    return _guard(report.capped_periods)


def _guard(capped: int) -> int:
    if capped:
        log.error("%d periods exceeded the ECCA phase cap", capped)
        return EXIT_GUARD
    return EXIT_OK


def cmd_sweep(args, flat):
    spec = cfg.ExperimentSpec.from_flat("sweep", flat, args.out)
    thresholds = cfg.parse_list(flat["sweep.thresholds"])
    rows, capped = [], 0
    for assignment, point in spec.expand():
        sim_cfg = cfg.build_sim_config(point, cfg.build_policy({**point, "sim.policy": "threshold"}))
        for th, report in sweep_thresholds(sim_cfg, thresholds):
            rows.append([assignment[a] for a in spec.axis_names] + ex.sim_row(th, report))
            capped += report.capped_periods
    ex.write_csv(spec.axis_names + ex.SIM_COLUMNS, rows, args.out)
    return _guard(capped)


def cmd_fig2(args, flat):
    curves = ex.fig2(flat)
    ex.write_csv(ex.FIG2_COLUMNS, ex.fig2_rows(curves), args.out)
    for c in curves:
        print(
            f"# T_cot,max={c.t_cot_max * 1e3:g} ms q={c.q} p={c.p:g}: "
            f"max {c.max_throughput:.6g} bit/s at {c.argmax_threshold:.4g} bit/s/Hz, "
            f"solver {c.solver_threshold:.4g} ({c.argmax_offset:+d} steps)",
            file=sys.stderr,
        )
    return _guard(sum(r.capped_periods for c in curves for r in c.reports))


def cmd_fig3(args, flat):
    points = ex.fig3(flat)
    ex.write_csv(ex.FIG3_COLUMNS, ex.fig3_rows(points), args.out)
    bad = [pt for pt in points if not pt.dominates]
    for pt in bad:
        print(f"# baseline beats optimal stopping at p={pt.p:g} k={pt.k:g}", file=sys.stderr)
    if not bad:
        print("# optimal stopping dominates the baseline on every grid point", file=sys.stderr)
    capped = sum(r.capped_periods for pt in points for r in (pt.optimal, pt.baseline, pt.baseline_noprobe))
    return _guard(capped)


def cmd_regopt(args, flat):
    result = ex.regopt(flat)
    ex.write_csv(ex.REGOPT_COLUMNS, ex.regopt_rows(result), args.out)
    print(
        f"# best: q={result.q} T_cot,max={result.t_cot_max * 1e3:.15g} ms "
        f"lambda*={result.lambda_star:.12g} bit/s",
        file=sys.stderr,
    )
    return EXIT_OK


COMMANDS = {
    "validate": (cmd_validate, "check parameters against the ETSI limits"),
    "solve": (cmd_solve, "maximum throughput and optimal threshold"),
    "analyze": (cmd_analyze, "closed-form period statistics"),
    "simulate": (cmd_simulate, "Monte Carlo run of one policy"),
    "sweep": (cmd_sweep, "simulated throughput over a threshold grid"),
    "fig2": (cmd_fig2, "throughput versus threshold curves"),
    "fig3": (cmd_fig3, "optimal stopping versus always-transmit"),
    "regopt": (cmd_regopt, "best (q, T_cot,max) under the regulation"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value config file")
    common.add_argument("--seed", type=int, help="override sim.seed")
    common.add_argument("--periods", type=int, help="override sim.periods")
    common.add_argument("--out", metavar="PATH", help="CSV output file (default stdout)")
    common.add_argument("--log-base", choices=["2", "e"], help="logarithm base of the rate")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="lbtstop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, parents=[common], help=help_text)
        if name == "solve":
            sp.add_argument("--format", choices=["text", "csv"], default="text")
        if name == "analyze":
            sp.add_argument("--lambda", dest="lam", type=float, help="evaluate at this throughput (bits/s)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    handler, _ = COMMANDS[args.command]
    try:
        return handler(args, _flat(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, DegenerateInputError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except PhaseCapExceeded as exc:
        print(f"simulation guard: {exc}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
