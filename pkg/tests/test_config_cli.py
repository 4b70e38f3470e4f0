import csv
import io
import math

import numpy as np
import pytest

from lbtstop import config as cfg
from lbtstop import experiments as ex
from lbtstop.channel import Empirical, GammaFading, PointMass
from lbtstop.cli import EXIT_CONFIG, EXIT_GUARD, EXIT_OK, EXIT_SOLVER, main
from lbtstop.exceptions import ConfigError


@pytest.mark.parametrize(
    "text, value",
    [
        ("20us", 20e-6),
        ("20 µs", 20e-6),
        ("12ms", 12e-3),
        ("1.5ms", 1.5e-3),
        ("1MHz", 1e6),
        ("20 kHz", 2e4),
        ("3ns", 3e-9),
        ("0.5", 0.5),
        ("1e-3", 1e-3),
        ("2s", 2.0),
    ],
)
def test_parse_quantity_is_exact(text, value):
    assert cfg.parse_quantity(text) == value


@pytest.mark.parametrize("text", ["", "ms", "12 parsecs", "1,5ms", "abc"])
def test_parse_quantity_rejects(text):
    with pytest.raises(ConfigError):
        cfg.parse_quantity(text)


def test_parse_int_keeps_64_bit_seeds():
    big = 2**63 + 12345
    assert cfg.parse_int(str(big)) == big
    assert cfg.parse_int("1e3") == 1000
    with pytest.raises(ConfigError):
        cfg.parse_int("1.5")


def test_parse_bool():
    assert cfg.parse_bool("Yes") is True
    assert cfg.parse_bool("off") is False
    with pytest.raises(ConfigError):
        cfg.parse_bool("maybe")


def test_parse_list_forms():
    assert cfg.parse_list("0.1, 0.5") == [0.1, 0.5]
    assert cfg.parse_list("4:7") == [4.0, 5.0, 6.0, 7.0]
    assert cfg.parse_list("0:5:50") == list(np.linspace(0, 5, 50))
    assert cfg.parse_list("0.1:1.0:10")[-1] == 1.0
    with pytest.raises(ConfigError):
        cfg.parse_list("1:2:3:4")
    with pytest.raises(ConfigError):
        cfg.parse_list(" , ")


def test_parse_text_comments_and_errors():
    flat = cfg.parse_text("# header\nparams.q = 16  # inline\n\nchannel.k=4\n")
    assert flat == {"params.q": "16", "channel.k": "4"}
    with pytest.raises(ConfigError, match="line 1"):
        cfg.parse_text("params.q 16")
    with pytest.raises(ConfigError, match="empty key"):
        cfg.parse_text("= 3")


def test_load_layers_file_and_overrides(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("params.q = 16\nparams.t-cot-max = 6ms\n", encoding="utf-8")
    flat = cfg.load(path, {"params.q": "8"})
    assert flat["params.q"] == "8"
    assert flat["params.t-cot-max"] == "6ms"
    assert flat["params.tau"] == cfg.DEFAULTS["params.tau"]


def test_load_rejects_unknown_keys(tmp_path):
    with pytest.raises(ConfigError, match="params.qq"):
        cfg.load(None, {"params.qq": "3"})
    with pytest.raises(ConfigError, match="cannot read"):
        cfg.load(tmp_path / "missing.cfg")
    assert "sweep.axis.params.q" in cfg.load(None, {"sweep.axis.params.q": "4,8"})


def test_build_params_defaults(defaults):
    assert cfg.build_params(cfg.load()) == defaults


def test_checked_params_raises_on_violation():
    with pytest.raises(ConfigError, match="q below 4"):
        cfg.checked_params(cfg.load(None, {"params.q": "3"}))


def test_build_channel_kinds(tmp_path):
    assert cfg.build_channel(cfg.load()) == GammaFading(1.0, 10.0, 2.0)
    assert cfg.build_channel(cfg.load(None, {"channel.log-base": "e"})).log_base == math.e
    assert cfg.build_channel(cfg.load(None, {"channel.kind": "point", "channel.r0": "2"})) == PointMass(2.0)
    path = tmp_path / "rates.txt"
    np.savetxt(path, [0.5, 1.5, 2.5])
    emp = cfg.build_channel(cfg.load(None, {"channel.kind": "empirical", "channel.samples-file": str(path)}))
    assert isinstance(emp, Empirical) and emp.samples.size == 3
    for bad in ({"channel.kind": "rician"}, {"channel.k": "-1"}, {"channel.log-base": "10"},
                {"channel.kind": "empirical"}):
        with pytest.raises(ConfigError):
            cfg.build_channel(cfg.load(None, bad))


def test_build_policy_and_sim_config():
    flat = cfg.load()
    with pytest.raises(ConfigError):
        cfg.build_policy(flat)
    assert cfg.build_policy(flat, 2.0).cutoff == 2.0
    assert cfg.build_policy({**flat, "sim.policy": "always"}).kind == "always"
    assert cfg.build_policy({**flat, "sim.policy": "forced", "sim.phases": "3"}).phases == 3
    with pytest.raises(ConfigError):
        cfg.build_policy({**flat, "sim.policy": "greedy"})
    sim = cfg.build_sim_config({**flat, "sim.mode": "fast", "sim.jobs": "2"}, cfg.build_policy(flat, 1.0))
    assert sim.fast and sim.n_jobs == 2
    with pytest.raises(ConfigError):
        cfg.build_sim_config({**flat, "sim.mode": "turbo"}, cfg.build_policy(flat, 1.0))
    with pytest.raises(ConfigError):
        cfg.build_sim_config({**flat, "sim.periods": "0"}, cfg.build_policy(flat, 1.0))


def test_fig2_tuples():
    assert cfg.parse_fig2_tuples(cfg.DEFAULTS["fig2.tuples"]) == [
        (12e-3, 32, 0.5), (1.5e-3, 4, 0.5), (1.5e-3, 32, 0.5)
    ]
    with pytest.raises(ConfigError):
        cfg.parse_fig2_tuples("12ms/32")
    with pytest.raises(ConfigError):
        cfg.parse_fig2_tuples(" ; ")


def test_experiment_spec_axes():
    flat = cfg.load(None, {"sweep.axis.params.p": "0.5, 1", "sweep.axis.channel.k": "1,4"})
    spec = cfg.ExperimentSpec.from_flat("s", flat)
    assert set(spec.axis_names) == {"params.p", "channel.k"}
    points = list(spec.expand())
    assert len(points) == 4
    assert all(not k.startswith("sweep.axis.") for _, point in points for k in point)
    assert {(a["params.p"], a["channel.k"]) for a, _ in points} == {
        ("0.5", "1"), ("0.5", "4"), ("1", "1"), ("1", "4")
    }
    with pytest.raises(ConfigError, match="does not name"):
        cfg.ExperimentSpec("s", flat, (("params.nope", ("1",)),))
    with pytest.raises(ConfigError, match="no values"):
        cfg.ExperimentSpec("s", flat, (("params.q", ()),))


def test_spec_without_axes_has_single_point():
    assert len(list(cfg.ExperimentSpec("s", cfg.load()).expand())) == 1


def test_fmt_is_round_trippable():
    assert ex.fmt(0.1) == "0.1"
    assert float(ex.fmt(1 / 3)) == 1 / 3
    assert ex.fmt(True) == "1" and ex.fmt(np.int64(7)) == "7"
    assert ex.fmt(1234567.0) == "1234567.0"


# ---- CLI ----


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(text):
    return list(csv.reader(io.StringIO(text)))


def test_cli_validate(capsys):
    assert run_cli(capsys, "validate")[:2] == (EXIT_OK, "pass\n")
    code, out, _ = run_cli(capsys, "validate", "--set", "params.q=3")
    assert code == EXIT_CONFIG and "q below 4" in out


def test_cli_solve_defaults_agree(capsys):
    code, out, _ = run_cli(capsys, "solve")
    assert code == EXIT_OK
    assert "methods agree   = yes" in out


def test_cli_solve_point_mass_closed_form(capsys, defaults):
    from lbtstop.params import zeta

    code, out, _ = run_cli(capsys, "solve", "--format", "csv", "--set", "channel.kind=point")
    rows = read_csv(out)
    assert code == EXIT_OK and rows[0] == ex.SOLVE_COLUMNS
    expected = defaults.bandwidth / (1 + zeta(defaults))
    for row in rows[1:]:
        assert float(row[0]) == pytest.approx(expected, rel=1e-9)


def test_cli_invalid_config_exit_2(capsys, tmp_path):
    code, _, err = run_cli(capsys, "solve", "--set", "params.q=3")
    assert code == EXIT_CONFIG and "q below 4" in err
    assert run_cli(capsys, "solve", "--set", "bogus=1")[0] == EXIT_CONFIG
    assert run_cli(capsys, "solve", "--set", "novalue")[0] == EXIT_CONFIG
    assert run_cli(capsys, "solve", "--config", str(tmp_path / "none.cfg"))[0] == EXIT_CONFIG


def test_cli_solver_failure_exit_3(capsys):
    # tau = 0 with zero-length ECCA removes every overhead
    code, _, err = run_cli(capsys, "solve", "--set", "params.tau=0", "--set", "params.t-ecca=0")
    assert code == EXIT_SOLVER and "solver error" in err
    code, _, _ = run_cli(capsys, "simulate", "--set", "solver.method=newton")
    assert code == EXIT_CONFIG


def test_cli_guard_exit_4(capsys):
    code, _, _ = run_cli(
        capsys, "simulate", "--periods", "100",
        "--set", "sim.policy=threshold", "--set", "sim.threshold=100",
    )
    assert code == EXIT_GUARD


def test_cli_simulate_csv(capsys, tmp_path):
    out_path = tmp_path / "sim.csv"
    code, _, _ = run_cli(capsys, "simulate", "--periods", "3000", "--seed", "5", "--out", str(out_path))
    rows = read_csv(out_path.read_text())
    assert code == EXIT_OK
    assert rows[0] == ex.SIM_COLUMNS
    assert rows[1][5:] == ["3000", "5"]


def test_cli_seed_is_bit_identical(capsys):
    args = ("simulate", "--periods", "2000", "--seed", "11")
    first = run_cli(capsys, *args)[1]
    assert run_cli(capsys, *args)[1] == first
    assert run_cli(capsys, *args, "--set", "sim.jobs=3")[1] == first
    assert run_cli(capsys, "simulate", "--periods", "2000", "--seed", "12")[1] != first


def test_cli_log_base_e_lowers_throughput(capsys):
    base2 = read_csv(run_cli(capsys, "solve", "--format", "csv")[1])
    base_e = read_csv(run_cli(capsys, "solve", "--format", "csv", "--log-base", "e")[1])
    ratio = float(base_e[1][0]) / float(base2[1][0])
    assert ratio == pytest.approx(math.log(2), rel=1e-9)


def test_cli_analyze(capsys, tmp_path):
    out_path = tmp_path / "a.csv"
    code, out, _ = run_cli(capsys, "analyze", "--lambda", "2e6", "--out", str(out_path))
    assert code == EXIT_OK
    table = dict((row[0], float(row[1])) for row in read_csv(out_path.read_text())[1:])
    assert table["lambda_bps"] == 2e6
    assert table["expected_checks_per_phase"] == 33
    assert table["g_of_lambda_bps"] > 2e6
    assert "stopped_bits" in out


def test_cli_analyze_above_support_warns(capsys):
    code, out, _ = run_cli(capsys, "analyze", "--lambda", "5e6", "--set", "channel.kind=point")
    assert code == EXIT_OK and "stopped_bits" not in out


def test_cli_sweep_axes(capsys):
    code, out, _ = run_cli(
        capsys, "sweep", "--periods", "1000",
        "--set", "sweep.thresholds=0,1", "--set", "sweep.axis.params.p=0.5,1",
    )
    rows = read_csv(out)
    assert code == EXIT_OK
    assert rows[0] == ["params.p"] + ex.SIM_COLUMNS
    assert [r[0] for r in rows[1:]] == ["0.5", "0.5", "1", "1"]


def test_cli_fig2_single_threshold_matches_baseline(capsys):
    code, out, _ = run_cli(
        capsys, "fig2", "--periods", "2000",
        "--set", "fig2.thresholds=0", "--set", "fig2.tuples=12ms/32/0.5",
    )
    rows = read_csv(out)
    assert code == EXIT_OK and rows[0] == ex.FIG2_COLUMNS and len(rows) == 2
    row = dict(zip(rows[0], rows[1]))
    assert float(row["mean_phases"]) == 1.0
    assert float(row["throughput_bps"]) == pytest.approx(2.479e6, rel=0.05)


def test_cli_fig2_rejects_inadmissible_tuple(capsys):
    code, _, err = run_cli(capsys, "fig2", "--set", "fig2.tuples=12ms/4/0.5")
    assert code == EXIT_CONFIG and "tuple 0" in err


def test_cli_fig3(capsys):
    code, out, err = run_cli(
        capsys, "fig3", "--periods", "2000", "--set", "fig3.p=0.5,1", "--set", "fig3.k=1",
    )
    rows = read_csv(out)
    assert code == EXIT_OK and rows[0] == ex.FIG3_COLUMNS and len(rows) == 3
    assert "dominates" in err


def test_cli_fig3_needs_gamma(capsys):
    assert run_cli(capsys, "fig3", "--set", "channel.kind=point")[0] == EXIT_CONFIG


def test_cli_regopt(capsys):
    code, out, err = run_cli(capsys, "regopt")
    rows = read_csv(out)
    assert code == EXIT_OK and rows[0] == ex.REGOPT_COLUMNS
    assert len(rows) == 30
    best = [r for r in rows[1:] if r[3] == "1"]
    assert len(best) == 1 and best[0][0] == "32"
    assert "q=32" in err
    assert run_cli(capsys, "regopt", "--set", "regopt.q=2:8")[0] == EXIT_CONFIG
    assert run_cli(capsys, "regopt", "--set", "regopt.cot-fractions=1.5")[0] == EXIT_CONFIG


def test_cli_regopt_single_point(capsys):
    rows = read_csv(run_cli(capsys, "regopt", "--set", "regopt.q=8:8")[1])
    assert len(rows) == 2 and rows[1][0] == "8" and rows[1][3] == "1"


def test_cli_requires_command():
    with pytest.raises(SystemExit):
        main([])
