import json
import math
import subprocess
import sys

import pytest

from isingtorus import harness
from isingtorus.harness import (
    CSV_COLUMNS,
    EXIT_FAIL,
    EXIT_OK,
    EXIT_USAGE,
    ConfigError,
    Row,
    load_config,
    main,
    read_csv,
    richardson,
    write_csv,
)

SMALL_VERIFY = {"tori": [{"omega1": [3, 0], "omega2": [0, 3]}, {"omega1": [4, 0], "omega2": [1, 3]}]}


def write_json(tmp_path, obj, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def test_defaults_validate():
    for command in harness.COMMANDS:
        load_config(command)


@pytest.mark.parametrize(
    "cfg",
    [
        {"no_such_key": 1},
        {"alphas": [1.5]},
        {"alphas": [0.0]},
        {"alphas": ["hot"]},
        {"suites": ["no-such-suite"]},
        {"tori": [{"omega1": [2, 1], "omega2": [4, 2]}]},
        {"tori": [{"omega1": [3, 0]}]},
        {"tori": [{"omega1": [3, 0], "omega2": [0, 3], "lattice": "hexagonal"}]},
    ],
)
def test_bad_verify_configs(tmp_path, cfg):
    path = write_json(tmp_path, cfg)
    with pytest.raises(ConfigError):
        load_config("verify", path)
    assert main(["verify", "--config", path]) == EXIT_USAGE


@pytest.mark.parametrize(
    "command,cfg",
    [
        ("sweep", {"sizes": [64, 32]}),
        ("sweep", {"sizes": [8192]}),
        ("sweep", {"tau": [0.0, -1.0]}),
        ("sweep", {"quantities": ["magnetization"]}),
        ("fit-c", {"sizes": [8, 16]}),
        ("diff-study", {"families": [{"omega1": [3, 0], "omega2": [0, 4], "scales": [1], "extra": 0}]}),
    ],
)
def test_bad_configs_for_other_commands(tmp_path, command, cfg):
    path = write_json(tmp_path, cfg)
    assert main([command, "--config", path]) == EXIT_USAGE


def test_usage_errors(tmp_path, capsys):
    assert main(["verify", "--config", str(tmp_path / "missing.json")]) == EXIT_USAGE
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["verify", "--config", str(bad)]) == EXIT_USAGE
    assert "line 1" in capsys.readouterr().err
    assert main(["verify", "--jobs", "0"]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE
    assert main(["sweep", "--suite", "energy-sum"]) == EXIT_USAGE
    assert main(["--help"]) == EXIT_OK


def test_suite_filter_and_outputs(tmp_path):
    path = write_json(tmp_path, SMALL_VERIFY)
    out = tmp_path / "verify.csv"
    assert main(["verify", "--config", path, "--suite", "energy-sum", "--out", str(out)]) == EXIT_OK
    summary = json.loads((tmp_path / "verify.json").read_text())
    assert summary["passed"] and summary["checks"]
    assert all(c["name"].startswith("energy-sum") for c in summary["checks"])
    with open(out) as fh:
        assert fh.readline().strip() == ",".join(CSV_COLUMNS)
    rows = read_csv(out)
    assert rows and all(r["quantity"] == "energy_sum" for r in rows)


def test_failing_checks_give_exit_one(tmp_path):
    path = write_json(tmp_path, {**SMALL_VERIFY, "tolerance": -1.0, "suites": ["energy-sum"]})
    assert main(["verify", "--config", path]) == EXIT_FAIL


def test_all_verify_suites_on_small_tori():
    cfg = load_config("verify")
    cfg["tori"] = SMALL_VERIFY["tori"] + [{"omega1": [3, 0], "omega2": [0, 3], "lattice": "triangular"}]
    report = harness.run_verify(cfg)
    assert report.passed, [c for c in report.checks if not c.passed]
    names = {c.name.split()[0] for c in report.checks}
    assert names == set(cfg["suites"])


def test_csv_round_trip(tmp_path):
    rows = [
        Row("x", 12, (4, 0), (1, 3), 0.41421356237309503, math.pi / 7, math.e),
        Row("y", 0, (1, 0), (0.5, 1.0), 0.2, -1e-300, 0.0),
    ]
    path = tmp_path / "rows.csv"
    write_csv(rows, path)
    back = read_csv(path)
    assert list(back[0]) == list(CSV_COLUMNS)
    for r, b in zip(rows, back):
        assert b["quantity"] == r.quantity and int(b["N"]) == r.N
        assert float(b["value"]) == r.value and float(b["limit"]) == r.limit
        assert float(b["alpha"]) == r.alpha
    assert math.isnan(float(back[1]["rel_err"]))
    assert float(back[0]["abs_err"]) == abs(math.pi / 7 - math.e)


def test_richardson_removes_first_order_term():
    sizes = [4, 8]
    values = [1 + 0.3 / n for n in sizes]
    assert richardson(values, sizes) == pytest.approx(1.0, abs=1e-15)


def test_small_sweep_and_parallel_agreement(tmp_path):
    cfg = load_config("sweep")
    cfg["sizes"] = [16, 32, 64]
    serial = harness.run_sweep(cfg)
    assert serial.passed
    parallel = harness.run_sweep(cfg, jobs=2)
    assert [r.cells() for r in serial.rows] == [r.cells() for r in parallel.rows]
    assert {r.quantity for r in serial.rows} >= {"N_energy_sum", "sector_ratio_01", "log_det_laplacian_00"}
    assert serial.fits["N_energy_sum"]["decay_order"] > 1.5


def test_small_fit_c():
    cfg = load_config("fit-c")
    cfg["sizes"] = [16, 32, 48, 64]
    cfg["taus"] = [[0.0, 1.0], [0.0, 2.0]]
    report = harness.run_fit_c(cfg)
    assert report.passed, [c for c in report.checks if not c.passed]
    assert report.fits["C_mean"] == pytest.approx(report.fits["four_G_over_pi"], rel=1e-6)


def test_small_limits():
    cfg = load_config("limits")
    cfg["taus"] = [[0.0, 1.0]]
    report = harness.run_limits(cfg)
    assert report.passed, [c for c in report.checks if not c.passed]


def test_small_diff_study():
    cfg = load_config("diff-study")
    cfg["brute_force"] = [{"omega1": [4, 0], "omega2": [0, 3]}, {"omega1": [3, 0], "omega2": [0, 3]}]
    cfg["families"] = [{"omega1": [3, 0], "omega2": [0, 4], "scales": [4, 8, 16, 32]}]
    report = harness.run_diff_study(cfg)
    assert report.passed, [c for c in report.checks if not c.passed]
    assert any(c.name.startswith("diff-study square torus") for c in report.checks)


def test_module_entry_point(tmp_path):
    path = write_json(tmp_path, {**SMALL_VERIFY, "suites": ["sector-energy"]})
    proc = subprocess.run([sys.executable, "-m", "isingtorus", "verify", "--config", path], capture_output=True, text=True)
    assert proc.returncode == EXIT_OK
    assert "sector-energy" in proc.stdout
