from __future__ import annotations

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from randtime.cli import EXIT_INVALID, EXIT_NUMERICAL, EXIT_OK, main, run
from randtime.config import config_hash, validate_config
from randtime.errors import ConfigError

HALF_STABLE = '{"variant":"AlphaStable","params":{"alpha":0.5}}'
CPP = '{"variant":"CompoundPoisson","params":{"rate":1},"jumps":{"variant":"Exponential","params":{"rate":1}}}'


def read_csv(path):
    lines = path.read_text().splitlines()
    header = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if not ln.startswith("#")]
    return header, body[0].split(","), body[1:]


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def test_config_rejects_unknown_keys_and_bad_values():
    validate_config({"experiment": "catalog"})
    for bad in (
        {"experiment": "catalog", "colour": "red"},
        {"experiment": "nope"},
        {"experiment": "decay", "spec": {"variant": "AlphaStable", "parms": {}}},
        {"experiment": "decay", "mc": {"n": 1000}},
        {"experiment": "decay", "grid": {"n_t": 1}},
        {},
        [],
    ):
        with pytest.raises(ConfigError):
            validate_config(bad)


def test_config_hash_ignores_output_path():
    a = {"experiment": "catalog", "output": "a.csv"}
    b = {"experiment": "catalog", "output": "b.csv"}
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash({"experiment": "density"})


# ---------------------------------------------------------------------------
# exit codes and artifacts
# ---------------------------------------------------------------------------


def test_catalog_rows(tmp_path, capsys):
    out = tmp_path / "catalog.csv"
    assert main(["catalog", "--out", str(out)]) == EXIT_OK
    header, cols, rows = read_csv(out)
    assert header[0] == "# experiment=catalog"
    assert header[1].startswith("# config_sha256=") and header[2] == "# seed=none"
    assert cols == ["variant", "spec", "hypotheses", "gamma", "Q"]
    by_variant = {r.split(",", 1)[0]: r for r in rows}
    assert len(by_variant) == 7
    assert ",all hold,0.5," in by_variant["AlphaStable"]
    assert "degenerate" in by_variant["Gamma"] and ",0," in by_variant["Gamma"]
    assert "fail" in by_variant["CompoundPoisson"] and "inapplicable" in by_variant["CompoundPoisson"]
    assert capsys.readouterr().out == ""


def test_decay_half_stable_exponent(tmp_path):
    out = tmp_path / "decay.csv"
    assert main(["decay", "--spec", HALF_STABLE, "--out", str(out)]) == EXIT_OK
    header, cols, rows = read_csv(out)
    assert cols[-3:] == ["fit_exponent", "fit_log_constant", "r_squared"]
    i = cols.index("fit_exponent")
    exponents = {float(r.split(",")[i]) for r in rows}
    assert len(exponents) == 1
    assert abs(exponents.pop() + 0.5) <= 0.05


def test_malformed_json_exit_and_no_artifact(tmp_path, capsys):
    out = tmp_path / "decay.csv"
    assert main(["decay", "--spec", "{bad", "--out", str(out)]) == EXIT_INVALID
    assert not out.exists()
    assert "malformed JSON" in capsys.readouterr().err
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"experiment": "decay",')
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == EXIT_INVALID
    assert not out.exists()
    assert list(tmp_path.iterdir()) == [cfg]


def test_validation_errors_exit_two(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"experiment": "catalog", "unknown": 1}))
    assert main(["run", "--config", str(cfg)]) == EXIT_INVALID
    assert main(["density", "--t", "1"]) == EXIT_INVALID  # no spec
    assert main(["density", "--spec", CPP, "--t", "1"]) == EXIT_INVALID  # unsupported
    assert main(["run"]) == EXIT_INVALID
    assert main(["no-such-command"]) == EXIT_INVALID
    assert main(["decay", "--spec", HALF_STABLE, "--t", "1,2,3"]) == EXIT_INVALID  # too few points


def test_numerical_failure_exit_three(tmp_path, capsys):
    # a frozen flow with the identity observable at 0 gives v = 0, which cannot be fitted
    out = tmp_path / "decay.csv"
    code = main(["decay", "--spec", HALF_STABLE, "--field", "linear:0", "--observable", "identity", "--x", "0", "--out", str(out)])
    assert code == EXIT_NUMERICAL
    assert not out.exists()
    assert "numerical failure" in capsys.readouterr().err


def test_config_file_and_flags_agree(tmp_path):
    cfg = {"experiment": "subordinate", "spec": json.loads(HALF_STABLE), "grid": {"t_points": [0.5, 2.0]}}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["run", "--config", str(path), "--out", str(a)]) == EXIT_OK
    assert main(["subordinate", "--spec", HALF_STABLE, "--t", "0.5,2", "--out", str(b)]) == EXIT_OK
    rows_a, rows_b = read_csv(a)[2], read_csv(b)[2]
    assert rows_a == rows_b
    assert main(["density", "--config", str(path)]) == EXIT_INVALID  # experiment mismatch


def test_run_accepts_dict():
    assert run({"experiment": "catalog", "bogus": True}) == EXIT_INVALID


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def test_density_values(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["density", "--spec", HALF_STABLE, "--t", "1", "--tau", "0.5,1,2", "--out", str(out)]) == EXIT_OK
    header, cols, rows = read_csv(out)
    assert cols == ["tau", "g"]
    for r in rows:
        tau, g = map(float, r.split(","))
        assert g == pytest.approx(math.exp(-tau * tau / 4.0) / math.sqrt(math.pi), rel=1e-6)


def test_density_slice_header(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["density", "--spec", HALF_STABLE, "--t", "2", "--out", str(out)]) == EXIT_OK
    header, _, rows = read_csv(out)
    assert any(h.startswith("# mass=") for h in header)
    assert len(rows) > 50


def test_subordinate_monte_carlo(tmp_path):
    # E[E(10)] = 11 for CPP(1, Exp(1)) jumps with identity along x + t
    out = tmp_path / "s.csv"
    args = ["subordinate", "--spec", CPP, "--t", "10", "--n", "20000", "--seed", "1", "--observable", "identity", "--x", "0"]
    assert main(args + ["--out", str(out)]) == EXIT_OK
    header, cols, rows = read_csv(out)
    assert "# seed=1" in header
    t, v, se, method, _ = rows[0].split(",")
    assert method == "monte_carlo"
    assert abs(float(v) - 11.0) <= 3.0 * float(se)


def test_monte_carlo_needs_seed():
    assert main(["subordinate", "--spec", CPP, "--t", "1"]) == EXIT_INVALID


def test_trajectory(tmp_path):
    out = tmp_path / "tr.csv"
    assert main(["trajectory", "--spec", HALF_STABLE, "--field", "linear:1", "--x", "0", "--t", "4", "--out", str(out)]) == EXIT_OK
    _, cols, rows = read_csv(out)
    assert cols == ["t", "mean_x0"]
    # E E(4) = 4^(1/2) / Gamma(3/2)
    assert float(rows[0].split(",")[1]) == pytest.approx(2.0 / math.gamma(1.5), rel=1e-6)


def test_transport_grid_and_counterexample(tmp_path):
    out = tmp_path / "u.csv"
    assert main(["transport", "--field", "ou:1", "--observable", "identity", "--t", "0,1", "--x-range=-1,1", "--n-x", "3", "--out", str(out)]) == EXIT_OK
    _, cols, rows = read_csv(out)
    vals = np.array([[float(v) for v in r.split(",")] for r in rows])
    np.testing.assert_allclose(vals[:, 2], vals[:, 1] * np.exp(-vals[:, 0]), atol=1e-14)
    assert main(["transport", "--field", "nonauto-counterexample", "--t", "1", "--x", "0", "--out", str(out)]) == EXIT_OK
    _, cols, rows = read_csv(out)
    assert cols[-1] == "residual"
    assert all(float(r.split(",")[-1]) < 0 for r in rows)


def test_potential(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["potential", "--field", "linear:1", "--observable", "exp-abs:1", "--x", "0", "--out", str(out)]) == EXIT_OK
    _, _, rows = read_csv(out)
    name, value, _ = rows[0].split(",", 2)
    assert name == "potential" and float(value) == pytest.approx(1.0, abs=1e-6)


def test_cpp_bounds(tmp_path):
    out = tmp_path / "c.csv"
    jumps = '{"variant":"Exponential","params":{"rate":1}}'
    args = ["cpp-bounds", "--rate", "1", "--jumps", jumps, "--c", "1", "--beta", "1", "--moment-order", "2", "--t", "1,5"]
    assert main(args + ["--n", "20000", "--seed", "3", "--out", str(out)]) == EXIT_OK
    _, cols, rows = read_csv(out)
    assert cols == ["t", "series_value", "mc_value", "mc_se", "poly_bound", "exp_bound"]
    for r in rows:
        t, series, mc, se, poly, expb = map(float, r.split(","))
        assert abs(series - mc) <= 3.0 * se + 1e-12
        assert series <= poly and series <= expb
    assert main(["cpp-bounds", "--t", "1"]) == EXIT_INVALID


def test_verify_subset(tmp_path, capsys):
    out = tmp_path / "v.csv"
    assert main(["verify", "--quick", "--only", "1,11", "--out", str(out)]) == EXIT_OK
    _, cols, rows = read_csv(out)
    assert cols == ["check", "title", "passed", "summary"]
    assert [r.split(",")[0] for r in rows] == ["1", "11"]
    assert all(",true," in r for r in rows)
    assert "[PASS]" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# reproducibility
# ---------------------------------------------------------------------------


def test_outputs_are_bit_stable(tmp_path):
    args = ["subordinate", "--spec", CPP, "--t", "1,3", "--n", "5000", "--seed", "42", "--observable", "identity", "--x", "0"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == EXIT_OK
    assert main(args + ["--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    assert main(args[:-6] + ["--n", "5000", "--seed", "43", "--observable", "identity", "--x", "0", "--out", str(c)]) == EXIT_OK
    assert a.read_bytes() != c.read_bytes()


def test_seventeen_digit_round_trip(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["density", "--spec", HALF_STABLE, "--t", "1", "--tau", "0.3", "--out", str(out)]) == EXIT_OK
    g = read_csv(out)[2][0].split(",")[1]
    assert g == f"{float(g):.17g}"


def test_module_entry_point(tmp_path):
    out = tmp_path / "catalog.csv"
    proc = subprocess.run([sys.executable, "-m", "randtime", "catalog", "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert out.read_text().startswith("# experiment=catalog")
