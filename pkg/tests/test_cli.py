import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from chordcdf import cli
from chordcdf.config import bundled_config_path


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _write_config(tmp_path, **overrides):
    doc = json.loads(bundled_config_path().read_text())
    doc.update(overrides)
    for key, value in list(doc.items()):
        if value is None:
            del doc[key]
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    return str(path)


def test_cdf_both_methods(tmp_path, capsys):
    assert cli.main(["cdf", "--method", "both", "--out-dir", str(tmp_path), "--svg"]) == 0
    rows = _read(tmp_path / "cdf.csv")
    assert list(rows[0]) == ["d", "F", "method", "abs_err_bound"]
    assert {r["method"] for r in rows} == {"theorem1", "ball"}
    F = np.array([float(r["F"]) for r in rows if r["method"] == "ball"])
    assert F[0] == 0.0 and np.all(np.diff(F) >= -1e-9) and F[-1] > 0.999
    assert "max |theorem1 - ball|" in capsys.readouterr().out
    assert (tmp_path / "cdf.svg").exists()


def test_cdf_monte_carlo_method(tmp_path):
    cfg = _write_config(tmp_path, monte_carlo={"n_samples": 5000})
    assert cli.main(["cdf", "--config", cfg, "--method", "monte-carlo", "--out-dir", str(tmp_path)]) == 0
    assert {r["method"] for r in _read(tmp_path / "cdf.csv")} == {"monte-carlo"}


def test_cdf_theorem1_at_origin_is_config_error(tmp_path):
    cfg = _write_config(tmp_path, nominal=[0, 0])
    assert cli.main(["cdf", "--config", cfg, "--method", "theorem1", "--out-dir", str(tmp_path)]) == 2


def test_cdf_convergence_failure_exit_and_partial_csv(tmp_path):
    cfg = _write_config(
        tmp_path,
        density={"type": "uniform-disc", "center": [0.3, -0.2], "radius": 0.8},
        nominal=[0.5, 0.5],
        quadrature={"abs_tol": 1e-15, "rel_tol": 1e-15, "max_subdivisions": 0, "max_level": 2},
        thresholds={"min": 0.3, "max": 0.4, "count": 2},
    )
    assert cli.main(["cdf", "--config", cfg, "--method", "theorem1", "--out-dir", str(tmp_path)]) == 3
    rows = _read(tmp_path / "cdf.csv")
    assert len(rows) == 2 and any(r["method"].endswith(":unconverged") for r in rows)


def test_malformed_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"density": {"type": "gaussian", "mean": [1, 1]}, "nominal": [1, 1]}))
    assert cli.main(["cdf", "--config", str(bad), "--out-dir", str(tmp_path)]) == 2
    assert "cov" in capsys.readouterr().err
    bad.write_text(json.dumps({"nominall": [1, 1]}))
    assert cli.main(["cdf", "--config", str(bad), "--out-dir", str(tmp_path)]) == 2
    assert "nominall" in capsys.readouterr().err
    bad.write_text("{not json")
    assert cli.main(["cdf", "--config", str(bad), "--out-dir", str(tmp_path)]) == 2


def test_mc_pass_report(tmp_path):
    assert cli.main(["mc", "--out-dir", str(tmp_path), "--n", "200000"]) == 0
    rows = _read(tmp_path / "mc.csv")
    assert list(rows[0]) == ["d", "F_emp"]
    assert "PASS" in (tmp_path / "mc_report.txt").read_text().splitlines()[-1]


def test_mc_zero_samples(tmp_path):
    assert cli.main(["mc", "--out-dir", str(tmp_path), "--n", "0"]) == 2


def test_mc_seed_repeatable(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert cli.main(["mc", "--out-dir", str(out), "--n", "50000", "--seed", "12"]) == 0
    assert (a / "mc.csv").read_bytes() == (b / "mc.csv").read_bytes()


def test_nyquist(tmp_path):
    assert cli.main(["nyquist", "--out-dir", str(tmp_path), "--svg"]) == 0
    rows = _read(tmp_path / "nyquist.csv")
    assert (float(rows[0]["re"]), float(rows[0]["im"])) == (2.0, 0.0)
    assert abs(complex(float(rows[-1]["re"]), float(rows[-1]["im"]))) < 0.01


def test_nyquist_log_and_linear_share_values(tmp_path):
    lin = _write_config(tmp_path, frequency_grid={"min": 1, "max": 100, "spacing": 99})
    assert cli.main(["nyquist", "--config", lin, "--out-dir", str(tmp_path / "lin")]) == 0
    log = _write_config(tmp_path, frequency_grid={"min": 1, "max": 100, "count": 3, "scale": "log"})
    assert cli.main(["nyquist", "--config", log, "--out-dir", str(tmp_path / "log")]) == 0
    a = {r["omega"]: r for r in _read(tmp_path / "lin" / "nyquist.csv")}
    b = {r["omega"]: r for r in _read(tmp_path / "log" / "nyquist.csv")}
    shared = set(a) & set(b)
    assert shared == {"1.0", "100.0"}
    for w in shared:
        assert a[w] == b[w]


def test_nyquist_bad_grid(tmp_path):
    cfg = _write_config(tmp_path, frequency_grid={"min": 10, "max": 1})
    assert cli.main(["nyquist", "--config", cfg, "--out-dir", str(tmp_path)]) == 2
    cfg = _write_config(tmp_path, frequency_grid=None)
    assert cli.main(["nyquist", "--config", cfg, "--out-dir", str(tmp_path)]) == 2


def test_sysid_single_trial(tmp_path):
    assert cli.main(["sysid", "--trials", "1", "--out-dir", str(tmp_path), "--svg"]) == 0
    hist = _read(tmp_path / "histogram.csv")
    assert sum(int(r["count"]) for r in hist) == 1
    assert list(_read(tmp_path / "trials.csv")[0]) == ["trial", "b_hat", "tau_hat", "converged",
                                                       "gap_surrogate"]
    assert list(_read(tmp_path / "kappa_surface.csv")[0]) == ["trial", "omega", "kappa"]
    assert (tmp_path / "nyquist_uncertainty.csv").exists()


def test_sysid_nonconvergence_exit(tmp_path, monkeypatch, capsys):
    from chordcdf import sysid

    real = sysid.fit_three_pole

    def never(u, y, Ts, init):
        fit = real(u, y, Ts, init)
        return sysid.ThreePoleFit(fit.b_hat, fit.tau_hat, fit.param_cov, fit.residual_norm, False)

    monkeypatch.setattr(sysid, "fit_three_pole", never)
    assert cli.main(["sysid", "--trials", "2", "--out-dir", str(tmp_path)]) == 3
    assert "did not converge" in capsys.readouterr().err


def test_margin_nominal(tmp_path):
    assert cli.main(["margin", "--out-dir", str(tmp_path)]) == 0
    rows = _read(tmp_path / "margin.csv")
    assert len(rows) >= 1000
    assert min(float(r["gap"]) for r in rows) >= -1e-9


def test_margin_unstable_and_missing_controller(tmp_path, capsys):
    cfg = _write_config(tmp_path, plant={"num": [1], "den": [-1, 1]}, controller={"num": [0], "den": [1]})
    assert cli.main(["margin", "--config", cfg, "--out-dir", str(tmp_path)]) == 0
    summary = {r["quantity"]: r["value"] for r in _read(tmp_path / "margin_summary.csv")}
    assert float(summary["b_margin_grid"]) == 0.0
    cfg = _write_config(tmp_path, controller=None)
    assert cli.main(["margin", "--config", cfg, "--out-dir", str(tmp_path)]) == 2
    assert "controller" in capsys.readouterr().err


def test_negative_tol_rejected(tmp_path):
    assert cli.main(["nyquist", "--tol", "-1", "--out-dir", str(tmp_path)]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "chordcdf", "nyquist", "--out-dir", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert (tmp_path / "nyquist.csv").exists()


@pytest.mark.parametrize("argv", [["cdf"], ["sysid"]])
def test_help_flags(argv, capsys):
    with pytest.raises(SystemExit):
        cli.main(argv + ["--help"])
    out = capsys.readouterr().out
    for flag in ("--seed", "--out-dir", "--tol", "--config"):
        assert flag in out
