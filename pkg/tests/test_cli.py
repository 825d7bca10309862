import csv
import json
import subprocess
import sys

import numpy as np
import pytest
from scipy import integrate

from moneystat import __version__
from moneystat.cli import main
from moneystat.manifest import replica_seed


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_version_flag():
    out = subprocess.run([sys.executable, "-m", "moneystat.cli", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert __version__ in out.stdout


def test_simulate_writes_snapshots_entropy_and_manifest(tmp_path):
    out = tmp_path / "run"
    assert main(["simulate", "--model", "fixed", "--agents", "50", "--steps", "20000",
                 "--seed", "42", "--snapshots", "3", "--out", str(out)]) == 0
    doc = json.loads((out / "manifest.json").read_text())
    assert doc["seed"] == 42 and doc["command"] == "simulate"
    assert doc["config"]["model"] == "fixed"
    snaps = sorted(p.name for p in out.glob("snapshot_*.csv"))
    assert len(snaps) == 3 and set(doc["digests"]) == set(snaps) | {"entropy.csv"}
    header, vals = read_csv(out / snaps[-1])
    assert header == ["balance"] and vals.sum() == pytest.approx(50 * 1000.0)
    header, _ = read_csv(out / "entropy.csv")
    assert header == ["step", "entropy"]


def test_rerun_from_manifest_verifies(tmp_path):
    a = tmp_path / "a"
    assert main(["simulate", "--model", "saving", "--lambda", "0.5", "--agents", "40",
                 "--steps", "5000", "--seed", "7", "--out", str(a)]) == 0
    b = tmp_path / "b"
    assert main(["simulate", "--from-manifest", str(a / "manifest.json"), "--verify",
                 "--out", str(b)]) == 0
    da = json.loads((a / "manifest.json").read_text())["digests"]
    db = json.loads((b / "manifest.json").read_text())["digests"]
    assert da == db


def test_verify_detects_mismatch(tmp_path):
    a = tmp_path / "a"
    main(["simulate", "--model", "fixed", "--agents", "20", "--steps", "1000", "--out", str(a)])
    doc = json.loads((a / "manifest.json").read_text())
    doc["digests"] = {k: "0" * 64 for k in doc["digests"]}
    (a / "manifest.json").write_text(json.dumps(doc))
    assert main(["simulate", "--from-manifest", str(a / "manifest.json"), "--verify",
                 "--out", str(tmp_path / "b")]) == 1


@pytest.mark.parametrize("argv", [
    ["simulate", "--model", "fixed", "--gamma", "0.3"],
    ["simulate", "--model", "proportional"],
    ["simulate", "--model", "fixed", "--agents", "0"],
    ["simulate", "--from-manifest", "/nonexistent/manifest.json"],
])
def test_usage_errors_exit_2(argv, tmp_path, capsys):
    assert main(argv + ["--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err


def test_model_error_exits_1(tmp_path, capsys):
    code = main(["simulate", "--model", "bm", "--J", "1", "--sigma2", "0.5", "--dt", "0.5",
                 "--agents", "10", "--steps", "10", "--out", str(tmp_path)])
    assert code == 1
    assert "model error" in capsys.readouterr().err


def test_argparse_rejects_unknown_model():
    with pytest.raises(SystemExit) as e:
        main(["simulate", "--model", "nope"])
    assert e.value.code == 2


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# a run\nmodel = fixed\nagents = 30\ndelta = 5\nsteps = 100\nseed = 3\n")
    out = tmp_path / "o"
    assert main(["simulate", "--config", str(cfg), "--agents", "12", "--out", str(out)]) == 0
    conf = json.loads((out / "manifest.json").read_text())["config"]
    assert conf["agents"] == 12 and conf["delta"] == 5.0 and conf["seed"] == 3


def test_config_file_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("model = fixed\nflux = 3\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("MONEYSTAT_OUT", str(tmp_path / "env"))
    assert main(["laws", "--law", "family", "--T", "1"]) == 0
    assert (tmp_path / "env" / "law_family.csv").exists()


def test_replicas_use_split_seeds(tmp_path):
    out = tmp_path / "rep"
    assert main(["simulate", "--model", "fixed", "--agents", "20", "--steps", "500",
                 "--seed", "5", "--replicas", "2", "--out", str(out)]) == 0
    seeds = [json.loads((out / f"replica-{k:03d}" / "manifest.json").read_text())["seed"]
             for k in range(2)]
    assert seeds == [replica_seed(5, 0), replica_seed(5, 1)]
    assert seeds[0] != seeds[1]


@pytest.mark.parametrize("model, extra", [
    ("reserve", ["--reserve-ratio", "0.8"]),
    ("silver", []),
    ("bm", ["--J", "0.5", "--sigma2", "0.25"]),
    ("slanina", ["--gamma", "0.1", "--zeta", "0.01"]),
    ("kesten", ["--a", "0.5", "--b", "0.5"]),
    ("firm", ["--v", "10", "--eta", "0.5", "--chi", "0.5", "--h", "0.1", "--W", "1"]),
])
def test_every_model_runs(model, extra, tmp_path):
    out = tmp_path / model
    assert main(["simulate", "--model", model, "--agents", "100", "--steps", "200",
                 "--out", str(out)] + extra) == 0
    assert (out / "manifest.json").exists()


def test_reserve_snapshot_has_signed_balances(tmp_path):
    out = tmp_path / "r"
    assert main(["simulate", "--model", "reserve", "--reserve-ratio", "0.8", "--agents", "200",
                 "--steps", "200000", "--out", str(out)]) == 0
    _, m = read_csv(out / "snapshot_final.csv")
    assert m.min() < 0 < m.max()


def test_analyze_gini_of_equal_values(tmp_path, capsys):
    f = tmp_path / "eq.csv"
    f.write_text("value\n" + "3\n" * 10)
    assert main(["analyze", "--input", str(f), "--gini", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["gini"] == pytest.approx(0.0, abs=1e-15)


def test_analyze_two_class_and_lorenz(tmp_path, rng):
    x = np.concatenate([rng.exponential(40_000, 97_000),
                        120_000 * (1 - rng.random(3000)) ** (-1 / 1.7)])
    f = tmp_path / "income.csv"
    f.write_text("income\n" + "\n".join(map(repr, x.tolist())) + "\n")
    assert main(["analyze", "--input", str(f), "--fit", "two-class", "--lorenz",
                 "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["two_class"]["two_class"] is True
    assert rep["two_class"]["alpha"] == pytest.approx(1.7, abs=0.3)
    header, lc = read_csv(tmp_path / "lorenz.csv")
    assert header == ["x", "y"] and lc[-1].tolist() == [1.0, 1.0]


def test_analyze_binned_table(tmp_path):
    lb = np.arange(0, 400_001, 10_000)
    f = tmp_path / "table.csv"
    f.write_text("lower_bound,cum_count\n" + "".join(
        f"{b},{round(1e6 * np.exp(-b / 40_000))}\n" for b in lb))
    assert main(["analyze", "--input", str(f), "--binned", "--lorenz", "--gini",
                 "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["gini"] == pytest.approx(0.5, abs=0.02)


@pytest.mark.parametrize("content", ["", "value\nabc\n", "value\n"])
def test_analyze_malformed_input(tmp_path, content):
    f = tmp_path / "bad.csv"
    f.write_text(content)
    assert main(["analyze", "--input", str(f), "--gini", "--out", str(tmp_path)]) == 2


def test_analyze_missing_file(tmp_path):
    assert main(["analyze", "--input", str(tmp_path / "none.csv"), "--out", str(tmp_path)]) == 2


def test_laws_family_curve(tmp_path):
    assert main(["laws", "--law", "family", "--T", "1", "--grid", "0:5:11",
                 "--out", str(tmp_path)]) == 0
    header, t = read_csv(tmp_path / "law_family.csv")
    assert header == ["r", "pdf", "ccdf"]
    np.testing.assert_allclose(t[:, 1], t[:, 0] * np.exp(-t[:, 0]), rtol=1e-5, atol=1e-6)


def test_laws_arctan_normalized(tmp_path):
    assert main(["laws", "--law", "arctan", "--T", "1", "--r0", "1", "--ab", "1",
                 "--grid", "0:2000:400001", "--out", str(tmp_path)]) == 0
    _, t = read_csv(tmp_path / "law_arctan.csv")
    # remaining mass beyond the grid is the ccdf at its end
    assert integrate.simpson(t[:, 1], x=t[:, 0]) + t[-1, 2] == pytest.approx(1.0, abs=1e-6)


def test_laws_debt_shifted_exponential(tmp_path):
    assert main(["laws", "--law", "exp", "--T", "1000", "--floor", "-800",
                 "--out", str(tmp_path)]) == 0
    _, t = read_csv(tmp_path / "law_exp.csv")
    assert t[0, 0] == -800 and t[0, 2] == 1.0
    assert t[0, 1] == pytest.approx(1e-3, rel=1e-5)


@pytest.mark.parametrize("argv", [["laws", "--law", "gamma"],
                                  ["laws", "--law", "exp", "--T", "-1"],
                                  ["laws", "--law", "exp", "--grid", "1:0:5"]])
def test_laws_invalid_parameters(argv, tmp_path):
    assert main(argv + ["--out", str(tmp_path)]) == 2
