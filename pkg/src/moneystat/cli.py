"""Command-line front end: ``moneystat {simulate,analyze,laws}``.

Exit codes: 0 success, 1 model/runtime error, 2 invalid usage or input.

Configuration sources, highest precedence first: command-line flags, the
``MONEYSTAT_OUT`` environment variable (output directory only), a
``--config`` file, built-in defaults.  A config file holds one
``key = value`` per line with keys spelled like the long flags without the
leading dashes (``debt-limit = 800``); ``#`` starts a comment.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ModelError
from .manifest import digests, read_manifest, replica_seed, write_manifest

OUT_ENV = "MONEYSTAT_OUT"
DEFAULT_OUT = "moneystat-out"

MODELS = ("fixed", "frac-avg", "pair-sum", "proportional", "saving", "random-saving",
          "directed", "firm", "reserve", "silver", "bm", "slanina", "kesten")

# model-specific flags each model accepts; everything else in this table is rejected
MODEL_PARAMS = {
    "fixed": {"delta", "debt-limit"},
    "frac-avg": {"debt-limit"},
    "pair-sum": {"debt-limit"},
    "proportional": {"gamma"},
    "saving": {"lambda"},
    "random-saving": set(),
    "directed": {"delta", "debt-limit"},
    "firm": {"delta", "v", "eta", "chi", "h", "W", "firm-base"},
    "reserve": {"delta", "reserve-ratio"},
    "silver": set(),
    "bm": {"J", "sigma2", "dt"},
    "slanina": {"gamma", "zeta"},
    "kesten": {"A0", "a", "B0", "b", "dt"},
}
REQUIRED = {
    "proportional": {"gamma"},
    "saving": {"lambda"},
    "reserve": {"reserve-ratio"},
    "bm": {"J", "sigma2"},
    "slanina": {"gamma"},
    "firm": {"v", "eta", "chi", "h", "W"},
}
ALL_PARAMS = set().union(*MODEL_PARAMS.values())

SIM_DEFAULTS = {
    "agents": 500, "steps": 1_000_000, "seed": 0, "initial-balance": 1000.0,
    "snapshots": 1, "entropy-every": None, "replicas": 1,
    "debt-limit": 0.0, "dt": 0.01, "zeta": 0.0,
    "A0": 1.0, "a": 0.0, "B0": 1.0, "b": 0.0, "firm-base": "none",
}


class UsageError(Exception):
    """Invalid flag combination or unreadable input (exit 2)."""


def _fmt6(x) -> str:
    return format(float(x), ".6g")


def _write_plot_csv(path, header, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([_fmt6(v) for v in row])


def _write_values(path, values, header="value"):
    from .population import write_snapshot
    write_snapshot(values, path, column=header)


# --- argument parsing --------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="moneystat",
                                description="Kinetic exchange models of money, wealth and income.")
    p.add_argument("--version", action="version", version=f"moneystat {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    sim = sub.add_parser("simulate", help="run a model and write snapshots plus a manifest",
                         argument_default=S)
    sim.add_argument("--model", choices=MODELS)
    sim.add_argument("--agents", type=int)
    sim.add_argument("--steps", type=int,
                     help="pair steps; rounds for firm/silver, time steps for bm/kesten")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--initial-balance", type=float)
    sim.add_argument("--snapshots", type=int, help="number of snapshots (the last is the final state)")
    sim.add_argument("--entropy-every", type=int)
    sim.add_argument("--delta", type=float, help="fixed transfer amount")
    sim.add_argument("--debt-limit", type=float)
    sim.add_argument("--gamma", type=float)
    sim.add_argument("--lambda", dest="lambda", type=float)
    sim.add_argument("--reserve-ratio", type=float)
    sim.add_argument("--J", type=float)
    sim.add_argument("--sigma2", type=float)
    sim.add_argument("--dt", type=float)
    sim.add_argument("--zeta", type=float)
    sim.add_argument("--A0", type=float)
    sim.add_argument("--a", type=float)
    sim.add_argument("--B0", type=float)
    sim.add_argument("--b", type=float)
    for name in ("v", "eta", "chi", "h", "W"):
        sim.add_argument(f"--{name}", type=float)
    sim.add_argument("--firm-base", choices=("none", "fixed"))
    sim.add_argument("--replicas", type=int)
    sim.add_argument("--out")
    sim.add_argument("--config", help="flat key = value file")
    sim.add_argument("--from-manifest", help="rerun the configuration recorded in a manifest")
    sim.add_argument("--verify", action="store_true",
                     help="with --from-manifest: exit 1 unless digests match")

    an = sub.add_parser("analyze", help="fit laws to samples or a binned table")
    an.add_argument("--input", required=True)
    an.add_argument("--column", help="sample column (default: first)")
    an.add_argument("--binned", action="store_true", help="input is lower_bound,cum_count rows")
    an.add_argument("--fit", choices=("exp", "gamma", "pareto", "two-class"))
    an.add_argument("--floor", type=float, default=0.0)
    an.add_argument("--xmin", type=float, help="Pareto threshold (default: 95th percentile)")
    an.add_argument("--lorenz", action="store_true")
    an.add_argument("--gini", action="store_true")
    an.add_argument("--out")

    lw = sub.add_parser("laws", help="tabulate a stationary law")
    lw.add_argument("--law", required=True, choices=("exp", "gamma", "bm", "arctan", "family"))
    lw.add_argument("--T", type=float, default=1.0)
    lw.add_argument("--floor", type=float, default=0.0)
    lw.add_argument("--beta", type=float)
    lw.add_argument("--kappa", type=float)
    lw.add_argument("--r0", type=float)
    lw.add_argument("--ab", type=float)
    lw.add_argument("--grid", help="lo:hi:n (default 0:10T:1001, floor-shifted for exp)")
    lw.add_argument("--out")
    return p


def _config_file(path, parser_dests: dict) -> dict:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    out = {}
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in parser_dests:
            raise UsageError(f"{path}:{no}: unknown key {key!r}")
        out[key] = _coerce(key, val, parser_dests[key])
    return out


def _coerce(key, val, typ):
    if typ is None or isinstance(val, (int, float)) and not isinstance(val, bool):
        return val
    try:
        return typ(val)
    except (TypeError, ValueError):
        raise UsageError(f"bad value for {key}: {val!r}") from None


def _sim_dests(parser) -> dict:
    sim = parser._subparsers._group_actions[0].choices["simulate"]
    out = {}
    for act in sim._actions:
        if act.option_strings and act.dest not in ("help", "config", "from_manifest", "verify"):
            key = act.option_strings[0].lstrip("-")
            out[key] = act.type
    return out


def _resolve_sim(ns, parser) -> tuple[dict, dict | None]:
    dests = _sim_dests(parser)
    flags = {}
    for key in dests:
        attr = key.replace("-", "_")
        if key == "lambda":
            attr = "lambda"
        if hasattr(ns, attr):
            flags[key] = getattr(ns, attr)
    manifest = None
    cfg = {}
    if getattr(ns, "from_manifest", None):
        try:
            manifest = read_manifest(ns.from_manifest)
        except (OSError, ValueError) as e:
            raise UsageError(str(e)) from None
        cfg.update({k: v for k, v in manifest["config"].items() if v is not None and k != "out"})
    if getattr(ns, "config", None):
        cfg.update(_config_file(ns.config, dests))
    merged = dict(SIM_DEFAULTS)
    merged.update(cfg)
    merged.update(flags)
    if "delta" not in merged:
        # reserve runs default to a hundredth of the mean balance
        merged["delta"] = merged["initial-balance"] / 100 if merged.get("model") == "reserve" else 1.0
    if "out" not in flags:
        merged["out"] = os.environ.get(OUT_ENV) or cfg.get("out") or DEFAULT_OUT
    if "model" not in merged:
        raise UsageError("--model is required")
    model = merged["model"]
    if model not in MODELS:
        raise UsageError(f"unknown model {model!r}")
    given = (set(cfg) | set(flags)) & ALL_PARAMS
    stray = given - MODEL_PARAMS[model]
    if stray:
        raise UsageError(f"model {model!r} does not take: " + ", ".join(f"--{k}" for k in sorted(stray)))
    missing = REQUIRED.get(model, set()) - given
    if missing:
        raise UsageError(f"model {model!r} needs: " + ", ".join(f"--{k}" for k in sorted(missing)))
    for key in ("agents", "steps", "snapshots", "replicas"):
        if merged[key] < 1:
            raise UsageError(f"--{key} must be >= 1")
    if not 0 <= merged["seed"] < 2**64:
        raise UsageError("--seed must be an unsigned 64-bit integer")
    # keep only what this model reads so the manifest echo is exact
    keep = {"model", "agents", "steps", "seed", "initial-balance", "snapshots",
            "entropy-every", "replicas", "out"} | MODEL_PARAMS[model]
    return {k: merged[k] for k in sorted(keep) if k in merged}, manifest


# --- simulate -----------------------------------------------------------------

def _schedule(steps: int, k: int) -> list[int]:
    return sorted({max(1, round(steps * (i + 1) / k)) for i in range(k)})


def _kinetic_rule(cfg):
    from .rules import (DirectedLinks, FirmParams, FirmRound, FixedAmount, Proportional,
                        RandomFractionOfAverage, RandomFractionOfPairSum,
                        RandomSavingPropensity, SavingPropensity)
    m = cfg["model"]
    if m == "fixed":
        return FixedAmount(cfg["delta"])
    if m == "frac-avg":
        return RandomFractionOfAverage()
    if m == "pair-sum":
        return RandomFractionOfPairSum()
    if m == "proportional":
        return Proportional(cfg["gamma"])
    if m == "saving":
        return SavingPropensity(cfg["lambda"])
    if m == "random-saving":
        return RandomSavingPropensity()
    if m == "directed":
        return DirectedLinks(FixedAmount(cfg["delta"]))
    params = FirmParams(cfg["v"], cfg["eta"], cfg["chi"], cfg["h"], cfg["W"])
    base = FixedAmount(cfg["delta"]) if cfg.get("firm-base") == "fixed" else None
    return FirmRound(params, base)


def _simulate_one(cfg: dict, out: Path) -> tuple[list[str], dict]:
    """Run one configuration into ``out``; returns (file names, stats)."""
    from .kinetics import SimConfig, run_kinetics, run_reserve_ratio
    from .income import income_kesten_simulate
    from .wealth import run_bm, run_market, run_slanina, write_market_snapshot

    out.mkdir(parents=True, exist_ok=True)
    model, n, steps, seed, k = cfg["model"], cfg["agents"], cfg["steps"], cfg["seed"], cfg["snapshots"]
    files: list[str] = []
    stats: dict = {"steps": steps}

    def emit(name, values, header="value"):
        _write_values(out / name, values, header)
        files.append(name)

    if model in ("reserve", "silver", "bm", "slanina", "kesten"):
        if model == "reserve":
            run = run_reserve_ratio(n, n * cfg["initial-balance"], cfg["reserve-ratio"], steps, seed,
                                    delta=cfg["delta"], n_samples=k)
            emit("snapshot_final.csv", run.population.balances, "balance")
            t = run.temperatures()
            stats.update(debt=run.debt, debt_cap=run.debt_cap, t_plus=t.t_plus, t_minus=t.t_minus,
                         slope_plus=t.slope_plus, slope_minus=t.slope_minus)
        elif model == "silver":
            mkt, samples = run_market(n, steps, seed, n_samples=k)
            write_market_snapshot(mkt, out / "market_final.csv")
            files.append("market_final.csv")
            for i, w in enumerate(samples):
                emit(f"wealth_{i:04d}.csv", w, "wealth")
            stats.update(price=mkt.price, total_money=mkt.total_money, total_stock=mkt.total_stock)
        elif model == "bm":
            run = run_bm(n, cfg["J"], cfg["sigma2"], cfg["dt"], steps, seed, n_samples=k)
            for i, w in enumerate(run.samples):
                emit(f"relative_wealth_{i:04d}.csv", w, "w")
            emit("relative_wealth_final.csv", run.state.w_tilde, "w")
            stats.update(mean_raw=run.mean_raw)
        elif model == "slanina":
            final, samples = run_slanina(n, cfg["gamma"], cfg["zeta"], steps, seed, n_samples=k)
            for i, w in enumerate(samples):
                emit(f"relative_wealth_{i:04d}.csv", w, "w")
            emit("relative_wealth_final.csv", final, "w")
        else:
            r = income_kesten_simulate(cfg["A0"], cfg["a"], cfg["B0"], cfg["b"], n, steps,
                                       cfg["dt"], seed)
            emit("income_final.csv", r, "income")
        return files, stats

    sim = SimConfig(n, _kinetic_rule(cfg), steps, cfg["initial-balance"],
                    cfg.get("debt-limit", 0.0), seed=seed, snapshot_schedule=_schedule(steps, k),
                    entropy_every=cfg.get("entropy-every"))
    res = run_kinetics(sim)
    for snap in res.snapshots:
        emit(f"snapshot_{snap.step:012d}.csv", snap.balances, "balance")
    _write_plot_csv(out / "entropy.csv", ["step", "entropy"], [res.entropy_steps, res.entropy])
    files.append("entropy.csv")
    stats.update(rejected=res.rejected, firm_rounds=res.firm_rounds, firm_aborts=res.firm_aborts,
                 total_money=float(np.sum(res.final.balances)))
    return files, stats


def cmd_simulate(ns, parser) -> int:
    cfg, manifest = _resolve_sim(ns, parser)
    base_out = Path(cfg["out"])
    replicas = cfg["replicas"]
    status = 0
    for r in range(replicas):
        one = dict(cfg)
        if replicas > 1:
            one["seed"] = replica_seed(cfg["seed"], r)
            one["replicas"] = 1
            one["replica"] = r
            out = base_out / f"replica-{r:03d}"
        else:
            out = base_out
        one["out"] = str(out)
        t0 = time.perf_counter()
        files, stats = _simulate_one(one, out)
        stats["wall_clock_s"] = time.perf_counter() - t0
        dig = digests(out, files)
        write_manifest(out / "manifest.json", "simulate", one, dig, stats)
        print(f"wrote {len(files)} files and manifest.json to {out}")
        if manifest is not None and getattr(ns, "verify", False):
            want = manifest["digests"]
            if want != dig:
                bad = sorted(k for k in set(want) | set(dig) if want.get(k) != dig.get(k))
                print("digest mismatch: " + ", ".join(bad), file=sys.stderr)
                status = 1
            else:
                print("digests match the manifest")
    return status


# --- analyze -------------------------------------------------------------------

def _read_samples(path, column):
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if not reader.fieldnames:
                raise UsageError(f"{path}: no header row")
            col = column or reader.fieldnames[0]
            if col not in reader.fieldnames:
                raise UsageError(f"{path}: no column {col!r}")
            vals = [float(row[col]) for row in reader]
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e}") from None
    except (TypeError, ValueError) as e:
        raise UsageError(f"{path}: malformed value ({e})") from None
    x = np.array(vals)
    if x.size == 0 or not np.all(np.isfinite(x)):
        raise UsageError(f"{path}: no usable samples")
    return x


def _read_table(path):
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if not reader.fieldnames or not {"lower_bound", "cum_count"} <= set(reader.fieldnames):
                raise UsageError(f"{path}: binned input needs lower_bound,cum_count columns")
            rows = [(float(r["lower_bound"]), float(r["cum_count"])) for r in reader]
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e}") from None
    except (TypeError, ValueError) as e:
        raise UsageError(f"{path}: malformed value ({e})") from None
    if not rows:
        raise UsageError(f"{path}: empty table")
    lb, cc = (np.array(c) for c in zip(*rows))
    return lb, cc


def _finite(d: dict) -> dict:
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in d.items()}


def cmd_analyze(ns) -> int:
    from .empirics import (fit_exponential, fit_gamma_moments, fit_pareto_hill, gini_empirical,
                           lorenz_empirical, lorenz_from_table)
    from .twoclass import two_class_decompose, two_class_from_table

    out = Path(ns.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)
    report: dict = {"input": str(ns.input), "n_rows": None}
    if ns.binned:
        lb, cc = _read_table(ns.input)
        report["n_rows"] = int(lb.size)
        lorenz = lorenz_from_table(lb, cc)
        if ns.fit == "two-class":
            report["two_class"] = _finite(two_class_from_table(lb, cc).to_dict())
        elif ns.fit is not None:
            raise UsageError("binned input supports only --fit two-class")
        gini = 1.0 - 2.0 * lorenz.area()
    else:
        x = _read_samples(ns.input, ns.column)
        report["n_rows"] = int(x.size)
        if ns.fit == "exp":
            report["exp"] = {"floor": ns.floor, "T": fit_exponential(x, ns.floor)}
        elif ns.fit == "gamma":
            beta, T = fit_gamma_moments(x)
            report["gamma"] = {"beta": beta, "T": T}
        elif ns.fit == "pareto":
            xmin = ns.xmin if ns.xmin is not None else float(np.quantile(x, 0.95))
            report["pareto"] = {"xmin": xmin, "alpha": fit_pareto_hill(x, xmin)}
        elif ns.fit == "two-class":
            report["two_class"] = _finite(two_class_decompose(x, floor=ns.floor).to_dict())
        lorenz = lorenz_empirical(x) if (ns.lorenz or ns.gini) else None
        gini = gini_empirical(x) if ns.gini and x.size >= 2 else None
    out.mkdir(parents=True, exist_ok=True)
    if ns.gini:
        report["gini"] = gini
        print(f"gini {gini:.6g}")
    if ns.lorenz:
        _write_plot_csv(out / "lorenz.csv", ["x", "y"], [lorenz.x, lorenz.y])
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"wrote report.json to {out}")
    return 0


# --- laws ---------------------------------------------------------------------

def _grid(spec, law, T, floor):
    if spec is None:
        lo, hi, n = (floor, floor + 10 * T, 1001) if law == "exp" else (0.0, 10 * T, 1001)
    else:
        try:
            a, b, c = spec.split(":")
            lo, hi, n = float(a), float(b), int(c)
        except ValueError:
            raise UsageError("--grid must look like lo:hi:n") from None
    if not (n >= 2 and hi > lo):
        raise UsageError("--grid needs hi > lo and n >= 2")
    return np.linspace(lo, hi, n)


def cmd_laws(ns) -> int:
    from .laws import ArctanInterpolating, Exponential, FamilyIncome, Gamma, InverseGammaBM

    need = {"gamma": ("beta",), "bm": ("kappa",), "arctan": ("r0", "ab")}.get(ns.law, ())
    missing = [k for k in need if getattr(ns, k) is None]
    if missing:
        raise UsageError(f"law {ns.law!r} needs: " + ", ".join(f"--{k}" for k in missing))
    try:
        if ns.law == "exp":
            law = Exponential(ns.T, ns.floor)
        elif ns.law == "gamma":
            law = Gamma(ns.beta, ns.T)
        elif ns.law == "bm":
            law = InverseGammaBM(ns.kappa)
        elif ns.law == "arctan":
            law = ArctanInterpolating(ns.T, ns.r0, ns.ab)
        else:
            law = FamilyIncome(ns.T)
        r = _grid(ns.grid, ns.law, ns.T, ns.floor)
        pdf, ccdf = law.pdf(r), law.ccdf(r)
    except ModelError as e:
        raise UsageError(str(e)) from None
    out = Path(ns.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)
    out.mkdir(parents=True, exist_ok=True)
    name = f"law_{ns.law}.csv"
    _write_plot_csv(out / name, ["r", "pdf", "ccdf"], [r, pdf, ccdf])
    print(f"wrote {name} to {out}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    try:
        if ns.command == "simulate":
            return cmd_simulate(ns, parser)
        if ns.command == "analyze":
            return cmd_analyze(ns)
        return cmd_laws(ns)
    except UsageError as e:
        print(f"moneystat: error: {e}", file=sys.stderr)
        return 2
    except ModelError as e:
        print(f"moneystat: model error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
