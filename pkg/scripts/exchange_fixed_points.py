"""Stationary laws of the pairwise exchange rules.

Runs each rule from equal balances and prints the fitted parameters next to
the predicted ones.  Optional CSV output holds the pooled histograms.
"""
import argparse
import csv
from pathlib import Path

import numpy as np

from moneystat import (FixedAmount, Proportional, RandomSavingPropensity, SavingPropensity,
                       SimConfig, run_kinetics, run_reserve_ratio)
from moneystat.empirics import (Log, ccdf_slope, fit_exponential_loglinear, fit_gamma_moments,
                                fit_low_exponent, histogram)
from moneystat.laws import beta_from_gamma, beta_from_lambda


def pooled(rule, n_agents, n_steps, seed, debt_limit=0, every=10**5):
    sched = range(n_steps // 2 + every, n_steps + 1, every)
    # integer balances for the fixed-amount rule, reals for the multiplicative ones
    m0 = 1000 if isinstance(rule, FixedAmount) else 1000.0
    res = run_kinetics(SimConfig(n_agents, rule, n_steps, m0, debt_limit=debt_limit, seed=seed,
                                 snapshot_schedule=sched))
    return res.stationary_samples()


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", help="directory for histogram CSVs")
    args = ap.parse_args()
    rows = []

    x = pooled(FixedAmount(50), 500, 10**7, args.seed)
    rows.append(("fixed amount", "T", 1000.0, fit_exponential_loglinear(x, lattice=50), x))
    x = pooled(FixedAmount(90), 500, 10**7, args.seed, debt_limit=800)
    rows.append(("fixed amount, debt 800", "T", 1800.0,
                 fit_exponential_loglinear(x, floor=-800, lattice=90), x + 800))
    run = run_reserve_ratio(500, 5e5, 0.8, 5 * 10**7, args.seed, delta=10)
    rows.append(("reserve ratio 0.8", "T-/T+", 0.2, run.temperatures().ratio, None))
    x = pooled(Proportional(1 / 3), 1000, 10**7, args.seed, every=5 * 10**4)
    rows.append(("proportional 1/3", "low-m beta", beta_from_gamma(1 / 3), fit_low_exponent(x, 100.0), x))
    for lam in (0.25, 0.5):
        x = pooled(SavingPropensity(lam), 1000, 5 * 10**6, args.seed)
        rows.append((f"saving {lam}", "beta", beta_from_lambda(lam), fit_gamma_moments(x)[0], x))
    x = pooled(RandomSavingPropensity(), 5000, 5 * 10**7, args.seed, every=2_500_000)
    rows.append(("random saving", "ccdf exponent", 1.0, ccdf_slope(x / 1000, 1, 10**1.5), x))

    print(f"{'rule':<24}{'quantity':<16}{'predicted':>12}{'measured':>12}")
    for name, q, want, got, _ in rows:
        print(f"{name:<24}{q:<16}{want:>12.4g}{got:>12.4g}")

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, _, _, _, x in rows:
            if x is None:
                continue
            h = histogram(x[x > 0], Log(40))
            path = out / (name.replace(" ", "_").replace(",", "").replace("/", "") + ".csv")
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["lo", "hi", "density"])
                widths = np.diff(h.edges)
                for lo, hi, c, wd in zip(h.edges[:-1], h.edges[1:], h.counts, widths):
                    w.writerow([f"{lo:.6g}", f"{hi:.6g}", f"{c / (h.n * wd):.6g}"])


if __name__ == "__main__":
    main()
