"""Exponential bulk plus Pareto tail decomposition of an income distribution."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize

from .empirics import (fit_exponential_window, fit_pareto_hill, gini_empirical,
                       ks_critical, lorenz_from_table)
from .errors import InsufficientTail, InvalidParameter

MIN_SAMPLES = 1000
MIN_ROWS = 20
MIN_TAIL = 50


@dataclass
class TwoClassReport:
    T_r: float
    alpha: float | None
    r_star: float | None
    f: float
    upper_fraction: float
    ks_bulk: float
    ks_tail: float | None
    xmin: float | None
    n: int
    gini: float | None
    gini_two_class: float

    @property
    def two_class(self) -> bool:
        return self.r_star is not None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["two_class"] = self.two_class
        return d


def _bulk_law(T, floor, weight):
    return lambda x: math.log(weight) - (x - floor) / T


def _tail_law(alpha, xmin, weight):
    return lambda x: math.log(weight) - alpha * math.log(x / xmin)


def _intersection(log_bulk, log_tail, lo, hi):
    g = lambda x: log_bulk(x) - log_tail(x)
    if not (g(lo) > 0 > g(hi)):
        return None
    return optimize.brentq(g, lo, hi, xtol=1e-12 * hi, rtol=1e-14, maxiter=500)


def _ks_truncated_exp(x, lo, hi, T):
    x = np.sort(x)
    n = x.size
    norm = -math.expm1(-(hi - lo) / T)
    f = -np.expm1(-(x - lo) / T) / norm
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def _ks_pareto(tail, xmin, alpha):
    x = np.sort(tail)
    n = x.size
    f = 1.0 - (x / xmin) ** (-alpha)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def _ks_exp_tail(tail, xmin, T):
    x = np.sort(tail)
    n = x.size
    f = -np.expm1(-(x - xmin) / T)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def two_class_decompose(samples, floor: float = 0.0, bulk_quantile: float = 0.9,
                        tail_range: tuple[float, float] = (0.001, 0.05),
                        n_candidates: int = 60) -> TwoClassReport:
    """Fit an exponential to the lower part and a Pareto law to the top tail.

    The bulk temperature is the truncated-exponential MLE on
    [floor, bulk_quantile]; the tail threshold is the candidate (top 0.1-5% of
    the sample) minimizing the Pareto KS distance.  The class boundary r* is
    where the two fitted CCDFs cross and ``f`` is the share of total income
    above r*.  When the tail is consistent with the exponential bulk, or the
    fits do not cross, a single-class report (f = 0, r* = None) is returned.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n < MIN_SAMPLES:
        raise InvalidParameter(f"need at least {MIN_SAMPLES} samples, got {n}")
    x = x[x >= floor]
    n = x.size
    q_hi = float(np.quantile(x, bulk_quantile))
    T = fit_exponential_window(x, floor, q_hi)
    in_bulk = x[x <= q_hi]
    weight = in_bulk.size / n / -math.expm1(-(q_hi - floor) / T)
    ks_bulk = _ks_truncated_exp(in_bulk, floor, q_hi, T)
    gini = gini_empirical(x) if floor >= 0 else None

    def single() -> TwoClassReport:
        return TwoClassReport(T, None, None, 0.0, 0.0, ks_bulk, None, None, n, gini, 0.5)

    lo_k = max(MIN_TAIL, int(round(tail_range[0] * n)))
    hi_k = int(round(tail_range[1] * n))
    if hi_k < lo_k:
        return single()
    best = None
    for k in np.unique(np.geomspace(lo_k, hi_k, n_candidates).astype(int)):
        xmin = x[n - k]
        tail = x[n - k:]
        try:
            alpha = fit_pareto_hill(tail, xmin, MIN_TAIL)
        except InsufficientTail:
            continue
        d = _ks_pareto(tail, xmin, alpha)
        if best is None or d < best[0]:
            best = (d, k, xmin, alpha)
    if best is None:
        return single()
    ks_tail, k, xmin, alpha = best
    tail = x[n - k:]
    # a tail the bulk exponential already explains is no upper class
    if _ks_exp_tail(tail, xmin, T) < ks_critical(k, 0.01):
        return single()
    r_star = _intersection(_bulk_law(T, floor, weight), _tail_law(alpha, xmin, k / n),
                           floor + T, float(x[-1]))
    if r_star is None or r_star <= T:
        return single()
    above = x[x > r_star]
    f = float(above.sum() / x.sum())
    return TwoClassReport(T, alpha, float(r_star), f, above.size / n, ks_bulk, ks_tail,
                          float(xmin), n, gini, 0.5 * (1 + f))


def two_class_from_table(lower_bounds, cum_counts, bulk_ccdf: float = 0.1,
                         tail_ccdf: float = 0.05) -> TwoClassReport:
    """Two-class fit to a binned table of (income lower bound, count at or above).

    The exponential is a straight-line fit of log-CCDF on rows with CCDF at
    least ``bulk_ccdf``; the Pareto law a log-log fit on rows at or below
    ``tail_ccdf``.  Between rows, CCDF and cumulative income are interpolated
    linearly in the logarithm.
    """
    lb = np.asarray(lower_bounds, dtype=float)
    cc = np.asarray(cum_counts, dtype=float)
    if lb.size < MIN_ROWS:
        raise InvalidParameter(f"need at least {MIN_ROWS} table rows, got {lb.size}")
    if np.any(np.diff(lb) <= 0) or np.any(np.diff(cc) > 0):
        raise InvalidParameter("bounds must increase and counts must not increase")
    n = cc[0]
    ccdf = cc / n
    bulk = ccdf >= bulk_ccdf
    slope, icept = np.polyfit(lb[bulk], np.log(ccdf[bulk]), 1)
    T = -1.0 / slope
    weight = math.exp(icept + lb[0] / T)
    lorenz = lorenz_from_table(lb, cc)
    gini = 1.0 - 2.0 * lorenz.area()

    pop = -np.diff(np.append(cc, 0.0))
    income_rows = np.diff(lorenz.y) * 1.0
    top = (ccdf <= tail_ccdf) & (lb > 0) & (cc > 0)
    if top.sum() < 3:
        return TwoClassReport(T, None, None, 0.0, 0.0, math.nan, None, None, int(n), gini, 0.5)
    a_slope, a_icept = np.polyfit(np.log(lb[top]), np.log(ccdf[top]), 1)
    alpha = -a_slope
    xmin = float(lb[top][0])
    log_tail = lambda x: a_icept + a_slope * math.log(x)
    log_bulk = lambda x: math.log(weight) - (x - lb[0]) / T
    r_star = _intersection(log_bulk, log_tail, lb[0] + T, float(lb[-1]) * 10)
    if r_star is None:
        return TwoClassReport(T, alpha, None, 0.0, 0.0, math.nan, None, xmin, int(n), gini, 0.5)
    # share of income above r*: cumulative income from the top, log-interpolated
    inc_above = np.cumsum(income_rows[::-1])[::-1]
    pos = inc_above > 0
    f = float(np.exp(np.interp(r_star, lb[pos], np.log(inc_above[pos]))))
    upper = float(np.exp(np.interp(r_star, lb[cc > 0], np.log(ccdf[cc > 0]))))
    return TwoClassReport(T, float(alpha), float(r_star), f, upper, math.nan, None, xmin,
                          int(n), gini, 0.5 * (1 + f))
