"""Histograms, entropy, Lorenz/Gini and estimators for sampled distributions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import optimize, special

from .errors import EmptyInput, InsufficientTail, InvalidParameter, ZeroTotal


# --- histograms and entropy ------------------------------------------------

@dataclass(frozen=True)
class EqualWidth:
    k: int


@dataclass(frozen=True)
class Log:
    k: int


@dataclass(frozen=True)
class Edges:
    edges: tuple


Binning = Union[EqualWidth, Log, Edges]


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    dropped: int = 0

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.n

    @property
    def density(self) -> np.ndarray:
        return self.probabilities / np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[:-1] + e[1:])


def _edges_for(x: np.ndarray, binning) -> np.ndarray:
    if isinstance(binning, Edges):
        return np.asarray(binning.edges, dtype=float)
    if isinstance(binning, (np.ndarray, list, tuple)):
        return np.asarray(binning, dtype=float)
    lo, hi = float(x.min()), float(x.max())
    if isinstance(binning, EqualWidth):
        if binning.k < 1:
            raise InvalidParameter("need at least one bin")
        if hi == lo:
            lo, hi = lo - 0.5, hi + 0.5
        return np.linspace(lo, hi, binning.k + 1)
    if isinstance(binning, Log):
        if lo <= 0:
            raise InvalidParameter("log bins need positive samples")
        if hi == lo:
            lo, hi = lo / 2, hi * 2
        return np.geomspace(lo, hi, binning.k + 1)
    raise InvalidParameter(f"unknown binning {binning!r}")


def histogram(samples, binning) -> Histogram:
    """Counts on half-open bins [e_i, e_i+1); the last bin is closed.

    ``binning`` is :class:`EqualWidth`, :class:`Log`, :class:`Edges` or a raw
    edge array.  Samples outside explicit edges are counted in ``dropped``.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise EmptyInput("histogram of no samples")
    edges = _edges_for(x, binning)
    if edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise InvalidParameter("bin edges must be strictly increasing")
    idx = np.searchsorted(edges, x, side="right") - 1
    idx[x == edges[-1]] = edges.size - 2
    inside = (idx >= 0) & (idx < edges.size - 1)
    counts = np.bincount(idx[inside], minlength=edges.size - 1)
    return Histogram(edges, counts, int(x.size - inside.sum()))


def entropy(h: Histogram) -> float:
    """Entropy per particle, -sum P_k ln P_k over occupied bins."""
    p = h.counts[h.counts > 0] / h.n
    return float(-np.sum(p * np.log(p)))


def ln_multiplicity(counts) -> float:
    """ln W = ln(N! / prod N_k!), exact integer arithmetic for moderate N."""
    counts = [int(c) for c in np.asarray(counts).ravel() if c > 0]
    n = sum(counts)
    if n <= 10_000:
        w = math.factorial(n)
        for c in counts:
            w //= math.factorial(c)
        return math.log(w)
    return math.lgamma(n + 1) - sum(math.lgamma(c + 1) for c in counts)


def law_bin_entropy(law, edges) -> float:
    """Entropy of a continuous law coarse-grained on ``edges``."""
    cdf = np.asarray(law.cdf(np.asarray(edges, dtype=float)), dtype=float)
    cdf[np.isinf(edges) & (np.asarray(edges) > 0)] = 1.0
    p = np.diff(cdf)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


# --- Lorenz curve and Gini ----------------------------------------------------

@dataclass
class LorenzCurve:
    x: np.ndarray
    y: np.ndarray

    def area(self) -> float:
        return float(np.trapezoid(self.y, self.x))


def lorenz_empirical(samples) -> LorenzCurve:
    r = np.sort(np.asarray(samples, dtype=float).ravel())
    if r.size == 0:
        raise EmptyInput("Lorenz curve of no samples")
    if r[0] < 0:
        raise InvalidParameter("Lorenz curve needs non-negative samples")
    total = r.sum()
    if total <= 0:
        raise ZeroTotal("all samples are zero")
    x = np.arange(r.size + 1) / r.size
    y = np.concatenate([[0.0], np.cumsum(r) / total])
    y[-1] = 1.0
    return LorenzCurve(x, y)


def gini_empirical(samples) -> float:
    """1 - 2 * (trapezoid area under the empirical Lorenz polyline)."""
    if np.asarray(samples).size < 2:
        raise InvalidParameter("Gini needs at least two samples")
    return 1.0 - 2.0 * lorenz_empirical(samples).area()


def lorenz_from_table(lower_bounds, cum_counts) -> LorenzCurve:
    """Lorenz points from an IRS-style table of (income lower bound, count at or above).

    Each bin's income is approximated by its population times the midpoint of
    its bounds; the open top bin uses its lower bound times the Pareto factor
    alpha/(alpha-1) from the two topmost rows.
    """
    lb = np.asarray(lower_bounds, dtype=float)
    cc = np.asarray(cum_counts, dtype=float)
    pop = -np.diff(np.append(cc, 0.0))
    mids = np.empty_like(lb)
    mids[:-1] = 0.5 * (lb[:-1] + lb[1:])
    alpha = math.log(cc[-2] / cc[-1]) / math.log(lb[-1] / lb[-2]) if cc[-1] > 0 else 2.0
    mids[-1] = lb[-1] * (alpha / (alpha - 1.0) if alpha > 1 else 2.0)
    income = pop * mids
    x = np.concatenate([[0.0], np.cumsum(pop) / pop.sum()])
    y = np.concatenate([[0.0], np.cumsum(income) / income.sum()])
    return LorenzCurve(x, y)


# --- estimators -----------------------------------------------------------------

def fit_exponential(samples, floor: float = 0.0) -> float:
    """Exponential MLE temperature, mean - floor."""
    x = np.asarray(samples, dtype=float)
    x = x[x >= floor]
    if x.size == 0:
        raise EmptyInput("no samples above the floor")
    return float(x.mean() - floor)


def fit_shifted_exponential(samples) -> tuple[float, float]:
    """(floor, T): floor is the sample minimum, T the mean excess over it."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise EmptyInput("no samples")
    floor = float(x.min())
    return floor, float(x.mean() - floor)


def fit_exponential_loglinear(samples, floor: float = 0.0, upper: float | None = None,
                              bins: int = 30, lattice: float | None = None) -> float:
    """Temperature from a weighted straight-line fit to log bin counts.

    Bins span [floor, upper] (default: floor + 3 * mean excess); weights are
    the Poisson counts.  For samples on a lattice of spacing ``lattice`` the
    stationary law is geometric, P(floor + k d) ~ q^k; the fitted decay rate
    is then converted to the geometric mean excess d / (exp(d * rate) - 1).
    Bins are widened to whole lattice cells so each holds the same number of
    lattice points.
    """
    x = np.asarray(samples, dtype=float)
    t_mle = fit_exponential(x, floor)
    if upper is None:
        upper = floor + 3.0 * t_mle
    if lattice:
        cells = max(1, int(round((upper - floor) / lattice / bins)))
        edges = floor - 0.5 * lattice + lattice * cells * np.arange(bins + 1)
    else:
        edges = np.linspace(floor, upper, bins + 1)
    h = histogram(x, edges)
    ok = h.counts > 0
    c = h.centers[ok]
    y = np.log(h.counts[ok])
    slope = np.polyfit(c, y, 1, w=np.sqrt(h.counts[ok]))[0]
    if slope >= 0:
        raise InvalidParameter("histogram does not decay")
    if lattice:
        return float(lattice / math.expm1(-lattice * slope))
    return float(-1.0 / slope)


def dequantize(samples, step: float, rng) -> np.ndarray:
    """Spread lattice-valued samples uniformly over [x, x + step).

    Used before comparing integer-step balances with a continuous law.
    """
    x = np.asarray(samples, dtype=float)
    return x + step * rng.random(x.shape)


def fit_exponential_window(samples, lo: float, hi: float) -> float:
    """MLE temperature of an exponential truncated to [lo, hi]."""
    x = np.asarray(samples, dtype=float)
    x = x[(x >= lo) & (x <= hi)]
    if x.size < 2:
        raise EmptyInput("too few samples in the fit window")
    w = hi - lo
    target = float(x.mean() - lo)
    if target >= w / 2:
        raise InvalidParameter("window mean not below midpoint: no decaying exponential")

    def excess(t):
        z = w / t
        return t - (w / math.expm1(z) if z < 700 else 0.0) - target

    return float(optimize.brentq(excess, 1e-9 * w, 1e9 * w, xtol=1e-14 * w, maxiter=500))


def fit_gamma_moments(samples) -> tuple[float, float]:
    """(beta, T) from mean and variance: beta = mean^2/var - 1, T = var/mean."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise EmptyInput("need at least two samples")
    mean = x.mean()
    var = x.var()
    return float(mean**2 / var - 1.0), float(var / mean)


def fit_low_exponent(samples, cut: float, floor: float = 0.0) -> float:
    """Exponent beta of P(m) ~ (m - floor)^beta near the floor.

    Power-law MLE on (floor, floor + cut]: beta + 1 = n / sum ln(cut / (m - floor)).
    This is the parameter a kinetic equation fixes for multiplicative rules;
    moment fits instead see the whole body of the distribution.
    """
    x = np.asarray(samples, dtype=float) - floor
    x = x[(x > 0) & (x <= cut)]
    if x.size < 10:
        raise EmptyInput("fewer than 10 samples below the cut")
    return float(x.size / np.sum(np.log(cut / x)) - 1.0)


def fit_pareto_hill(samples, xmin: float, min_tail: int = 50) -> float:
    """Hill estimate of the CCDF exponent from samples at or above ``xmin``."""
    x = np.asarray(samples, dtype=float)
    tail = x[x >= xmin]
    if tail.size < min_tail:
        raise InsufficientTail(f"{tail.size} tail samples, need {min_tail}")
    return float(1.0 / np.mean(np.log(tail / xmin)))


def fit_inverse_gamma_bm(samples) -> float:
    """MLE of kappa for the mean-one inverse-gamma law (shape 1 + kappa, scale kappa).

    Solves ln k + (1 + k)/k - digamma(1 + k) = mean(ln w) + mean(1/w).
    """
    w = np.asarray(samples, dtype=float)
    if w.size < 2:
        raise EmptyInput("need at least two samples")
    if np.any(w <= 0):
        raise InvalidParameter("relative wealth must be positive")
    target = float(np.mean(np.log(w)) + np.mean(1.0 / w))

    def score(lk):
        k = math.exp(lk)
        return math.log(k) + (1.0 + k) / k - special.digamma(1.0 + k) - target

    # the left side falls from +inf to 1 as kappa grows; target >= 1 by Jensen
    if not score(-20.0) > 0:
        raise InvalidParameter("samples are too concentrated to fit kappa")
    if score(20.0) > 0:
        return math.exp(20.0)
    return float(math.exp(optimize.brentq(score, -20.0, 20.0, xtol=1e-12)))


def ccdf_slope(samples, lo: float, hi: float, points: int = 30) -> float:
    """Least-squares log-log slope of the empirical CCDF on [lo, hi], sign flipped."""
    x = np.sort(np.asarray(samples, dtype=float))
    grid = np.geomspace(lo, hi, points)
    ccdf = 1.0 - np.searchsorted(x, grid, side="left") / x.size
    ok = ccdf > 0
    if ok.sum() < 3:
        raise InsufficientTail("CCDF vanishes on the fit range")
    return float(-np.polyfit(np.log(grid[ok]), np.log(ccdf[ok]), 1)[0])


# --- goodness of fit -----------------------------------------------------------

def ks_statistic(samples, law) -> float:
    """Sup distance between the empirical CDF and ``law.cdf``."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise EmptyInput("KS statistic of no samples")
    f = np.asarray(law.cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_tail_statistic(samples, law, threshold: float) -> tuple[float, int]:
    """KS distance of the samples above ``threshold`` to the law conditioned there.

    Returns ``(D, n_tail)``.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    x = x[x > threshold]
    n = x.size
    if n == 0:
        raise InsufficientTail("no samples above the threshold")
    f = (np.asarray(law.cdf(x), dtype=float) - float(law.cdf(threshold))) / float(law.ccdf(threshold))
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n))), n


def ks_critical(n: int, level: float = 0.01) -> float:
    """Asymptotic one-sample KS critical value, sqrt(-ln(level/2)/2) / sqrt(n)."""
    return math.sqrt(-math.log(level / 2.0) / 2.0) / math.sqrt(n)
