"""Closed-form stationary laws, Lorenz curves and Gini coefficients.

Every law exposes ``pdf``, ``cdf`` and ``ccdf`` (vectorized) plus its
support.  Laws without a closed-form normalization are normalized by
adaptive quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate, special, stats

from .errors import InvalidParameter

LN2 = math.log(2.0)


# --- scalar formulas ----------------------------------------------------

def exponential_pdf(m, T: float, floor: float = 0.0):
    if not T > 0:
        raise InvalidParameter("T must be > 0")
    m = np.asarray(m, dtype=float)
    out = np.where(m >= floor, np.exp(-(m - floor) / T) / T, 0.0)
    return out if out.ndim else float(out)


def exponential_ccdf(m, T: float, floor: float = 0.0):
    if not T > 0:
        raise InvalidParameter("T must be > 0")
    m = np.asarray(m, dtype=float)
    out = np.where(m >= floor, np.exp(-(m - floor) / T), 1.0)
    return out if out.ndim else float(out)


def gamma_pdf(m, beta: float, T: float):
    """c m**beta exp(-m/T) with c = 1 / (T**(beta+1) Gamma(beta+1))."""
    if not (beta > -1 and T > 0):
        raise InvalidParameter("need beta > -1 and T > 0")
    m = np.asarray(m, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_c = -(beta + 1) * math.log(T) - special.gammaln(beta + 1)
        out = np.exp(log_c + special.xlogy(beta, m) - m / T)
    out = np.where(m >= 0, out, 0.0)
    return out if out.ndim else float(out)


def beta_from_gamma(gamma: float) -> float:
    """Gamma-law exponent of the proportional rule: -1 - ln2 / ln(1 - gamma)."""
    if not 0 < gamma < 1:
        raise InvalidParameter("gamma must lie in (0, 1)")
    return -1.0 - LN2 / math.log1p(-gamma)


def beta_from_lambda(lam: float) -> float:
    """Gamma-law exponent of the saving rule: 3 lam / (1 - lam)."""
    if not 0 <= lam < 1:
        raise InvalidParameter("lambda must lie in [0, 1)")
    return 3.0 * lam / (1.0 - lam)


def bm_stationary_pdf(w, kappa: float):
    """Mean-field relative-wealth law c exp(-kappa/w) / w**(2+kappa).

    Inverse gamma with shape 1+kappa and scale kappa, so the mean is 1.
    """
    if not kappa > 0:
        raise InvalidParameter("kappa must be > 0")
    w = np.asarray(w, dtype=float)
    log_c = (1 + kappa) * math.log(kappa) - special.gammaln(1 + kappa)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(log_c - kappa / w - (2 + kappa) * np.log(w))
    out = np.where(w > 0, out, 0.0)
    return out if out.ndim else float(out)


def family_pdf(r, T: float):
    """Two-earner income law (r / T**2) exp(-r/T), the exponential self-convolution."""
    if not T > 0:
        raise InvalidParameter("T must be > 0")
    r = np.asarray(r, dtype=float)
    out = np.where(r >= 0, r / T**2 * np.exp(-r / T), 0.0)
    return out if out.ndim else float(out)


def _arctan_log_shape(r, T_r, r0, ab_ratio):
    # exp(-(r0/T) atan(r/r0)) with atan(r/r0) = pi/2 - atan(r0/r); the
    # constant is dropped so small r0 does not overflow.
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        phase = np.where(r > 0, np.arctan2(r0, r), math.pi / 2)
    return (r0 / T_r) * phase - (1.0 + 0.5 * ab_ratio) * np.log1p((r / r0) ** 2)


@dataclass(frozen=True)
class ArctanNormalizer:
    T_r: float
    r0: float
    ab_ratio: float

    @cached_property
    def log_norm(self) -> float:
        T_r, r0, ab = self.T_r, self.r0, self.ab_ratio
        grid = np.concatenate([[0.0], r0 * np.logspace(-6, 6, 241), np.abs(T_r) * np.logspace(-6, 3, 181)])
        grid = np.unique(grid)
        vals = _arctan_log_shape(grid, T_r, r0, ab)
        shift = float(np.max(vals))
        peak = float(grid[np.argmax(vals)])
        scale = max(peak, r0, abs(T_r) if T_r > 0 else 0.0, 1e-300)
        pts = sorted({0.0, *(scale * 10.0**k for k in range(-8, 9))})
        f = lambda x: math.exp(float(_arctan_log_shape(x, T_r, r0, ab)) - shift)
        total = 0.0
        for lo, hi in zip(pts[:-1], pts[1:]):
            total += integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-13, limit=400)[0]
        # power-law remainder via u = 1/r on (0, 1/r_max]
        g = lambda u: f(1.0 / u) / (u * u) if u > 0 else 0.0
        total += integrate.quad(g, 0.0, 1.0 / pts[-1], epsabs=0.0, epsrel=1e-13, limit=400)[0]
        return shift + math.log(total)


_NORMALIZERS: dict = {}


def _arctan_normalizer(T_r, r0, ab_ratio) -> ArctanNormalizer:
    key = (float(T_r), float(r0), float(ab_ratio))
    if key not in _NORMALIZERS:
        _NORMALIZERS[key] = ArctanNormalizer(*key)
    return _NORMALIZERS[key]


def arctan_pdf(r, T_r: float, r0: float, ab_ratio: float):
    """Additive-plus-multiplicative income law, normalized on r >= 0.

    P(r) = c exp(-(r0/T_r) atan(r/r0)) / [1 + (r/r0)**2]**(1 + ab_ratio/2),
    with T_r = B0/A0, r0**2 = B0/b and ab_ratio = a/b.  A negative ``T_r``
    (outward additive drift, A0 < 0) is accepted: it gives the mean-field
    relative-wealth law in the limit r0 -> 0 with r0**2/T_r = -kappa.
    """
    if not (r0 > 0 and ab_ratio > 0 and T_r != 0):
        raise InvalidParameter("need r0 > 0, ab_ratio > 0 and T_r != 0")
    norm = _arctan_normalizer(T_r, r0, ab_ratio)
    r = np.asarray(r, dtype=float)
    out = np.where(r >= 0, np.exp(_arctan_log_shape(np.maximum(r, 0), T_r, r0, ab_ratio) - norm.log_norm), 0.0)
    return out if out.ndim else float(out)


def arctan_params(A0: float, a: float, B0: float, b: float) -> tuple[float, float, float]:
    """Map drift A = A0 + a r and diffusion B = B0 + b r**2 to (T_r, r0, a/b)."""
    return B0 / A0, math.sqrt(B0 / b), a / b


# --- distribution objects --------------------------------------------------

@dataclass(frozen=True)
class Exponential:
    T: float
    floor: float = 0.0

    def __post_init__(self):
        if not self.T > 0:
            raise InvalidParameter("T must be > 0")

    @property
    def support(self):
        return (self.floor, math.inf)

    def pdf(self, m):
        return exponential_pdf(m, self.T, self.floor)

    def ccdf(self, m):
        return exponential_ccdf(m, self.T, self.floor)

    def cdf(self, m):
        return 1.0 - self.ccdf(m)

    def mean(self):
        return self.floor + self.T

    def sample(self, rng, size):
        return self.floor + rng.exponential(self.T, size)


@dataclass(frozen=True)
class Gamma:
    beta: float
    T: float

    def __post_init__(self):
        if not (self.T > 0 and self.beta > -1):
            raise InvalidParameter("need T > 0 and beta > -1")

    @property
    def support(self):
        return (0.0, math.inf)

    @property
    def _dist(self):
        return stats.gamma(a=self.beta + 1, scale=self.T)

    def pdf(self, m):
        return gamma_pdf(m, self.beta, self.T)

    def cdf(self, m):
        return self._dist.cdf(m)

    def ccdf(self, m):
        return self._dist.sf(m)

    def mean(self):
        return (self.beta + 1) * self.T

    def sample(self, rng, size):
        return rng.gamma(self.beta + 1, self.T, size)


@dataclass(frozen=True)
class InverseGammaBM:
    kappa: float

    def __post_init__(self):
        if not self.kappa > 0:
            raise InvalidParameter("kappa must be > 0")

    @property
    def support(self):
        return (0.0, math.inf)

    @property
    def _dist(self):
        return stats.invgamma(a=1 + self.kappa, scale=self.kappa)

    def pdf(self, w):
        return bm_stationary_pdf(w, self.kappa)

    def cdf(self, w):
        return self._dist.cdf(w)

    def ccdf(self, w):
        return self._dist.sf(w)

    def mean(self):
        return 1.0

    def sample(self, rng, size):
        return self.kappa / rng.gamma(1 + self.kappa, 1.0, size)


@dataclass(frozen=True)
class ArctanInterpolating:
    T_r: float
    r0: float
    ab_ratio: float

    def __post_init__(self):
        if not (self.r0 > 0 and self.ab_ratio > 0 and self.T_r != 0):
            raise InvalidParameter("need r0 > 0, ab_ratio > 0 and T_r != 0")

    @property
    def support(self):
        return (0.0, math.inf)

    def pdf(self, r):
        return arctan_pdf(r, self.T_r, self.r0, self.ab_ratio)

    @cached_property
    def _cdf_table(self):
        # cumulative Simpson on r = s t / (1 - t), t uniform on [0, 1)
        s = max(self.r0, abs(self.T_r))
        t = np.linspace(0.0, 1.0, 2**18 + 1)[:-1]
        r = s * t / (1 - t)
        dens = self.pdf(r) * s / (1 - t) ** 2
        cum = integrate.cumulative_simpson(dens, x=t, initial=0.0)
        cum = np.append(cum, 1.0)
        t = np.append(t, 1.0)
        return s, t, np.minimum(cum, 1.0)

    def cdf(self, r):
        s, t, cum = self._cdf_table
        r = np.maximum(np.asarray(r, dtype=float), 0.0)
        return np.interp(r / (s + r), t, cum)

    def ccdf(self, r):
        return 1.0 - self.cdf(r)


@dataclass(frozen=True)
class FamilyIncome:
    T: float

    def __post_init__(self):
        if not self.T > 0:
            raise InvalidParameter("T must be > 0")

    @property
    def support(self):
        return (0.0, math.inf)

    def pdf(self, r):
        return family_pdf(r, self.T)

    def ccdf(self, r):
        r = np.maximum(np.asarray(r, dtype=float), 0.0)
        return np.exp(-r / self.T) * (1 + r / self.T)

    def cdf(self, r):
        return 1.0 - self.ccdf(r)

    def mean(self):
        return 2 * self.T

    def sample(self, rng, size):
        return rng.gamma(2.0, self.T, size)


# --- Lorenz and Gini --------------------------------------------------------

def lorenz_exponential(x):
    """y = x + (1 - x) ln(1 - x); y(1) = 1."""
    x = np.asarray(x, dtype=float)
    one_minus = 1.0 - x
    with np.errstate(divide="ignore", invalid="ignore"):
        y = x + special.xlogy(one_minus, one_minus)
    y = np.where(x >= 1.0, 1.0, y)
    return y if y.ndim else float(y)


def lorenz_two_class(x, f: float):
    """(1 - f) times the exponential curve, with the jump of size f at x = 1."""
    if not 0 <= f <= 1:
        raise InvalidParameter("f must lie in [0, 1]")
    x = np.asarray(x, dtype=float)
    y = (1.0 - f) * np.asarray(lorenz_exponential(x)) + f * (x >= 1.0)
    y = np.where(x >= 1.0, 1.0, y)
    return y if y.ndim else float(y)


def gini_exponential() -> float:
    return 0.5


def gini_two_class(f: float) -> float:
    if not 0 <= f <= 1:
        raise InvalidParameter("f must lie in [0, 1]")
    return (1.0 + f) / 2.0


def gini_family() -> float:
    return 3.0 / 8.0


# --- prices and hierarchies -------------------------------------------------

def revenue(p, T_m: float):
    """Expected revenue per customer at price p: p exp(-p/T_m)."""
    return p * np.exp(-np.asarray(p, dtype=float) / T_m)


def optimal_price(T_m: float) -> float:
    """argmax of p exp(-p/T_m), the money temperature itself."""
    if not T_m > 0:
        raise InvalidParameter("T_m must be > 0")
    return float(T_m)


@dataclass(frozen=True)
class Additive:
    d: float


@dataclass(frozen=True)
class Multiplicative:
    q: float


def lydall_levels(n_levels: int, branching: float, base_income: float, increment):
    """(incomes, head counts) per level k = 1..n_levels of a geometric hierarchy."""
    if n_levels < 2:
        raise InvalidParameter("need at least two levels")
    if not branching > 1:
        raise InvalidParameter("branching must exceed 1")
    k = np.arange(1, n_levels + 1)
    counts = np.ceil(branching ** (n_levels - k) - 1e-9).astype(np.int64)
    if isinstance(increment, Additive):
        incomes = base_income + k * increment.d
    elif isinstance(increment, Multiplicative):
        incomes = base_income * increment.q ** k
    else:
        raise InvalidParameter("increment must be Additive or Multiplicative")
    return incomes.astype(float), counts


def lydall_generate(n_levels: int, branching: float, base_income: float, increment) -> np.ndarray:
    incomes, counts = lydall_levels(n_levels, branching, base_income, increment)
    return np.repeat(incomes, counts)


LAWS = {
    "exp": Exponential,
    "gamma": Gamma,
    "bm": InverseGammaBM,
    "arctan": ArctanInterpolating,
    "family": FamilyIncome,
}
