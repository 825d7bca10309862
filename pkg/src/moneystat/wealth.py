"""Wealth dynamics: a conserved money-and-stock market and stochastic growth models.

Wealth is money plus priced stock, w_i = m_i + p s_i.  In the market model
money and stock are conserved while the price fluctuates; in the growth
models total wealth is not conserved and the tracked quantity is relative
wealth, w_i / <w>.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import InvalidParameter, InvalidSize, NoClearing, NoDemand
from .kinetics import PairStream, draw_pair


@dataclass
class MarketState:
    money: np.ndarray
    stock: np.ndarray
    price: float = 1.0
    fractions: np.ndarray | None = None

    def __post_init__(self):
        self.money = np.asarray(self.money, dtype=float)
        self.stock = np.asarray(self.stock, dtype=float)
        if self.money.shape != self.stock.shape or self.money.ndim != 1:
            raise InvalidParameter("money and stock must be equal-length vectors")
        if np.any(self.money < 0) or np.any(self.stock < 0):
            raise InvalidParameter("holdings must be non-negative")
        if not self.price > 0:
            raise InvalidParameter("price must be > 0")

    @classmethod
    def uniform(cls, n: int, money_per_agent: float = 1.0, stock_per_agent: float = 1.0,
                price: float = 1.0) -> "MarketState":
        return cls(np.full(n, money_per_agent), np.full(n, stock_per_agent), price)

    @property
    def wealth(self) -> np.ndarray:
        return self.money + self.price * self.stock

    def wealth_at(self, price: float) -> np.ndarray:
        return self.money + price * self.stock

    @property
    def total_money(self) -> float:
        return float(self.money.sum())

    @property
    def total_stock(self) -> float:
        return float(self.stock.sum())


def clearing_price(fractions, mkt: MarketState) -> float:
    """Price at which desired holdings f_i w_i / p add up to the total stock.

    p = sum(f_i m_i) / (S - sum(f_i s_i)).
    """
    f = np.asarray(fractions, dtype=float)
    if f.shape != mkt.money.shape:
        raise InvalidParameter("one fraction per agent")
    if np.any((f < 0) | (f > 1)):
        raise InvalidParameter("fractions must lie in [0, 1]")
    demand = float(f @ mkt.money)
    kept = float(f @ mkt.stock)
    if demand <= 0:
        raise NoDemand("no agent wants to hold stock")
    supply = mkt.total_stock - kept
    if supply <= 0:
        raise NoClearing("no stock is offered for sale")
    return demand / supply


def silver_round(mkt: MarketState, rng: np.random.Generator, redraw_all: bool = True,
                 max_redraws: int = 100) -> MarketState:
    """Agents draw new stock fractions, the market clears and everyone rebalances.

    With ``redraw_all=False`` a single random agent changes preference and
    the others keep their previous fraction.  Rounds that cannot clear are
    re-drawn; the number of re-draws is stored in ``silver_round.redraws``.
    """
    n = mkt.money.size
    redraws = 0
    while True:
        if redraw_all or mkt.fractions is None:
            f = rng.random(n)
        else:
            f = mkt.fractions.copy()
            f[rng.integers(n)] = rng.random()
        try:
            p = clearing_price(f, mkt)
            break
        except (NoClearing, NoDemand):
            redraws += 1
            if redraws > max_redraws:
                raise
    w = mkt.wealth_at(p)
    out = MarketState(money=(1.0 - f) * w, stock=f * w / p, price=p, fractions=f)
    silver_round.redraws = redraws
    return out


silver_round.redraws = 0


def run_market(n_agents: int, n_rounds: int, seed: int, money_per_agent: float = 1.0,
               stock_per_agent: float = 1.0, redraw_all: bool = True,
               n_samples: int = 0) -> tuple[MarketState, list]:
    """Iterate market rounds from uniform holdings.

    Returns the final state and ``n_samples`` wealth snapshots spaced evenly
    over the second half of the run.
    """
    rng = np.random.default_rng(seed)
    mkt = MarketState.uniform(n_agents, money_per_agent, stock_per_agent)
    sample_at = set()
    if n_samples:
        half = n_rounds // 2
        sample_at = {half + (k + 1) * (n_rounds - half) // n_samples for k in range(n_samples)}
    samples = []
    for t in range(1, n_rounds + 1):
        mkt = silver_round(mkt, rng, redraw_all)
        if t in sample_at:
            samples.append(mkt.wealth)
    return mkt, samples


def write_market_snapshot(mkt: MarketState, path=None) -> str:
    buf = io.StringIO()
    buf.write("money,stock\n")
    for m, s in zip(mkt.money.tolist(), mkt.stock.tolist()):
        buf.write(f"{m!r},{s!r}\n")
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


# --- mean-field multiplicative model ------------------------------------------

@dataclass
class RelativeWealthState:
    w_tilde: np.ndarray
    J: float
    sigma2: float
    raw_mean: float = 1.0

    def __post_init__(self):
        self.w_tilde = np.asarray(self.w_tilde, dtype=float)
        if np.any(self.w_tilde <= 0):
            raise InvalidParameter("relative wealth must be positive")
        if self.J < 0 or not self.sigma2 >= 0:
            raise InvalidParameter("need J >= 0 and sigma2 >= 0")

    @classmethod
    def uniform(cls, n: int, J: float, sigma2: float) -> "RelativeWealthState":
        return cls(np.ones(n), J, sigma2)

    @property
    def kappa(self) -> float:
        return self.J / self.sigma2


def bm_step(state: RelativeWealthState, dt: float, rng: np.random.Generator) -> RelativeWealthState:
    """dw = J (1 - w) dt + sqrt(2 sigma2 dt) w xi, then rescale to mean 1.

    This increment form has the forward equation
    dP/dt = d/dw[J (w - 1) P] + sigma2 d^2/dw^2 [w^2 P].  Increments that
    would make a wealth non-positive are re-drawn.
    """
    if not dt > 0:
        raise InvalidParameter("dt must be > 0")
    if dt * (state.J + 2 * state.sigma2) >= 0.1:
        raise InvalidParameter("dt too large: need dt (J + 2 sigma2) < 0.1")
    w = state.w_tilde
    amp = math.sqrt(2.0 * state.sigma2 * dt)
    drift = state.J * (1.0 - w) * dt
    xi = rng.standard_normal(w.size)
    new = w + drift + amp * w * xi
    bad = new <= 0
    while bad.any():
        xi = rng.standard_normal(int(bad.sum()))
        new[bad] = w[bad] + drift[bad] + amp * w[bad] * xi
        bad = new <= 0
    raw_mean = float(new.mean())
    return RelativeWealthState(new / raw_mean, state.J, state.sigma2, raw_mean)


@dataclass
class BMRun:
    state: RelativeWealthState
    samples: list
    mean_raw: float
    mean_track: np.ndarray


def run_bm(n_agents: int, J: float, sigma2: float, dt: float, n_steps: int, seed: int,
           n_samples: int = 0) -> BMRun:
    """Iterate :func:`bm_step` from equal wealth.

    ``mean_raw`` is the time average of the pre-rescaling mean; snapshots are
    spaced evenly over the second half of the run.
    """
    rng = np.random.default_rng(seed)
    st = RelativeWealthState.uniform(n_agents, J, sigma2)
    half = n_steps // 2
    sample_at = {half + (k + 1) * (n_steps - half) // n_samples for k in range(n_samples)} if n_samples else set()
    means = np.empty(n_steps)
    samples = []
    for t in range(n_steps):
        st = bm_step(st, dt, rng)
        means[t] = st.raw_mean
        if t + 1 in sample_at:
            samples.append(st.w_tilde.copy())
    return BMRun(st, samples, float(means[half:].mean()), means)


# --- pairwise growth model -------------------------------------------------------

def slanina_step(wealths, gamma: float, zeta: float, rng: np.random.Generator,
                 draw: tuple[int, int] | None = None) -> np.ndarray:
    """One proportional transfer, both traders grow by 1 + zeta, mean rescaled to 1."""
    if not 0 < gamma < 1:
        raise InvalidParameter("gamma must lie in (0, 1)")
    if zeta < 0:
        raise InvalidParameter("zeta must be >= 0")
    w = np.array(wealths, dtype=float)
    if w.size < 2:
        raise InvalidSize("need at least two agents")
    a, b = draw if draw is not None else draw_pair(rng, w.size)
    d = gamma * w[a]
    w[a] = (w[a] - d) * (1 + zeta)
    w[b] = (w[b] + d) * (1 + zeta)
    return w * (w.size / w.sum())


def run_slanina(n_agents: int, gamma: float, zeta: float, n_steps: int, seed: int,
                n_samples: int = 0) -> tuple[np.ndarray, list]:
    """Many :func:`slanina_step` trades in compiled form; returns (final, snapshots)."""
    if not 0 < gamma < 1 or zeta < 0:
        raise InvalidParameter("need 0 < gamma < 1 and zeta >= 0")
    rng = np.random.default_rng(seed)
    w = np.ones(n_agents)
    total = float(n_agents)
    stream = PairStream(rng, n_agents)
    half = n_steps // 2
    marks = [half + (k + 1) * (n_steps - half) // n_samples for k in range(n_samples)] if n_samples else []
    samples = []
    done = 0
    for mark in marks + [n_steps]:
        for ia, ib, _ in stream.take(mark - done):
            total = K.slanina_trades(w, gamma, zeta, ia, ib, total)
        done = mark
        if mark in marks:
            samples.append(w * (n_agents / w.sum()))
    return w * (n_agents / w.sum()), samples
