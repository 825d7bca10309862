"""Firms as many-body money transfers.

A firm borrows capital K, pays wages W to L workers, sells Q units at the
demand price R(Q) = v/Q**eta and repays (1 + h) K.  The production function
is Cobb-Douglas, Q = L**chi * K**(1 - chi).  Profit is maximized over (L, K).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InvalidSize, NoInteriorOptimum
from .population import Population
from .rules import FirmParams


def profit(p: FirmParams, L, K):
    """F = v * Q**(1 - eta) - L W - h K."""
    q = np.power(L, p.chi) * np.power(K, 1 - p.chi)
    return p.v * np.power(q, 1 - p.eta) - L * p.W - p.h * K


def profit_gradient(p: FirmParams, L: float, K: float) -> tuple[float, float]:
    a = p.chi * (1 - p.eta)
    b = (1 - p.chi) * (1 - p.eta)
    revenue = p.v * L**a * K**b
    return a * revenue / L - p.W, b * revenue / K - p.h


def _profile_optimum(p: FirmParams) -> tuple[float, float]:
    # Maximize over log L with K set to its conditional optimum.
    a = p.chi * (1 - p.eta)
    b = (1 - p.chi) * (1 - p.eta)

    def k_of(L):
        return (b * p.v * L**a / p.h) ** (1.0 / (1.0 - b))

    res = minimize_scalar(lambda x: -profit(p, math.exp(x), k_of(math.exp(x))),
                          bounds=(-30.0, math.log(p.L_max)), method="bounded",
                          options={"xatol": 1e-12})
    L = math.exp(res.x)
    return L, k_of(L)


def optimize_firm(p: FirmParams, method: str = "closed") -> tuple[float, float, float]:
    """Profit-maximizing capital, labour and profit ``(K*, L*, F*)``.

    With exponents a = chi(1-eta), b = (1-chi)(1-eta) the first-order
    conditions give revenue R = [v (a/W)**a (b/h)**b]**(1/eta), then
    L* = a R / W, K* = b R / h and F* = eta R.  ``method="profile"`` solves
    the same problem numerically on the concave one-dimensional profile.
    """
    s = p.returns_to_scale
    if not s < 1:
        raise NoInteriorOptimum("returns to scale must be decreasing")
    a = p.chi * (1 - p.eta)
    b = (1 - p.chi) * (1 - p.eta)
    if method == "closed":
        log_r = (math.log(p.v) + a * math.log(a / p.W) + b * math.log(b / p.h)) / (1 - s)
        revenue = math.exp(log_r)
        L, K = a * revenue / p.W, b * revenue / p.h
    elif method == "profile":
        L, K = _profile_optimum(p)
    else:
        raise ValueError(f"unknown method {method!r}")
    if not (0 < L < p.L_max and 0 < K < p.K_max):
        raise NoInteriorOptimum(f"optimum (L={L:.4g}, K={K:.4g}) outside search bounds")
    return K, L, float(profit(p, L, K))


@dataclass(frozen=True)
class FirmPlan:
    capital: float
    workers: int
    units: int
    price: float
    wage: float
    interest: float

    @classmethod
    def from_params(cls, p: FirmParams) -> "FirmPlan":
        K, L, _ = optimize_firm(p)
        q = L**p.chi * K ** (1 - p.chi)
        return cls(capital=K, workers=math.ceil(L), units=math.floor(q),
                   price=p.v / q**p.eta, wage=p.W, interest=p.h)

    @property
    def participants(self) -> int:
        return self.workers + self.units + 2


def firm_round(pop: Population, p: FirmParams | FirmPlan, rng: np.random.Generator,
               max_redraws: int = 4) -> bool:
    """Run one firm round in place; returns False if the round aborted.

    Firm, lender, workers and buyers are distinct random agents.  Lenders and
    buyers who cannot pay without breaching the debt floor are replaced by
    fresh draws from the remaining agents.  If the firm cannot repay, or too
    few solvent counterparties exist, every component transfer is rolled back.
    """
    plan = p if isinstance(p, FirmPlan) else FirmPlan.from_params(p)
    n = pop.n
    if n < plan.participants:
        raise InvalidSize(f"firm round needs {plan.participants} distinct agents, have {n}")
    m = pop.balances
    floor = pop.floor
    K, W, R = plan.capital, plan.wage, plan.price
    I = plan.interest * K
    if pop.exact:
        # integer cents: every transfer amount is floored
        K, W, R, I = (math.floor(v) for v in (K, W, R, I))

    order = rng.permutation(n)
    firm = order[0]
    rest = order[1:]

    lenders = rest[m[rest] - K >= floor]
    if lenders.size == 0:
        return False
    lender = lenders[0]
    rest = rest[rest != lender]
    workers = rest[:plan.workers]
    rest = rest[plan.workers:]
    # Buyers: the first solvent candidates among the remaining agents,
    # scanning at most (1 + max_redraws) * units candidates.
    cand = rest[: (1 + max_redraws) * plan.units]
    buyers = cand[m[cand] - R >= floor][: plan.units]
    if buyers.size < plan.units:
        return False

    firm_after = m[firm] + K - W * workers.size + R * buyers.size - K - I
    wage_ok = m[firm] + K - W * workers.size >= floor
    if not (wage_ok and firm_after >= floor):
        return False

    m[lender] += I
    m[workers] += W
    m[buyers] -= R
    m[firm] = firm_after
    return True
