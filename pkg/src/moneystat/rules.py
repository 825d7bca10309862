"""Exchange rules: which amount moves between a randomly selected pair.

Rules are immutable.  The two rules with per-run random structure
(:class:`RandomSavingPropensity` and :class:`DirectedLinks`) must be bound to
a population size with ``draw(n, rng)`` before stepping; ``run_kinetics``
does this automatically.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from . import _kernels as K
from .errors import InvalidParameter


@dataclass(frozen=True)
class FixedAmount:
    delta: float = 1

    def __post_init__(self):
        if not self.delta > 0:
            raise InvalidParameter("FixedAmount.delta must be > 0")


@dataclass(frozen=True)
class RandomFractionOfAverage:
    """Amount is nu * M/N with nu uniform on [0, 1]."""


@dataclass(frozen=True)
class RandomFractionOfPairSum:
    """Amount is nu * (m_i + m_j) / 2 with nu uniform on [0, 1]."""


@dataclass(frozen=True)
class Proportional:
    gamma: float

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise InvalidParameter("Proportional.gamma must lie in (0, 1)")


@dataclass(frozen=True)
class SavingPropensity:
    lam: float

    def __post_init__(self):
        if not 0 <= self.lam < 1:
            raise InvalidParameter("SavingPropensity.lam must lie in [0, 1)")


@dataclass(frozen=True)
class RandomSavingPropensity:
    """Per-agent saving propensities, uniform on [0, 1), fixed for the run."""

    lambdas: tuple | None = field(default=None, compare=False, repr=False)

    def draw(self, n: int, rng: np.random.Generator) -> "RandomSavingPropensity":
        return replace(self, lambdas=tuple(rng.random(n).tolist()))


@dataclass(frozen=True)
class DirectedLinks:
    """Payment direction fixed in advance for every pair of agents."""

    base: object = field(default_factory=FixedAmount)
    links: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.base, (FixedAmount, RandomFractionOfAverage,
                                      RandomFractionOfPairSum, Proportional)):
            raise InvalidParameter("DirectedLinks base must be a payer-pays rule")

    def draw(self, n: int, rng: np.random.Generator) -> "DirectedLinks":
        upper = np.triu(rng.integers(0, 2, size=(n, n), dtype=np.uint8), 1)
        links = upper + np.tril(1 - upper.T, -1).astype(np.uint8)
        np.fill_diagonal(links, 0)
        return replace(self, links=links)


@dataclass(frozen=True)
class FirmParams:
    """Demand curve R(Q) = v / Q**eta, production Q = L**chi * K**(1-chi)."""

    v: float
    eta: float
    chi: float
    h: float
    W: float
    L_max: float = 1e6
    K_max: float = 1e9

    def __post_init__(self):
        if not (self.v > 0 and 0 < self.eta < 1 and 0 < self.chi < 1
                and self.h > 0 and self.W > 0):
            raise InvalidParameter("FirmParams out of range")

    @property
    def returns_to_scale(self) -> float:
        return self.chi * (1 - self.eta) + (1 - self.chi) * (1 - self.eta)


@dataclass(frozen=True)
class FirmRound:
    """Firm rounds; with a ``base`` rule one round runs every N pair steps."""

    firm_params: FirmParams
    base: object | None = None


ExchangeRule = Union[
    FixedAmount, RandomFractionOfAverage, RandomFractionOfPairSum, Proportional,
    SavingPropensity, RandomSavingPropensity, DirectedLinks, FirmRound,
]

_NO_LAM = np.zeros(1)
_NO_LINKS = np.zeros((1, 1), dtype=np.uint8)


def needs_real(rule) -> bool:
    if isinstance(rule, DirectedLinks):
        return needs_real(rule.base)
    if isinstance(rule, FirmRound):
        return True
    if isinstance(rule, FixedAmount):
        return float(rule.delta) != int(rule.delta)
    return isinstance(rule, (Proportional, SavingPropensity, RandomSavingPropensity))


def bind(rule, n: int, rng: np.random.Generator):
    """Draw any per-run structure the rule needs for ``n`` agents."""
    if isinstance(rule, RandomSavingPropensity) and rule.lambdas is None:
        return rule.draw(n, rng)
    if isinstance(rule, DirectedLinks) and rule.links is None:
        return rule.draw(n, rng)
    if isinstance(rule, FirmRound) and rule.base is not None:
        return replace(rule, base=bind(rule.base, n, rng))
    return rule


@dataclass(frozen=True)
class KernelArgs:
    kind: int
    param: float
    lam: np.ndarray
    links: np.ndarray
    directed: bool


def kernel_args(rule, n: int) -> KernelArgs:
    directed = isinstance(rule, DirectedLinks)
    links = _NO_LINKS
    if directed:
        if rule.links is None:
            raise InvalidParameter("DirectedLinks must be bound with draw(n, rng)")
        if rule.links.shape != (n, n):
            raise InvalidParameter("link matrix does not match population size")
        links = rule.links
        rule = rule.base
    lam = _NO_LAM
    if isinstance(rule, FixedAmount):
        kind, param = K.FIXED, float(rule.delta)
    elif isinstance(rule, RandomFractionOfAverage):
        kind, param = K.FRAC_AVG, 0.0
    elif isinstance(rule, RandomFractionOfPairSum):
        kind, param = K.PAIR_SUM, 0.0
    elif isinstance(rule, Proportional):
        kind, param = K.PROPORTIONAL, float(rule.gamma)
    elif isinstance(rule, SavingPropensity):
        kind, param = K.SAVING, float(rule.lam)
    elif isinstance(rule, RandomSavingPropensity):
        if rule.lambdas is None:
            raise InvalidParameter("RandomSavingPropensity must be bound with draw(n, rng)")
        if len(rule.lambdas) != n:
            raise InvalidParameter("lambda vector does not match population size")
        kind, param = K.RANDOM_SAVING, 0.0
        lam = np.asarray(rule.lambdas, dtype=np.float64)
    else:
        raise InvalidParameter(f"not a pairwise rule: {rule!r}")
    return KernelArgs(kind, param, lam, links, directed)


def describe(rule) -> dict:
    """JSON-friendly echo of a rule (per-run random structure omitted)."""
    out = {"rule": type(rule).__name__}
    if isinstance(rule, FixedAmount):
        out["delta"] = rule.delta
    elif isinstance(rule, Proportional):
        out["gamma"] = rule.gamma
    elif isinstance(rule, SavingPropensity):
        out["lambda"] = rule.lam
    elif isinstance(rule, DirectedLinks):
        out["base"] = describe(rule.base)
    elif isinstance(rule, FirmRound):
        p = rule.firm_params
        out["firm_params"] = {k: getattr(p, k) for k in ("v", "eta", "chi", "h", "W", "L_max", "K_max")}
        out["base"] = None if rule.base is None else describe(rule.base)
    return out
