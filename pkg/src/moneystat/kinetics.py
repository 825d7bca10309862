"""Pairwise money exchange: single transfers, seeded runs and diagnostics."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels as K
from .empirics import entropy, histogram
from .errors import InvalidAgent, InvalidParameter, InvalidSize
from .firm import FirmPlan, firm_round
from .population import Population, effective_temperature, new_population, total_money
from .rules import FirmRound, bind, kernel_args, needs_real

BLOCK = 1 << 16


class TransferOutcome(enum.Enum):
    APPLIED = "applied"
    REJECTED = "rejected"


def pair_transfer(pop: Population, payer: int, payee: int, delta) -> TransferOutcome:
    """Move ``delta`` from ``payer`` to ``payee`` unless it breaches the debt floor."""
    n = pop.n
    if not (0 <= payer < n and 0 <= payee < n):
        raise InvalidAgent(f"agent index out of range for N={n}")
    if payer == payee:
        raise InvalidAgent("payer and payee must differ")
    if delta < 0:
        raise InvalidParameter("delta must be >= 0")
    if pop.exact and delta != int(delta):
        raise InvalidParameter("integer-cent population needs an integral delta")
    if pop.balances[payer] - delta < pop.floor:
        return TransferOutcome.REJECTED
    pop.balances[payer] -= delta
    pop.balances[payee] += delta
    return TransferOutcome.APPLIED


def draw_pair(rng: np.random.Generator, n: int) -> tuple[int, int]:
    """Two distinct agents, uniformly, in draw order."""
    a = int(rng.integers(n))
    b = int(rng.integers(n - 1))
    return a, b + (b >= a)


def apply_rule(pop: Population, rule, rng: np.random.Generator | None = None,
               draw: tuple[int, int, float] | None = None) -> TransferOutcome:
    """Attempt one exchange between a random pair, in place.

    ``draw=(a, b, u)`` fixes the pair (``a`` pays for payer-pays rules) and
    the uniform variate used by the random-amount and saving rules.
    """
    n = pop.n
    if n < 2:
        raise InvalidSize("an exchange needs at least two agents")
    if isinstance(rule, FirmRound):
        ok = firm_round(pop, rule.firm_params, rng)
        return TransferOutcome.APPLIED if ok else TransferOutcome.REJECTED
    if pop.exact and needs_real(rule):
        raise InvalidParameter(f"{type(rule).__name__} needs a real-valued population")
    args = kernel_args(rule, n)
    if draw is None:
        a, b = draw_pair(rng, n)
        u = float(rng.random())
    else:
        a, b, u = draw
        if a == b or not (0 <= a < n and 0 <= b < n):
            raise InvalidAgent("draw must name two distinct agents")
    work = pop.balances if not pop.exact else pop.balances.astype(np.float64)
    mean = total_money(pop) / n
    d = K.exchange_step(work, args.kind, args.param, mean, float(pop.floor), pop.exact,
                        args.lam, args.links, args.directed, a, b, u)
    if pop.exact:
        pop.balances[a] = int(work[a])
        pop.balances[b] = int(work[b])
    return TransferOutcome.APPLIED if d != 0.0 else TransferOutcome.REJECTED


class PairStream:
    """Fixed-size blocks of (a, b, u) draws consumed through a cursor.

    Blocks are drawn independently of how callers slice them, so snapshot
    schedules never change a trajectory.
    """

    def __init__(self, rng: np.random.Generator, n: int, block: int = BLOCK):
        self.rng = rng
        self.n = n
        self.block = block
        self._pos = block
        self._a = self._b = self._u = None

    def _refill(self):
        rng, n, size = self.rng, self.n, self.block
        a = rng.integers(0, n, size=size)
        b = rng.integers(0, n - 1, size=size)
        b += b >= a
        self._a, self._b, self._u = a, b, rng.random(size)
        self._pos = 0

    def take(self, k: int):
        """Yield successive (a, b, u) slices totalling ``k`` draws."""
        while k > 0:
            if self._pos == self.block:
                self._refill()
            stop = min(self.block, self._pos + k)
            sl = slice(self._pos, stop)
            yield self._a[sl], self._b[sl], self._u[sl]
            k -= stop - self._pos
            self._pos = stop


@dataclass
class SimConfig:
    n_agents: int
    rule: object
    n_steps: int
    initial_balance: float = 1000
    debt_limit: float = 0
    seed: int = 0
    snapshot_schedule: Sequence[int] = ()
    entropy_every: int | None = None
    entropy_bin_width: float | None = None

    def __post_init__(self):
        if self.n_agents < 2:
            raise InvalidSize("a run needs at least two agents")
        if self.n_steps < 1:
            raise InvalidParameter("n_steps must be positive")
        if not 0 <= self.seed < 2**64:
            raise InvalidParameter("seed must be a 64-bit unsigned integer")
        sched = list(self.snapshot_schedule)
        if any(b <= a for a, b in zip(sched, sched[1:])):
            raise InvalidParameter("snapshot steps must be strictly increasing")
        if sched and (sched[0] < 0 or sched[-1] > self.n_steps):
            raise InvalidParameter("snapshot steps must lie in [0, n_steps]")
        self.snapshot_schedule = tuple(int(s) for s in sched)


@dataclass
class Snapshot:
    step: int
    balances: np.ndarray


@dataclass
class KineticsResult:
    config: SimConfig
    rule: object
    snapshots: list
    entropy_steps: np.ndarray
    entropy: np.ndarray
    bin_edges: np.ndarray
    rejected: int
    final: Population
    firm_rounds: int = 0
    firm_aborts: int = 0

    def stationary_samples(self) -> np.ndarray:
        """Pool snapshot balances taken in the second half of the run."""
        half = self.config.n_steps / 2
        parts = [s.balances for s in self.snapshots if s.step >= half]
        if not parts:
            parts = [self.final.balances]
        return np.concatenate(parts)


def entropy_edges(pop: Population, width: float | None = None, span: float = 30.0) -> np.ndarray:
    """Fixed binning from the debt floor to ``span`` temperatures, then overflow."""
    t = effective_temperature(pop)
    if width is None:
        width = t / 5.0
    k = max(2, int(math.ceil(span * t / width)))
    edges = pop.floor + width * np.arange(k + 1)
    return np.append(edges, np.inf)


def _periodic(every: int, n_steps: int) -> list[int]:
    return list(range(every, n_steps + 1, every))


def run_kinetics(config: SimConfig) -> KineticsResult:
    """Seeded Monte Carlo run of one exchange rule.

    Snapshots are taken at the scheduled steps; the entropy of a fixed
    binning is recorded every ``entropy_every`` steps (default: N steps, or
    10 rounds for a standalone firm run).
    """
    rng = np.random.default_rng(config.seed)
    n = config.n_agents
    rule = bind(config.rule, n, rng)
    pop = new_population(n, config.initial_balance, config.debt_limit)
    if needs_real(rule):
        pop = pop.as_real()
    exact = pop.exact
    work = pop.balances.astype(np.float64)
    floor = float(pop.floor)
    mean = total_money(pop) / n
    edges = entropy_edges(pop, config.entropy_bin_width)

    firm = rule if isinstance(rule, FirmRound) else None
    base = firm.base if firm is not None else rule
    plan = FirmPlan.from_params(firm.firm_params) if firm is not None else None
    if plan is not None and n < plan.participants:
        raise InvalidSize(f"firm rounds need {plan.participants} agents")
    args = kernel_args(base, n) if base is not None else None
    no_rec = np.empty(0)
    stream = PairStream(rng, n)

    every = config.entropy_every or (n if base is not None else 10)
    marks = sorted(set(_periodic(every, config.n_steps)) | set(config.snapshot_schedule)
                   | {config.n_steps})
    snaps_wanted = set(config.snapshot_schedule)
    ent_wanted = set(_periodic(every, config.n_steps))

    snapshots, ent_steps, ent_vals = [], [0], [entropy(histogram(work, edges))]
    if 0 in snaps_wanted:
        snapshots.append(Snapshot(0, _export(work, exact)))
    rejected = firm_rounds = firm_aborts = 0
    pop_view = Population(work, float(config.debt_limit))
    step = 0
    for mark in marks:
        todo = mark - step
        if base is None:
            for _ in range(todo):
                firm_rounds += 1
                firm_aborts += not firm_round(pop_view, plan, rng)
        else:
            while todo > 0:
                # one firm round after every N pairwise steps when combined
                chunk = todo if firm is None else min(todo, n - (step % n))
                for ia, ib, u in stream.take(chunk):
                    rejected += K.run_pairwise(work, args.kind, args.param, mean, floor, exact,
                                               args.lam, args.links, args.directed,
                                               ia, ib, u, no_rec, no_rec, no_rec)
                step += chunk
                todo -= chunk
                if firm is not None and step % n == 0:
                    firm_rounds += 1
                    firm_aborts += not firm_round(pop_view, plan, rng)
        step = mark
        if mark in ent_wanted:
            ent_steps.append(mark)
            ent_vals.append(entropy(histogram(work, edges)))
        if mark in snaps_wanted:
            snapshots.append(Snapshot(mark, _export(work, exact)))

    final = Population(_export(work, exact), config.debt_limit)
    return KineticsResult(config, rule, snapshots, np.array(ent_steps), np.array(ent_vals),
                          edges, rejected, final, firm_rounds, firm_aborts)


def _export(work: np.ndarray, exact: bool) -> np.ndarray:
    if exact:
        return work.astype(np.int64)
    return work.copy()


def smoothed_entropy(result: KineticsResult, window: int = 5) -> np.ndarray:
    """Non-overlapping block means of the entropy trajectory."""
    s = result.entropy
    k = s.size // window
    return s[: k * window].reshape(k, window).mean(axis=1)


# --- reserve ratio -------------------------------------------------------

@dataclass
class ReserveRun:
    population: Population
    money_base: float
    reserve_ratio: float
    debt: float
    debt_cap: float
    pooled: np.ndarray

    def temperatures(self) -> "TwoTemperatures":
        return branch_temperatures(self.pooled)


@dataclass(frozen=True)
class TwoTemperatures:
    t_plus: float
    t_minus: float
    slope_plus: float
    slope_minus: float
    negative_fraction: float

    @property
    def ratio(self) -> float:
        return self.t_minus / self.t_plus

    @property
    def slope_ratio(self) -> float:
        return self.slope_minus / self.slope_plus


def branch_temperatures(balances) -> TwoTemperatures:
    """Money temperatures of the positive and negative branches.

    ``t_plus``/``t_minus`` are the money of each sign per agent
    (M0/rN and M0(1-r)/rN at full debt).  ``slope_*`` are the exponential
    decay scales fitted to each branch alone (conditional means).
    """
    m = np.asarray(balances, dtype=float)
    n = m.size
    pos = m[m > 0]
    neg = -m[m < 0]
    return TwoTemperatures(
        t_plus=float(pos.sum() / n),
        t_minus=float(neg.sum() / n),
        slope_plus=float(pos.mean()) if pos.size else 0.0,
        slope_minus=float(neg.mean()) if neg.size else 0.0,
        negative_fraction=neg.size / n,
    )


def run_reserve_ratio(n_agents: int, money_base: float, r: float, steps: int, seed: int,
                      delta: float | None = None, n_samples: int = 20) -> ReserveRun:
    """Fixed-amount exchange with lending capped at D = M0/r - M0.

    A payer lacking ``delta`` borrows the shortfall from a single bank ledger
    while aggregate debt stays within D; incoming money repays debt first.
    Loans carry no interest.  ``n_samples`` snapshots from the second half of
    the run are pooled into ``pooled``.
    """
    if not 0 < r <= 1:
        raise InvalidParameter("reserve ratio must lie in (0, 1]")
    if n_agents < 2:
        raise InvalidSize("need at least two agents")
    rng = np.random.default_rng(seed)
    m = np.full(n_agents, money_base / n_agents, dtype=np.float64)
    if delta is None:
        delta = money_base / n_agents / 100.0
    cap = money_base / r - money_base
    debt = 0.0
    stream = PairStream(rng, n_agents)
    half = steps // 2
    debt = _reserve_steps(m, delta, cap, debt, stream, half)
    pooled = []
    per = max(1, (steps - half) // n_samples)
    done = half
    while done < steps:
        k = min(per, steps - done)
        debt = _reserve_steps(m, delta, cap, debt, stream, k)
        done += k
        pooled.append(m.copy())
    pop = Population(m.copy(), debt_limit=float(max(0.0, -m.min())))
    return ReserveRun(pop, money_base, r, float(debt), cap, np.concatenate(pooled))


def _reserve_steps(m, delta, cap, debt, stream, k):
    for ia, ib, _ in stream.take(k):
        debt = K.run_reserve(m, float(delta), float(cap), debt, ia, ib)
    return debt


# --- transition symmetry --------------------------------------------------

@dataclass
class TransitionSymmetryReport:
    bin_edges: np.ndarray
    cells: np.ndarray          # rows of (i, j, i2, j2): payer, payee bins before and after
    forward_count: np.ndarray
    reverse_count: np.ndarray
    forward_rate: np.ndarray
    reverse_rate: np.ndarray
    z: np.ndarray
    excluded: int
    max_abs_z: float
    global_z: float
    max_rel_diff: float

    @property
    def consistent_with_zero(self) -> bool:
        return self.global_z <= 3.0

    @property
    def violated(self) -> bool:
        return self.max_abs_z >= 5.0


def measure_transition_symmetry(rule, n_agents: int = 500, initial_balance: float = 1000.0,
                                n_samples: int = 2_000_000, bin_width: float | None = None,
                                burn_in: int | None = None, seed: int = 0,
                                lo: float | None = None, hi: float | None = None,
                                min_count: int = 100) -> TransitionSymmetryReport:
    """Compare binned forward and reversed transitions in the stationary state.

    A forward cell is ``[i, j] -> [i2, j2]`` (payer bin, payee bin, before
    and after); its reverse is ``[j2, i2] -> [j, i]``.  Detailed balance
    says the two stationary fluxes (transition counts) agree, whatever the
    binning; ``z`` compares them under a Poisson model.  Rates, the counts
    per opportunity for a bin-i agent to pay a bin-j agent, are reported
    alongside.  Cell pairs with fewer than ``min_count`` transitions are
    excluded.
    """
    rng = np.random.default_rng(seed)
    rule = bind(rule, n_agents, rng)
    args = kernel_args(rule, n_agents)
    m = np.full(n_agents, float(initial_balance))
    mean = float(initial_balance)
    if burn_in is None:
        burn_in = 2000 * n_agents
    no_rec = np.empty(0)
    stream = PairStream(rng, n_agents)
    for ia, ib, u in stream.take(burn_in):
        K.run_pairwise(m, args.kind, args.param, mean, 0.0, False, args.lam, args.links,
                       args.directed, ia, ib, u, no_rec, no_rec, no_rec)
    ra = np.empty(n_samples)
    rb = np.empty(n_samples)
    rf = np.empty(n_samples)
    pos = 0
    for ia, ib, u in stream.take(n_samples):
        k = ia.size
        K.run_pairwise(m, args.kind, args.param, mean, 0.0, False, args.lam, args.links,
                       args.directed, ia, ib, u, ra[pos:pos + k], rb[pos:pos + k], rf[pos:pos + k])
        pos += k

    if bin_width is None:
        bin_width = initial_balance / 4.0
    lo = 0.0 if lo is None else lo
    hi = 4.0 * initial_balance if hi is None else hi
    edges = np.arange(lo, hi + 0.5 * bin_width, bin_width)
    nb = edges.size - 1

    def bins(x):
        idx = np.floor((x - lo) / bin_width).astype(np.int64)
        idx[(x < lo) | (x >= edges[-1])] = -1
        return idx

    ia_, ib_ = bins(ra), bins(rb)
    ok = (ia_ >= 0) & (ib_ >= 0)
    opp = np.zeros((nb, nb))
    np.add.at(opp, (ia_[ok], ib_[ok]), 1)
    np.add.at(opp, (ib_[ok], ia_[ok]), 1)

    # orient every applied transfer as payer -> payee
    moved = rf != 0
    a_pays = rf > 0
    pb = np.where(a_pays, ra, rb)
    qb = np.where(a_pays, rb, ra)
    d = np.abs(rf)
    i, j = bins(pb), bins(qb)
    i2, j2 = bins(pb - d), bins(qb + d)
    keep = moved & (i >= 0) & (j >= 0) & (i2 >= 0) & (j2 >= 0)
    code = ((i[keep] * nb + j[keep]) * nb + i2[keep]) * nb + j2[keep]
    uniq, counts = np.unique(code, return_counts=True)
    count_of = dict(zip(uniq.tolist(), counts.tolist()))

    cells, kf, kb, fwd, rev, zs, rels = [], [], [], [], [], [], []
    excluded = 0
    seen = set()
    for c, kc in count_of.items():
        ci, rem = divmod(c, nb**3)
        cj, rem = divmod(rem, nb**2)
        ci2, cj2 = divmod(rem, nb)
        r = ((cj2 * nb + ci2) * nb + cj) * nb + ci
        if r == c or r in seen:
            continue
        seen.add(c)
        kr = count_of.get(r, 0)
        if kc + kr < min_count:
            excluded += 1
            continue
        n1, n2 = opp[ci, cj], opp[cj2, ci2]
        cells.append((ci, cj, ci2, cj2))
        kf.append(kc)
        kb.append(kr)
        fwd.append(kc / n1 if n1 else math.nan)
        rev.append(kr / n2 if n2 else math.nan)
        zs.append((kc - kr) / math.sqrt(kc + kr))
        rels.append(abs(kc - kr) / max(kc, kr))

    zs = np.array(zs)
    kcells = zs.size
    global_z = float((np.sum(zs**2) - kcells) / math.sqrt(2 * kcells)) if kcells else 0.0
    return TransitionSymmetryReport(
        bin_edges=edges, cells=np.array(cells, dtype=np.int64).reshape(-1, 4),
        forward_count=np.array(kf, dtype=np.int64), reverse_count=np.array(kb, dtype=np.int64),
        forward_rate=np.array(fwd), reverse_rate=np.array(rev), z=zs, excluded=excluded,
        max_abs_z=float(np.max(np.abs(zs))) if kcells else 0.0, global_z=global_z,
        max_rel_diff=float(max(rels)) if rels else 0.0,
    )
