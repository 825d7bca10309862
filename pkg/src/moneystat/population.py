"""Agent money balances, the conservation ledger and temperature accessors.

Balances are held either as ``int64`` (integer cents, exact conservation) or
``float64`` (needed by the multiplicative rules).  The debt limit is a single
population-wide floor: no balance may drop below ``-debt_limit``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidParameter, InvalidSize

REAL_RTOL = 1e-9


@dataclass
class Population:
    balances: np.ndarray
    debt_limit: float = 0

    def __post_init__(self):
        self.balances = np.asarray(self.balances)
        if self.balances.ndim != 1 or self.balances.size < 1:
            raise InvalidSize("population needs at least one agent")
        if self.balances.dtype.kind in "iu":
            self.balances = self.balances.astype(np.int64, copy=False)
        else:
            self.balances = self.balances.astype(np.float64, copy=False)
        if self.debt_limit < 0:
            raise InvalidParameter("debt_limit must be >= 0")
        if np.any(self.balances < -self.debt_limit):
            raise InvalidParameter("balance below the debt floor")

    @property
    def n(self) -> int:
        return int(self.balances.size)

    @property
    def exact(self) -> bool:
        """True when balances are integer cents."""
        return self.balances.dtype == np.int64

    @property
    def floor(self) -> float:
        return -self.debt_limit

    def copy(self) -> "Population":
        return Population(self.balances.copy(), self.debt_limit)

    def as_real(self) -> "Population":
        """Return a float-valued copy (no-op copy when already real)."""
        return Population(self.balances.astype(np.float64), float(self.debt_limit))


def new_population(n: int, initial_balance=1000, debt_limit=0, exact: bool | None = None) -> Population:
    """All ``n`` agents start with ``initial_balance``.

    Integer initial balances give an exact (int64) population unless
    ``exact=False``.
    """
    if n < 1:
        raise InvalidSize(f"need n >= 1 agents, got {n}")
    if initial_balance < 0:
        raise InvalidParameter("initial_balance must be >= 0")
    if exact is None:
        exact = isinstance(initial_balance, (int, np.integer)) and isinstance(
            debt_limit, (int, np.integer)
        )
    dtype = np.int64 if exact else np.float64
    return Population(np.full(n, initial_balance, dtype=dtype), debt_limit)


def total_money(pop: Population):
    if pop.exact:
        return int(pop.balances.sum())
    return float(np.sum(pop.balances))


def effective_temperature(pop: Population) -> float:
    """Debt limit plus mean balance; equals M/N when there is no debt."""
    return float(pop.debt_limit) + total_money(pop) / pop.n


def conserved(before, after, exact: bool) -> bool:
    if exact:
        return before == after
    scale = max(abs(before), 1.0)
    return abs(after - before) <= REAL_RTOL * scale


def write_snapshot(balances, path=None, column: str = "balance") -> str:
    """One value per line under a single header, in agent-index order.

    Returns the CSV text; also writes it when ``path`` is given.
    """
    arr = np.asarray(balances)
    buf = io.StringIO()
    buf.write(column + "\n")
    if arr.dtype.kind in "iu":
        buf.writelines(f"{int(v)}\n" for v in arr)
    else:
        buf.writelines(f"{v!r}\n" for v in arr.tolist())
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_snapshot(path, column: str | None = None) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise InvalidParameter(f"{path}: empty file")
        col = column or reader.fieldnames[0]
        values = [row[col] for row in reader]
    if all(v.lstrip("-").isdigit() for v in values):
        return np.array([int(v) for v in values], dtype=np.int64)
    return np.array([float(v) for v in values])
