"""Stationary solutions of one-dimensional drift-diffusion equations.

With A(r) = -<dr>/dt and B(r) = <dr^2>/2dt the zero-flux stationary density
is P(r) = c / B(r) * exp(-int^r A/B dr').
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DivergentSolution, InvalidParameter

_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


@dataclass(frozen=True)
class DriftDiffusionProfile:
    """Vectorized drift ``A`` and diffusion ``B`` on ``support``."""

    A: Callable
    B: Callable
    support: tuple = (0.0, math.inf)

    @classmethod
    def additive(cls, A0: float, B0: float):
        return cls(lambda r: np.full_like(np.asarray(r, dtype=float), A0),
                   lambda r: np.full_like(np.asarray(r, dtype=float), B0))

    @classmethod
    def multiplicative(cls, a: float, b: float, r_min: float):
        return cls(lambda r: a * np.asarray(r, dtype=float),
                   lambda r: b * np.asarray(r, dtype=float) ** 2, (r_min, math.inf))

    @classmethod
    def mixed(cls, A0: float, a: float, B0: float, b: float):
        return cls(lambda r: A0 + a * np.asarray(r, dtype=float),
                   lambda r: B0 + b * np.asarray(r, dtype=float) ** 2)


@dataclass
class StationarySolution:
    grid: np.ndarray
    density: np.ndarray
    log_density: np.ndarray
    tail_mass: float


def _ratio(profile):
    def f(x):
        return float(profile.A(np.asarray(x)) / profile.B(np.asarray(x)))
    return f


def fp_stationary(profile: DriftDiffusionProfile, grid, tail: bool = True) -> StationarySolution:
    """Normalized stationary density on ``grid``.

    The antiderivative of A/B is accumulated cell by cell with adaptive
    quadrature and cached at the grid nodes; the normalization integrates
    inside each cell with Gauss-Legendre nodes.  Nodes where B vanishes or
    A/B is singular are dropped (open-interval truncation).  With
    ``tail=True`` the mass beyond the last node is added by extending the
    local log-log slope of the density.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1000:
        raise InvalidParameter("grid needs at least 1000 points")
    if np.any(np.diff(grid) <= 0):
        raise InvalidParameter("grid must be strictly increasing")
    lo, hi = profile.support
    if grid[0] < lo or grid[-1] > hi:
        raise InvalidParameter("grid leaves the profile support")
    with np.errstate(divide="ignore", invalid="ignore"):
        b_nodes = profile.B(grid)
        ok = np.isfinite(b_nodes) & (b_nodes > 0) & np.isfinite(profile.A(grid) / b_nodes)
    if not ok[0]:
        grid, b_nodes = grid[1:], b_nodes[1:]
        ok = ok[1:]
    if not ok[-1]:
        grid, b_nodes = grid[:-1], b_nodes[:-1]
        ok = ok[:-1]
    if not ok.all():
        raise DivergentSolution("diffusion coefficient vanishes inside the grid")

    ratio = _ratio(profile)
    steps = np.empty(grid.size - 1)
    for k in range(grid.size - 1):
        steps[k] = integrate.quad(ratio, grid[k], grid[k + 1], epsabs=0.0, epsrel=1e-13, limit=200)[0]
    phi = np.concatenate([[0.0], np.cumsum(steps)])
    if not np.all(np.isfinite(phi)):
        raise DivergentSolution("A/B is not integrable on the grid")

    log_p = -phi - np.log(b_nodes)
    shift = float(np.max(log_p))

    # normalization: Gauss-Legendre in every cell, A/B re-integrated from the left node
    left, right = grid[:-1], grid[1:]
    half = 0.5 * (right - left)
    xs = left[:, None] + half[:, None] * (_GL_X[None, :] + 1.0)
    inner_half = 0.5 * (xs - left[:, None])
    inner_x = left[:, None, None] + inner_half[:, :, None] * (_GL_X[None, None, :] + 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = profile.A(inner_x) / profile.B(inner_x)
        phi_x = phi[:-1, None] + inner_half * np.tensordot(g, _GL_W, axes=([2], [0]))
        vals = np.exp(-phi_x - np.log(profile.B(xs)) - shift)
    total = float(np.sum(half * (vals @ _GL_W)))

    tail_mass = 0.0
    if tail and np.isfinite(hi):
        tail = False
    if tail:
        r1, r2 = grid[-2], grid[-1]
        slope = -(log_p[-1] - log_p[-2]) / math.log(r2 / r1) if r1 > 0 else math.inf
        if not slope > 1:
            raise DivergentSolution("density tail is not integrable (log-slope >= -1)")
        tail_mass = r2 * math.exp(log_p[-1] - shift) / (slope - 1)
    total += tail_mass
    if not (np.isfinite(total) and total > 0):
        raise DivergentSolution("stationary density is not normalizable")
    log_norm = shift + math.log(total)
    log_density = log_p - log_norm
    return StationarySolution(grid, np.exp(log_density), log_density, tail_mass / total)
