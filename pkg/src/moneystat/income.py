"""Income diffusion with additive and multiplicative noise (Kesten-type process)."""
from __future__ import annotations

import numpy as np

from . import _kernels as K
from .errors import InvalidParameter


def income_kesten_simulate(A0: float, a: float, B0: float, b: float, n_walkers: int,
                           n_steps: int, dt: float, seed: int, r_init=None) -> np.ndarray:
    """Evolve independent incomes by dr = -(A0 + a r) dt + sqrt(2 (B0 + b r^2) dt) xi.

    Euler-Maruyama with a reflecting boundary at 0.  ``a = b = 0`` is the
    purely additive process (exponential law with T = B0/A0).  Walkers start
    at ``r_init`` (default B0/A0); returns the final incomes.
    """
    if not (A0 > 0 and B0 > 0):
        raise InvalidParameter("A0 and B0 must be > 0")
    if a < 0 or b < 0:
        raise InvalidParameter("a and b must be >= 0")
    if not (dt > 0 and dt * a < 0.1):
        raise InvalidParameter("need dt > 0 and dt * a < 0.1")
    rng = np.random.default_rng(seed)
    r = np.full(n_walkers, B0 / A0) if r_init is None else np.array(r_init, dtype=float)
    noise = np.empty(n_walkers)
    for _ in range(n_steps):
        rng.standard_normal(out=noise)
        K.kesten_evolve(r, A0, a, B0, b, dt, noise)
    return r
