"""Compiled inner loops for the pairwise exchange rules.

All kernels consume pre-drawn random numbers (agent indices and uniforms
from a numpy ``Generator``) so a run is a pure function of its seed.  The
working array is always float64; integer-cent populations stay integral
because every amount is floored in exact mode, and float64 holds integers
exactly below 2**53.
"""
import numpy as np
from numba import njit

FIXED = 0
FRAC_AVG = 1
PAIR_SUM = 2
PROPORTIONAL = 3
SAVING = 4
RANDOM_SAVING = 5


@njit(cache=True)
def _flow(m, kind, param, mean, exact, lam, a, b, u):
    """Signed amount moving from agent ``a`` to agent ``b``."""
    if kind == FIXED:
        d = param
    elif kind == FRAC_AVG:
        d = u * mean
    elif kind == PAIR_SUM:
        d = u * 0.5 * (m[a] + m[b])
    elif kind == PROPORTIONAL:
        d = param * max(m[a], 0.0)
    elif kind == SAVING:
        total = m[a] + m[b]
        d = m[a] - (param * m[a] + u * (1.0 - param) * total)
    else:
        la = lam[a]
        lb = lam[b]
        pool = (1.0 - la) * m[a] + (1.0 - lb) * m[b]
        d = m[a] - (la * m[a] + u * pool)
    if exact:
        d = np.floor(d)
    return d


@njit(cache=True)
def exchange_step(m, kind, param, mean, floor, exact, lam, links, directed, a, b, u):
    """Attempt one exchange between agents ``a`` and ``b`` in place.

    For directed runs ``links[a, b] == 1`` means ``a`` pays ``b``; otherwise
    the roles swap.  Returns the signed flow from ``a`` to ``b`` (0.0 when
    the transaction is rejected by the debt floor).
    """
    if directed and links[a, b] == 0:
        p = b
        q = a
    else:
        p = a
        q = b
    d = _flow(m, kind, param, mean, exact, lam, p, q, u)
    new_p = m[p] - d
    new_q = m[q] + d
    if new_p < floor or new_q < floor:
        return 0.0
    m[p] = new_p
    m[q] = new_q
    if p == a:
        return d
    return -d


@njit(cache=True)
def run_pairwise(m, kind, param, mean, floor, exact, lam, links, directed,
                 ia, ib, u, rec_a, rec_b, rec_flow):
    """Run ``ia.size`` exchange attempts; returns the rejection count.

    When ``rec_flow`` has the same length as ``ia`` the pre-trade balances
    and signed flows are recorded for transition-rate estimation.
    """
    record = rec_flow.size == ia.size
    rejected = 0
    for t in range(ia.size):
        a = ia[t]
        b = ib[t]
        if record:
            rec_a[t] = m[a]
            rec_b[t] = m[b]
        d = exchange_step(m, kind, param, mean, floor, exact, lam, links, directed, a, b, u[t])
        if d == 0.0:
            rejected += 1
        if record:
            rec_flow[t] = d
    return rejected


@njit(cache=True)
def run_reserve(m, delta, debt_cap, debt, ia, ib):
    """Fixed-amount exchange with bank lending under an aggregate debt cap.

    A payer short of ``delta`` borrows the shortfall; incoming money repays
    debt first (balances are signed).  ``debt`` is the current sum of
    negative balances; the updated value is returned.
    """
    for t in range(ia.size):
        a = ia[t]
        b = ib[t]
        old = max(-m[a], 0.0) + max(-m[b], 0.0)
        na = m[a] - delta
        nb = m[b] + delta
        new = max(-na, 0.0) + max(-nb, 0.0)
        if new > old and debt + (new - old) > debt_cap * (1.0 + 1e-12):
            continue
        m[a] = na
        m[b] = nb
        debt += new - old
    return debt


@njit(cache=True)
def kesten_evolve(r, a0, a, b0, b, dt, noise):
    """One Euler-Maruyama step of dr = -(A0 + a r) dt + sqrt(2 (B0 + b r^2)) dW.

    The boundary at zero reflects.
    """
    sdt = np.sqrt(2.0 * dt)
    for i in range(r.size):
        x = r[i]
        x = x - (a0 + a * x) * dt + sdt * np.sqrt(b0 + b * x * x) * noise[i]
        if x < 0.0:
            x = -x
        r[i] = x


@njit(cache=True)
def slanina_trades(w, gamma, zeta, ia, ib, total):
    """Proportional transfers with (1 + zeta) growth of both traders.

    ``total`` is the running sum of ``w``; the array is rescaled to mean 1
    whenever the total doubles.  Returns the updated total.
    """
    n = w.size
    g = 1.0 + zeta
    for t in range(ia.size):
        a = ia[t]
        b = ib[t]
        d = gamma * w[a]
        na = (w[a] - d) * g
        nb = (w[b] + d) * g
        total += na + nb - w[a] - w[b]
        w[a] = na
        w[b] = nb
        if total > 2.0 * n:
            s = n / total
            for i in range(n):
                w[i] *= s
            total = 0.0
            for i in range(n):
                total += w[i]
    return total
