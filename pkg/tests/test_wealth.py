import numpy as np
import pytest
from scipy import stats

from moneystat import InvalidParameter, NoClearing, NoDemand, Population, Proportional, apply_rule
from moneystat import _kernels as K
from moneystat.empirics import (fit_gamma_moments, fit_inverse_gamma_bm, ks_critical,
                                ks_statistic, ks_tail_statistic)
from moneystat.laws import InverseGammaBM
from moneystat.wealth import (MarketState, RelativeWealthState, bm_step, clearing_price, run_bm,
                              run_market, run_slanina, silver_round, slanina_step,
                              write_market_snapshot)


class ConstantFractions:
    """Stand-in generator whose uniforms are all equal to ``f``."""

    def __init__(self, f):
        self.f = f

    def random(self, size=None):
        return self.f if size is None else np.full(size, self.f)


# --- market --------------------------------------------------------------------------

def test_clearing_price_unit():
    mkt = MarketState.uniform(5, 2.0, 2.0)
    assert clearing_price(np.full(5, 0.5), mkt) == 1.0


def test_clearing_price_no_demand():
    with pytest.raises(NoDemand):
        clearing_price(np.zeros(3), MarketState.uniform(3))


def test_clearing_price_single_agent():
    mkt = MarketState(np.array([10.0]), np.array([5.0]))
    assert clearing_price([0.5], mkt) == 2.0


def test_clearing_price_no_supply():
    mkt = MarketState(np.array([1.0, 1.0]), np.array([1.0, 1.0]))
    with pytest.raises(NoClearing):
        clearing_price([1.0, 1.0], mkt)


def test_clearing_price_validates_fractions():
    with pytest.raises(InvalidParameter):
        clearing_price([0.5, 1.5], MarketState.uniform(2))


def test_market_state_validation():
    with pytest.raises(InvalidParameter):
        MarketState(np.array([1.0, -1.0]), np.array([1.0, 1.0]))
    with pytest.raises(InvalidParameter):
        MarketState(np.array([1.0]), np.array([1.0]), price=0.0)


def test_common_fraction_leaves_wealth_distribution_unchanged(rng):
    # unequal wealth, every agent holding money and stock in the same proportion
    size = rng.uniform(0.1, 3.0, 50)
    mkt = MarketState(2.0 * size, size)
    before = mkt.wealth
    after = silver_round(mkt, ConstantFractions(0.3))
    np.testing.assert_allclose(after.wealth / after.wealth.sum(), before / before.sum(), rtol=1e-12)
    again = silver_round(after, ConstantFractions(0.3))
    assert again.price == pytest.approx(after.price, rel=1e-12)
    np.testing.assert_allclose(again.wealth, after.wealth, rtol=1e-12)


def test_own_trade_is_wealth_neutral(rng):
    mkt = MarketState(rng.uniform(0, 2, 40), rng.uniform(0, 2, 40), price=1.3)
    new = silver_round(mkt, rng)
    np.testing.assert_allclose(new.wealth, mkt.wealth_at(new.price), rtol=1e-12)


def test_market_conservation_over_rounds(rng):
    mkt = MarketState.uniform(100, 3.0, 2.0)
    for _ in range(2000):
        mkt = silver_round(mkt, rng)
    assert mkt.total_money == pytest.approx(300.0, rel=1e-9)
    assert mkt.total_stock == pytest.approx(200.0, rel=1e-9)
    assert np.all(mkt.money >= 0) and np.all(mkt.stock >= 0)


def test_single_agent_redraw_mode(rng):
    mkt = MarketState.uniform(30)
    mkt = silver_round(mkt, rng, redraw_all=False)
    f0 = mkt.fractions.copy()
    mkt = silver_round(mkt, rng, redraw_all=False)
    assert np.sum(mkt.fractions != f0) <= 1


def test_market_wealth_is_gamma_like():
    mkt, samples = run_market(500, 20_000, 3, n_samples=10)
    beta, T = fit_gamma_moments(np.concatenate(samples))
    assert beta > 0
    assert mkt.total_money == pytest.approx(500.0, rel=1e-9)


def test_market_snapshot_csv():
    text = write_market_snapshot(MarketState(np.array([0.5, 1.0]), np.array([2.0, 0.0])))
    assert text == "money,stock\n0.5,2.0\n1.0,0.0\n"


# --- mean-field multiplicative model ----------------------------------------------------

def test_bm_step_keeps_mean_one_and_positive(rng):
    st = RelativeWealthState.uniform(1000, 1.0, 0.5)
    for _ in range(200):
        st = bm_step(st, 0.01, rng)
        assert st.w_tilde.mean() == pytest.approx(1.0, abs=1e-12)
        assert st.w_tilde.min() > 0


def test_bm_step_dt_limit(rng):
    st = RelativeWealthState.uniform(10, 1.0, 0.5)
    with pytest.raises(InvalidParameter):
        bm_step(st, 0.05, rng)
    with pytest.raises(InvalidParameter):
        bm_step(st, 0.0, rng)


def test_bm_increment_matches_definition():
    """One step equals w + J(1-w)dt + sqrt(2 s2 dt) w xi, rescaled to mean 1."""
    w = np.array([0.5, 1.0, 1.5])
    st = RelativeWealthState(w, 2.0, 0.3)
    xi = np.random.default_rng(7).standard_normal(3)
    out = bm_step(st, 0.01, np.random.default_rng(7))
    raw = w + 2.0 * (1 - w) * 0.01 + np.sqrt(2 * 0.3 * 0.01) * w * xi
    np.testing.assert_allclose(out.w_tilde, raw / raw.mean(), rtol=1e-14)
    assert out.raw_mean == pytest.approx(raw.mean(), rel=1e-14)


def test_bm_zero_noise_relaxes_to_one(rng):
    w = rng.uniform(0.2, 3.0, 500)
    st = RelativeWealthState(w / w.mean(), 1.0, 0.0)
    for _ in range(3000):
        st = bm_step(st, 0.01, rng)
    assert np.max(np.abs(st.w_tilde - 1)) < 1e-9


def test_bm_stationary_matches_inverse_gamma_on_1000_samples():
    run = run_bm(10_000, 1.0, 0.5, 0.01, 40_000, 1)
    sub = np.random.default_rng(0).choice(run.state.w_tilde, 1000, replace=False)
    assert ks_statistic(sub, InverseGammaBM(2.0)) < ks_critical(1000, 0.01)
    assert run.mean_raw == pytest.approx(1.0, abs=0.01)


def test_bm_halving_dt_keeps_stationary_law():
    a = run_bm(5000, 1.0, 0.5, 0.01, 15_000, 1).state.w_tilde
    b = run_bm(5000, 1.0, 0.5, 0.005, 30_000, 101).state.w_tilde
    assert stats.ks_2samp(a, b).pvalue > 0.01


# --- pairwise growth model ------------------------------------------------------------------

def test_slanina_without_growth_is_proportional():
    w = np.array([1.5, 0.5, 1.0])
    out = slanina_step(w, 0.2, 0.0, None, draw=(0, 1))
    pop = Population(w.copy())
    apply_rule(pop, Proportional(0.2), draw=(0, 1, 0.0))
    np.testing.assert_allclose(out, pop.balances, rtol=1e-15)


def test_slanina_renormalizes_to_n(rng):
    w = rng.uniform(0.1, 5, 20)
    w *= 20 / w.sum()
    for _ in range(100):
        w = slanina_step(w, 0.1, 0.05, rng)
    assert w.sum() == pytest.approx(20.0, rel=1e-12)


def test_slanina_step_validation(rng):
    with pytest.raises(InvalidParameter):
        slanina_step([1.0, 1.0], 1.0, 0.1, rng)
    with pytest.raises(InvalidParameter):
        slanina_step([1.0, 1.0], 0.5, -0.1, rng)


def test_slanina_kernel_matches_step(rng):
    n = 8
    ia = rng.integers(0, n, 500)
    ib = (ia + 1 + rng.integers(0, n - 1, 500)) % n
    w = np.ones(n)
    K.slanina_trades(w, 0.1, 0.02, ia, ib, float(n))
    ref = np.ones(n)
    for a, b in zip(ia, ib):
        ref = slanina_step(ref, 0.1, 0.02, None, draw=(int(a), int(b)))
    np.testing.assert_allclose(w / w.mean(), ref, rtol=1e-10)


def test_slanina_power_tail_matches_inverse_gamma_form():
    final, _ = run_slanina(1000, 0.0025, 0.05, 4 * 10**7, 3)
    assert final.sum() == pytest.approx(1000.0, rel=1e-12)
    kappa = fit_inverse_gamma_bm(final)
    d, n_tail = ks_tail_statistic(final, InverseGammaBM(kappa), 2.0)
    assert n_tail >= 50
    assert d < ks_critical(n_tail, 0.05)
    # a power-law tail, not an exponential one
    assert kappa < 3
