import math

import numpy as np
import pytest
from scipy import stats

import oracles
from moneystat import EmptyInput, InsufficientTail, InvalidParameter, ZeroTotal
from moneystat.empirics import (Edges, EqualWidth, Log, ccdf_slope, dequantize, entropy,
                                fit_exponential, fit_exponential_loglinear,
                                fit_exponential_window, fit_gamma_moments, fit_inverse_gamma_bm,
                                fit_low_exponent, fit_pareto_hill, fit_shifted_exponential,
                                gini_empirical, histogram, ks_critical, ks_statistic,
                                ks_tail_statistic, law_bin_entropy, ln_multiplicity,
                                lorenz_empirical, lorenz_from_table)
from moneystat.laws import Exponential, Gamma, InverseGammaBM, lorenz_exponential


# --- histogram -----------------------------------------------------------------------

def test_single_bin():
    assert histogram([1, 1, 1], EqualWidth(1)).counts.tolist() == [3]


def test_explicit_edges_half_open():
    h = histogram([0.5, 1.5], Edges((0, 1, 2)))
    assert h.counts.tolist() == [1, 1]


def test_last_bin_closed_and_outside_dropped():
    h = histogram([0.0, 1.0, 2.0, 2.5, -1.0], Edges((0, 1, 2)))
    assert h.counts.tolist() == [1, 2]
    assert h.dropped == 2


def test_histogram_empty():
    with pytest.raises(EmptyInput):
        histogram([], EqualWidth(3))


def test_histogram_bad_edges():
    with pytest.raises(InvalidParameter):
        histogram([1.0], Edges((0, 0, 1)))


def test_log_bins_match_exponential_density(rng):
    x = rng.exponential(1.0, 10**6)
    h = histogram(x, Log(40))
    p_law = np.diff(-np.exp(-h.edges))
    expected = p_law * x.size
    sigma = np.sqrt(expected * (1 - p_law))
    big = expected > 25
    assert np.all(np.abs(h.counts[big] - expected[big]) < 3.5 * sigma[big])
    assert big.sum() > 20


def test_probabilities_sum_to_one(rng):
    h = histogram(rng.normal(size=1000), EqualWidth(17))
    assert h.probabilities.sum() == pytest.approx(1.0, rel=1e-15)
    assert h.n == 1000


# --- entropy -----------------------------------------------------------------------------

def test_entropy_all_in_one_bin():
    assert entropy(histogram([5.0] * 10, EqualWidth(1))) == 0.0


@pytest.mark.parametrize("k", [2, 5, 64])
def test_entropy_uniform(k):
    h = histogram(np.arange(k) + 0.5, Edges(tuple(range(k + 1))))
    assert entropy(h) == pytest.approx(math.log(k), rel=1e-14)


@pytest.mark.parametrize("counts", [[3, 2, 1], [50, 30, 20, 10, 5, 3, 1], [170], [1] * 170, [85, 85]])
def test_exact_multiplicity_vs_entropy(counts):
    n = sum(counts)
    ln_w = ln_multiplicity(counts)
    assert ln_w == pytest.approx(oracles.ln_multiplicity(counts), abs=1e-9)
    ns = n * oracles.entropy_per_particle(counts)
    assert abs(ln_w - ns) <= oracles.stirling_bound(counts)


def test_law_bin_entropy_of_exponential():
    edges = np.append(np.arange(0, 31) * 1.0, np.inf)
    p = np.diff(np.append(1 - np.exp(-np.arange(0, 31) * 1.0), 1.0))
    assert law_bin_entropy(Exponential(1.0), edges) == pytest.approx(-np.sum(p * np.log(p)), rel=1e-12)


# --- Lorenz and Gini -----------------------------------------------------------------------

def test_gini_equal():
    assert gini_empirical([3.0] * 10) == pytest.approx(0.0, abs=1e-15)


def test_gini_one_holds_everything():
    x = np.zeros(100)
    x[7] = 5.0
    assert gini_empirical(x) == pytest.approx(0.99, abs=1e-14)


def test_gini_exponential_samples(rng):
    assert gini_empirical(rng.exponential(1.0, 10**6)) == pytest.approx(0.5, abs=0.01)


def test_gini_family_samples(rng):
    assert gini_empirical(rng.gamma(2.0, 1.0, 10**6)) == pytest.approx(0.375, abs=0.01)


def test_gini_matches_pairwise_oracle(rng):
    x = rng.lognormal(0, 1, 300)
    assert gini_empirical(x) == pytest.approx(oracles.gini_pairwise_bruteforce(x), rel=1e-12)


def test_gini_is_one_minus_twice_area(rng):
    x = rng.exponential(2.0, 5000)
    assert gini_empirical(x) == pytest.approx(1 - 2 * lorenz_empirical(x).area(), abs=1e-12)


def test_lorenz_converges_to_exponential(rng):
    lc = lorenz_empirical(rng.exponential(1.0, 10**6))
    assert np.max(np.abs(lc.y - lorenz_exponential(lc.x))) < 0.01


def test_lorenz_endpoints_and_convexity(rng):
    lc = lorenz_empirical(rng.exponential(1.0, 1000))
    assert (lc.x[0], lc.y[0], lc.x[-1], lc.y[-1]) == (0.0, 0.0, 1.0, 1.0)
    assert np.all(np.diff(lc.y, 2) >= -1e-15)


def test_lorenz_errors():
    with pytest.raises(ZeroTotal):
        lorenz_empirical([0.0, 0.0])
    with pytest.raises(InvalidParameter):
        lorenz_empirical([-1.0, 2.0])
    with pytest.raises(EmptyInput):
        lorenz_empirical([])
    with pytest.raises(InvalidParameter):
        gini_empirical([1.0])


def test_lorenz_from_exponential_table_tracks_formula():
    T = 40_000.0
    lb = np.arange(0, 400_001, 10_000.0)
    cc = 1e6 * np.exp(-lb / T)
    lc = lorenz_from_table(lb, cc)
    assert np.max(np.abs(lc.y - lorenz_exponential(lc.x))) < 0.02


# --- estimators ---------------------------------------------------------------------------------

def test_fit_exponential(rng):
    assert fit_exponential(rng.exponential(1000, 10**5)) == pytest.approx(1000, rel=0.02)


def test_fit_exponential_translation_covariant(rng):
    x = rng.exponential(3.0, 1000)
    s = 17.5
    assert fit_exponential(x + s, floor=s) == pytest.approx(fit_exponential(x), rel=1e-12)
    floor, T = fit_shifted_exponential(x + s)
    assert floor == pytest.approx(x.min() + s)


def test_fit_exponential_empty():
    with pytest.raises(EmptyInput):
        fit_exponential([1.0, 2.0], floor=5)


def test_fit_gamma_moments(rng):
    beta, T = fit_gamma_moments(rng.gamma(4.0, 1.0, 10**6))
    assert beta == pytest.approx(3.0, abs=0.1)
    assert T == pytest.approx(1.0, rel=0.02)


def test_fit_pareto_hill(rng):
    xmin = 2.0
    tail = xmin * (1 - rng.random(10**5)) ** (-1 / 1.9)
    assert fit_pareto_hill(tail, xmin) == pytest.approx(1.9, abs=0.05)


def test_fit_pareto_hill_too_few(rng):
    with pytest.raises(InsufficientTail):
        fit_pareto_hill(np.arange(1.0, 40.0), 1.0)


def test_fit_low_exponent_power_law(rng):
    # density ~ x^0.7 on (0, 2]
    x = 2.0 * rng.random(10**5) ** (1 / 1.7)
    assert fit_low_exponent(x, 2.0) == pytest.approx(0.7, abs=0.02)
    assert fit_low_exponent(x + 3.0, 2.0, floor=3.0) == pytest.approx(0.7, abs=0.02)


def test_fit_low_exponent_gamma(rng):
    # the exp(-m/T) factor lowers the estimate by about cut / (2T)
    x = Gamma(0.7, 1.0).sample(rng, 4 * 10**6)
    assert fit_low_exponent(x, 0.05) == pytest.approx(0.7, abs=0.06)
    with pytest.raises(EmptyInput):
        fit_low_exponent(x, 1e-9)


def test_fit_exponential_window_recovers_T(rng):
    x = rng.exponential(5.0, 10**5)
    assert fit_exponential_window(x, 0.0, 8.0) == pytest.approx(5.0, rel=0.03)
    with pytest.raises(InvalidParameter):
        fit_exponential_window(rng.uniform(0, 1, 100), 0.0, 0.5)


def test_loglinear_lattice_correction(rng):
    # geometric law on a lattice of spacing 50 with mean excess 1000
    d, T = 50.0, 1000.0
    q = T / (T + d)
    x = d * rng.geometric(1 - q, 10**6).astype(float) - d
    assert x.mean() == pytest.approx(T, rel=0.01)
    assert fit_exponential_loglinear(x, lattice=d) == pytest.approx(T, rel=0.01)
    # without the correction the continuous slope is biased by about d/2
    assert fit_exponential_loglinear(x) > T * 1.015


def test_dequantize_removes_lattice_ks(rng):
    d = 50.0
    x = d * rng.geometric(-math.expm1(-d / 1000.0), 10**5).astype(float) - d
    assert ks_statistic(x, Exponential(1000)) > ks_critical(x.size)
    assert ks_statistic(dequantize(x, d, rng), Exponential(1000)) < ks_critical(x.size)


def test_ccdf_slope(rng):
    x = (1 - rng.random(10**6)) ** (-1.0)
    assert ccdf_slope(x, 1, 10**1.5) == pytest.approx(1.0, abs=0.05)


def test_fit_inverse_gamma_bm(rng):
    x = InverseGammaBM(2.0).sample(rng, 10**5)
    assert fit_inverse_gamma_bm(x) == pytest.approx(2.0, rel=0.05)


# --- KS ---------------------------------------------------------------------------------------------

def test_ks_matches_scipy(rng):
    x = rng.exponential(2.0, 500)
    assert ks_statistic(x, Exponential(2.0)) == pytest.approx(stats.kstest(x, "expon", args=(0, 2.0)).statistic, rel=1e-12)
    assert ks_statistic(x, Exponential(2.0)) == pytest.approx(oracles.ks_distance(x, lambda v: 1 - math.exp(-v / 2)), rel=1e-12)


def test_ks_null_calibration(rng):
    n = 1000
    hits = sum(ks_statistic(rng.exponential(1.0, n), Exponential(1.0)) < 1.63 / math.sqrt(n)
               for _ in range(200))
    assert hits >= 190


def test_ks_detects_misfit(rng):
    x = rng.exponential(1.0, 2000)
    assert ks_statistic(x, Gamma(3.0, 1.0)) > ks_critical(2000)


def test_ks_single_sample_at_median():
    assert ks_statistic([1000 * math.log(2)], Exponential(1000)) == pytest.approx(0.5, abs=1e-12)


def test_ks_critical_values():
    assert ks_critical(10_000, 0.01) == pytest.approx(1.6276 / 100, rel=1e-4)
    assert ks_critical(10_000, 0.05) == pytest.approx(1.3581 / 100, rel=1e-4)


def test_ks_tail_statistic(rng):
    x = InverseGammaBM(2.0).sample(rng, 20_000)
    d, n = ks_tail_statistic(x, InverseGammaBM(2.0), 2.0)
    assert n > 500
    assert d < ks_critical(n)
    d_bad, _ = ks_tail_statistic(x, InverseGammaBM(6.0), 2.0)
    assert d_bad > ks_critical(n)
