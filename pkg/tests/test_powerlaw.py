import math

import numpy as np
import pytest
import sympy
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import stats

from powerspec.core import make_spectrum
from powerspec.errors import (
    DegenerateSample,
    InsufficientLength,
    InvalidFit,
    MismatchedFit,
    NonPositiveEigenvalue,
    UnsupportedAlpha,
)
from powerspec.powerlaw import (
    PowerLawFit,
    critical_value,
    fit_and_test,
    ks_distance,
    ks_test,
    mle_fit,
    pareto_cdf,
    pareto_sample,
    zipf_normalizer,
    zipf_slope_regression,
)

# published critical-value table: rows K = 50 and K = 1000
CRITICAL_TABLE = {
    50: {0.2: 0.151, 0.15: 0.161, 0.1: 0.173, 0.05: 0.192, 0.01: 0.231},
    1000: {0.2: 0.0338, 0.15: 0.0360, 0.1: 0.0386, 0.05: 0.0430, 0.01: 0.0515},
}


@pytest.mark.parametrize("k", sorted(CRITICAL_TABLE))
@pytest.mark.parametrize("alpha", [0.2, 0.15, 0.1, 0.05, 0.01])
def test_critical_values_match_published_table(k, alpha):
    assert float(f"{critical_value(k, alpha):.3g}") == CRITICAL_TABLE[k][alpha]


def test_unsupported_alpha():
    with pytest.raises(UnsupportedAlpha):
        critical_value(100, 0.03)


@pytest.mark.parametrize("beta, sigma, s_hat", [
    (1.991, 0.031, 1.009), (1.939, 0.030, 1.065), (1.968, 0.031, 1.033), (1.908, 0.029, 1.101),
])
def test_sigma_and_slope_convention(beta, sigma, s_hat):
    fit = PowerLawFit.from_beta(beta, 1000, 1.0)
    assert abs(fit.sigma - sigma) <= 0.001
    assert abs(fit.s_hat - s_hat) <= 0.001
    assert math.isclose(fit.s_hat * (fit.beta_hat - 1), 1.0, rel_tol=1e-12)


def test_gap_table_convention_within_rounding():
    # the printed beta is rounded to 3 decimals; the printed slope must come from inside that interval
    lo, hi = PowerLawFit.from_beta(1.5505, 1000, 1.0), PowerLawFit.from_beta(1.5495, 1000, 1.0)
    assert lo.s_hat <= 1.817 <= hi.s_hat
    assert abs(PowerLawFit.from_beta(1.550, 1000, 1.0).sigma - 0.017) <= 0.001


def test_invalid_fit():
    with pytest.raises(InvalidFit):
        PowerLawFit.from_beta(1.0, 10, 1.0)


def test_two_point_fit_is_three():
    fit = mle_fit(make_spectrum([math.e, 1.0]), 2)
    assert math.isclose(fit.beta_hat, 3.0, rel_tol=1e-15)
    assert fit.lambda_cutoff == 1.0 and fit.k_samples == 2


def test_mle_matches_high_precision_oracle():
    vals = [17.0, 9.5, 4.25, 3.0, 2.0, 1.5, 1.125]
    k = len(vals)
    exact = 1 + sympy.Integer(k) / sum(sympy.log(sympy.Rational(v) / sympy.Rational(vals[-1])) for v in vals)
    assert math.isclose(mle_fit(make_spectrum(vals), k).beta_hat, float(exact.evalf(30)), rel_tol=1e-14)


def test_mle_recovers_large_sample_exponent():
    x = pareto_sample(np.random.default_rng(1), 100_000, 2.5, 3.0)
    fit = mle_fit(make_spectrum(x), x.size)
    assert abs(fit.beta_hat - 2.5) <= 3 * fit.sigma


def test_mle_errors():
    with pytest.raises(DegenerateSample):
        mle_fit(make_spectrum([2.0, 2.0, 2.0]), 3)
    with pytest.raises(NonPositiveEigenvalue):
        mle_fit(make_spectrum([2.0, 1.0, 0.0]), 3)
    with pytest.raises(InsufficientLength):
        mle_fit(make_spectrum([2.0, 1.0]), 3)
    with pytest.raises(InsufficientLength):
        mle_fit(make_spectrum([2.0, 1.0]), 1)


def test_normalizer_attached_on_request():
    s = make_spectrum(1.0 / np.arange(1, 101))
    fit = mle_fit(s, 100, normalizer_n=100)
    assert fit.z_d == pytest.approx(zipf_normalizer(100, fit.s_hat))
    assert mle_fit(s, 100).z_d is None


def test_ks_midpoint_quantiles_are_within_half_step():
    k, beta, cutoff = 400, 2.0, 1.5
    u = (np.arange(1, k + 1) - 0.5) / k
    x = cutoff * (1 - u) ** (-1 / (beta - 1))
    verdict = ks_test(make_spectrum(x), PowerLawFit.from_beta(beta, k, cutoff))
    assert verdict.d_ks <= 1 / (2 * k) + 1e-12


def test_ks_distance_matches_scipy():
    rng = np.random.default_rng(4)
    x = pareto_sample(rng, 500, 2.2, 1.0)
    ref = stats.kstest(x, lambda t: pareto_cdf(t, 2.2, 1.0)).statistic
    assert ks_distance(x, 2.2, 1.0) == pytest.approx(ref, abs=1e-14)


def test_ks_mismatched_fit():
    fit = PowerLawFit.from_beta(2.0, 10, 1.0)
    with pytest.raises(MismatchedFit):
        ks_test(make_spectrum([3.0, 2.0, 1.0]), fit)


def test_ks_rejects_exponential_sample():
    x = np.random.default_rng(2).exponential(size=1000) + 1.0
    _, verdict = fit_and_test(make_spectrum(x), 1000)
    assert not verdict.is_power_law
    assert 0 <= verdict.d_ks <= 1 and verdict.d_c > 0


def test_zipf_regression_examples():
    k = np.arange(1, 101, dtype=float)
    assert zipf_slope_regression(make_spectrum(1 / k), 100) == pytest.approx(1.0, abs=1e-12)
    assert zipf_slope_regression(make_spectrum(5 * k**-2), 100) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(NonPositiveEigenvalue):
        zipf_slope_regression(make_spectrum([3.0, 2.0, -1.0]), 3)


def test_zipf_regression_tracks_mle_on_pareto_sample():
    s = make_spectrum(pareto_sample(np.random.default_rng(11), 1000, 2.0))
    assert abs(zipf_slope_regression(s, 1000) - mle_fit(s, 1000).s_hat) <= 0.15


def test_zipf_normalizer_examples():
    assert zipf_normalizer(3, 1.0) == pytest.approx(11 / 6, rel=1e-15)
    assert zipf_normalizer(1, 3.7) == 1.0
    gamma = float(sympy.EulerGamma.evalf(30))
    assert zipf_normalizer(10**6, 1.0) == pytest.approx(math.log(1e6) + gamma, abs=1e-6)
    with pytest.raises(ValueError):
        zipf_normalizer(0, 1.0)


def test_ks_distance_shrinks_with_sample_size():
    medians = []
    for k in (100, 1000, 10_000):
        d = [ks_distance(pareto_sample(np.random.default_rng([seed, k]), k, 2.0), 2.0, 1.0) for seed in range(50)]
        medians.append(np.median(d))
    assert medians[0] > medians[1] > medians[2]


positive_samples = st.lists(st.floats(min_value=1e-3, max_value=1e3), min_size=3, max_size=50)


@given(positive_samples, st.integers(-20, 20))
def test_mle_exactly_invariant_under_power_of_two_scaling(xs, e):
    s = make_spectrum(xs)
    assume(s.values[0] != s.values[-1])
    c = 2.0**e
    assert mle_fit(s.scaled(c), len(s)).beta_hat == mle_fit(s, len(s)).beta_hat


@given(positive_samples, st.floats(min_value=1e-6, max_value=1e6))
def test_mle_and_verdict_scale_invariant(xs, c):
    s = make_spectrum(xs)
    assume(s.values[0] > s.values[-1] * (1 + 1e-9))
    a, va = fit_and_test(s, len(s))
    b, vb = fit_and_test(s.scaled(c), len(s))
    assert b.beta_hat == pytest.approx(a.beta_hat, rel=1e-10)
    if abs(va.d_ks - va.d_c) > 1e-9:
        assert va.is_power_law == vb.is_power_law


@given(positive_samples, st.floats(min_value=1.01, max_value=3.0))
def test_stretching_log_ratios_lowers_beta(xs, power):
    s = make_spectrum(xs)
    assume(s.values[0] > s.values[-1] * (1 + 1e-6))
    stretched = make_spectrum(s.values[-1] * (s.values / s.values[-1]) ** power)
    assert mle_fit(stretched, len(s)).beta_hat < mle_fit(s, len(s)).beta_hat


@given(positive_samples)
def test_fit_invariants(xs):
    s = make_spectrum(xs)
    assume(s.values[0] != s.values[-1])
    fit, verdict = fit_and_test(s, len(s))
    assert fit.beta_hat > 1
    assert math.isclose(fit.sigma, (fit.beta_hat - 1) / math.sqrt(len(s)), rel_tol=1e-12)
    assert math.isclose(fit.s_hat * (fit.beta_hat - 1), 1.0, rel_tol=1e-12)
    assert 0 <= verdict.d_ks <= 1
    assert verdict.is_power_law == (verdict.d_ks <= verdict.d_c)
