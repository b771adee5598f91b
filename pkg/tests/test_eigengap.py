import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from powerspec.core import Spectrum, make_spectrum
from powerspec.eigengap import (
    dk_bound,
    dk_bound_powerlaw,
    eigenvector_sines,
    fit_gap_law,
    gap_law_predicted,
    gaps,
)
from powerspec.errors import DegenerateSample, InsufficientLength, MissingTrace, RankOutOfRange
from powerspec.powerlaw import PowerLawFit, zipf_normalizer


def zipf(n, s=1.0, **kw):
    return make_spectrum(np.arange(1, n + 1, dtype=float) ** -s, **kw)


def test_gap_examples():
    assert gaps(make_spectrum([4, 3, 1]), 3).gaps.tolist() == [1.0, 2.0]
    assert gaps(make_spectrum([2, 2, 2])).gaps.tolist() == [0.0, 0.0]
    with pytest.raises(InsufficientLength):
        gaps(make_spectrum([2, 1]), 1)


def test_zipf_gaps_closed_form():
    s = zipf(101)
    g = gaps(s).gaps
    k = np.arange(1, 101, dtype=float)
    np.testing.assert_allclose(g, 1 / (k * (k + 1)), rtol=1e-13)
    # neighbours within a factor of two subtract without rounding
    for i in range(100):
        assert Fraction(g[i]) == Fraction(s.values[i]) - Fraction(s.values[i + 1])


def test_resorted_view():
    g = gaps(make_spectrum([10, 9, 5, 4.5]))
    assert g.resorted().tolist() == [4.0, 1.0, 0.5]


def test_exact_gap_law_matches_direct_subtraction():
    s = zipf(200)
    fit = PowerLawFit.from_beta(2.0, 200, float(s.values[-1]))
    for k in (1, 2, 10, 99):
        pred = gap_law_predicted(s, fit, k)
        assert pred.exact == pytest.approx(1 / (k * (k + 1)), rel=1e-12)
    assert gap_law_predicted(s, fit, 1).exact == pytest.approx(s.values[0] / 2, rel=1e-15)


def test_approximate_gap_law_and_trace_sources():
    s = zipf(500)
    fit = PowerLawFit.from_beta(2.0, 500, float(s.values[-1]))
    pred = gap_law_predicted(s, fit, 9)
    assert pred.trace_source == "top-k"
    # with the top-K trace, Tr / Z_d = lambda_1 = 1, so the approximation is (k+1)^-2
    assert pred.approx == pytest.approx(10.0**-2, rel=1e-12)
    assert pred.approx / pred.exact == pytest.approx(9 / 10, rel=1e-12)

    hinted = Spectrum(s.values, n_total=1000, trace_hint=zipf_normalizer(1000, 1.0))
    assert gap_law_predicted(hinted, fit, 9).trace_source == "hint"
    assert gap_law_predicted(hinted, fit, 9).approx == pytest.approx(pred.approx, rel=1e-12)

    with pytest.raises(MissingTrace):
        gap_law_predicted(s, fit, 9, allow_topk_trace=False)
    with pytest.raises(RankOutOfRange):
        gap_law_predicted(s, fit, 501)


def test_gap_exponent_is_one_more_than_spectrum_slope():
    fit = fit_gap_law(gaps(zipf(2000)), 1000)
    assert abs(fit.s_hat - 2.0) <= 0.1


def test_constant_spectrum_has_no_gap_law():
    with pytest.raises(DegenerateSample):
        fit_gap_law(gaps(make_spectrum([2.0] * 5)))


def test_dk_bound_examples():
    s = make_spectrum([3, 2, 1])
    assert dk_bound(s, 2, 0.1).bound == pytest.approx(0.2, rel=1e-15)
    assert math.isinf(dk_bound(make_spectrum([3, 2, 2, 1]), 2, 0.1).bound)
    for bad in (1, 3):
        with pytest.raises(RankOutOfRange):
            dk_bound(s, bad, 0.1)


def test_dk_bound_holds_on_a_random_matrix():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((50, 50))
    h = (a + a.T) / 2
    m = rng.standard_normal((50, 50))
    m = (m + m.T) / 2
    eps = 1e-3 / np.abs(np.linalg.eigvalsh(m)).max()
    sines = eigenvector_sines(h, h + eps * m)
    s = make_spectrum(np.linalg.eigvalsh(h))
    for k in range(2, 50):
        b = dk_bound(s, k, 1e-3)
        assert sines[k - 1] <= b.bound


def test_powerlaw_bound_examples():
    fit = PowerLawFit.from_beta(2.0, 100, 1.0)
    ratio = dk_bound_powerlaw(fit, 1.0, 1000, 1e-3) / dk_bound_powerlaw(fit, 1.0, 10, 1e-3)
    assert ratio == pytest.approx((1001 / 11) ** 2, rel=1e-12)
    assert 8e3 < ratio < 1e4
    assert dk_bound_powerlaw(fit, 4.0, 0, 0.5) == pytest.approx(2 * 0.5 / 4.0)


def test_closed_form_and_gap_bound_agree_within_factor_two():
    s = zipf(102)
    fit = PowerLawFit.from_beta(2.0, 102, float(s.values[-1]))
    for k in range(2, 101):
        closed = dk_bound_powerlaw(fit, 1.0, k, 1e-3)
        direct = dk_bound(s, k, 1e-3).bound
        assert 0.5 <= closed / direct <= 2.0


def test_eigenvector_sines_zero_for_identical_matrices():
    a = np.diag([3.0, 2.0, 1.0])
    np.testing.assert_allclose(eigenvector_sines(a, a), 0.0, atol=1e-15)


def test_telescoping_is_exact_on_zipf():
    s = zipf(2000)
    assert math.fsum(gaps(s).gaps) == s.values[0] - s.values[-1]


finite = st.floats(min_value=-1e6, max_value=1e6)


@given(st.lists(finite, min_size=2, max_size=80))
def test_gaps_non_negative_and_telescoping(xs):
    s = make_spectrum(xs)
    g = gaps(s)
    assert len(g) == len(s) - 1
    assert np.all(g.gaps >= 0)
    assert math.fsum(g.gaps) == pytest.approx(s.values[0] - s.values[-1], abs=1e-9)


@given(st.floats(min_value=1e-3, max_value=10), st.floats(min_value=1e-3, max_value=10),
       st.floats(min_value=1e-3, max_value=10), st.floats(min_value=1e-6, max_value=1.0))
def test_widening_the_min_gap_lowers_the_bound(g1, g2, extra, eps):
    s = make_spectrum([g1 + g2, g2, 0.0])
    wider = make_spectrum([g1 + g2 + 2 * extra, g2 + extra, 0.0])
    assert dk_bound(wider, 2, eps).bound < dk_bound(s, 2, eps).bound
