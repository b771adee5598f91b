import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from powerspec.core import (
    Spectrum,
    format_spectrum,
    make_spectrum,
    parse_spectrum,
    read_spectrum,
    trace_normalize,
    write_rank_size_csv,
    write_spectrum,
)
from powerspec.errors import EmptyInput, NonFiniteValue, NonPositiveEigenvalue, ParseError
from powerspec.powerlaw import pareto_sample

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


def test_make_spectrum_sorts_descending():
    assert make_spectrum([3.0, 1.0, 2.0]).values.tolist() == [3.0, 2.0, 1.0]
    assert make_spectrum([1.0]).values.tolist() == [1.0]


def test_make_spectrum_keeps_duplicates():
    assert make_spectrum([1.0, 2.0, 1.0, 2.0]).values.tolist() == [2.0, 2.0, 1.0, 1.0]


def test_make_spectrum_pareto_max_matches_plain_sort(rng):
    x = pareto_sample(rng, 1000, 2.0)
    s = make_spectrum(x)
    assert s.values[0] == max(x.tolist())
    assert s.values.tolist() == sorted(x.tolist(), reverse=True)


def test_make_spectrum_errors():
    with pytest.raises(EmptyInput):
        make_spectrum([])
    with pytest.raises(NonFiniteValue) as exc:
        make_spectrum([1.0, 2.0, float("nan")])
    assert exc.value.index == 2


def test_spectrum_rejects_bad_construction():
    with pytest.raises(ValueError):
        Spectrum([1.0, 2.0])
    with pytest.raises(ValueError):
        Spectrum([2.0, 1.0], source="bogus")
    with pytest.raises(ValueError):
        Spectrum([2.0, 1.0], n_total=1)


def test_spectrum_values_are_read_only():
    s = make_spectrum([2.0, 1.0])
    with pytest.raises(ValueError):
        s.values[0] = 5.0


def test_trace_normalize_examples():
    np.testing.assert_allclose(trace_normalize(make_spectrum([4, 3, 2, 1]), 4).fractions, [0.4, 0.3, 0.2, 0.1])
    assert trace_normalize(make_spectrum([5.0]), 1).fractions.tolist() == [1.0]


def test_trace_normalize_zipf_against_harmonic_number():
    k = np.arange(1, 1001)
    harmonic = sum(1.0 / i for i in range(1, 1001))
    f = trace_normalize(make_spectrum(1.0 / k), 1000).fractions
    np.testing.assert_allclose(f, (1.0 / k) / harmonic, rtol=1e-13)


def test_trace_normalize_rejects_non_positive():
    with pytest.raises(NonPositiveEigenvalue):
        trace_normalize(make_spectrum([2.0, 1.0, 0.0]), 3)
    # only the top k are inspected
    assert len(trace_normalize(make_spectrum([2.0, 1.0, -1.0]), 2)) == 2


def test_read_simple_file(tmp_path):
    p = tmp_path / "s.txt"
    p.write_text("3.0\n2.0\n1.0\n")
    assert read_spectrum(p).values.tolist() == [3.0, 2.0, 1.0]


def test_parse_error_line_number():
    with pytest.raises(ParseError) as exc:
        parse_spectrum("3.0\nabc\n1.0\n")
    assert exc.value.line == 2


def test_parse_accepts_comments_and_scientific_notation():
    s = parse_spectrum("# header\n1e2\n\n# note\n5.0E-1\n")
    assert s.values.tolist() == [100.0, 0.5]


def test_metadata_survives_round_trip(tmp_path):
    s = Spectrum([3.0, 1.5], "lanczos", n_total=10, trace_hint=7.25)
    p = tmp_path / "s.txt"
    write_spectrum(s, p)
    assert read_spectrum(p) == s
    assert p.read_bytes().count(b"\r") == 0


def test_rank_size_csv(tmp_path):
    p = tmp_path / "r.csv"
    write_rank_size_csv([3.0, 2.0], p)
    assert p.read_text() == "rank,value\n1,3.0\n2,2.0\n"


@given(st.lists(finite, min_size=1, max_size=60))
def test_make_spectrum_is_a_sorted_permutation(xs):
    s = make_spectrum(xs)
    assert sorted(s.values.tolist()) == sorted(xs)
    assert np.all(s.values[1:] <= s.values[:-1])


@given(st.lists(st.floats(min_value=1e-300, max_value=1e300), min_size=1, max_size=60))
def test_trace_normalize_sums_to_one(xs):
    f = trace_normalize(make_spectrum(xs)).fractions
    assert math.isclose(math.fsum(f), 1.0, rel_tol=1e-12)
    assert np.all(np.diff(f) <= 0)


@settings(max_examples=200)
@given(st.lists(finite, min_size=1, max_size=40),
       st.sampled_from(["ingested", "lanczos", "dense", "anm-inverse", "mlp"]),
       st.one_of(st.none(), finite))
def test_text_round_trip_is_identity(xs, source, hint):
    s = make_spectrum(xs, source, n_total=len(xs) + 3, trace_hint=hint)
    assert parse_spectrum(format_spectrum(s)) == s
