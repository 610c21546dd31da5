import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from csvt import csvt, raw_count, synth, threshold
from csvt.estimator import count_above, parse_tn_rule


def mp_threshold(p, n, tn=None):
    """Oracle: the threshold in 50-digit arithmetic."""
    mpmath.mp.dps = 50
    t = mpmath.log(n) if tn is None else mpmath.mpf(tn)
    return mpmath.sqrt(p) + mpmath.sqrt(n) + t


# ------------------------------------------------------------------ threshold

def test_threshold_small_example():
    spec = threshold(20, 100)
    assert round(spec.value, 3) == 19.077
    assert spec.value == pytest.approx(float(mp_threshold(20, 100)), rel=1e-15)
    assert spec.tn == pytest.approx(math.log(100), rel=1e-15)


def test_threshold_large_example():
    spec = threshold(100, 10**6)
    assert spec.value == pytest.approx(float(mp_threshold(100, 10**6)), rel=1e-15)
    assert round(spec.value, 4) == 1023.8155


def test_threshold_explicit_rule():
    assert threshold(1, 4, 0.0).value == 3.0
    assert threshold(9, 16, 2.5).value == 9.5
    assert threshold(4, 9, "1.5").tn == 1.5


def test_threshold_noise_level():
    assert threshold(4, 9, 1.0).noise_level == 5.0


@pytest.mark.parametrize("p, n, rule", [(1, 1, "log"), (3, 1, "log"), (0, 10, "log"), (3, 0, 1.0)])
def test_threshold_rejects(p, n, rule):
    with pytest.raises(ValueError):
        threshold(p, n, rule)


@pytest.mark.parametrize("rule", [-1.0, "abc", math.nan, math.inf])
def test_bad_tn_rule(rule):
    with pytest.raises(ValueError):
        parse_tn_rule(rule)


@pytest.mark.parametrize("alias", ["log", "LOG", " ln ", "log_n"])
def test_tn_rule_aliases(alias):
    assert parse_tn_rule(alias) == "log"


# ----------------------------------------------------------------------- csvt

def test_zero_matrix():
    report = csvt(np.zeros((5, 8)), tn=1.0)
    assert (report.r, report.k_hat) == (0, 1)


def test_single_sample_rejected():
    with pytest.raises(ValueError):
        csvt(np.ones((4, 1)))


def test_noiseless_five_component_design():
    rng = synth.make_rng(0)
    design = synth.make_design(1000, 20, 5, 1.0, rng)
    X, _ = synth.sample_dataset(design, synth.NO_NOISE, rng)
    report = csvt(X)
    assert report.k_hat == 5
    assert report.r == 4


def _single_component_frequencies(reps=100):
    single, raw_zero = 0, 0
    for rep in range(reps):
        rng = synth.replication_rng(11, rep)
        X = synth.single_component_dataset(0.1 * math.sqrt(20), 100, 20, rng)
        single += csvt(X).k_hat == 1
        raw_zero += raw_count(X) == 0
    return single / reps, raw_zero / reps


def test_single_component_frequencies():
    single, raw_zero = _single_component_frequencies()
    assert single >= 0.95
    assert raw_zero >= 0.95


def test_report_fields():
    X = np.random.default_rng(0).standard_normal((10, 40))
    report = csvt(X, strategy="gram")
    assert report.k_hat == report.r + 1
    assert report.threshold.p == 10 and report.threshold.n == 40
    assert report.spectrum.strategy == "gram_rows"
    assert report.r == count_above(report.singular_values, report.threshold.value)
    assert report.wall_time >= 0


def test_deterministic():
    X = np.random.default_rng(1).standard_normal((30, 60)) * 4
    a, b = csvt(X), csvt(X)
    assert a.k_hat == b.k_hat
    assert np.array_equal(a.singular_values, b.singular_values)


# ------------------------------------------------------------------ raw_count

def test_raw_count_zero_matrix():
    assert raw_count(np.zeros((3, 3)), tn=1.0) == 0


def test_raw_count_pathology():
    hits = 0
    for rep in range(100):
        rng = synth.replication_rng(12, rep)
        X, _ = synth.pathology_dataset(50.0, 1.0, 100, 100, 2, rng)
        hits += raw_count(X) == 1
    assert hits / 100 >= 0.95


# ----------------------------------------------------------------- strictness

def test_strict_inequality_at_threshold():
    vals = np.array([5.0, 3.0, 1.0])
    assert count_above(vals, 3.0) == 1
    assert count_above(vals, 3.0 - 1e-12) == 2
    assert count_above(vals, 3.0 + 1e-12) == 1


def test_threshold_equal_to_singular_value():
    # centred singular values of diag-like data are known exactly
    X = np.array([[2.0, -2.0]])  # centred: same; sigma = sqrt(8)
    sigma = math.sqrt(8.0)
    T0 = math.sqrt(1) + math.sqrt(2)
    assert csvt(X, tn=sigma - T0 - 1e-12).r == 1
    assert csvt(X, tn=sigma - T0 + 1e-12).r == 0


# ----------------------------------------------------------------- properties

@st.composite
def mixture_data(draw):
    p = draw(st.integers(2, 40))
    n = draw(st.integers(4, 120))
    K = draw(st.integers(1, min(p, n, 6)))
    beta = draw(st.sampled_from([0.2, 0.5, 1.0]))
    gamma = draw(st.floats(0.2, 3.0))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = synth.make_rng(seed)
    design = synth.make_design(n, p, K, beta, rng, gamma=gamma)
    X, _ = synth.sample_dataset(design, synth.UNIT_NOISE, rng)
    return X


@settings(max_examples=50, deadline=None)
@given(mixture_data(), st.sampled_from(["direct", "gram"]))
def test_k_hat_bounds(X, strategy):
    p, n = X.shape
    report = csvt(X, strategy=strategy)
    assert 1 <= report.k_hat <= min(p, n - 1) + 1


@settings(max_examples=50, deadline=None)
@given(mixture_data(), st.floats(-100, 100))
def test_shift_invariance(X, offset):
    c = np.linspace(0.0, 1.0, X.shape[0]) * offset
    assert csvt(X + c[:, None]).r == csvt(X).r


@settings(max_examples=50, deadline=None)
@given(mixture_data(), st.floats(0, 10), st.floats(0, 10))
def test_monotone_in_tn(X, t1, t2):
    lo, hi = sorted((t1, t2))
    assert csvt(X, tn=hi).r <= csvt(X, tn=lo).r
