import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quantdisp.distributions import gaussian, student
from quantdisp.estimators import (
    MAD,
    MEDIAN_AD,
    VARIANCE,
    abs_central_moment,
    abs_moment,
    dispersion_estimate,
    loc_scale_quantile,
    order_index,
    parse_dispersion,
    sample_mad,
    sample_median,
    sample_median_ad,
    sample_quantile,
    sample_variance,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
samples = st.lists(finite, min_size=2, max_size=40)


@pytest.mark.parametrize("x,p,expected", [([3, 1, 2], 0.5, 2), ([1, 2, 3, 4], 0.25, 1),
                                          ([3, 1, 2], 0.95, 3)])
def test_sample_quantile_examples(x, p, expected):
    assert sample_quantile(x, p) == expected


def test_order_index_float_noise():
    # 0.95 * 100 is 94.99999999999999 in binary
    assert order_index(100, 0.95) == 95
    assert order_index(3, 0.1) == 1
    assert order_index(10, 0.999) == 10


def test_sample_quantile_domain():
    with pytest.raises(ValueError):
        sample_quantile([], 0.5)
    with pytest.raises(ValueError):
        sample_quantile([1, 2], 1.0)


def test_rejects_non_finite():
    with pytest.raises(ValueError):
        sample_mad([1.0, np.nan])
    with pytest.raises(ValueError):
        sample_variance([1.0, np.inf])


@pytest.mark.parametrize("x,expected", [([1, 2, 3], 1.0), ([5, 5, 5], 0.0), ([0, 4], 8.0)])
def test_sample_variance_examples(x, expected):
    assert sample_variance(x) == pytest.approx(expected)


def test_sample_variance_needs_two():
    with pytest.raises(ValueError):
        sample_variance([1.0])


@pytest.mark.parametrize("x,expected", [([1, 2, 3], 2 / 3), ([7, 7, 7, 7], 0.0), ([0, 4], 2.0)])
def test_sample_mad_examples(x, expected):
    assert sample_mad(x) == pytest.approx(expected)


@pytest.mark.parametrize("x,expected", [([1, 2, 3], 2), ([1, 2, 3, 4], 2.5), ([7], 7)])
def test_sample_median_examples(x, expected):
    assert sample_median(x) == expected


@pytest.mark.parametrize("x,expected", [([1, 2, 3], 1), ([4, 4, 4], 0), ([0, 0, 0, 10], 0)])
def test_sample_median_ad_examples(x, expected):
    assert sample_median_ad(x) == expected


@given(finite)
def test_median_ad_singleton(x):
    assert sample_median_ad([x]) == 0


@pytest.mark.parametrize("r,expected", [(2, 2 / 3), (1, 2 / 3)])
def test_abs_central_moment_examples(r, expected):
    assert abs_central_moment([1, 2, 3], r) == pytest.approx(expected)


def test_abs_central_moment_cubic():
    assert abs_central_moment([0, 4], 3) == pytest.approx(8.0)
    with pytest.raises(ValueError):
        abs_central_moment([0, 4], 0)


def test_loc_scale_quantile_examples():
    g = gaussian()
    # sqrt(2) * q(0.95) = 2.3261743...
    expected = math.sqrt(2) * 1.6448536269514722
    assert loc_scale_quantile([-1, 1], 0.95, g, mean_known=True) == pytest.approx(expected, rel=1e-14)
    assert loc_scale_quantile([0.3, 1.9, -4.0], 0.5, gaussian(2.0, 1.0), mean_known=True) == 2.0
    assert loc_scale_quantile([-1, 1], 0.5, student(5), mean_known=False) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        loc_scale_quantile([1.0], 0.5, g)


def test_vectorised_over_rows():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((5, 101))
    for fn in (sample_variance, sample_mad, sample_median, sample_median_ad):
        out = fn(x)
        assert out.shape == (5,)
        assert np.allclose(out, [fn(row) for row in x])
    assert np.allclose(sample_quantile(x, 0.9), [sample_quantile(r, 0.9) for r in x])


def test_parse_dispersion():
    assert parse_dispersion("variance") == VARIANCE
    assert parse_dispersion("MAD") == MAD
    assert parse_dispersion("medianad") == MEDIAN_AD
    assert parse_dispersion("abs_moment3") == abs_moment(3)
    with pytest.raises(ValueError):
        parse_dispersion("range")


@settings(max_examples=200, deadline=None)
@given(samples)
def test_abs_moment_identities(x):
    assert abs_central_moment(x, 1) == sample_mad(x)
    n = len(x)
    assert abs_central_moment(x, 2) * n / (n - 1) == pytest.approx(sample_variance(x), rel=1e-12, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(samples, st.floats(0.01, 100), st.floats(-100, 100), st.floats(0.01, 0.99))
def test_equivariance(x, a, b, p):
    x = np.asarray(x)
    y = a * x + b
    tol = dict(rel=1e-9, abs=1e-9 * (1 + a) * (1 + np.abs(x).max() + abs(b)))
    assert sample_quantile(y, p) == pytest.approx(a * sample_quantile(x, p) + b, **tol)
    assert sample_mad(y) == pytest.approx(a * sample_mad(x), **tol)
    assert sample_median_ad(y) == pytest.approx(a * sample_median_ad(x), **tol)
    assert sample_variance(y) == pytest.approx(a * a * sample_variance(x), rel=1e-8,
                                               abs=1e-8 * (1 + a * a) * (1 + np.square(x).max()))


@settings(max_examples=100, deadline=None)
@given(samples, st.randoms(use_true_random=False))
def test_permutation_invariance(x, rnd):
    y = list(x)
    rnd.shuffle(y)
    assert sample_quantile(y, 0.3) == sample_quantile(x, 0.3)
    assert sample_median(y) == sample_median(x)
    assert sample_median_ad(y) == sample_median_ad(x)
    for disp in (VARIANCE, MAD):
        assert dispersion_estimate(y, disp) == pytest.approx(dispersion_estimate(x, disp), rel=1e-12, abs=1e-9)


def test_quantile_is_order_statistic():
    x = np.arange(1.0, 101.0)
    for p in (0.01, 0.5, 0.95, 0.951, 0.99):
        assert sample_quantile(x, p) == math.ceil(round(100 * p, 9))
