"""Tests for the kernel catalog and the Monte Carlo kernel means."""
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from processes.generate import covariance_fn
from processes.models import IteratedMapSpec, LinearProcessSpec
from statistic.kernels import eval as kernel_eval
from statistic.kernels import evaluate, is_indicator, mean_estimate
from statistic.models import (
    AdditiveKernel,
    IndicatorDistanceKernel,
    ProductKernel,
    WilcoxonKernel,
    ZeroKernel,
)

KERNELS = [
    IndicatorDistanceKernel(b=0.1),
    ProductKernel(transform='identity'),
    ProductKernel(transform='square'),
    WilcoxonKernel(),
    AdditiveKernel(transform='identity'),
    AdditiveKernel(transform='square'),
    ZeroKernel(),
]

reals = st.floats(-1e3, 1e3, allow_nan=False)


@pytest.mark.parametrize('kernel', KERNELS, ids=lambda k: k.kind)
@given(x=reals, y=reals)
def test_symmetric(kernel, x, y):
    assert kernel_eval(kernel, x, y) == kernel_eval(kernel, y, x)


def test_indicator_distance():
    kernel = IndicatorDistanceKernel(b=0.1)
    assert kernel_eval(kernel, 0.0, 0.05) == 1.0
    assert kernel_eval(kernel, 0.0, 0.2) == 0.0
    assert kernel_eval(kernel, 0.0, 0.1) == 0.0


def test_wilcoxon_strict_boundary():
    assert kernel_eval(WilcoxonKernel(), 0.7, -0.7) == 0.0
    assert kernel_eval(WilcoxonKernel(), 0.7, -0.6) == 1.0


def test_product_and_additive():
    assert kernel_eval(ProductKernel(transform='square'), 2.0, -3.0) == 36.0
    assert kernel_eval(AdditiveKernel(transform='identity'), 2.0, -3.0) == -0.5
    assert kernel_eval(AdditiveKernel(transform='square'), 2.0, -3.0) == 6.5


def test_broadcasting():
    x = np.array([[0.0], [1.0]])
    y = np.array([0.0, 0.5, 2.0])
    assert evaluate(ZeroKernel(), x, y).shape == (2, 3)
    np.testing.assert_array_equal(evaluate(WilcoxonKernel(), x, y), [[0, 1, 1], [1, 1, 1]])


def test_is_indicator():
    assert is_indicator(WilcoxonKernel())
    assert is_indicator(IndicatorDistanceKernel(b=1.0))
    assert not is_indicator(ProductKernel())


class TestMeanEstimate:
    def test_wilcoxon_gaussian_half(self):
        spec = LinearProcessSpec(coefficients={'rule': 'geometric', 'rho': 0.6}, truncation=64)
        est = mean_estimate(WilcoxonKernel(), spec, gap=3, reps=20_000, seed=1)
        assert abs(est.value - 0.5) < 4.0 * est.stderr

    def test_indicator_halving_independent_pair(self):
        spec = IteratedMapSpec(dynamics={'map': 'halving_bernoulli'}, innovations={'law': 'bernoulli_half'},
                               burn_in=64)
        b = 0.1
        est = mean_estimate(IndicatorDistanceKernel(b=b), spec, gap=60, reps=20_000, seed=2)
        assert abs(est.value - (2 * b - b * b)) < 4.0 * est.stderr

    def test_product_identity_is_covariance(self):
        spec = LinearProcessSpec(coefficients={'rule': 'geometric', 'rho': 0.5}, truncation=64)
        est = mean_estimate(ProductKernel(), spec, gap=2, reps=20_000, seed=3)
        assert abs(est.value - covariance_fn(spec, 2)) < 4.0 * est.stderr

    def test_diagonal_gap(self):
        spec = LinearProcessSpec(coefficients={'rule': 'explicit', 'values': [1.0]})
        est = mean_estimate(ProductKernel(), spec, gap=0, reps=5000, seed=4)
        assert abs(est.value - 1.0) < 4.0 * est.stderr

    def test_needs_enough_reps(self):
        spec = LinearProcessSpec(coefficients={'rule': 'explicit', 'values': [1.0]})
        with pytest.raises(ValueError, match='reps'):
            mean_estimate(ProductKernel(), spec, gap=1, reps=50, seed=0)
