"""Tests for the U-statistic engine: every fast path against a nested-loop oracle."""
import math
import time

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from errors import UnsupportedModeError
from processes.generate import generate_linear
from processes.models import LinearProcessSpec
from statistic.engine import compute, compute_banded, compute_dense, correlation_integral, signed_rank
from statistic.kernels import eval as kernel_eval
from statistic.models import (
    AdditiveKernel,
    ConstantOneWeights,
    DeltaWeights,
    ExplicitWeights,
    GeometricWeights,
    IndicatorDistanceKernel,
    PowerWeights,
    ProductKernel,
    TowerWeights,
    WilcoxonKernel,
    ZeroKernel,
)
from statistic.weights import lag_weights, support_radius, weight

KERNELS = [
    IndicatorDistanceKernel(b=0.5),
    ProductKernel(transform='identity'),
    ProductKernel(transform='square'),
    WilcoxonKernel(),
    AdditiveKernel(transform='identity'),
    AdditiveKernel(transform='square'),
    ZeroKernel(),
]


def nested_loop(x, weights, kernel, include_diagonal=True) -> float:
    n = len(x)
    terms = []
    for i in range(n):
        for j in range(n):
            if i == j and not include_diagonal:
                continue
            terms.append(weight(weights, i - j) * kernel_eval(kernel, x[i], x[j]))
    return math.fsum(terms)


def brute_pair_count(x) -> int:
    n = len(x)
    return sum(1 for i in range(n) for j in range(i, n) if x[i] + x[j] > 0)


points = st.one_of(
    st.floats(-5.0, 5.0, allow_nan=False),
    st.sampled_from([-1.0, -0.5, 0.0, 0.5, 1.0]),
)
paths = st.lists(points, min_size=1, max_size=40).map(np.array)


class TestDense:
    def test_single_point(self):
        x = np.array([1.7])
        result = compute_dense(x, GeometricWeights(q=0.5), ProductKernel(transform='square'))
        assert result.value == pytest.approx(1.7 ** 4)
        assert result.n == 1
        assert compute_dense(x, ConstantOneWeights(), ProductKernel(), include_diagonal=False).value == 0.0

    def test_partial_sum_reduction(self, rng):
        x = rng.standard_normal(50)
        result = compute_dense(x, DeltaWeights(k0=0), AdditiveKernel(transform='identity'))
        assert result.value == pytest.approx(x.sum(), abs=1e-12)

    @pytest.mark.parametrize('kernel', KERNELS, ids=lambda k: k.kind)
    @pytest.mark.parametrize('include_diagonal', [True, False])
    def test_five_point_oracle(self, rng, kernel, include_diagonal):
        x = rng.standard_normal(5)
        weights = PowerWeights(beta_w=0.4, c=1.3)
        result = compute_dense(x, weights, kernel, include_diagonal)
        assert result.value == pytest.approx(nested_loop(x, weights, kernel, include_diagonal),
                                             rel=1e-13, abs=1e-13)
        assert result.method == 'dense'

    def test_threads_do_not_change_result(self, rng):
        x = rng.standard_normal(2048)
        weights = PowerWeights(beta_w=0.5)
        one = compute_dense(x, weights, ProductKernel(), n_jobs=1)
        many = compute_dense(x, weights, ProductKernel(), n_jobs=4)
        assert one.value == many.value

    def test_sample_path_fingerprint(self):
        spec = LinearProcessSpec(coefficients={'rule': 'geometric', 'rho': 0.5}, truncation=8)
        path = generate_linear(spec, 20, seed=3)
        assert compute_dense(path, DeltaWeights(k0=1), ProductKernel()).path_fingerprint == path.fingerprint


class TestBanded:
    def test_lag_covariance(self, rng):
        x = rng.standard_normal(40)
        k = 3
        result = compute_banded(x, DeltaWeights(k0=k), ProductKernel())
        assert result.value == pytest.approx(2.0 * np.dot(x[:-k], x[k:]), rel=1e-13)
        assert result.method == 'banded'

    def test_delta_zero_is_diagonal(self, rng):
        x = rng.standard_normal(30)
        kernel = AdditiveKernel(transform='square')
        result = compute_banded(x, DeltaWeights(k0=0), kernel)
        assert result.value == pytest.approx(math.fsum(x ** 2), rel=1e-13)
        assert compute_banded(x, DeltaWeights(k0=0), kernel, include_diagonal=False).value == 0.0

    def test_six_point_explicit(self, rng):
        x = rng.standard_normal(6)
        weights = ExplicitWeights(values=[1.0, 0.5])
        for kernel in KERNELS:
            banded = compute_banded(x, weights, kernel)
            dense = compute_dense(x, weights, kernel)
            assert banded.value == pytest.approx(dense.value, rel=1e-13, abs=1e-13)

    def test_radius_beyond_path(self):
        x = np.array([1.0, 2.0])
        assert compute_banded(x, DeltaWeights(k0=5), ProductKernel()).value == 0.0

    def test_unbounded_support(self):
        with pytest.raises(UnsupportedModeError):
            compute_banded(np.ones(4), GeometricWeights(q=0.5), ProductKernel())

    @given(paths, st.lists(st.floats(-2.0, 2.0), min_size=1, max_size=8), st.booleans())
    def test_matches_dense(self, x, values, include_diagonal):
        weights = ExplicitWeights(values=values)
        for kernel in (ProductKernel(), AdditiveKernel(transform='square')):
            banded = compute_banded(x, weights, kernel, include_diagonal).value
            dense = compute_dense(x, weights, kernel, include_diagonal).value
            assert banded == pytest.approx(dense, rel=1e-9, abs=1e-9)
        for kernel in (IndicatorDistanceKernel(b=0.75), WilcoxonKernel()):
            # integer-valued weights keep indicator sums exact
            int_weights = ExplicitWeights(values=[float(round(v)) for v in values])
            assert (compute_banded(x, int_weights, kernel, include_diagonal).value
                    == compute_dense(x, int_weights, kernel, include_diagonal).value)


class TestSorted:
    def test_identical_points(self):
        result = correlation_integral(np.full(17, 0.3), b=0.01)
        assert result.value == 17 ** 2
        assert result.method == 'sorted_indicator'

    def test_two_far_points(self):
        assert correlation_integral(np.array([0.0, 1.0]), b=0.5).value == 2

    def test_distance_exactly_b_excluded(self):
        assert correlation_integral(np.array([0.0, 0.25, 0.5]), b=0.25).value == 3

    def test_uniform_mean(self, rng):
        n, b = 10_000, 0.1
        x = rng.uniform(0.0, 1.0, n)
        ratio = correlation_integral(x, b).value / n ** 2
        expected = 2 * b - b * b + (1 - 2 * b + b * b) / n
        assert ratio == pytest.approx(expected, abs=2e-3)

    def test_rejects_nonpositive_b(self):
        with pytest.raises(ValueError):
            correlation_integral(np.ones(3), b=0.0)

    @given(paths, st.floats(0.01, 4.0), st.booleans())
    def test_matches_dense(self, x, b, include_diagonal):
        weights = ConstantOneWeights()
        for kernel in (IndicatorDistanceKernel(b=b), WilcoxonKernel()):
            fast = compute(x, weights, kernel, include_diagonal)
            assert fast.method == 'sorted_indicator'
            assert fast.value == compute_dense(x, weights, kernel, include_diagonal).value
        assert correlation_integral(x, b).value == compute_dense(x, weights, IndicatorDistanceKernel(b=b)).value


class TestDispatch:
    def test_methods(self, rng):
        x = rng.standard_normal(20)
        assert compute(x, ConstantOneWeights(), WilcoxonKernel()).method == 'sorted_indicator'
        assert compute(x, DeltaWeights(k0=2), WilcoxonKernel()).method == 'banded'
        assert compute(x, ConstantOneWeights(), ProductKernel()).method == 'dense'

    def test_permutation_invariance(self, rng):
        x = rng.standard_normal(64)
        y = rng.permutation(x)
        for kernel in (IndicatorDistanceKernel(b=0.3), WilcoxonKernel()):
            assert compute(x, ConstantOneWeights(), kernel).value == compute(y, ConstantOneWeights(), kernel).value
        a = compute(x, ConstantOneWeights(), ProductKernel(transform='square')).value
        b = compute(y, ConstantOneWeights(), ProductKernel(transform='square')).value
        assert a == pytest.approx(b, rel=1e-12)

    def test_weight_scaling(self, rng):
        x = rng.standard_normal(32)
        base = compute(x, ExplicitWeights(values=[1.0, 0.5, 0.25]), ProductKernel()).value
        scaled = compute(x, ExplicitWeights(values=[3.0, 1.5, 0.75]), ProductKernel()).value
        assert scaled == pytest.approx(3.0 * base, rel=1e-12)

    def test_rejects_matrix(self):
        with pytest.raises(ValueError):
            compute(np.ones((2, 2)), ConstantOneWeights(), ProductKernel())


class TestSignedRank:
    def test_all_positive(self):
        x = np.array([0.3, 1.2, 0.1, 2.5])
        assert signed_rank(x).value == 10

    def test_all_negative(self):
        x = -np.array([0.3, 1.2, 0.1, 2.5, 0.7])
        assert signed_rank(x).value == -15

    def test_pair_count_relation(self, rng):
        x = rng.standard_normal(8)
        result = signed_rank(x)
        n = x.size
        assert result.pair_count == brute_pair_count(x)
        assert result.pair_count == (result.value + n * (n + 1) / 2) / 2
        assert not result.ties_broken

    @given(paths)
    def test_pair_count_brute_force(self, x):
        assert signed_rank(x).pair_count == brute_pair_count(x)

    def test_ties_flagged(self):
        result = signed_rank(np.array([1.0, -1.0, 2.0]))
        assert result.ties_broken
        # |x| ties broken by index: ranks 1, 2, 3
        assert result.value == 1 - 2 + 3

    def test_wilcoxon_statistic_counts_pairs(self, rng):
        x = rng.standard_normal(30)
        u = compute(x, ConstantOneWeights(), WilcoxonKernel()).value
        assert (u + np.count_nonzero(x > 0)) / 2 == signed_rank(x).pair_count


WEIGHT_FAMILIES = [
    DeltaWeights(k0=3),
    ExplicitWeights(values=[1.0, -0.5, 0.25, 2.0]),
    ConstantOneWeights(),
    PowerWeights(beta_w=0.4, c=1.3),
    GeometricWeights(q=0.7),
    TowerWeights(),
]


@pytest.mark.slow
def test_fast_paths_match_dense_at_scale():
    """1000 seeded instances with n up to 512; unbounded weights enter banded cut at lag n - 1."""
    fast_seconds = 0.0
    for i in range(1000):
        rng = np.random.default_rng(i)
        n = int(rng.integers(2, 513))
        x = rng.standard_normal(n)
        if i % 2:
            x = np.round(x, 1)
        family = WEIGHT_FAMILIES[i % len(WEIGHT_FAMILIES)]
        kernel = KERNELS[i % len(KERNELS)]
        include_diagonal = bool(i % 3)
        band = family if support_radius(family) is not None else ExplicitWeights(
            values=[float(v) for v in lag_weights(family, np.arange(n))])
        b = 0.05 + 0.1 * (i % 5)

        start = time.perf_counter()
        banded = compute_banded(x, band, kernel, include_diagonal)
        count = correlation_integral(x, b)
        fast_seconds += time.perf_counter() - start

        dense = compute_dense(x, family, kernel, include_diagonal)
        assert banded.value == pytest.approx(dense.value, rel=1e-9, abs=1e-9 * n * n), (i, family.kind, kernel.kind)
        assert count.value == compute_dense(x, ConstantOneWeights(), IndicatorDistanceKernel(b=b)).value, i
    assert fast_seconds < 60.0
