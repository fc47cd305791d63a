"""Tests for process specs, path generation, coupling and covariances."""
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import TypeAdapter, ValidationError
from scipy import stats

from errors import UnsupportedModeError
from processes.generate import (
    autocovariances,
    coefficients,
    covariance_fn,
    generate,
    generate_batch,
    generate_coupled,
    generate_iterated,
    generate_linear,
    memory_tail_variance,
    reconstruct,
    sample_at,
    truncate_linear,
    truncation_bias,
)
from processes.models import InnovationSpec, IteratedMapSpec, LinearProcessSpec, ProcessSpec
from processes.streams import derive_rng, stream_id

PROCESS = TypeAdapter(ProcessSpec)


def linear(rule: dict, **kwargs) -> LinearProcessSpec:
    return LinearProcessSpec(coefficients=rule, **kwargs)


def iterated(dynamics: dict, **kwargs) -> IteratedMapSpec:
    return IteratedMapSpec(dynamics=dynamics, **kwargs)


HALVING = iterated({'map': 'halving_bernoulli'}, innovations={'law': 'bernoulli_half'}, burn_in=64)


class TestSpecs:
    def test_regvar_beta_out_of_range(self):
        with pytest.raises(ValidationError, match='beta'):
            linear({'rule': 'regvar', 'beta': 1.2})

    def test_explicit_coefficients_must_be_finite(self):
        with pytest.raises(ValidationError):
            linear({'rule': 'explicit', 'values': [1.0, math.inf]})

    def test_halving_needs_bernoulli(self):
        with pytest.raises(ValidationError, match='bernoulli_half'):
            iterated({'map': 'halving_bernoulli'})

    def test_linear_rejects_infinite_variance(self):
        with pytest.raises(ValidationError, match='finite-variance'):
            linear({'rule': 'explicit', 'values': [1.0]}, innovations={'law': 'student_t', 'df': 2.0})

    def test_student_t_allowed_for_maps(self):
        spec = iterated({'map': 'ar1', 'rho': 0.5}, innovations={'law': 'student_t', 'df': 1.5})
        assert math.isinf(spec.innovations.variance)

    def test_discriminated_union(self):
        spec = PROCESS.validate_python({'family': 'iterated', 'dynamics': {'map': 'tar1', 'phi_plus': 0.5,
                                                                          'phi_minus': -0.3}})
        assert isinstance(spec, IteratedMapSpec)

    def test_memory_defaults(self):
        assert linear({'rule': 'explicit', 'values': [1.0, 0.5, 0.25]}).memory == 2
        assert linear({'rule': 'regvar', 'beta': 0.6}).memory == 2 ** 14
        assert linear({'rule': 'geometric', 'rho': 0.5}).memory == 2 ** 10
        assert linear({'rule': 'geometric', 'rho': 0.5}, truncation=16).memory == 16

    def test_innovation_variance(self):
        assert InnovationSpec(law='bernoulli_half').variance == 0.25
        assert InnovationSpec(law='uniform_symmetric', scale=3.0).variance == pytest.approx(3.0)
        assert InnovationSpec(law='student_t', df=4.0).variance == pytest.approx(2.0)


class TestStreams:
    def test_same_key_same_draws(self):
        a = derive_rng(7, 1, 2, role='future').standard_normal(8)
        b = derive_rng(7, 1, 2, role='future').standard_normal(8)
        np.testing.assert_array_equal(a, b)

    def test_roles_are_distinct_streams(self):
        a = derive_rng(7, 1, role='history').standard_normal(8)
        b = derive_rng(7, 1, role='shadow_history').standard_normal(8)
        assert not np.array_equal(a, b)

    def test_unknown_role(self):
        with pytest.raises(ValueError, match='role'):
            derive_rng(0, role='bogus')

    @given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
    def test_stream_ids_identify_keys(self, g1, r1, g2, r2):
        same = stream_id(3, g1, r1) == stream_id(3, g2, r2)
        assert same == ((g1, r1) == (g2, r2))


class TestLinear:
    def test_identity_coefficients_return_innovations(self):
        spec = linear({'rule': 'explicit', 'values': [1.0]}, innovations={'law': 'uniform_symmetric'})
        path = generate_linear(spec, 50, seed=1)
        np.testing.assert_array_equal(path.values, path.innovations[-50:])

    def test_geometric_lag_one_autocorrelation(self):
        rho, n = 0.5, 100_000
        path = generate_linear(linear({'rule': 'geometric', 'rho': rho}, truncation=64), n, seed=2)
        x = path.values - path.values.mean()
        r1 = float(np.dot(x[:-1], x[1:]) / np.dot(x, x))
        assert abs(r1 - rho) < 3.0 * math.sqrt((1.0 - rho ** 2) / n)

    def test_regvar_covariance_decay(self):
        spec = linear({'rule': 'regvar', 'beta': 0.7}, truncation=2 ** 16)
        lags = np.array([32, 64, 128, 256, 512])
        gamma = np.array([covariance_fn(spec, int(k)) for k in lags])
        slope = np.polyfit(np.log(lags), np.log(gamma / covariance_fn(spec, 0)), 1)[0]
        assert slope == pytest.approx(1.0 - 2.0 * 0.7, abs=0.05)

    def test_deterministic_and_reconstructible(self):
        spec = linear({'rule': 'regvar', 'beta': 0.8}, truncation=256)
        a = generate_linear(spec, 300, seed=11, stream=(2, 5))
        b = generate_linear(spec, 300, seed=11, stream=(2, 5))
        np.testing.assert_array_equal(a.values, b.values)
        assert a.fingerprint == b.fingerprint
        np.testing.assert_allclose(reconstruct(a, spec), a.values, rtol=0, atol=1e-12)

    def test_values_are_read_only(self):
        path = generate_linear(linear({'rule': 'geometric', 'rho': 0.3}, truncation=8), 10, seed=0)
        with pytest.raises(ValueError):
            path.values[0] = 1.0

    def test_long_filter_matches_direct_convolution(self):
        spec = linear({'rule': 'regvar', 'beta': 0.6}, truncation=300)
        path = generate_linear(spec, 200, seed=4)
        direct = np.convolve(path.innovations, coefficients(spec), mode='valid')
        np.testing.assert_allclose(path.values, direct, rtol=1e-10, atol=1e-10)

    def test_batch_matches_single(self):
        spec = linear({'rule': 'geometric', 'rho': 0.8}, truncation=32)
        batch = generate_batch(spec, 40, 9, [(0, r) for r in range(3)])
        for r, path in enumerate(batch):
            np.testing.assert_array_equal(path.values, generate_linear(spec, 40, 9, stream=(0, r)).values)

    def test_rejects_empty_path(self):
        with pytest.raises(ValueError):
            generate_linear(linear({'rule': 'geometric', 'rho': 0.5}), 0, seed=0)


class TestIterated:
    def test_halving_marginal_is_uniform(self):
        draws = sample_at(HALVING, [1], 20_000, seed=3)[:, 0]
        assert stats.kstest(draws, 'uniform').pvalue > 0.01

    def test_ar1_stationary_variance(self):
        spec = iterated({'map': 'ar1', 'rho': 0.5}, burn_in=200)
        draws = sample_at(spec, [5], 20_000, seed=4)[:, 0]
        assert draws.var() == pytest.approx(4.0 / 3.0, abs=0.06)

    def test_arch1_second_moment(self):
        spec = iterated({'map': 'arch1', 'a0': 1.0, 'a1': 0.3}, burn_in=200)
        draws = sample_at(spec, [5], 20_000, seed=5)[:, 0]
        assert np.mean(draws ** 2) == pytest.approx(10.0 / 7.0, abs=0.08)

    def test_batch_matches_single(self):
        spec = iterated({'map': 'tar1', 'phi_plus': 0.6, 'phi_minus': -0.2}, burn_in=20)
        batch = generate_batch(spec, 30, 8, [(r,) for r in range(4)], retain_innovations=True)
        for r, path in enumerate(batch):
            single = generate_iterated(spec, 30, 8, stream=(r,))
            np.testing.assert_array_equal(path.values, single.values)
            np.testing.assert_array_equal(reconstruct(path, spec), path.values)

    def test_dispatch(self):
        path = generate(HALVING, 16, seed=0)
        assert path.n == 16
        assert np.all((path.values >= 0) & (path.values < 1))


class TestCoupling:
    @pytest.mark.parametrize('mode', ['iid_prehistory', 'fixed_prehistory'])
    def test_halving_distance_halves(self, mode):
        pair = generate_coupled(HALVING, 20, mode, seed=6, z0=0.9)
        d = pair.distances()
        assert d[0] > 0
        expected = d[0] * 0.5 ** np.arange(21)
        np.testing.assert_allclose(d, expected, rtol=1e-6, atol=0)

    def test_ar1_distance_contracts(self):
        spec = iterated({'map': 'ar1', 'rho': 0.5}, burn_in=50)
        pair = generate_coupled(spec, 15, 'iid_prehistory', seed=7)
        d = pair.distances()
        np.testing.assert_allclose(d, d[0] * 0.5 ** np.arange(16), rtol=1e-9)

    def test_fixed_prehistory_restart(self):
        spec = iterated({'map': 'ar1', 'rho': 0.5}, burn_in=50)
        pair = generate_coupled(spec, 5, 'fixed_prehistory', seed=7, z0=2.0)
        assert pair.shadow_start == 2.0
        assert pair.z0 == 2.0

    def test_linear_paths_merge_after_memory(self):
        spec = linear({'rule': 'explicit', 'values': [1.0, 0.5, 0.25, 0.125]})
        pair = generate_coupled(spec, 10, 'iid_prehistory', seed=8)
        d = pair.distances()
        assert np.all(d[:4] > 0)
        np.testing.assert_array_equal(d[4:], 0.0)

    def test_linear_shares_future(self):
        spec = linear({'rule': 'geometric', 'rho': 0.5}, truncation=16)
        pair = generate_coupled(spec, 10, 'iid_prehistory', seed=8)
        np.testing.assert_array_equal(pair.primary.innovations[-10:], pair.shadow.innovations[-10:])

    def test_linear_fixed_prehistory_unsupported(self):
        spec = linear({'rule': 'geometric', 'rho': 0.5})
        with pytest.raises(UnsupportedModeError):
            generate_coupled(spec, 10, 'fixed_prehistory', seed=0)

    def test_unknown_mode(self):
        with pytest.raises(UnsupportedModeError):
            generate_coupled(HALVING, 10, 'sideways', seed=0)


class TestTruncation:
    def test_beyond_support_unchanged(self):
        spec = linear({'rule': 'explicit', 'values': [1.0, 0.5, 0.25]})
        assert truncate_linear(spec, 3) is spec
        assert truncate_linear(spec, 10) is spec

    def test_single_coefficient(self):
        spec = linear({'rule': 'geometric', 'rho': 0.7}, truncation=8, innovations={'scale': 2.0})
        short = truncate_linear(spec, 1)
        path = generate_linear(short, 20, seed=1)
        np.testing.assert_allclose(path.values, path.innovations[-20:], rtol=1e-15)

    def test_same_innovations_as_full(self):
        spec = linear({'rule': 'geometric', 'rho': 0.7}, truncation=8)
        full = generate_linear(spec, 20, seed=1)
        short = generate_linear(truncate_linear(spec, 3), 20, seed=1)
        np.testing.assert_array_equal(full.innovations, short.innovations)

    def test_truncation_bias(self):
        spec = linear({'rule': 'explicit', 'values': [1.0, 0.5, 0.25]})
        assert truncation_bias(spec, 1) == pytest.approx(0.25 + 0.0625)
        assert truncation_bias(spec, 3) == 0.0

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            truncate_linear(linear({'rule': 'geometric', 'rho': 0.5}), 0)


class TestMemoryTailVariance:
    def test_geometric(self):
        spec = linear({'rule': 'geometric', 'rho': 0.5}, truncation=4, innovations={'scale': 2.0})
        assert memory_tail_variance(spec) == pytest.approx(4.0 * 0.25 ** 5 / 0.75, rel=1e-12)

    def test_explicit_beyond_truncation(self):
        spec = linear({'rule': 'explicit', 'values': [1.0, 0.5, 0.25, 0.125]}, truncation=1)
        assert memory_tail_variance(spec) == pytest.approx(0.0625 + 0.015625)
        assert memory_tail_variance(linear({'rule': 'explicit', 'values': [1.0, 0.5]})) == 0.0

    @pytest.mark.parametrize('name, rel', [('one', 1e-10), ('log', 1e-4), ('inv_log', 1e-4)])
    def test_regvar_tail_differences(self, name, rel):
        rule = {'rule': 'regvar', 'beta': 0.7, 'slowly_varying': name}
        short, longer = linear(rule, truncation=64), linear(rule, truncation=128)
        dropped = float(np.sum(coefficients(longer)[65:] ** 2))
        assert memory_tail_variance(short) - memory_tail_variance(longer) == pytest.approx(dropped, rel=rel)

    def test_cutoff_has_no_tail(self):
        spec = linear({'rule': 'geometric', 'rho': 0.5}, truncation=64, cutoff=8)
        assert memory_tail_variance(spec) == 0.0


class TestCovariance:
    def test_white_noise_variance(self):
        spec = linear({'rule': 'explicit', 'values': [1.0]}, innovations={'scale': 1.5})
        assert covariance_fn(spec, 0) == pytest.approx(2.25)
        assert covariance_fn(spec, 1) == 0.0

    def test_geometric_closed_form(self):
        rho = 0.5
        spec = linear({'rule': 'geometric', 'rho': rho})
        for k in range(5):
            assert covariance_fn(spec, k) == pytest.approx(rho ** k / (1.0 - rho ** 2), rel=1e-12)

    def test_autocovariances_agree(self):
        spec = linear({'rule': 'regvar', 'beta': 0.75, 'slowly_varying': 'log'}, truncation=500)
        gamma = autocovariances(spec, 12)
        expected = [covariance_fn(spec, k) for k in range(13)]
        np.testing.assert_allclose(gamma, expected, rtol=1e-9)

    def test_negative_lag(self):
        with pytest.raises(ValueError):
            covariance_fn(linear({'rule': 'geometric', 'rho': 0.5}), -1)

    def test_matches_empirical(self):
        spec = linear({'rule': 'explicit', 'values': [1.0, -0.4, 0.3]})
        path = generate_linear(spec, 200_000, seed=12)
        x = path.values
        for k in range(3):
            empirical = float(np.mean(x[: x.size - k] * x[k:]))
            assert empirical == pytest.approx(covariance_fn(spec, k), abs=0.02)
