"""
Sample-path generation for causal linear processes and iterated random functions.

Usage:
    uv run wustat simulate --config presets/correlation_integral.yaml --out results/
"""
import logging
import math
from collections.abc import Sequence

import numpy as np
from scipy import integrate, signal, special

from errors import DomainError, UnsupportedModeError
from processes.maps import build_map
from processes.models import (
    ExplicitCoefficients,
    GeometricCoefficients,
    InnovationSpec,
    IteratedMapSpec,
    LinearProcessSpec,
    ProcessSpec,
    RegvarCoefficients,
)
from processes.streams import derive_rng
from schema import CoupledPair, SamplePath, fingerprint

logger = logging.getLogger(__name__)

# Filters longer than this go through FFT convolution
DIRECT_FILTER_MAX = 64


def slowly_varying(name: str, j: np.ndarray | float) -> np.ndarray:
    """Evaluate the slowly varying catalog L(j) in {1, log(e+j), 1/log(e+j)}."""
    j = np.asarray(j, dtype=np.float64)
    if name == 'one':
        return np.ones_like(j)
    if name == 'log':
        return np.log(math.e + j)
    if name == 'inv_log':
        return 1.0 / np.log(math.e + j)
    raise ValueError(f"Unknown slowly varying function '{name}'")


def draw_innovations(spec: InnovationSpec, rng: np.random.Generator, size: int | tuple[int, ...]) -> np.ndarray:
    """Draw i.i.d. innovations from the configured law."""
    if spec.law == 'standard_normal':
        draws = rng.standard_normal(size)
    elif spec.law == 'bernoulli_half':
        draws = rng.integers(0, 2, size=size).astype(np.float64)
    elif spec.law == 'uniform_symmetric':
        draws = rng.uniform(-1.0, 1.0, size)
    else:
        draws = rng.standard_t(spec.df, size)
    return draws * spec.scale if spec.scale != 1.0 else draws


def coefficients(spec: LinearProcessSpec) -> np.ndarray:
    """Coefficients a_0..a_M of a linear spec, with the cutoff applied."""
    m = spec.memory
    rule = spec.coefficients
    if isinstance(rule, ExplicitCoefficients):
        a = np.zeros(m + 1)
        values = np.asarray(rule.values[: m + 1], dtype=np.float64)
        a[: values.size] = values
    elif isinstance(rule, GeometricCoefficients):
        a = rule.rho ** np.arange(m + 1, dtype=np.float64)
    elif isinstance(rule, RegvarCoefficients):
        j = np.arange(m + 1, dtype=np.float64)
        a = np.zeros(m + 1)
        a[1:] = j[1:] ** (-rule.beta) * slowly_varying(rule.slowly_varying, j[1:])
    else:
        raise ValueError(f"Unknown coefficient rule {rule!r}")
    if spec.cutoff is not None and spec.cutoff <= m:
        a[spec.cutoff:] = 0.0
    return a


def apply_filter(coeffs: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """X_t = sum_i a_i eps_{t-i} for every t with a full history in ``eps``.

    ``eps`` holds eps_{-M+1}..eps_n (oldest first), so the output has length
    len(eps) - M.
    """
    if coeffs.size <= DIRECT_FILTER_MAX:
        return np.convolve(eps, coeffs, mode='valid')
    return signal.fftconvolve(eps, coeffs, mode='valid')


def spec_fingerprint(spec: ProcessSpec) -> str:
    return fingerprint(spec.model_dump_json())


def generate_linear(
    spec: LinearProcessSpec,
    n: int,
    seed: int,
    *,
    stream: tuple[int, ...] = (),
    retain_innovations: bool = True,
) -> SamplePath:
    """Generate X_1..X_n of a causal linear process.

    Args:
        spec: Linear process recipe
        n: Path length
        seed: Experiment seed
        stream: Replicate coordinates for the derived stream
        retain_innovations: Keep eps_{-M+1}..eps_n on the path

    Returns:
        SamplePath deterministic in (spec, n, seed, stream)
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    a = coefficients(spec)
    rng = derive_rng(seed, *stream, role='history')
    eps = draw_innovations(spec.innovations, rng, spec.memory + n)
    values = apply_filter(a, eps)
    return SamplePath(
        values=values,
        seed=seed,
        spec_fingerprint=spec_fingerprint(spec),
        innovations=eps if retain_innovations else None,
    )


def generate_iterated(
    spec: IteratedMapSpec,
    n: int,
    seed: int,
    *,
    stream: tuple[int, ...] = (),
    retain_innovations: bool = True,
) -> SamplePath:
    """Generate X_1..X_n of an iterated random function after burn-in from 0."""
    return generate_batch(spec, n, seed, [stream], retain_innovations=retain_innovations)[0]


def generate(spec: ProcessSpec, n: int, seed: int, **kwargs) -> SamplePath:
    """Dispatch to the generator for the spec's family."""
    if isinstance(spec, LinearProcessSpec):
        return generate_linear(spec, n, seed, **kwargs)
    return generate_iterated(spec, n, seed, **kwargs)


def generate_batch(
    spec: ProcessSpec,
    n: int,
    seed: int,
    streams: Sequence[tuple[int, ...]],
    *,
    retain_innovations: bool = False,
) -> list[SamplePath]:
    """Generate one path per stream key.

    Each path is bit-identical to the single-path generator called with the
    same stream; iterated maps advance the whole block in one recursion.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if isinstance(spec, LinearProcessSpec):
        return [
            generate_linear(spec, n, seed, stream=key, retain_innovations=retain_innovations)
            for key in streams
        ]

    steps = spec.burn_in + n
    eps = np.empty((len(streams), steps))
    for row, key in enumerate(streams):
        eps[row] = draw_innovations(spec.innovations, derive_rng(seed, *key, role='history'), steps)
    trajectory = build_map(spec.dynamics).iterate(0.0, eps)
    digest = spec_fingerprint(spec)
    return [
        SamplePath(
            values=trajectory[row, spec.burn_in:],
            seed=seed,
            spec_fingerprint=digest,
            innovations=eps[row] if retain_innovations else None,
        )
        for row in range(len(streams))
    ]


def reconstruct(path: SamplePath, spec: ProcessSpec) -> np.ndarray:
    """Re-apply ``spec`` to the retained innovations of ``path``."""
    if path.innovations is None:
        raise ValueError('path has no retained innovations')
    if isinstance(spec, LinearProcessSpec):
        return apply_filter(coefficients(spec), path.innovations)
    trajectory = build_map(spec.dynamics).iterate(0.0, path.innovations)
    return trajectory[spec.burn_in:]


def sample_at(
    spec: ProcessSpec,
    times: Sequence[int],
    reps: int,
    seed: int,
    *,
    index: tuple[int, ...] = (),
    chunk: int = 1024,
) -> np.ndarray:
    """Values of ``reps`` independent paths at the given time indices.

    Args:
        spec: Process recipe
        times: Time indices t >= 1
        reps: Number of independent paths
        seed: Experiment seed
        index: Prefix for the per-replicate stream keys
        chunk: Replicates generated per block

    Returns:
        Array of shape (reps, len(times))
    """
    times = np.asarray(times, dtype=int)
    if times.min() < 1:
        raise ValueError('time indices must be >= 1')
    horizon = int(times.max())
    out = np.empty((reps, times.size))
    for start in range(0, reps, chunk):
        keys = [(*index, r) for r in range(start, min(start + chunk, reps))]
        paths = generate_batch(spec, horizon, seed, keys)
        out[start:start + len(keys)] = np.stack([p.values[times - 1] for p in paths])
    return out


def generate_coupled(
    spec: ProcessSpec,
    n: int,
    mode: str,
    seed: int,
    *,
    z0: float = 0.0,
    stream: tuple[int, ...] = (),
) -> CoupledPair:
    """Two paths sharing eps_1..eps_n with different pre-histories.

    Args:
        spec: Process recipe
        n: Path length after the coupling time
        mode: 'iid_prehistory' (independent pre-history for the shadow) or
            'fixed_prehistory' (shadow restarts from ``z0`` at time 0)
        seed: Experiment seed
        z0: Restart state for 'fixed_prehistory'
        stream: Replicate coordinates for the derived streams

    Returns:
        CoupledPair with coupling_time = 1

    Raises:
        UnsupportedModeError: fixed_prehistory on a linear spec
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if mode not in ('iid_prehistory', 'fixed_prehistory'):
        raise UnsupportedModeError(f"Unknown coupling mode '{mode}'")
    digest = spec_fingerprint(spec)
    future = draw_innovations(spec.innovations, derive_rng(seed, *stream, role='future'), n)

    if isinstance(spec, LinearProcessSpec):
        if mode == 'fixed_prehistory':
            raise UnsupportedModeError(
                'fixed_prehistory is not defined for linear specs; use truncate_linear instead'
            )
        a = coefficients(spec)
        m = spec.memory
        # eps_{-M}..eps_0 so X_0 is available as well
        history = draw_innovations(spec.innovations, derive_rng(seed, *stream, role='history'), m + 1)
        shadow_history = draw_innovations(
            spec.innovations, derive_rng(seed, *stream, role='shadow_history'), m + 1
        )
        primary_eps = np.concatenate([history, future])
        shadow_eps = np.concatenate([shadow_history, future])
        primary_all = apply_filter(a, primary_eps)
        shadow_all = apply_filter(a, shadow_eps)
        primary = SamplePath(primary_all[1:], seed, digest, primary_eps[1:])
        shadow = SamplePath(shadow_all[1:], seed, digest, shadow_eps[1:])
        return CoupledPair(primary, shadow, 1, mode, float(primary_all[0]), float(shadow_all[0]))

    step_map = build_map(spec.dynamics)
    history = draw_innovations(spec.innovations, derive_rng(seed, *stream, role='history'), spec.burn_in)
    x0 = float(step_map.iterate(0.0, history)[-1]) if spec.burn_in else 0.0
    if mode == 'iid_prehistory':
        shadow_history = draw_innovations(
            spec.innovations, derive_rng(seed, *stream, role='shadow_history'), spec.burn_in
        )
        x0_shadow = float(step_map.iterate(0.0, shadow_history)[-1]) if spec.burn_in else 0.0
        shadow_eps = np.concatenate([shadow_history, future])
    else:
        x0_shadow = float(z0)
        shadow_eps = future
    primary = SamplePath(step_map.iterate(x0, future), seed, digest, np.concatenate([history, future]))
    shadow = SamplePath(step_map.iterate(x0_shadow, future), seed, digest, shadow_eps)
    return CoupledPair(
        primary, shadow, 1, mode, x0, x0_shadow, z0=x0_shadow if mode == 'fixed_prehistory' else None
    )


def truncate_linear(spec: LinearProcessSpec, ell: int) -> LinearProcessSpec:
    """Finite-memory version with a_i zeroed for i >= ell (same innovations)."""
    if ell < 1:
        raise ValueError(f"ell must be >= 1, got {ell}")
    current = spec.cutoff if spec.cutoff is not None else spec.memory + 1
    if ell >= current:
        return spec
    return spec.model_copy(update={'cutoff': ell})


def truncation_bias(spec: LinearProcessSpec, ell: int) -> float:
    """E(X - X_tilde)^2 = sigma^2 sum_{i >= ell} a_i^2 over the truncated support."""
    a = coefficients(spec)
    return spec.innovations.variance * float(np.sum(a[ell:] ** 2))


def memory_tail_variance(spec: LinearProcessSpec) -> float:
    """sigma^2 sum_{i > M} a_i^2: the variance each X_t loses to the history cutoff M.

    Zero when a finite-memory cutoff already zeroes the tail.
    """
    m = spec.memory
    if spec.cutoff is not None and spec.cutoff <= m:
        return 0.0
    rule = spec.coefficients
    if isinstance(rule, ExplicitCoefficients):
        tail = math.fsum(v * v for v in rule.values[m + 1:])
    elif isinstance(rule, GeometricCoefficients):
        tail = rule.rho ** (2 * (m + 1)) / (1.0 - rule.rho ** 2)
    elif rule.slowly_varying == 'one':
        tail = float(special.zeta(2.0 * rule.beta, m + 1))
    else:
        # midpoint rule for the sum over i > M: int_{M+1/2}^inf x^{-2 beta} L(x)^2 dx,
        # mapped onto (0, 1] by x = c s^{-1/(2 beta - 1)}
        c = m + 0.5
        gamma = 2.0 * rule.beta - 1.0

        def squared_l(s):
            log_x = math.log(c) - math.log(s) / gamma
            log_l = log_x + math.log1p(math.e * math.exp(-log_x))  # log(e + x)
            return (log_l if rule.slowly_varying == 'log' else 1.0 / log_l) ** 2

        integral, _ = integrate.quad(squared_l, 0.0, 1.0, limit=200)
        tail = c ** -gamma / gamma * integral
    return spec.innovations.variance * tail


def covariance_fn(spec: LinearProcessSpec, lag: int) -> float:
    """Gamma(lag) = sigma^2 sum_i a_i a_{i+lag} over the truncated support.

    Raises:
        DomainError: Innovation law has infinite variance
    """
    if lag < 0:
        raise ValueError(f"lag must be non-negative, got {lag}")
    variance = spec.innovations.variance
    if not math.isfinite(variance):
        raise DomainError(f"{spec.innovations.law} innovations have infinite variance")
    a = coefficients(spec)
    if lag >= a.size:
        return 0.0
    return variance * float(np.dot(a[: a.size - lag], a[lag:]))


def autocovariances(spec: LinearProcessSpec, max_lag: int) -> np.ndarray:
    """Gamma(0..max_lag) in one pass (FFT correlation for long filters)."""
    a = coefficients(spec)
    variance = spec.innovations.variance
    if not math.isfinite(variance):
        raise DomainError(f"{spec.innovations.law} innovations have infinite variance")
    full = signal.correlate(a, a, mode='full', method='auto')[a.size - 1:]
    out = np.zeros(max_lag + 1)
    k = min(max_lag + 1, full.size)
    out[:k] = full[:k]
    return variance * out
