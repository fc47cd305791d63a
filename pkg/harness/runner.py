"""
CLT experiment runner: replicate U_n over an n grid, center, standardize and summarize.

Usage:
    uv run wustat clt --config presets/correlation_integral.yaml --out results/correlation_integral
"""
import logging
import math

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from harness.models import AnalyticCentering, ExperimentConfig, NSummary, TestReport
from harness.stats import MIN_NORMALITY_SAMPLE, MIN_SLOPE_REPLICATES, normality_tests, variance_slope
from longmem.decomposition import rate_exponent, z_term_for_path, z_term_wilcoxon
from processes.generate import autocovariances, coefficients, generate_batch
from processes.models import LinearProcessSpec, RegvarCoefficients
from processes.streams import stream_id
from schema import ReplicateResult
from statistic.engine import compute
from statistic.models import (
    AdditiveKernel,
    ConstantOneWeights,
    DeltaWeights,
    IndicatorDistanceKernel,
    ProductKernel,
    WilcoxonKernel,
    ZeroKernel,
)
from statistic.weights import lag_weights, normalizer

logger = logging.getLogger(__name__)

# Replicates per joblib task
BLOCK = 16
# Centering MC standard error above this fraction of the statistic's sd is flagged
CENTER_NOISE_RATIO = 0.1


def _lag_multiplicity(n: int, include_diagonal: bool) -> np.ndarray:
    """Number of ordered pairs (i, j) at each lag k = 0..n-1."""
    mult = 2.0 * (n - np.arange(n))
    mult[0] = n if include_diagonal else 0.0
    return mult


def _pair_sum(config: ExperimentConfig, n: int, per_lag: np.ndarray) -> float:
    """sum_{i,j} w_{i-j} m(|i-j|) for a per-lag mean m."""
    w = lag_weights(config.weights, np.arange(n))
    return math.fsum(_lag_multiplicity(n, config.include_diagonal) * w * per_lag)


def _zero_mean(spec) -> bool:
    return isinstance(spec, LinearProcessSpec) and spec.innovations.law != 'bernoulli_half'


def analytic_center(config: ExperimentConfig, n: int) -> float | None:
    """E U_n from the closed-form catalog, or None when the pair is not covered."""
    process, kernel = config.process, config.kernel
    if isinstance(kernel, ZeroKernel):
        return 0.0
    if isinstance(kernel, WilcoxonKernel) and _zero_mean(process) and process.innovations.symmetric:
        return _pair_sum(config, n, np.full(n, 0.5))
    if isinstance(kernel, IndicatorDistanceKernel) and isinstance(process, LinearProcessSpec):
        a = coefficients(process)
        if process.innovations.law == 'uniform_symmetric' and np.count_nonzero(a) == 1:
            half_width = float(np.abs(a).max()) * process.innovations.scale
            u = kernel.b / (2.0 * half_width)
            p = 1.0 if u >= 1.0 else 2.0 * u - u * u
            per_lag = np.full(n, p)
            per_lag[0] = 1.0
            return _pair_sum(config, n, per_lag)
        return None
    if not _zero_mean(process):
        return None
    gamma = autocovariances(process, n - 1)
    if isinstance(kernel, ProductKernel) and kernel.transform == 'identity':
        return _pair_sum(config, n, gamma)
    if isinstance(kernel, AdditiveKernel):
        return 0.0 if kernel.transform == 'identity' else _pair_sum(config, n, np.full(n, gamma[0]))
    if isinstance(kernel, ProductKernel) and process.innovations.law == 'standard_normal':
        return _pair_sum(config, n, gamma[0] ** 2 + 2.0 * gamma ** 2)
    return None


def resolve_exponent(config: ExperimentConfig) -> float | None:
    """Rate exponent of the sd of U_n, or None when the scale comes from the weights."""
    rate = config.rate
    if rate.source == 'exponent':
        return rate.exponent
    if rate.source == 'weights':
        return None
    return rate_exponent(rate.longmem if rate.case == 'longmem' else rate.case)


def _scale(config: ExperimentConfig, n: int, exponent: float | None) -> float:
    if exponent is None:
        return math.sqrt(n) * normalizer(config.weights, n)
    return float(n) ** exponent


def _dominance_kind(config: ExperimentConfig) -> str | None:
    process = config.process
    if not config.dominance_probe or not isinstance(process, LinearProcessSpec):
        return None
    if not isinstance(process.coefficients, RegvarCoefficients):
        return None
    kernel, weights = config.kernel, config.weights
    if isinstance(kernel, ProductKernel) and kernel.transform == 'square' and isinstance(weights, DeltaWeights):
        return 'covariance' if weights.k0 >= 2 else None
    if isinstance(kernel, WilcoxonKernel) and isinstance(weights, ConstantOneWeights):
        return 'wilcoxon'
    return None


def _replicate_block(config: ExperimentConfig, g: int, n: int, reps: range, probe: str | None) -> list[tuple]:
    """(raw, z_term) for replicates ``reps`` at grid index g."""
    keys = [(g, r) for r in reps]
    paths = generate_batch(config.process, n, config.seed, keys, retain_innovations=probe == 'covariance')
    out = []
    for path in paths:
        raw = compute(path, config.weights, config.kernel, config.include_diagonal).value
        z = None
        if probe == 'covariance':
            z = z_term_for_path(path, config.process, config.weights.k0).value
        elif probe == 'wilcoxon':
            z = z_term_wilcoxon(path, config.process).value
        out.append((raw, z))
    return out


def _raw_values(config: ExperimentConfig, g: int, n: int, reps: range, probe, n_jobs: int) -> list[tuple]:
    blocks = [range(s, min(s + BLOCK, reps.stop)) for s in range(reps.start, reps.stop, BLOCK)]
    if n_jobs > 1 and len(blocks) > 1:
        parts = Parallel(n_jobs=n_jobs)(delayed(_replicate_block)(config, g, n, b, probe) for b in blocks)
    else:
        parts = [_replicate_block(config, g, n, b, probe) for b in blocks]
    return [item for part in parts for item in part]


def run_experiment(config: ExperimentConfig, *, n_jobs: int = 1) -> list[ReplicateResult]:
    """R x |n_grid| standardized replicates, deterministic in (config, seed).

    Replicate r at grid index g uses stream (seed, g, r); Monte Carlo centering
    uses the streams (seed, g, R + c) that follow.

    Args:
        config: Validated experiment
        n_jobs: joblib workers for replicate blocks

    Returns:
        Replicates ordered by n, then replicate index
    """
    exponent = resolve_exponent(config)
    probe = _dominance_kind(config)
    reps = config.replicates
    results: list[ReplicateResult] = []

    for g, n in enumerate(config.n_grid):
        logger.info(f"n={n}: {reps} replicates ({g + 1}/{len(config.n_grid)})")
        values = _raw_values(config, g, n, range(reps), probe, n_jobs)
        raw = np.array([v for v, _ in values])
        flags: list[str] = []

        center = None
        centering = config.centering
        if isinstance(centering, AnalyticCentering):
            if centering.values and n in centering.values:
                center = centering.values[n]
            else:
                center = analytic_center(config, n)
            if center is None:
                flags.append('no analytic mean for this process/kernel: Monte Carlo centering used')
                logger.warning(f"n={n}: {flags[-1]}")
        if center is None:
            center_reps = getattr(centering, 'center_reps', None) or 10 * reps
            extra = _raw_values(config, g, n, range(reps, reps + center_reps), None, n_jobs)
            draws = np.array([v for v, _ in extra])
            center = float(draws.mean())
            spread = float(raw.std(ddof=1)) if reps > 1 else 0.0
            noise = float(draws.std(ddof=1)) / math.sqrt(center_reps)
            if spread > 0 and noise / spread > CENTER_NOISE_RATIO:
                flags.append(f"centering noise {noise / spread:.3f} x statistic sd")
                logger.warning(f"n={n}: {flags[-1]}")

        scale = _scale(config, n, exponent)
        for r, (value, z) in enumerate(values):
            centered = value - center
            results.append(ReplicateResult(
                n=n,
                replicate=r,
                raw=value,
                centered=centered,
                standardized=centered / scale,
                stream_id=stream_id(config.seed, g, r, role='history'),
                center=center,
                scale=scale,
                z_term=z,
                flags=tuple(flags),
            ))
    return results


def summarize(config: ExperimentConfig, results: list[ReplicateResult]) -> TestReport:
    """Per-n moments and normality tests, the variance slope and dominance correlations."""
    exponent = resolve_exponent(config)
    per_n, flags = [], []
    for n in config.n_grid:
        rows = [r for r in results if r.n == n]
        standardized = np.array([r.standardized for r in rows])
        centered = np.array([r.centered for r in rows])
        normality = normality_tests(standardized) if len(rows) >= MIN_NORMALITY_SAMPLE else None
        corr = None
        if rows and rows[0].z_term is not None:
            z = np.array([r.z_term for r in rows])
            if z.std() > 0 and centered.std() > 0:
                corr = float(np.corrcoef(z, centered)[0, 1])
        per_n.append(NSummary(
            n=n,
            replicates=len(rows),
            center=rows[0].center,
            scale=rows[0].scale,
            mean=float(standardized.mean()),
            variance=float(standardized.var(ddof=1)) if len(rows) > 1 else 0.0,
            raw_variance=float(centered.var(ddof=1)) if len(rows) > 1 else 0.0,
            normality=normality,
            dominance_corr=corr,
        ))
        for flag in rows[0].flags:
            flags.append(f"n={n}: {flag}")

    slope = None
    if len(config.n_grid) >= 3 and config.replicates >= MIN_SLOPE_REPLICATES:
        if all(s.raw_variance > 0 for s in per_n):
            slope = variance_slope(results)
        else:
            flags.append('zero variance at some n: no variance slope')
    elif config.replicates < MIN_NORMALITY_SAMPLE:
        flags.append(f"replicates < {MIN_NORMALITY_SAMPLE}: normality tests and variance slope skipped")

    return TestReport(
        per_n=per_n,
        slope=slope,
        rate_exponent=exponent,
        scale_source='weights' if exponent is None else 'power',
        flags=flags,
    )


def replicates_frame(results: list[ReplicateResult]) -> pd.DataFrame:
    """replicates.csv: n, rep, raw, centered, standardized, stream_id, z_term."""
    return pd.DataFrame([r.to_dict() for r in results])


def qq_frame(report: TestReport) -> pd.DataFrame:
    """qq.csv: n, theoretical, sample."""
    rows = [
        {'n': s.n, 'theoretical': t, 'sample': q}
        for s in report.per_n if s.normality is not None
        for t, q in s.normality.qq
    ]
    return pd.DataFrame(rows, columns=['n', 'theoretical', 'sample'])


def with_seed(config: ExperimentConfig, seed: int) -> ExperimentConfig:
    """Copy of ``config`` under another experiment seed."""
    return config.model_copy(update={'seed': seed})
