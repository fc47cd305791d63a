"""
Symmetric kernels K(x, y) from the catalog.

Boundaries use strict inequalities exactly as defined (|x - y| < b, x + y > 0).
Continuous laws never hit them, but Bernoulli-driven paths can: a pair at
distance exactly b, or x = -y, contributes 0.
"""
import logging

import numpy as np

from processes.generate import sample_at
from processes.models import ProcessSpec
from statistic.models import (
    AdditiveKernel,
    IndicatorDistanceKernel,
    KernelSpec,
    MeanEstimate,
    ProductKernel,
    WilcoxonKernel,
    ZeroKernel,
)

logger = logging.getLogger(__name__)

_TRANSFORMS = {
    'identity': lambda v: v,
    'square': lambda v: v * v,
}


def evaluate(kernel: KernelSpec, x: np.ndarray | float, y: np.ndarray | float) -> np.ndarray:
    """K(x, y) with numpy broadcasting; symmetric in (x, y) for every kind."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if isinstance(kernel, IndicatorDistanceKernel):
        return (np.abs(x - y) < kernel.b).astype(np.float64)
    if isinstance(kernel, ProductKernel):
        transform = _TRANSFORMS[kernel.transform]
        return transform(x) * transform(y)
    if isinstance(kernel, WilcoxonKernel):
        return (x + y > 0.0).astype(np.float64)
    if isinstance(kernel, AdditiveKernel):
        transform = _TRANSFORMS[kernel.transform]
        return (transform(x) + transform(y)) / 2.0
    if isinstance(kernel, ZeroKernel):
        return np.zeros(np.broadcast_shapes(x.shape, y.shape))
    raise ValueError(f"Unknown kernel kind {kernel!r}")


def eval(kernel: KernelSpec, x: float, y: float) -> float:  # noqa: A001
    """Scalar K(x, y)."""
    return float(evaluate(kernel, x, y))


def is_indicator(kernel: KernelSpec) -> bool:
    """Kernels taking values in {0, 1}; their U-statistics are integer counts."""
    return isinstance(kernel, (IndicatorDistanceKernel, WilcoxonKernel))


def mean_estimate(
    kernel: KernelSpec,
    process: ProcessSpec,
    gap: int,
    reps: int,
    seed: int,
) -> MeanEstimate:
    """Monte Carlo estimate of E K(X_1, X_{1+gap}) over independent stationary paths.

    Args:
        kernel: Kernel to average
        process: Process generating the pairs
        gap: Time separation (0 gives the diagonal mean E K(X, X))
        reps: Independent paths, at least 100
        seed: Experiment seed

    Returns:
        MeanEstimate with the standard error of the mean
    """
    if reps < 100:
        raise ValueError(f"mean_estimate needs reps >= 100, got {reps}")
    if gap < 0:
        raise ValueError(f"gap must be non-negative, got {gap}")
    values = sample_at(process, [1, 1 + gap], reps, seed)
    draws = evaluate(kernel, values[:, 0], values[:, 1])
    mean = float(np.mean(draws))
    stderr = float(np.std(draws, ddof=1) / np.sqrt(reps))
    logger.debug(f"E K at gap {gap}: {mean:.6g} +/- {stderr:.2g} ({reps} reps)")
    return MeanEstimate(value=mean, stderr=stderr, gap=gap, reps=reps)
