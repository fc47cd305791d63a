"""Weights, kernels and the exact U-statistic engine."""

from statistic.engine import compute, compute_banded, compute_dense, correlation_integral, signed_rank
from statistic.kernels import evaluate, mean_estimate
from statistic.models import KernelSpec, WeightSpec
from statistic.weights import diagnose, lag_weights, normalizer, window_sum

__all__ = [
    "KernelSpec",
    "WeightSpec",
    "compute",
    "compute_banded",
    "compute_dense",
    "correlation_integral",
    "diagnose",
    "evaluate",
    "lag_weights",
    "mean_estimate",
    "normalizer",
    "signed_rank",
    "window_sum",
]
