"""Monte Carlo CLT harness: replicates, standardization, normality and rate checks."""

from harness.models import ExperimentConfig, TestReport
from harness.runner import run_experiment, summarize
from harness.stats import normality_tests, variance_slope

__all__ = [
    "ExperimentConfig",
    "TestReport",
    "normality_tests",
    "run_experiment",
    "summarize",
    "variance_slope",
]
