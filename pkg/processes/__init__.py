"""Stationary process models: linear processes and iterated random functions."""

from processes.generate import (
    covariance_fn,
    generate_coupled,
    generate_iterated,
    generate_linear,
    truncate_linear,
)
from processes.models import InnovationSpec, IteratedMapSpec, LinearProcessSpec, ProcessSpec

__all__ = [
    "InnovationSpec",
    "IteratedMapSpec",
    "LinearProcessSpec",
    "ProcessSpec",
    "covariance_fn",
    "generate_coupled",
    "generate_iterated",
    "generate_linear",
    "truncate_linear",
]
