"""Estimators for the contraction and dependence conditions of the CLTs."""

from diagnostics.contraction import (
    condition3_score,
    estimate_delta,
    estimate_gmc,
    estimate_theta,
    estimate_theta_tilde,
    probe_concentration,
    theta_grid,
)

__all__ = [
    "condition3_score",
    "estimate_delta",
    "estimate_gmc",
    "estimate_theta",
    "estimate_theta_tilde",
    "probe_concentration",
    "theta_grid",
]
