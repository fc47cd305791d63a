"""Long-memory decomposition: rates, leading terms and limit variances."""

from longmem.decomposition import (
    condition27_check,
    predicted_variance,
    rate_exponent,
    wilcoxon_derivative,
    z_term_covariance,
    z_term_for_path,
    z_term_wilcoxon,
)
from longmem.models import LongMemCase
from longmem.quadrature import beta_identity_integral, limit_variance

__all__ = [
    "LongMemCase",
    "beta_identity_integral",
    "condition27_check",
    "limit_variance",
    "predicted_variance",
    "rate_exponent",
    "wilcoxon_derivative",
    "z_term_covariance",
    "z_term_for_path",
    "z_term_wilcoxon",
]
