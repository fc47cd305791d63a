"""
Squared norms of the multiple Wiener-Ito limits

    I_r = int_{u_1 > ... > u_r} [ int_0^1 prod_s (x - u_s)_+^{-beta} dx ]^2 du.

r = 1 is integrated directly over u with the inner integral in closed form.
For r >= 2 the u-integral is reduced with stationarity to a function of
d = |x - y|, then integrated by adaptive quadrature (r = 2) or scrambled Sobol
points (r > 2). The Beta-function identity is reported alongside as a check.
"""
import logging
import math

import numpy as np
from scipy import integrate, special
from scipy.stats import qmc

from errors import DomainError, UnsupportedModeError
from longmem.models import LimitVariance
from processes.streams import derive_rng

logger = logging.getLogger(__name__)

QMC_POINTS_LOG2 = 14
QMC_SCRAMBLES = 16


def _check_integrable(beta: float, r: int) -> float:
    if not 0.5 < beta < 1.0:
        raise DomainError(f"beta must lie in (1/2, 1), got {beta}")
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    gamma = 2.0 * beta - 1.0
    if r * gamma >= 1.0:
        raise DomainError(f"r(2 beta - 1) = {r * gamma:.4g} >= 1: the limit integral diverges")
    return gamma


def beta_identity_integral(beta: float, r: int) -> float:
    """B(1 - beta, 2 beta - 1)^r / r! * 2 / ((1 - r gamma)(2 - r gamma)), gamma = 2 beta - 1."""
    gamma = _check_integrable(beta, r)
    rg = r * gamma
    return special.beta(1.0 - beta, gamma) ** r / math.factorial(r) * 2.0 / ((1.0 - rg) * (2.0 - rg))


def inner_integral(beta: float, u: float) -> float:
    """int_0^1 (x - u)_+^{-beta} dx for u < 1."""
    if u >= 1.0:
        return 0.0
    return ((1.0 - u) ** (1.0 - beta) - max(-u, 0.0) ** (1.0 - beta)) / (1.0 - beta)


def _direct_first_order(beta: float) -> tuple[float, float]:
    one = 1.0 - beta

    def near(t):
        # u = -t in [-1, 0]
        return inner_integral(beta, -t) ** 2

    def far(v):
        # u = -1/v; the v^{2 beta - 2} factor goes to the quadrature weight
        if v == 0.0:
            return 1.0
        return (math.expm1(one * math.log1p(v)) / (one * v)) ** 2

    inside, e1 = integrate.quad(lambda u: inner_integral(beta, u) ** 2, 0.0, 1.0)
    left, e2 = integrate.quad(near, 0.0, 1.0, limit=200)
    tail, e3 = integrate.quad(far, 0.0, 1.0, weight='alg', wvar=(2.0 * beta - 2.0, 0.0))
    return inside + left + tail, e1 + e2 + e3


def _kernel_constant(beta: float) -> tuple[float, float]:
    """k = int_0^inf s^{-beta} (1 + s)^{-beta} ds, split at s = 1."""
    head, e1 = integrate.quad(lambda s: (1.0 + s) ** -beta, 0.0, 1.0, weight='alg', wvar=(-beta, 0.0))
    tail, e2 = integrate.quad(lambda v: (1.0 + v) ** -beta, 0.0, 1.0, weight='alg', wvar=(2.0 * beta - 2.0, 0.0))
    return head + tail, e1 + e2


def _reduced_quad(beta: float, r: int, gamma: float) -> tuple[float, float]:
    """I_r = 2 k^r / r! int_0^1 (1 - d) d^{-r gamma} dd.

    The stationarity reduction leaves only endpoint power singularities, which the
    quadrature's algebraic weights absorb exactly, so no v = (x - u)^{1 - beta}
    change of variables is applied.
    """
    k, ek = _kernel_constant(beta)
    d_int, ed = integrate.quad(lambda d: 1.0 - d, 0.0, 1.0, weight='alg', wvar=(-r * gamma, 0.0))
    value = 2.0 * k ** r * d_int / math.factorial(r)
    return value, value * (r * ek / k + ed / d_int)


def _reduced_qmc(beta: float, r: int, gamma: float, seed: int) -> tuple[float, float]:
    k, _ = _kernel_constant(beta)
    estimates = []
    for s in range(QMC_SCRAMBLES):
        sampler = qmc.Sobol(d=2, scramble=True, rng=derive_rng(seed, s, role='pilot'))
        pts = sampler.random_base2(QMC_POINTS_LOG2)
        d = np.abs(pts[:, 0] - pts[:, 1])
        d = np.maximum(d, np.finfo(float).tiny)
        estimates.append(float(np.mean((k * d ** -gamma) ** r)) / math.factorial(r))
    estimates = np.asarray(estimates)
    return float(estimates.mean()), float(estimates.std(ddof=1) / math.sqrt(QMC_SCRAMBLES))


def limit_variance(
    beta: float,
    r: int,
    weight_mode: str = 'summable',
    C: float = 1.0,
    labels: tuple[int, ...] | None = None,
    seed: int = 0,
) -> LimitVariance:
    """Numerical squared norm of the order-r limit, times C^2.

    Args:
        beta: Coefficient decay in (1/2, 1)
        r: Order, with r (2 beta - 1) < 1
        weight_mode: 'summable' (constant C) or 'constant_one' (double x-integral)
        C: Constant in front of the limit
        labels: For constant_one, which of x_1/x_2 each u_s attaches to.
            Equal labels reduce to I_r; mixed labels are supported for r = 2.
        seed: Seed for the QMC scrambles (r > 2)

    Raises:
        DomainError: r (2 beta - 1) >= 1 or beta outside (1/2, 1)
    """
    gamma = _check_integrable(beta, r)
    if weight_mode not in ('summable', 'constant_one'):
        raise ValueError(f"Unknown weight mode '{weight_mode}'")
    closed = beta_identity_integral(beta, r)
    mixed = weight_mode == 'constant_one' and labels is not None and len(set(labels)) > 1
    if labels is not None and len(labels) != r:
        raise ValueError(f"labels must have length r={r}, got {labels}")

    if mixed:
        if r != 2:
            raise UnsupportedModeError('mixed x-labels are only implemented for r = 2')
        # the double x-integral factorises into two first-order integrals
        first, err = _direct_first_order(beta)
        value, error, method = 0.5 * first * first, first * err, 'quad'
        closed = 0.5 * beta_identity_integral(beta, 1) ** 2
    elif r == 1:
        value, error = _direct_first_order(beta)
        method = 'quad'
    elif r == 2:
        value, error = _reduced_quad(beta, r, gamma)
        method = 'quad'
    else:
        value, error = _reduced_qmc(beta, r, gamma, seed)
        method = 'qmc'

    scale = C * C
    logger.info(f"I_{r}(beta={beta}) = {value:.8g} +/- {error:.2g} by {method}; identity gives {closed:.8g}")
    return LimitVariance(
        r=r,
        beta=beta,
        weight_mode=weight_mode,
        C=C,
        value=scale * value,
        error=scale * error,
        method=method,
        closed_form=scale * closed,
    )
