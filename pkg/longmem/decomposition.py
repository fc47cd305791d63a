"""
Long-memory decomposition of U_n for the sample covariance and Wilcoxon examples:
rate exponents, the Gaussian derivative constant, the leading terms Z_{n,r},
finite-n variance predictions and the expansion-order convergence check.
"""
import logging
import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import stats

from errors import BoundaryCaseError, DomainError
from longmem.models import Condition27Diagnostic, DecompositionTerm, LongMemCase
from longmem.quadrature import limit_variance
from processes.generate import autocovariances, coefficients, covariance_fn, slowly_varying
from processes.models import LinearProcessSpec, RegvarCoefficients
from schema import SamplePath

logger = logging.getLogger(__name__)

RATE_CASES = ('clt_summable', 'clt_w1_theorem11', 'correlation_integral')
ROW_CHUNK = 256

# L catalog entries for which sum_n |L(n)|^{rho+1} / n converges
_BOUNDARY_CONVERGENT = {'inv_log'}


def rate_exponent(case: LongMemCase | str) -> float:
    """Growth exponent of the standard deviation of U_n - EU_n.

    Raises:
        BoundaryCaseError: sample_covariance at beta = 3/4
    """
    if isinstance(case, str):
        if case == 'clt_summable':
            return 0.5
        if case in ('clt_w1_theorem11', 'correlation_integral'):
            return 1.5
        raise ValueError(f"Unknown rate case '{case}', expected a LongMemCase or one of {RATE_CASES}")
    if case.example == 'wilcoxon':
        return 2.5 - case.beta
    if math.isclose(case.beta, 0.75, abs_tol=1e-12):
        raise BoundaryCaseError('sample_covariance at beta = 3/4 sits between the two regimes')
    return 2.0 - 2.0 * case.beta if case.beta < 0.75 else 0.5


def wilcoxon_derivative(rho_t: float) -> float:
    """phi(0) / sqrt(2 (1 + rho_t)): derivative of P(X_i + X_j > -x) at 0 for unit-variance X.

    Raises:
        DomainError: rho_t outside (-1, 1]
    """
    if not -1.0 < rho_t <= 1.0:
        raise DomainError(f"correlation must lie in (-1, 1], got {rho_t}")
    return stats.norm.pdf(0.0) / math.sqrt(2.0 * (1.0 + rho_t))


def z_term_covariance(
    innovations: np.ndarray | None,
    coeffs: np.ndarray,
    n: int,
    lag: int,
    second_moment: float | None = None,
) -> DecompositionTerm:
    """Z_{n,2} = 8 E(X_1^2) sum_{i=1}^{n-k} sum_{j1 > j2} a_{i-j1} a_{i+k-j2} eps_{j1} eps_{j2}.

    Args:
        innovations: eps_{-M+1}..eps_n, oldest first (M + 1 = len(coeffs))
        coeffs: a_0..a_M
        n: Path length
        lag: k >= 2
        second_moment: E(X_1^2); defaults to sum a_i^2 (unit-variance innovations)

    Raises:
        ValueError: Missing or too short innovations, or lag < 2
    """
    if innovations is None:
        raise ValueError('z_term_covariance needs the retained innovations')
    if lag < 2:
        raise ValueError(f"lag must be >= 2, got {lag}")
    a = np.asarray(coeffs, dtype=np.float64)
    m = a.size - 1
    eps = np.asarray(innovations, dtype=np.float64)
    if eps.size < m + n:
        raise ValueError(f"need {m + n} innovations for n={n}, M={m}; got {eps.size}")
    if second_moment is None:
        second_moment = float(np.dot(a, a))

    # window d = 0..M covers j = i - M + d
    first = a[::-1]
    second = np.zeros(m + 1)
    if lag <= m:
        second[lag:] = a[m:lag - 1:-1]
    windows = sliding_window_view(eps, m + 1)
    partials = []
    for start in range(0, max(n - lag, 0), ROW_CHUNK):
        block = windows[start:min(start + ROW_CHUNK, n - lag)]
        late = block * first
        early = block * second
        below = np.cumsum(early, axis=1) - early
        partials.append(float(np.sum(late * below)))
    value = 8.0 * second_moment * math.fsum(partials)
    return DecompositionTerm(r=2, value=value, description=f"Z_(n,2) of the lag-{lag} sample covariance")


def z_term_for_path(path: SamplePath, spec: LinearProcessSpec, lag: int) -> DecompositionTerm:
    """Z_{n,2} for a generated path, with E(X_1^2) from the process covariance."""
    term = z_term_covariance(path.innovations, coefficients(spec), path.n, lag, covariance_fn(spec, 0))
    if isinstance(spec.coefficients, RegvarCoefficients):
        term = term.model_copy(update={'normalizer_exponent': 2.0 - 2.0 * spec.coefficients.beta})
    return term


def z_term_wilcoxon(path: SamplePath, spec: LinearProcessSpec) -> DecompositionTerm:
    """Z_{n,1} = sum_{i,j} D(rho_{i-j}) (X_i + X_j) / sqrt(Gamma(0)) for the Wilcoxon kernel.

    D is ``wilcoxon_derivative``; the inner sums over j use prefix sums of D by lag.
    """
    n = path.n
    gamma = autocovariances(spec, n - 1)
    rho = np.clip(gamma / gamma[0], -1.0 + 1e-15, 1.0)
    d = stats.norm.pdf(0.0) / np.sqrt(2.0 * (1.0 + rho))
    prefix = np.concatenate([[0.0], np.cumsum(d)])
    i = np.arange(n)
    # sum_j D(|i - j|) over j = 0..n-1
    row = prefix[i + 1] + prefix[n - i] - d[0]
    value = 2.0 * float(np.dot(row, path.values)) / math.sqrt(gamma[0])
    exponent = 2.5 - spec.coefficients.beta if isinstance(spec.coefficients, RegvarCoefficients) else None
    return DecompositionTerm(r=1, value=value, normalizer_exponent=exponent,
                             description='Z_(n,1) of the Wilcoxon statistic')


def condition27_check(beta: float, rho: int, slowly_varying: str = 'one') -> Condition27Diagnostic:
    """Exponent -beta(rho+1) + rho/2 and the convergence verdict, decided by L on the boundary."""
    exponent = -beta * (rho + 1) + rho / 2.0
    boundary = math.isclose(exponent, -1.0, abs_tol=1e-12)
    if boundary:
        converges = slowly_varying in _BOUNDARY_CONVERGENT
    else:
        converges = exponent < -1.0
    return Condition27Diagnostic(
        beta=beta,
        rho=rho,
        slowly_varying=slowly_varying,
        exponent=exponent,
        boundary=boundary,
        converges=converges,
    )


def predicted_variance(case: LongMemCase, spec: LinearProcessSpec, n: int) -> float:
    """Leading-order Var(U_n) at finite n from the limit integrals.

    Wilcoxon: n^{5-2beta} L^2(n) (sigma^2 / Gamma(0)) I_1 / pi.
    Sample covariance (beta < 3/4): (8 Gamma(0) sigma^2)^2 n^{4-4beta} L^4(n) I_2.

    Raises:
        DomainError: Not a regvar spec matching ``case``, or sample covariance with beta >= 3/4
    """
    rule = spec.coefficients
    if not isinstance(rule, RegvarCoefficients):
        raise DomainError('variance predictions need regvar coefficients')
    if not math.isclose(rule.beta, case.beta) or rule.slowly_varying != case.slowly_varying:
        raise DomainError(f"case (beta={case.beta}, L={case.slowly_varying}) does not match the process")
    beta = case.beta
    ell = float(slowly_varying(case.slowly_varying, n))
    sigma2 = spec.innovations.variance
    gamma0 = covariance_fn(spec, 0)
    if case.example == 'wilcoxon':
        integral = limit_variance(beta, 1, 'constant_one').value
        return n ** (5.0 - 2.0 * beta) * ell ** 2 * sigma2 / gamma0 * integral / math.pi
    if beta >= 0.75:
        raise DomainError('the lag-k sample covariance has no second-order prediction for beta >= 3/4')
    integral = limit_variance(beta, 2).value
    return (8.0 * gamma0 * sigma2) ** 2 * n ** (4.0 - 4.0 * beta) * ell ** 4 * integral
