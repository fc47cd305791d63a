"""
Exact evaluation of U_n = sum_{1<=i,j<=n} w_{i-j} K(X_i, X_j) and its special cases.

The dense double sum is the reference; the banded and sorted methods are fast
paths that must agree with it (tested against it on random instances).
"""
import logging
import math

import numpy as np
from joblib import Parallel, delayed
from scipy import stats

from errors import UnsupportedModeError
from schema import COMPENSATED_SUM_THRESHOLD, SamplePath, SignedRankResult, UStatResult, fingerprint
from statistic.kernels import evaluate, is_indicator
from statistic.models import (
    ConstantOneWeights,
    IndicatorDistanceKernel,
    KernelSpec,
    WeightSpec,
)
from statistic.weights import lag_weights, support_radius

logger = logging.getLogger(__name__)

# Elements evaluated per dense row block
BLOCK_ELEMENTS = 1 << 20


def _unpack(path: SamplePath | np.ndarray) -> tuple[np.ndarray, str]:
    if isinstance(path, SamplePath):
        return path.values, path.fingerprint
    values = np.asarray(path, dtype=np.float64)
    if values.ndim != 1:
        raise ValueError('path must be one-dimensional')
    return values, fingerprint(values)


def _combine(partials: list[float], n: int) -> float:
    if n >= COMPENSATED_SUM_THRESHOLD:
        return math.fsum(partials)
    total = 0.0
    for part in partials:
        total += part
    return total


def _dense_block(x, lagged, kernel, include_diagonal, start, stop, compensated):
    n = x.size
    rows = np.arange(start, stop)
    cols = np.arange(n)
    w = lagged[rows[:, None] - cols[None, :] + n - 1]
    terms = w * evaluate(kernel, x[start:stop, None], x[None, :])
    if not include_diagonal:
        terms[rows - start, rows] = 0.0
    row_sums = terms.sum(axis=1)
    return math.fsum(row_sums) if compensated else float(row_sums.sum())


def compute_dense(
    path: SamplePath | np.ndarray,
    weights: WeightSpec,
    kernel: KernelSpec,
    include_diagonal: bool = True,
    *,
    n_jobs: int = 1,
) -> UStatResult:
    """Exact double sum over all ordered pairs.

    Row blocks may run in parallel; block partial sums are always combined in
    block order, so the result does not depend on the schedule.

    Args:
        path: X_1..X_n
        weights: Symmetric weights
        kernel: Symmetric kernel
        include_diagonal: Include i = j (the V-statistic convention)
        n_jobs: Worker threads for row blocks

    Returns:
        UStatResult with method 'dense'
    """
    x, digest = _unpack(path)
    n = x.size
    if n < 1:
        raise ValueError('path must contain at least one value')
    lagged = lag_weights(weights, np.arange(-(n - 1), n))
    block = max(1, BLOCK_ELEMENTS // n)
    bounds = [(s, min(s + block, n)) for s in range(0, n, block)]
    compensated = n >= COMPENSATED_SUM_THRESHOLD
    if n_jobs > 1 and len(bounds) > 1:
        partials = Parallel(n_jobs=n_jobs, prefer='threads')(
            delayed(_dense_block)(x, lagged, kernel, include_diagonal, s, e, compensated) for s, e in bounds
        )
    else:
        partials = [_dense_block(x, lagged, kernel, include_diagonal, s, e, compensated) for s, e in bounds]
    return UStatResult(
        value=_combine(list(partials), n),
        n=n,
        include_diagonal=include_diagonal,
        path_fingerprint=digest,
        method='dense',
    )


def compute_banded(
    path: SamplePath | np.ndarray,
    weights: WeightSpec,
    kernel: KernelSpec,
    include_diagonal: bool = True,
) -> UStatResult:
    """U_n for finitely supported weights in O(n m).

    Raises:
        UnsupportedModeError: The weights have unbounded support
    """
    radius = support_radius(weights)
    if radius is None:
        raise UnsupportedModeError(f"{weights.kind} weights have unbounded support; use compute_dense")
    x, digest = _unpack(path)
    n = x.size
    if n < 1:
        raise ValueError('path must contain at least one value')
    w = lag_weights(weights, np.arange(0, radius + 1))
    partials = []
    if include_diagonal and w[0] != 0.0:
        partials.append(w[0] * float(evaluate(kernel, x, x).sum()))
    for k in range(1, min(radius, n - 1) + 1):
        if w[k] != 0.0:
            partials.append(2.0 * w[k] * float(evaluate(kernel, x[:-k], x[k:]).sum()))
    return UStatResult(
        value=_combine(partials, n),
        n=n,
        include_diagonal=include_diagonal,
        path_fingerprint=digest,
        method='banded',
    )


def _close_pair_count(x: np.ndarray, b: float) -> int:
    """Ordered pairs i != j with |x_i - x_j| < b, using the exact float predicate."""
    s = np.sort(x)
    n = s.size
    idx = np.arange(n)
    # first position j >= i with s[j] - s[i] >= b; searchsorted gives a start, the
    # loops settle rounding disagreements between s[i] + b and s[j] - s[i]
    hi = np.maximum(np.searchsorted(s, s + b, side='left'), idx + 1)
    while True:
        inside = hi < n
        grow = inside.copy()
        grow[inside] = s[hi[inside]] - s[idx[inside]] < b
        if not grow.any():
            break
        hi[grow] += 1
    while True:
        back = hi - 1 > idx
        shrink = back.copy()
        shrink[back] = s[hi[back] - 1] - s[idx[back]] >= b
        if not shrink.any():
            break
        hi[shrink] -= 1
    return int(2 * np.sum(hi - idx - 1))


def correlation_integral(path: SamplePath | np.ndarray, b: float) -> UStatResult:
    """N_b = number of ordered pairs (i, j), diagonal included, with |X_i - X_j| < b.

    Sorting plus a window search makes this O(n log n); the count equals
    compute_dense with constant_one weights and indicator_distance(b).
    """
    if b <= 0:
        raise ValueError(f"b must be positive, got {b}")
    x, digest = _unpack(path)
    n = x.size
    count = _close_pair_count(x, b) + n
    return UStatResult(
        value=float(count),
        n=n,
        include_diagonal=True,
        path_fingerprint=digest,
        method='sorted_indicator',
    )


def _positive_sum_count(x: np.ndarray) -> tuple[int, int]:
    """(ordered pairs i, j incl. i = j with x_i + x_j > 0, diagonal count)."""
    s = np.sort(x)
    # x_i + x_j > 0 exactly iff x_j > -x_i
    above = s.size - np.searchsorted(s, -s, side='right')
    return int(above.sum()), int(np.count_nonzero(x > 0))


def _sorted_indicator(x, digest, kernel, include_diagonal) -> UStatResult:
    n = x.size
    if isinstance(kernel, IndicatorDistanceKernel):
        count = _close_pair_count(x, kernel.b) + (n if include_diagonal else 0)
    else:
        ordered, diagonal = _positive_sum_count(x)
        count = ordered if include_diagonal else ordered - diagonal
    return UStatResult(
        value=float(count),
        n=n,
        include_diagonal=include_diagonal,
        path_fingerprint=digest,
        method='sorted_indicator',
    )


def compute(
    path: SamplePath | np.ndarray,
    weights: WeightSpec,
    kernel: KernelSpec,
    include_diagonal: bool = True,
    *,
    n_jobs: int = 1,
) -> UStatResult:
    """Evaluate U_n with the fastest exact method available for (weights, kernel)."""
    x, digest = _unpack(path)
    if isinstance(weights, ConstantOneWeights) and is_indicator(kernel):
        return _sorted_indicator(x, digest, kernel, include_diagonal)
    if support_radius(weights) is not None:
        return compute_banded(x, weights, kernel, include_diagonal)
    return compute_dense(x, weights, kernel, include_diagonal, n_jobs=n_jobs)


def signed_rank(path: SamplePath | np.ndarray) -> SignedRankResult:
    """W_n = sum_i sign(X_i) R_i^+ with R_i^+ the rank of |X_i|.

    sign(0) is taken as +1. Ties in |X_i| are broken by index and flagged.
    Without ties or zeros the Wilcoxon pair count satisfies
    sum_{i<=j} 1(X_i + X_j > 0) = (W_n + n(n+1)/2) / 2.
    """
    x, _ = _unpack(path)
    n = x.size
    if n < 1:
        raise ValueError('path must contain at least one value')
    magnitude = np.abs(x)
    ranks = stats.rankdata(magnitude, method='ordinal')
    ties = np.unique(magnitude).size < n
    if ties:
        logger.warning(f"signed_rank: ties among |X_i| (n={n}) broken by index")
    signs = np.where(x >= 0, 1, -1)
    ordered, diagonal = _positive_sum_count(x)
    return SignedRankResult(
        value=float(np.sum(signs * ranks)),
        n=n,
        pair_count=(ordered + diagonal) // 2,
        ties_broken=bool(ties),
    )
