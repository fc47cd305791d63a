"""
Normality tests and variance-growth fits for CLT replicates.
"""
import logging
import math
from collections import defaultdict
from collections.abc import Iterable, Sequence

import numpy as np
from scipy import special, stats
from sklearn.linear_model import LinearRegression

from errors import DegenerateError
from harness.models import NormalityResult, SlopeFit
from schema import ReplicateResult

logger = logging.getLogger(__name__)

MIN_NORMALITY_SAMPLE = 100
MIN_SLOPE_REPLICATES = 100
LILLIEFORS_NOTE = 'normal parameters estimated from the sample: KS p-value is conservative'


def normality_tests(values: Sequence[float] | np.ndarray) -> NormalityResult:
    """KS distance to N(mean, variance) fitted from the sample, plus moments and QQ points.

    Raises:
        ValueError: Fewer than 100 values
    """
    x = np.asarray(values, dtype=np.float64)
    m = x.size
    if m < MIN_NORMALITY_SAMPLE:
        raise ValueError(f"normality tests need >= {MIN_NORMALITY_SAMPLE} values, got {m}")
    mean = float(x.mean())
    sd = float(x.std(ddof=1))
    if sd == 0.0 or not math.isfinite(sd):
        logger.warning(f"normality_tests: {m} constant values, reporting KS distance 1")
        return NormalityResult(
            count=m, mean=mean, variance=0.0, ks_distance=1.0, ks_pvalue=0.0,
            skewness=0.0, excess_kurtosis=0.0, degenerate=True,
            flags=['all values equal: degenerate sample'],
        )

    distance = float(stats.kstest(x, 'norm', args=(mean, sd)).statistic)
    pvalue = float(np.clip(special.kolmogorov(math.sqrt(m) * distance), 0.0, 1.0))
    z = np.sort((x - mean) / sd)
    theoretical = stats.norm.ppf((np.arange(1, m + 1) - 0.5) / m)
    return NormalityResult(
        count=m,
        mean=mean,
        variance=sd * sd,
        ks_distance=distance,
        ks_pvalue=pvalue,
        skewness=float(stats.skew(x)),
        excess_kurtosis=float(stats.kurtosis(x)),
        flags=[LILLIEFORS_NOTE],
        qq=list(zip(theoretical.tolist(), z.tolist())),
    )


def variance_slope(results: Iterable[ReplicateResult]) -> SlopeFit:
    """Weighted least squares of log Var(U_n - center) on log n.

    Each log sample variance gets weight (R - 1) / 2, the inverse of its
    approximate variance 2 / (R - 1).

    Raises:
        ValueError: Fewer than 3 distinct n, or an n with fewer than 100 replicates
        DegenerateError: A sample variance of 0
    """
    grouped: dict[int, list[float]] = defaultdict(list)
    for result in results:
        grouped[result.n].append(result.centered)
    if len(grouped) < 3:
        raise ValueError(f"variance_slope needs >= 3 distinct n, got {len(grouped)}")

    ns, log_vars, weights = [], [], []
    for n in sorted(grouped):
        centered = np.asarray(grouped[n])
        if centered.size < MIN_SLOPE_REPLICATES:
            raise ValueError(f"n={n} has {centered.size} replicates, variance_slope needs >= {MIN_SLOPE_REPLICATES}")
        var = float(centered.var(ddof=1))
        if var <= 0.0:
            raise DegenerateError(f"sample variance is 0 at n={n}")
        ns.append(math.log(n))
        log_vars.append(math.log(var))
        weights.append((centered.size - 1) / 2.0)

    x = np.asarray(ns)
    y = np.asarray(log_vars)
    w = np.asarray(weights)
    model = LinearRegression()
    model.fit(x.reshape(-1, 1), y, sample_weight=w)
    slope = float(model.coef_[0])
    intercept = float(model.intercept_)

    x_bar = np.average(x, weights=w)
    sxx = float(np.sum(w * (x - x_bar) ** 2))
    residuals = y - model.predict(x.reshape(-1, 1))
    dof = x.size - 2
    resid_var = float(np.sum(w * residuals ** 2)) / dof
    y_bar = np.average(y, weights=w)
    sst = float(np.sum(w * (y - y_bar) ** 2))
    r_squared = 1.0 - float(np.sum(w * residuals ** 2)) / sst if sst > 0 else 1.0

    fit = SlopeFit(
        slope=slope,
        stderr=math.sqrt(resid_var / sxx),
        model_stderr=math.sqrt(1.0 / sxx),
        intercept=intercept,
        r_squared=r_squared,
        n_points=int(x.size),
    )
    logger.info(f"variance slope {fit.slope:.4f} +/- {fit.stderr:.3g} over {fit.n_points} n values")
    return fit
