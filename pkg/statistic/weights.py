"""
Symmetric weights w_k, the normalizers W_n(i) and W_n, and side-condition diagnostics.
"""
import logging
import math

import numpy as np
import pandas as pd

from statistic.models import (
    ConstantOneWeights,
    CurvePoint,
    DeltaWeights,
    ExplicitWeights,
    GeometricWeights,
    PowerWeights,
    TowerWeights,
    WeightDiagnostics,
    WeightSpec,
)

logger = logging.getLogger(__name__)

# Trend thresholds for the finite-grid verdicts
SUMMABLE_GROWTH = 0.05
LIMINF_FLOOR = 0.05
RATIO_SLOPE = -0.25


def _tower(k: np.ndarray) -> np.ndarray:
    out = np.zeros(k.shape)
    level, position = 0, 2
    top = int(k.max()) if k.size else 0
    while position <= top:
        out[k == position] = float(2 ** level)
        level += 1
        position = 2 ** (2 ** level)
    return out


def lag_weights(spec: WeightSpec, lags: np.ndarray | int) -> np.ndarray:
    """Vectorised w_k; symmetric in k by construction (only |k| is used)."""
    k = np.abs(np.asarray(lags, dtype=np.int64))
    if isinstance(spec, DeltaWeights):
        return (k == spec.k0).astype(np.float64)
    if isinstance(spec, ConstantOneWeights):
        return np.ones(k.shape)
    if isinstance(spec, PowerWeights):
        return spec.c * (1.0 + k) ** (-spec.beta_w)
    if isinstance(spec, GeometricWeights):
        return spec.q ** k.astype(np.float64)
    if isinstance(spec, ExplicitWeights):
        values = np.asarray(spec.values, dtype=np.float64)
        out = np.zeros(k.shape)
        inside = k < values.size
        out[inside] = values[k[inside]]
        return out
    if isinstance(spec, TowerWeights):
        return _tower(k)
    raise ValueError(f"Unknown weight kind {spec!r}")


def weight(spec: WeightSpec, k: int) -> float:
    """w_k = w_{-k}."""
    return float(lag_weights(spec, np.array([k]))[0])


def support_radius(spec: WeightSpec) -> int | None:
    """Largest |k| with w_k possibly nonzero, or None when the support is unbounded."""
    if isinstance(spec, DeltaWeights):
        return spec.k0
    if isinstance(spec, ExplicitWeights):
        return len(spec.values) - 1
    return None


def window_sum(spec: WeightSpec, i: int, n: int) -> float:
    """W_n(i) = sum_{j=1}^n w_{i-j}, summed exactly.

    Raises:
        ValueError: i outside [1, n]
    """
    if not 1 <= i <= n:
        raise ValueError(f"i must lie in [1, {n}], got {i}")
    lags = i - np.arange(1, n + 1)
    return math.fsum(lag_weights(spec, lags))


def window_sums(spec: WeightSpec, n: int) -> np.ndarray:
    """W_n(1..n) via prefix sums over w_{-(n-1)}..w_{n-1}."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    lagged = lag_weights(spec, np.arange(-(n - 1), n))
    prefix = np.concatenate([[0.0], np.cumsum(lagged)])
    i = np.arange(1, n + 1)
    return prefix[i + n - 1] - prefix[i - 1]


def normalizer(spec: WeightSpec, n: int) -> float:
    """W_n = [sum_{i=1}^n W_n(i)^2 / n]^{1/2}."""
    sums = window_sums(spec, n)
    return math.sqrt(math.fsum(sums * sums) / n)


def _grid(n_max: int) -> list[int]:
    grid = [2 ** p for p in range(4, int(math.log2(n_max)) + 1)]
    if grid[-1] != n_max:
        grid.append(n_max)
    return grid


def _tail_slope(grid: list[int], values: list[float]) -> float:
    half = max(len(grid) // 2, min(3, len(grid)))
    x = np.log(np.asarray(grid[-half:], dtype=np.float64))
    y = np.asarray(values[-half:], dtype=np.float64)
    if np.any(~np.isfinite(y)) or np.any(y <= 0):
        return math.nan
    return float(np.polyfit(x, np.log(y), 1)[0])


def diagnose(spec: WeightSpec, n_max: int) -> WeightDiagnostics:
    """Trend diagnostics for summability and the nonsummable-weight side conditions.

    Verdicts come from the last half of a geometric grid and are reported,
    never asserted: the conditions are asymptotic.
    """
    if n_max < 16:
        raise ValueError(f"n_max must be >= 16, got {n_max}")
    grid = _grid(n_max)
    logger.info(f"Diagnosing {spec.kind} weights on {len(grid)} grid points up to n={n_max}")

    abs_sums, wn_values, ratios, proxies = [], [], [], []
    for n in grid:
        k = np.arange(0, n + 1)
        w = lag_weights(spec, k)
        one_sided = math.fsum(np.abs(w))
        abs_sums.append(2.0 * one_sided - abs(w[0]))
        wn = normalizer(spec, n)
        wn_values.append(wn)
        numerator = math.fsum((n - k) * w * w)
        if numerator == 0.0:
            ratios.append(0.0)
        else:
            ratios.append(numerator / (n * wn * wn) if wn > 0 else math.inf)
        proxies.append(wn / one_sided if one_sided > 0 else 0.0)

    half = max(len(grid) // 2, 1)
    mid_sum = abs_sums[-half - 1] if len(abs_sums) > half else abs_sums[0]
    summable = mid_sum > 0 and abs_sums[-1] / mid_sum - 1.0 < SUMMABLE_GROWTH or abs_sums[-1] == 0.0
    liminf_positive = min(proxies[-half:]) > LIMINF_FLOOR
    if all(r == 0.0 for r in ratios[-half:]):
        ratio_vanishes = True
    else:
        slope = _tail_slope(grid, ratios)
        ratio_vanishes = bool(math.isfinite(slope) and slope < RATIO_SLOPE)

    flags = []
    if not summable and not ratio_vanishes:
        flags.append('ratio_T3 does not trend to 0 although sum |w_i| diverges')
    if not summable and not liminf_positive:
        flags.append('W_n / sum |w_i| approaches 0')
    for flag in flags:
        logger.warning(f"{spec.kind} weights: {flag}")

    def curve(values):
        return [CurvePoint(n=n, value=v) for n, v in zip(grid, values)]

    return WeightDiagnostics(
        abs_partial_sums=curve(abs_sums),
        Wn_curve=curve(wn_values),
        ratio_T3=curve(ratios),
        liminf_proxy=curve(proxies),
        summable=bool(summable),
        liminf_positive=bool(liminf_positive),
        ratio_vanishes=ratio_vanishes,
        flags=flags,
    )


def diagnostics_frame(diag: WeightDiagnostics) -> pd.DataFrame:
    """CSV layout: n, abs_sum, W_n, ratio_T3, liminf_proxy."""
    return pd.DataFrame({
        'n': [p.n for p in diag.Wn_curve],
        'abs_sum': [p.value for p in diag.abs_partial_sums],
        'W_n': [p.value for p in diag.Wn_curve],
        'ratio_T3': [p.value for p in diag.ratio_T3],
        'liminf_proxy': [p.value for p in diag.liminf_proxy],
    })
