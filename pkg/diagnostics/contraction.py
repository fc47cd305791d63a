"""
Monte Carlo estimates of the dependence conditions behind the CLTs:
geometric-moment contraction, the coupling distance delta_ell, the projection
norms theta_{i,j}, the concentration condition and the weighted theta score.

Every estimate is deterministic given (seed, grids) and reports a standard error;
none of them proves a condition.
"""
import logging
import math
from collections.abc import Iterable, Sequence

import numpy as np
from sklearn.linear_model import LinearRegression

from diagnostics.models import (
    ConcentrationPoint,
    ConcentrationProbe,
    Condition3Score,
    DeltaCurve,
    DeltaPoint,
    GmcEstimate,
    MomentPoint,
    ThetaEstimate,
)
from errors import UnsupportedModeError
from processes.generate import coefficients, draw_innovations, generate_batch, sample_at, truncate_linear
from processes.maps import build_map
from processes.models import IteratedMapSpec, LinearProcessSpec, ProcessSpec
from processes.streams import derive_rng
from statistic.kernels import evaluate
from statistic.models import KernelSpec, WeightSpec
from statistic.weights import lag_weights

logger = logging.getLogger(__name__)

DEFAULT_HORIZONS = tuple(range(1, 21))
DEFAULT_J_GRID = (1, 2, 4, 8, 16, 32, 256)
X_GRID_POINTS = 256
PILOT_REPS = 4096
CHUNK = 256


def _fit_log_linear(x: np.ndarray, y: np.ndarray, weights: np.ndarray | None = None) -> tuple[float, float]:
    """Slope and intercept of y on x, optionally weighted."""
    model = LinearRegression()
    model.fit(x.reshape(-1, 1), y, sample_weight=weights)
    return float(model.coef_[0]), float(model.intercept_)


def _std_with_error(diff: np.ndarray) -> tuple[float, float]:
    """Sample sd of ``diff`` and its delta-method standard error from the fourth moment."""
    reps = diff.size
    centred = diff - diff.mean()
    var = float(np.sum(centred ** 2) / (reps - 1))
    if var <= 0.0:
        return 0.0, 0.0
    m4 = float(np.mean(centred ** 4))
    var_se = math.sqrt(max(m4 - var * var, 0.0) / reps)
    sd = math.sqrt(var)
    return sd, var_se / (2.0 * sd)


def _check_increasing(grid: Sequence[int], name: str, minimum: int = 1) -> list[int]:
    values = [int(v) for v in grid]
    if not values:
        raise ValueError(f"{name} must not be empty")
    if values[0] < minimum or any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} must be strictly increasing integers >= {minimum}, got {values}")
    return values


def estimate_gmc(
    spec: IteratedMapSpec,
    alpha: float = 1.0,
    horizons: Sequence[int] = DEFAULT_HORIZONS,
    reps: int = 1000,
    seed: int = 0,
) -> GmcEstimate:
    """Fit E|X_t - X'_t|^alpha ~ C r^t from coupled pairs with independent pre-histories.

    Replicate r uses the same streams as ``generate_coupled(spec, ..., stream=(r,))``,
    advanced as one block; each pair is read at every horizon.

    Args:
        spec: Iterated map recipe
        alpha: Moment order
        horizons: Strictly increasing times t >= 1
        reps: Coupled pairs, at least 1000
        seed: Experiment seed

    Returns:
        GmcEstimate; degenerate (no fit) when fewer than two moments are positive
    """
    if not isinstance(spec, IteratedMapSpec):
        raise UnsupportedModeError('estimate_gmc needs an iterated map spec')
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if reps < 1000:
        raise ValueError(f"estimate_gmc needs reps >= 1000, got {reps}")
    horizons = _check_increasing(horizons, 'horizons')
    n = horizons[-1]
    step_map = build_map(spec.dynamics)
    times = np.asarray(horizons) - 1
    logger.info(f"GMC: {spec.dynamics.map}, alpha={alpha}, {reps} pairs, horizons up to {n}")

    moments = np.empty((reps, len(horizons)))
    lipschitz_sum = 0.0
    for start in range(0, reps, CHUNK):
        rows = range(start, min(start + CHUNK, reps))
        future = np.stack([draw_innovations(spec.innovations, derive_rng(seed, r, role='future'), n) for r in rows])
        history = np.stack([
            draw_innovations(spec.innovations, derive_rng(seed, r, role='history'), spec.burn_in) for r in rows
        ])
        shadow = np.stack([
            draw_innovations(spec.innovations, derive_rng(seed, r, role='shadow_history'), spec.burn_in)
            for r in rows
        ])
        x0 = step_map.iterate(0.0, history)[:, -1] if spec.burn_in else np.zeros(len(rows))
        x0_shadow = step_map.iterate(0.0, shadow)[:, -1] if spec.burn_in else np.zeros(len(rows))
        gap = np.abs(step_map.iterate(x0, future) - step_map.iterate(x0_shadow, future))
        moments[start:start + len(rows)] = gap[:, times] ** alpha
        lipschitz_sum += float((step_map.lipschitz(future) ** alpha).sum())

    means = moments.mean(axis=0)
    errors = moments.std(axis=0, ddof=1) / math.sqrt(reps)
    curve = [MomentPoint(horizon=h, mean=float(m), stderr=float(e)) for h, m, e in zip(horizons, means, errors)]
    lipschitz_moment = lipschitz_sum / (reps * n)

    positive = means > 0
    if positive.sum() < 2:
        flag = 'moment estimates are zero at (almost) every horizon; no contraction fit'
        logger.warning(f"GMC {spec.dynamics.map}: {flag}")
        return GmcEstimate(alpha=alpha, moment_curve=curve, lipschitz_moment=lipschitz_moment, reps=reps,
                           degenerate=True, flags=[flag])

    x = np.asarray(horizons, dtype=np.float64)[positive]
    log_means = np.log(means[positive])
    rel = errors[positive] / means[positive]
    weights = 1.0 / np.maximum(rel, 1e-12) ** 2 if np.all(rel > 0) else None
    slope, intercept = _fit_log_linear(x, log_means, weights)
    flags = []
    if not positive.all():
        flags.append(f"{int((~positive).sum())} horizon(s) with zero moment excluded from the fit")
    logger.info(f"GMC fit: r_hat={math.exp(slope):.5f}, C_hat={math.exp(intercept):.4g}")
    return GmcEstimate(
        alpha=alpha,
        moment_curve=curve,
        r_hat=math.exp(slope),
        C_hat=math.exp(intercept),
        lipschitz_moment=lipschitz_moment,
        reps=reps,
        flags=flags,
    )


def _linear_at(a: np.ndarray, innovations: np.ndarray, t: int) -> np.ndarray:
    """X_t from rows of eps_{-M+1}..eps_T, where M + 1 = len(a)."""
    m = a.size - 1
    return innovations[:, t - 1:t + m][:, ::-1] @ a


def estimate_delta(
    spec: ProcessSpec,
    kernel: KernelSpec,
    ell_grid: Sequence[int],
    j_grid: Sequence[int] = DEFAULT_J_GRID,
    reps: int = 2000,
    seed: int = 0,
) -> DeltaCurve:
    """Estimate delta_ell = sup_j ||Y_{1,j} - Y~_{1,j}|| on finite ell and j grids.

    The finite-memory copy X~ uses the same innovations: truncated coefficients
    (a_i = 0 for i >= ell) for linear specs, and a restart from 0 ell steps back
    for iterated maps. The norm is the sample sd of K(X_1, X_j) - K(X~_1, X~_j),
    which centres both kernels at once.
    """
    ell_grid = _check_increasing(ell_grid, 'ell_grid')
    j_grid = _check_increasing(j_grid, 'j_grid')
    if reps < 2:
        raise ValueError(f"reps must be >= 2, got {reps}")
    horizon = j_grid[-1]
    logger.info(f"delta: {len(ell_grid)} ell values x {len(j_grid)} gaps, {reps} reps")

    diffs = np.empty((len(ell_grid), len(j_grid), reps))
    for start in range(0, reps, CHUNK):
        keys = [(r,) for r in range(start, min(start + CHUNK, reps))]
        paths = generate_batch(spec, horizon, seed, keys, retain_innovations=True)
        values = np.stack([p.values for p in paths])
        innovations = np.stack([p.innovations for p in paths])
        full = evaluate(kernel, values[:, [0]], values[:, np.asarray(j_grid) - 1])
        for e, ell in enumerate(ell_grid):
            if isinstance(spec, LinearProcessSpec):
                a = coefficients(truncate_linear(spec, ell))
                x1 = _linear_at(a, innovations, 1)
                xj = np.stack([_linear_at(a, innovations, j) for j in j_grid], axis=1)
            else:
                step_map = build_map(spec.dynamics)

                def restart(t):
                    end = spec.burn_in + t
                    return step_map.iterate(0.0, innovations[:, max(end - ell, 0):end])[:, -1]

                x1 = restart(1)
                xj = np.stack([restart(j) for j in j_grid], axis=1)
            diffs[e, :, start:start + len(keys)] = (full - evaluate(kernel, x1[:, None], xj)).T

    points = []
    for e, ell in enumerate(ell_grid):
        per_j = [_std_with_error(diffs[e, g]) for g in range(len(j_grid))]
        best = int(np.argmax([sd for sd, _ in per_j]))
        points.append(DeltaPoint(ell=ell, delta_hat=per_j[best][0], stderr=per_j[best][1], argmax_j=j_grid[best]))
        logger.debug(f"delta_{ell} = {per_j[best][0]:.4g} (j={j_grid[best]})")
    return DeltaCurve(points=points, j_grid=j_grid, reps=reps)


def _theta_samples(spec, kernel, i, j, hi, t0, outer, inner, seed, stream):
    """Per-outer-replicate bias-corrected squared projections."""
    rng_hist = derive_rng(seed, *stream, outer, role='history')
    rng_inner = derive_rng(seed, *stream, outer, role='inner')
    fixed_z0 = draw_innovations(spec.innovations, rng_inner, (inner, hi))
    fixed_z1 = draw_innovations(spec.innovations, rng_inner, (inner, hi + 1))

    if isinstance(spec, LinearProcessSpec):
        a = coefficients(spec)
        m = a.size - 1
        # hist holds eps_{t0-M}..eps_{-1}
        hist = draw_innovations(spec.innovations, rng_hist, m - t0)
        eps0 = draw_innovations(spec.innovations, rng_hist, 1)
        padded = np.zeros(hi + 1)
        padded[:min(m, hi) + 1] = a[:min(m, hi) + 1]

        def value(t, future):
            if t <= -1:
                return float(hist[t - t0:t - t0 + m + 1][::-1] @ a)
            tail = float(hist[t - t0:t - t0 + m - t][::-1] @ a[t + 1:]) if t < m else 0.0
            return tail + future[:, :t + 1] @ padded[:t + 1][::-1]
    else:
        step_map = build_map(spec.dynamics)
        burn = draw_innovations(spec.innovations, rng_hist, spec.burn_in - t0)
        states = step_map.iterate(0.0, burn) if burn.size else np.zeros(1)
        eps0 = draw_innovations(spec.innovations, rng_hist, 1)

        def value(t, future):
            if t <= -1:
                return float(states[t])
            return step_map.iterate(float(states[-1]), future)[:, t]

    f0 = np.concatenate([np.broadcast_to(eps0, (inner, 1)), fixed_z0], axis=1)
    y0 = evaluate(kernel, value(i, f0), value(j, f0)) * np.ones(inner)
    y1 = evaluate(kernel, value(i, fixed_z1), value(j, fixed_z1)) * np.ones(inner)
    bias = (y0.var(ddof=1) + y1.var(ddof=1)) / inner
    return (y0.mean() - y1.mean()) ** 2 - bias


def estimate_theta(
    spec: ProcessSpec,
    kernel: KernelSpec,
    i: int,
    j: int,
    outer_reps: int = 400,
    inner_reps: int = 64,
    seed: int = 0,
    *,
    stream: tuple[int, ...] = (),
) -> ThetaEstimate:
    """Nested Monte Carlo estimate of theta_{i,j} = ||E(Y | Z_0) - E(Y | Z_{-1})||.

    Each outer replicate fixes the innovations up to time 0. The inner loop
    averages Y_{i,j} over fresh eps_1.. (conditioning on Z_0) and over fresh
    eps_0.. (conditioning on Z_{-1}); the inner sample variances are subtracted
    from the squared difference to remove the nested-MC bias.

    Raises:
        ValueError: inner_reps < 2 or outer_reps < 2
    """
    if inner_reps < 2:
        raise ValueError(f"inner_reps must be >= 2 for the bias correction, got {inner_reps}")
    if outer_reps < 2:
        raise ValueError(f"outer_reps must be >= 2, got {outer_reps}")
    hi = max(i, j)
    if hi < 0:
        # Y_{i,j} is Z_{-1}-measurable
        return ThetaEstimate(i=i, j=j, theta_hat=0.0, stderr=0.0, theta_sq=0.0,
                             outer_reps=outer_reps, inner_reps=inner_reps)
    t0 = min(i, j, 0)
    samples = np.array([
        _theta_samples(spec, kernel, i, j, hi, t0, r, inner_reps, seed, stream) for r in range(outer_reps)
    ])
    theta_sq = float(samples.mean())
    sq_err = float(samples.std(ddof=1) / math.sqrt(outer_reps))
    clamped = theta_sq < 0
    if clamped:
        logger.warning(f"theta_({i},{j}): bias-corrected estimate {theta_sq:.3g} < 0, clamped to 0")
    theta = math.sqrt(max(theta_sq, 0.0))
    stderr = sq_err / (2.0 * theta) if theta > 0 else math.sqrt(sq_err)
    return ThetaEstimate(i=i, j=j, theta_hat=theta, stderr=stderr, theta_sq=theta_sq,
                         outer_reps=outer_reps, inner_reps=inner_reps, clamped=clamped)


def estimate_theta_tilde(
    spec: LinearProcessSpec,
    kernel: KernelSpec,
    i: int,
    j: int,
    ell_grid: Sequence[int],
    outer_reps: int = 400,
    inner_reps: int = 64,
    seed: int = 0,
) -> ThetaEstimate:
    """sup over ell of theta_{i,j} for the ell-truncated process, taken over ``ell_grid`` only.

    Returns the estimate attaining the grid maximum. There is no extrapolation
    past the largest ell.

    Raises:
        UnsupportedModeError: spec is not linear
    """
    if not isinstance(spec, LinearProcessSpec):
        raise UnsupportedModeError('estimate_theta_tilde truncates coefficients and needs a linear spec')
    ells = _check_increasing(ell_grid, 'ell_grid')
    estimates = [
        estimate_theta(truncate_linear(spec, ell), kernel, i, j, outer_reps, inner_reps, seed, stream=(e,))
        for e, ell in enumerate(ells)
    ]
    best = max(range(len(ells)), key=lambda e: estimates[e].theta_hat)
    logger.debug(f"theta_tilde_({i},{j}): max at ell={ells[best]}")
    return estimates[best]


def theta_grid(
    spec: ProcessSpec,
    kernel: KernelSpec,
    lags: Iterable[int],
    indices: Iterable[int],
    outer_reps: int = 400,
    inner_reps: int = 64,
    seed: int = 0,
) -> list[ThetaEstimate]:
    """theta_{i,i-k} over the (k, i) rectangle, one stream per cell."""
    lags, indices = list(lags), list(indices)
    logger.info(f"theta grid: {len(lags)} lags x {len(indices)} indices")
    return [
        estimate_theta(spec, kernel, i, i - k, outer_reps, inner_reps, seed, stream=(e, f))
        for e, k in enumerate(lags)
        for f, i in enumerate(indices)
    ]


def probe_concentration(
    spec: ProcessSpec,
    j_grid: Sequence[int],
    tau_grid: Sequence[float],
    x_points: int = X_GRID_POINTS,
    reps: int = 20000,
    seed: int = 0,
) -> ConcentrationProbe:
    """Empirical sup_{j, x} P(x < X_0 - X_j <= x + tau).

    The x grid is ``x_points`` quantiles of a pooled pilot sample of the
    differences; it is shared by every tau, so sup_hat is nondecreasing in tau.
    """
    j_grid = _check_increasing(j_grid, 'j_grid')
    taus = sorted(float(t) for t in tau_grid)
    if not taus or taus[0] <= 0 or taus[-1] >= 0.5:
        raise ValueError(f"tau values must lie in (0, 1/2), got {list(tau_grid)}")
    if reps < 100:
        raise ValueError(f"reps must be >= 100, got {reps}")
    times = [1] + [1 + j for j in j_grid]

    pilot = sample_at(spec, times, min(reps, PILOT_REPS), seed, index=(1,))
    pooled = (pilot[:, [0]] - pilot[:, 1:]).ravel()
    x_grid = np.unique(np.quantile(pooled, np.linspace(0.0, 1.0, x_points)))

    sample = sample_at(spec, times, reps, seed, index=(0,))
    diffs = np.sort(sample[:, [0]] - sample[:, 1:], axis=0)

    points = []
    for tau in taus:
        best, best_j = 0, j_grid[0]
        for g, j in enumerate(j_grid):
            column = diffs[:, g]
            counts = np.searchsorted(column, x_grid + tau, side='right') - np.searchsorted(column, x_grid, side='right')
            top = int(counts.max())
            if top > best:
                best, best_j = top, j
        p = best / reps
        points.append(ConcentrationPoint(tau=tau, sup_hat=p, stderr=math.sqrt(p * (1 - p) / reps), argmax_j=best_j))

    kappa = None
    usable = [(pt.tau, pt.sup_hat) for pt in points if pt.sup_hat > 0]
    if len(usable) >= 3:
        x = np.log(np.log(1.0 / np.array([t for t, _ in usable])))
        slope, _ = _fit_log_linear(x, np.log([s for _, s in usable]))
        kappa = -slope / 2.0
    logger.info(f"concentration: {len(taus)} taus, {len(x_grid)} x points, kappa_hat={kappa}")
    return ConcentrationProbe(points=points, j_grid=j_grid, x_points=int(x_grid.size), reps=reps, kappa_hat=kappa)


def condition3_score(weights: WeightSpec, thetas: Iterable[ThetaEstimate]) -> Condition3Score:
    """Truncated sum_k sum_i |w_k| theta_{i,i-k} over the probed cells with k, i >= 0."""
    per_lag: dict[int, list[float]] = {}
    for est in thetas:
        k = est.i - est.j
        if k < 0 or est.i < 0:
            continue
        per_lag.setdefault(k, []).append(abs(float(lag_weights(weights, k))) * est.theta_hat)
    contributions = {k: math.fsum(v) for k, v in sorted(per_lag.items())}
    score = math.fsum(contributions.values())
    peak = max(contributions.values(), default=0.0)
    last = contributions[max(contributions)] if contributions else 0.0
    trend = 'settling' if peak == 0.0 or last <= 0.25 * peak else 'growing'
    if trend == 'growing':
        logger.warning(f"condition (3) score still growing at k={max(contributions)}: last lag adds {last:.3g}")
    return Condition3Score(score=score, per_lag=contributions, trend=trend)
