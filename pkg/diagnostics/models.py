"""Pydantic models for the contraction and dependence diagnostics."""

from pydantic import BaseModel, Field


class MomentPoint(BaseModel):
    """E|X_t - X'_t|^alpha at one horizon."""

    horizon: int
    mean: float = Field(ge=0.0)
    stderr: float = Field(ge=0.0)


class GmcEstimate(BaseModel):
    """
    Geometric-moment contraction fit E|X_t - X'_t|^alpha ~ C r^t.

    Attributes:
        alpha: Moment order
        moment_curve: Estimated moments per horizon
        r_hat: Fitted per-step contraction ratio
        C_hat: Fitted intercept exp(c)
        lipschitz_moment: Sample mean of L_eps^alpha, the one-step contraction bound on r
        degenerate: True when every moment was zero and no fit was made
        flags: Warnings raised during estimation
    """

    alpha: float = Field(gt=0.0)
    moment_curve: list[MomentPoint]
    r_hat: float | None = None
    C_hat: float | None = None
    lipschitz_moment: float | None = Field(default=None, ge=0.0)
    reps: int
    degenerate: bool = False
    flags: list[str] = Field(default_factory=list)

    @property
    def horizons(self) -> list[int]:
        return [p.horizon for p in self.moment_curve]


class DeltaPoint(BaseModel):
    ell: int
    delta_hat: float = Field(ge=0.0)
    stderr: float = Field(ge=0.0)
    argmax_j: int


class DeltaCurve(BaseModel):
    """Coupling distance sup_j ||Y_{1,j} - Y~_{1,j}|| over an ell grid."""

    points: list[DeltaPoint]
    j_grid: list[int]
    reps: int


class ThetaEstimate(BaseModel):
    """
    Nested Monte Carlo estimate of ||P_0 Y_{i,j}||.

    Attributes:
        i: First time index
        j: Second time index
        theta_hat: Square root of the bias-corrected mean squared projection
        stderr: Delta-method standard error of theta_hat
        theta_sq: Bias-corrected theta^2 before clamping
        clamped: theta_sq was negative and theta_hat was set to 0
    """

    i: int
    j: int
    theta_hat: float = Field(ge=0.0)
    stderr: float = Field(ge=0.0)
    theta_sq: float
    outer_reps: int
    inner_reps: int
    clamped: bool = False


class ConcentrationPoint(BaseModel):
    tau: float
    sup_hat: float = Field(ge=0.0, le=1.0)
    stderr: float = Field(ge=0.0)
    argmax_j: int


class ConcentrationProbe(BaseModel):
    """
    Empirical sup_{j, x} P(x < X_0 - X_j <= x + tau) on finite grids.

    Attributes:
        points: One entry per tau, nondecreasing in tau
        j_grid: Gaps probed
        x_points: Size of the pilot-quantile x grid
        kappa_hat: Fitted exponent of sup_hat ~ log^{-2 kappa}(1/tau), None if not fittable
    """

    points: list[ConcentrationPoint]
    j_grid: list[int]
    x_points: int
    reps: int
    kappa_hat: float | None = None


class Condition3Score(BaseModel):
    """
    Truncated sum_k sum_i |w_k| theta_{i,i-k}.

    Attributes:
        score: Total over the probed rectangle
        per_lag: Contribution of each probed k
        trend: 'settling' when the last lag contributions shrink, 'growing' otherwise
    """

    score: float = Field(ge=0.0)
    per_lag: dict[int, float]
    trend: str
