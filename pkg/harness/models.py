"""Pydantic models for CLT experiments and their reports."""

from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from longmem.models import LongMemCase
from processes.models import ProcessSpec
from statistic.models import KernelSpec, WeightSpec


class _Spec(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)


class AnalyticCentering(_Spec):
    """Center by known E U_n: explicit per-n values first, then the catalog.

    When neither applies the run falls back to Monte Carlo centering with
    10 R replicates and flags every result.
    """

    mode: Literal['analytic'] = 'analytic'
    values: dict[int, float] | None = None


class MonteCarloCentering(_Spec):
    """Center by the mean of independent replicates (default 10 R)."""

    mode: Literal['monte_carlo'] = 'monte_carlo'
    center_reps: int | None = Field(default=None, ge=1)


Centering = Annotated[Union[AnalyticCentering, MonteCarloCentering], Field(discriminator='mode')]


class RateSpec(_Spec):
    """
    Scale used to standardize U_n - center.

    Attributes:
        source: 'case' (a named rate), 'exponent' (explicit n^e) or 'weights' (sqrt(n W_n^2))
        case: Named rate for source='case'; 'longmem' reads ``longmem``
        longmem: Long-memory example for case='longmem'
        exponent: Explicit exponent for source='exponent'
    """

    source: Literal['case', 'exponent', 'weights'] = 'case'
    case: Literal['clt_summable', 'clt_w1_theorem11', 'correlation_integral', 'longmem'] | None = None
    longmem: LongMemCase | None = None
    exponent: float | None = None

    @model_validator(mode='after')
    def _consistent(self) -> 'RateSpec':
        if self.source == 'case' and self.case is None:
            raise ValueError("rate source 'case' needs 'case'")
        if self.case == 'longmem' and self.longmem is None:
            raise ValueError("rate case 'longmem' needs a 'longmem' block")
        if self.source == 'exponent' and self.exponent is None:
            raise ValueError("rate source 'exponent' needs 'exponent'")
        return self


class ExperimentConfig(_Spec):
    """
    One CLT experiment: a process, a statistic, an n grid and how to standardize.

    Attributes:
        process: Process recipe
        kernel: Kernel of U_n
        weights: Weights of U_n
        n_grid: Strictly increasing path lengths
        replicates: R, replicates per n (normality tests need R >= 100)
        centering: Analytic or Monte Carlo centering
        rate: Standardization scale
        seed: 64-bit experiment seed
        include_diagonal: Include i = j in U_n
        dominance_probe: Record the leading decomposition term where one is implemented
    """

    process: ProcessSpec
    kernel: KernelSpec
    weights: WeightSpec
    n_grid: list[int] = Field(min_length=1)
    replicates: int = Field(ge=2)
    centering: Centering = AnalyticCentering()
    rate: RateSpec
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    include_diagonal: bool = True
    dominance_probe: bool = True

    @field_validator('n_grid')
    @classmethod
    def _increasing(cls, grid: list[int]) -> list[int]:
        if grid[0] < 1 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError(f"n_grid must be strictly increasing positive integers, got {grid}")
        return grid

    @model_validator(mode='after')
    def _center_reps(self) -> 'ExperimentConfig':
        centering = self.centering
        if isinstance(centering, MonteCarloCentering) and centering.center_reps is not None:
            if centering.center_reps < 10 * self.replicates:
                raise ValueError(
                    f"center_reps must be >= 10 x replicates ({10 * self.replicates}), got {centering.center_reps}"
                )
        return self


class NormalityResult(BaseModel):
    """
    KS test of standardized values against a normal fitted to the sample.

    The p-value uses the asymptotic Kolmogorov law; with estimated parameters
    it is conservative (Lilliefors), which is flagged.
    """

    count: int
    mean: float
    variance: float
    ks_distance: float = Field(ge=0.0, le=1.0)
    ks_pvalue: float = Field(ge=0.0, le=1.0)
    skewness: float
    excess_kurtosis: float
    degenerate: bool = False
    flags: list[str] = Field(default_factory=list)
    qq: list[tuple[float, float]] = Field(default_factory=list, exclude=True)


class SlopeFit(BaseModel):
    """
    Weighted log-log fit of Var(U_n - center) against n.

    Attributes:
        slope: Fitted exponent
        stderr: Standard error from the weighted residuals
        model_stderr: Standard error implied by the chi-square weights alone
        intercept: Fitted log-variance at n = 1
        r_squared: Weighted coefficient of determination
        n_points: Distinct n used
    """

    slope: float
    stderr: float = Field(ge=0.0)
    model_stderr: float = Field(gt=0.0)
    intercept: float
    r_squared: float
    n_points: int


class NSummary(BaseModel):
    n: int
    replicates: int
    center: float
    scale: float
    mean: float
    variance: float
    raw_variance: float
    normality: NormalityResult | None = None
    dominance_corr: float | None = None


class TestReport(BaseModel):
    """Per-n summaries, the variance slope and any flags raised during the run."""

    __test__ = False

    per_n: list[NSummary]
    slope: SlopeFit | None = None
    rate_exponent: float | None = None
    scale_source: str
    flags: list[str] = Field(default_factory=list)
