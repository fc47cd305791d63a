"""Pydantic models for the long-memory decomposition."""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

SlowlyVarying = Literal['one', 'log', 'inv_log']


class LongMemCase(BaseModel):
    """
    One of the worked long-memory examples.

    Attributes:
        example: 'sample_covariance' (T(x) = x^2 at lag k) or 'wilcoxon'
        beta: Coefficient decay a_j ~ j^{-beta} L(j)
        slowly_varying: L from the catalog
        rho: Expansion order of the decomposition
        lag: k for the sample covariance (ignored for wilcoxon)
    """

    model_config = ConfigDict(extra='forbid', frozen=True)

    example: Literal['sample_covariance', 'wilcoxon']
    beta: float = Field(gt=0.5, lt=1.0)
    slowly_varying: SlowlyVarying = 'one'
    rho: int = Field(default=2, ge=1)
    lag: int = Field(default=2, ge=2)


class DecompositionTerm(BaseModel):
    """Z_{n,r} evaluated on one path."""

    r: int = Field(ge=0)
    value: float
    normalizer_exponent: float | None = None
    description: str


class LimitVariance(BaseModel):
    """
    Squared norm of a multiple Wiener-Ito limit.

    Attributes:
        r: Order of the integral
        beta: Coefficient decay
        weight_mode: 'summable' (constant C) or 'constant_one' (double x-integral)
        value: Numerical integral times C^2
        error: Error estimate of ``value``
        method: 'quad' or 'qmc'
        closed_form: Beta-function identity for the same quantity
    """

    r: int = Field(ge=1)
    beta: float
    weight_mode: Literal['summable', 'constant_one']
    C: float = 1.0
    value: float = Field(gt=0.0)
    error: float = Field(ge=0.0)
    method: Literal['quad', 'qmc']
    closed_form: float

    @property
    def rel_gap(self) -> float:
        return abs(self.value - self.closed_form) / self.closed_form


class Condition27Diagnostic(BaseModel):
    """Convergence of sum_n n^{-beta(rho+1)+rho/2} |L(n)|^{rho+1}."""

    beta: float
    rho: int
    slowly_varying: SlowlyVarying
    exponent: float
    boundary: bool
    converges: bool
