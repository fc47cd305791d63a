"""Pydantic models for weights, kernels and their diagnostics."""

import math
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator


class _Spec(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)


class DeltaWeights(_Spec):
    """w_i = 1 iff |i| = k0."""

    kind: Literal['delta'] = 'delta'
    k0: int = Field(default=0, ge=0)


class ConstantOneWeights(_Spec):
    kind: Literal['constant_one'] = 'constant_one'


class PowerWeights(_Spec):
    """w_i = c (1 + |i|)^{-beta_w}."""

    kind: Literal['power'] = 'power'
    beta_w: float = Field(ge=0.0, lt=1.0)
    c: float = Field(default=1.0, gt=0.0)


class GeometricWeights(_Spec):
    kind: Literal['geometric'] = 'geometric'
    q: float = Field(gt=0.0, lt=1.0)


class ExplicitWeights(_Spec):
    """Half-sequence w_0..w_m; zero beyond m."""

    kind: Literal['explicit'] = 'explicit'
    values: list[float] = Field(min_length=1)

    @field_validator('values')
    @classmethod
    def _finite(cls, values: list[float]) -> list[float]:
        if not all(math.isfinite(v) for v in values):
            raise ValueError('explicit weights must be finite')
        return values


class TowerWeights(_Spec):
    """w_n = 2^k at n = 2^(2^k), zero elsewhere: divergent, yet too sparse for the W_n normalization."""

    kind: Literal['tower'] = 'tower'


WeightSpec = Annotated[
    Union[DeltaWeights, ConstantOneWeights, PowerWeights, GeometricWeights, ExplicitWeights, TowerWeights],
    Field(discriminator='kind'),
]


class IndicatorDistanceKernel(_Spec):
    """K(x, y) = 1 iff |x - y| < b."""

    kind: Literal['indicator_distance'] = 'indicator_distance'
    b: float = Field(gt=0.0)


class ProductKernel(_Spec):
    """K(x, y) = T(x) T(y)."""

    kind: Literal['product'] = 'product'
    transform: Literal['identity', 'square'] = 'identity'


class WilcoxonKernel(_Spec):
    """K(x, y) = 1 iff x + y > 0."""

    kind: Literal['wilcoxon'] = 'wilcoxon'


class AdditiveKernel(_Spec):
    """K(x, y) = [G(x) + G(y)] / 2."""

    kind: Literal['additive'] = 'additive'
    transform: Literal['identity', 'square'] = 'identity'


class ZeroKernel(_Spec):
    kind: Literal['zero'] = 'zero'


KernelSpec = Annotated[
    Union[IndicatorDistanceKernel, ProductKernel, WilcoxonKernel, AdditiveKernel, ZeroKernel],
    Field(discriminator='kind'),
]


class CurvePoint(BaseModel):
    n: int
    value: float


class WeightDiagnostics(BaseModel):
    """Side-condition curves for a weight sequence on a geometric n grid.

    Attributes:
        abs_partial_sums: sum_{|i| <= n} |w_i|
        Wn_curve: W_n
        ratio_T3: sum_{k=0}^n (n-k) w_k^2 / (n W_n^2)
        liminf_proxy: W_n / sum_{i=0}^n |w_i|
        summable: Trend verdict for sum |w_i| < infinity
        liminf_positive: Trend verdict for liminf W_n / sum |w_i| > 0
        ratio_vanishes: Trend verdict for ratio_T3 -> 0
        flags: Conditions that look violated on the grid
    """

    abs_partial_sums: list[CurvePoint]
    Wn_curve: list[CurvePoint]
    ratio_T3: list[CurvePoint]
    liminf_proxy: list[CurvePoint]
    summable: bool
    liminf_positive: bool
    ratio_vanishes: bool
    flags: list[str] = Field(default_factory=list)


class MeanEstimate(BaseModel):
    """Monte Carlo estimate of E K(X_1, X_{1+gap})."""

    value: float
    stderr: float = Field(ge=0.0)
    gap: int
    reps: int
