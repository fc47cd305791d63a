"""Pydantic models describing the stationary processes the toolkit simulates."""

import math
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class _Spec(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)


class InnovationSpec(_Spec):
    """Law of the i.i.d. innovations eps_j.

    Attributes:
        law: Distribution family
        scale: Multiplier applied to every draw
        df: Degrees of freedom (student_t only)
    """

    law: Literal['standard_normal', 'bernoulli_half', 'uniform_symmetric', 'student_t'] = 'standard_normal'
    scale: float = Field(default=1.0, gt=0.0)
    df: float | None = Field(default=None, gt=0.0)

    @model_validator(mode='after')
    def _check_df(self) -> 'InnovationSpec':
        if self.law == 'student_t' and self.df is None:
            raise ValueError("student_t innovations need a positive 'df'")
        if self.law != 'student_t' and self.df is not None:
            raise ValueError(f"'df' only applies to student_t, not {self.law}")
        return self

    @property
    def variance(self) -> float:
        """Var(eps); infinite for student_t with df <= 2."""
        base = {
            'standard_normal': 1.0,
            'bernoulli_half': 0.25,
            'uniform_symmetric': 1.0 / 3.0,
        }.get(self.law)
        if base is None:
            base = self.df / (self.df - 2.0) if self.df > 2.0 else math.inf
        return base * self.scale ** 2

    @property
    def symmetric(self) -> bool:
        """Whether eps and -eps have the same law."""
        return self.law != 'bernoulli_half'


class ExplicitCoefficients(_Spec):
    rule: Literal['explicit'] = 'explicit'
    values: list[float] = Field(min_length=1)

    @field_validator('values')
    @classmethod
    def _finite(cls, values: list[float]) -> list[float]:
        if not all(math.isfinite(v) for v in values):
            raise ValueError('explicit coefficients must be finite (square-summable)')
        return values


class GeometricCoefficients(_Spec):
    rule: Literal['geometric'] = 'geometric'
    rho: float = Field(gt=-1.0, lt=1.0)


class RegvarCoefficients(_Spec):
    """a_j = j^{-beta} L(j) for j >= 1 and a_0 = 0."""

    rule: Literal['regvar'] = 'regvar'
    beta: float = Field(gt=0.5, lt=1.0)
    slowly_varying: Literal['one', 'log', 'inv_log'] = 'one'


CoefficientRule = Annotated[
    Union[ExplicitCoefficients, GeometricCoefficients, RegvarCoefficients],
    Field(discriminator='rule'),
]


class LinearProcessSpec(_Spec):
    """Causal linear process X_t = sum_{i=0}^{M} a_i eps_{t-i}.

    Attributes:
        coefficients: Rule generating a_0, a_1, ...
        truncation: History length M; defaults per rule (see ``memory``)
        cutoff: When set, a_i is zeroed for i >= cutoff (finite-memory version)
        innovations: Innovation law
    """

    family: Literal['linear'] = 'linear'
    coefficients: CoefficientRule
    truncation: int | None = Field(default=None, ge=1)
    cutoff: int | None = Field(default=None, ge=1)
    innovations: InnovationSpec = InnovationSpec()

    @model_validator(mode='after')
    def _finite_variance(self) -> 'LinearProcessSpec':
        if self.innovations.law == 'student_t' and self.innovations.df <= 2.0:
            raise ValueError('linear processes need finite-variance innovations (student_t df > 2)')
        return self

    @property
    def memory(self) -> int:
        """Effective truncation M."""
        if self.truncation is not None:
            if isinstance(self.coefficients, ExplicitCoefficients):
                return min(self.truncation, len(self.coefficients.values) - 1) or 1
            return self.truncation
        if isinstance(self.coefficients, ExplicitCoefficients):
            return max(len(self.coefficients.values) - 1, 1)
        if isinstance(self.coefficients, RegvarCoefficients) and self.coefficients.beta < 0.75:
            return 2 ** 14
        return 2 ** 10


class Ar1Map(_Spec):
    map: Literal['ar1'] = 'ar1'
    rho: float = Field(gt=-1.0, lt=1.0)


class HalvingBernoulliMap(_Spec):
    map: Literal['halving_bernoulli'] = 'halving_bernoulli'


class Tar1Map(_Spec):
    map: Literal['tar1'] = 'tar1'
    phi_plus: float = Field(gt=-1.0, lt=1.0)
    phi_minus: float = Field(gt=-1.0, lt=1.0)


class Arch1Map(_Spec):
    map: Literal['arch1'] = 'arch1'
    a0: float = Field(gt=0.0)
    a1: float = Field(ge=0.0, lt=1.0)


MapRule = Annotated[
    Union[Ar1Map, HalvingBernoulliMap, Tar1Map, Arch1Map],
    Field(discriminator='map'),
]


class IteratedMapSpec(_Spec):
    """Iterated random function X_t = F(X_{t-1}, eps_t) started from 0.

    Attributes:
        dynamics: Map from the catalog
        innovations: Innovation law
        burn_in: Steps discarded before X_1
    """

    family: Literal['iterated'] = 'iterated'
    dynamics: MapRule
    innovations: InnovationSpec = InnovationSpec()
    burn_in: int = Field(default=1000, ge=0)

    @model_validator(mode='after')
    def _bernoulli_for_halving(self) -> 'IteratedMapSpec':
        if isinstance(self.dynamics, HalvingBernoulliMap) and self.innovations.law != 'bernoulli_half':
            raise ValueError('halving_bernoulli requires bernoulli_half innovations')
        return self


ProcessSpec = Annotated[Union[LinearProcessSpec, IteratedMapSpec], Field(discriminator='family')]
