"""Pydantic models for config files and run manifests."""

from datetime import datetime
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from diagnostics.contraction import DEFAULT_HORIZONS, DEFAULT_J_GRID, X_GRID_POINTS
from harness.models import AnalyticCentering, Centering, RateSpec
from longmem.models import LongMemCase, SlowlyVarying
from processes.models import ProcessSpec
from statistic.models import KernelSpec, WeightSpec


class _Section(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)


class ExperimentSection(_Section):
    """CLT experiment settings; process, kernel and weights come from their own sections."""

    n_grid: list[int] = Field(min_length=1)
    replicates: int = Field(default=500, ge=2)
    centering: Centering = AnalyticCentering()
    rate: RateSpec
    include_diagonal: bool = True
    dominance_probe: bool = True


class DiagnosticsSection(_Section):
    """Grids and replication counts for gmc, delta, theta, concentration and weights."""

    alpha: float = Field(default=1.0, gt=0.0)
    horizons: list[int] = Field(default_factory=lambda: list(DEFAULT_HORIZONS))
    reps: int = Field(default=2000, ge=2)
    ell_grid: list[int] = Field(default_factory=lambda: [1, 2, 4, 8, 16, 32])
    j_grid: list[int] = Field(default_factory=lambda: list(DEFAULT_J_GRID))
    tau_grid: list[float] = Field(default_factory=lambda: [0.005, 0.01, 0.02, 0.05, 0.1, 0.2])
    x_points: int = Field(default=X_GRID_POINTS, ge=2)
    theta_lags: list[int] = Field(default_factory=lambda: [0, 1, 2])
    theta_indices: list[int] = Field(default_factory=lambda: list(range(0, 9)))
    outer_reps: int = Field(default=400, ge=2)
    inner_reps: int = Field(default=64, ge=2)
    theta_tilde: bool = False
    n_max: int = Field(default=2 ** 14, ge=16)


class SimulateSection(_Section):
    n: int = Field(default=1024, ge=1)
    coupled: Literal['iid_prehistory', 'fixed_prehistory'] | None = None
    z0: float = 0.0
    retain_innovations: bool = True


class UStatSection(_Section):
    """Path source and method for the ``ustat`` subcommand.

    Without ``path_file`` a path of length ``n`` is simulated from the process section.
    """

    path_file: str | None = None
    n: int = Field(default=1024, ge=1)
    method: Literal['auto', 'dense', 'banded', 'correlation_integral', 'signed_rank'] = 'auto'
    include_diagonal: bool = True


class LongMemSection(_Section):
    case: LongMemCase
    betas: list[float] = Field(default_factory=lambda: [0.55, 0.6, 0.65, 0.7, 0.8, 0.85, 0.9, 0.95])
    rho_grid: list[int] = Field(default_factory=lambda: [1, 2, 3, 4])
    slowly_varying: list[SlowlyVarying] = Field(default_factory=lambda: ['one', 'log', 'inv_log'])
    r_max: int = Field(default=3, ge=1)
    n: int = Field(default=1024, ge=4)
    replicates: int = Field(default=20, ge=1)


class OutputSection(_Section):
    directory: str | None = None


class ConfigFile(_Section):
    """
    One run configuration.

    Attributes:
        seed: Experiment seed (``--seed`` overrides)
        process: Process recipe
        kernel: Kernel of U_n
        weights: Weights of U_n
        experiment: CLT experiment settings
        diagnostics: Diagnostic grids
        simulate: Settings for ``simulate``
        ustat: Settings for ``ustat``
        longmem: Settings for ``longmem``
        output: Output directory
    """

    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    process: ProcessSpec | None = None
    kernel: KernelSpec | None = None
    weights: WeightSpec | None = None
    experiment: ExperimentSection | None = None
    diagnostics: DiagnosticsSection = DiagnosticsSection()
    simulate: SimulateSection = SimulateSection()
    ustat: UStatSection = UStatSection()
    longmem: LongMemSection | None = None
    output: OutputSection = OutputSection()


class OutputEntry(BaseModel):
    name: str
    sha256: str
    bytes: int


class RunManifest(BaseModel):
    """
    Provenance of one CLI run.

    Timestamps are the only fields that change when a run is repeated.
    truncation_bias is sigma^2 sum_{i > M} a_i^2 for a linear process and None otherwise.
    """

    subcommand: str
    version: str
    config_digest: str
    seed: int
    started_at: datetime
    finished_at: datetime
    outputs: list[OutputEntry]
    truncation_bias: float | None = None
