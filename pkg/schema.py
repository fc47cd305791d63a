"""
Record types shared by the process generators, the statistic engine and the harness.

Specs (what to simulate or compute) are pydantic models in each package's
``models.py``; the records here hold realised data and are plain dataclasses.
"""
import hashlib
from dataclasses import dataclass, field
from typing import Literal

import numpy as np


def fingerprint(payload: bytes | str | np.ndarray) -> str:
    """Short SHA-256 digest of a spec JSON string or an array's bytes."""
    if isinstance(payload, np.ndarray):
        payload = np.ascontiguousarray(payload, dtype=np.float64).tobytes()
    elif isinstance(payload, str):
        payload = payload.encode('utf-8')
    return hashlib.sha256(payload).hexdigest()[:16]


def _frozen(values: np.ndarray | None) -> np.ndarray | None:
    if values is None:
        return None
    arr = np.array(values, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SamplePath:
    """A realised path X_1..X_n.

    ``innovations`` holds every innovation the generator consumed, oldest first,
    so re-applying the generating spec to them reproduces ``values`` exactly.
    For linear processes that is eps_{-M+1}..eps_n; for iterated maps it is the
    burn-in innovations followed by eps_1..eps_n.
    """

    values: np.ndarray
    seed: int
    spec_fingerprint: str
    innovations: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, 'values', _frozen(self.values))
        object.__setattr__(self, 'innovations', _frozen(self.innovations))

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def fingerprint(self) -> str:
        return fingerprint(self.values)

    def to_dict(self) -> dict:
        """Convert record to dictionary for JSON export (values as lists)."""
        return {
            'n': self.n,
            'seed': self.seed,
            'spec_fingerprint': self.spec_fingerprint,
            'path_fingerprint': self.fingerprint,
            'values': self.values.tolist(),
        }


@dataclass(frozen=True)
class CoupledPair:
    """Two paths sharing innovations from ``coupling_time`` on.

    ``primary_start``/``shadow_start`` are the time-0 states X_0 and X'_0; the
    paths themselves hold X_1..X_n.
    """

    primary: SamplePath
    shadow: SamplePath
    coupling_time: int
    mode: Literal['iid_prehistory', 'fixed_prehistory']
    primary_start: float
    shadow_start: float
    z0: float | None = None

    def distances(self) -> np.ndarray:
        """|X_t - X'_t| for t = 0..n."""
        start = abs(self.primary_start - self.shadow_start)
        return np.concatenate([[start], np.abs(self.primary.values - self.shadow.values)])


@dataclass(frozen=True)
class UStatResult:
    """One evaluation of U_n = sum_{i,j} w_{i-j} K(X_i, X_j)."""

    value: float
    n: int
    include_diagonal: bool
    path_fingerprint: str
    method: Literal['dense', 'banded', 'sorted_indicator']
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'value': self.value,
            'n': self.n,
            'include_diagonal': self.include_diagonal,
            'path_fingerprint': self.path_fingerprint,
            'method': self.method,
            'flags': list(self.flags),
        }


@dataclass(frozen=True)
class SignedRankResult:
    """Signed-rank statistic W_n and the Wilcoxon pair count it relates to."""

    value: float
    n: int
    pair_count: int
    ties_broken: bool


@dataclass(frozen=True)
class ReplicateResult:
    """One standardized replicate of a CLT experiment.

    standardized = (raw - center) / scale, where scale is n**exponent or the
    weight normalizer sqrt(n W_n^2).
    """

    n: int
    replicate: int
    raw: float
    centered: float
    standardized: float
    stream_id: str
    center: float
    scale: float
    z_term: float | None = None
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            'n': self.n,
            'rep': self.replicate,
            'raw': self.raw,
            'centered': self.centered,
            'standardized': self.standardized,
            'stream_id': self.stream_id,
            'z_term': self.z_term,
        }


# Roles for derived random streams; the index is part of the stream key.
STREAM_ROLES = ('history', 'future', 'shadow_history', 'inner', 'pilot')

USTAT_METHODS = ('dense', 'banded', 'sorted_indicator')

# n at which dense accumulation switches to compensated block sums
COMPENSATED_SUM_THRESHOLD = 2 ** 14
