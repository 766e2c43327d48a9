"""Aligned series and dataset container models."""

import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

DEFAULT_N_PRE = 8
DEFAULT_N_DURING = 8


class NormBounds(BaseModel):
    """mg/dL bounds of the central percentile interval used for normalization."""

    model_config = ConfigDict(frozen=True)

    lo: float
    hi: float

    @model_validator(mode="after")
    def validate_order(self) -> "NormBounds":
        """Check lo < hi and both finite."""
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("bounds must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"lo ({self.lo}) must be below hi ({self.hi})")
        return self


class AlignedSeries(BaseModel):
    """Normalized series: n_pre points before exposure, n_during during.

    Used both for real series (x) and for synthetic ones (x-hat).
    """

    model_config = ConfigDict(frozen=True)

    patient_id: str
    values: tuple[float, ...]
    n_pre: int = Field(default=DEFAULT_N_PRE, ge=1)
    n_during: int = Field(default=DEFAULT_N_DURING, ge=1)

    @field_validator("values")
    @classmethod
    def validate_range(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        """Every element must lie in [-1, 1].

        Args:
            v: Series values

        Returns:
            Validated values

        Raises:
            ValueError: On out-of-range or non-finite entries
        """
        for x in v:
            if not (math.isfinite(x) and -1.0 <= x <= 1.0):
                raise ValueError(f"value {x!r} outside [-1, 1]")
        return v

    @model_validator(mode="after")
    def validate_length(self) -> "AlignedSeries":
        """Check len(values) == n_pre + n_during."""
        if len(self.values) != self.n_pre + self.n_during:
            raise ValueError(
                f"expected {self.n_pre + self.n_during} values, got {len(self.values)}"
            )
        return self

    @property
    def pre(self) -> np.ndarray:
        """Pre-exposure part."""
        return np.asarray(self.values[: self.n_pre], dtype=np.float64)

    @property
    def during(self) -> np.ndarray:
        """During-exposure part."""
        return np.asarray(self.values[self.n_pre :], dtype=np.float64)

    def as_array(self) -> np.ndarray:
        """Values as a float64 vector."""
        return np.asarray(self.values, dtype=np.float64)


class CovariateVector(BaseModel):
    """Binary presence of each vocabulary code before exposure."""

    model_config = ConfigDict(frozen=True)

    patient_id: str
    bits: tuple[int, ...]

    @field_validator("bits")
    @classmethod
    def validate_binary(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        """Entries must be 0 or 1."""
        if any(b not in (0, 1) for b in v):
            raise ValueError("covariate bits must be 0 or 1")
        return v


class Provenance(BaseModel):
    """Where a dataset came from."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["simulated", "real"] = "real"
    seed: int | None = None


class Dataset(BaseModel):
    """Normalized series with optional index-aligned covariates."""

    model_config = ConfigDict(frozen=True)

    series: tuple[AlignedSeries, ...]
    bounds: NormBounds
    provenance: Provenance = Field(default_factory=Provenance)
    n_pre: int = DEFAULT_N_PRE
    n_during: int = DEFAULT_N_DURING
    vocabulary: tuple[str, ...] | None = None
    covariates: tuple[CovariateVector, ...] | None = None

    @model_validator(mode="after")
    def validate_alignment(self) -> "Dataset":
        """Check layouts, covariate alignment and vocabulary width."""
        for s in self.series:
            if (s.n_pre, s.n_during) != (self.n_pre, self.n_during):
                raise ValueError(f"series {s.patient_id} has a different layout")
        if self.covariates is not None:
            if len(self.covariates) != len(self.series):
                raise ValueError(
                    f"{len(self.series)} series but {len(self.covariates)} covariate rows"
                )
            for s, c in zip(self.series, self.covariates):
                if s.patient_id != c.patient_id:
                    raise ValueError(f"covariate row {c.patient_id} not aligned with {s.patient_id}")
            width = len(self.vocabulary or ())
            if any(len(c.bits) != width for c in self.covariates):
                raise ValueError("covariate rows must match the vocabulary width")
        return self

    @property
    def patient_ids(self) -> list[str]:
        """Patient ids in series order."""
        return [s.patient_id for s in self.series]

    def matrix(self) -> np.ndarray:
        """Series values as an N x (n_pre + n_during) array."""
        width = self.n_pre + self.n_during
        if not self.series:
            return np.zeros((0, width))
        return np.array([s.values for s in self.series], dtype=np.float64)

    def covariate_matrix(self) -> np.ndarray:
        """Covariates as an N x V 0/1 float array."""
        if self.covariates is None:
            raise ValueError("dataset has no covariates")
        return np.array([c.bits for c in self.covariates], dtype=np.float64).reshape(
            len(self.covariates), len(self.vocabulary or ())
        )

    def subset(self, indices: list[int] | np.ndarray) -> "Dataset":
        """Dataset restricted to the given series indices, in that order."""
        idx = [int(i) for i in indices]
        return self.model_copy(
            update={
                "series": tuple(self.series[i] for i in idx),
                "covariates": (
                    tuple(self.covariates[i] for i in idx) if self.covariates is not None else None
                ),
            }
        )


def series_from_matrix(
    matrix: np.ndarray,
    patient_ids: list[str] | None = None,
    n_pre: int = DEFAULT_N_PRE,
    prefix: str = "synth",
) -> list[AlignedSeries]:
    """Wrap rows of a [-1, 1] matrix into AlignedSeries.

    Args:
        matrix: N x L array, already clamped to [-1, 1]
        patient_ids: Ids per row, defaults to "{prefix}-{i}"
        n_pre: Pre-exposure length, the rest is during exposure
        prefix: Id prefix when patient_ids is omitted

    Returns:
        One series per row
    """
    rows = np.asarray(matrix, dtype=np.float64)
    n_during = rows.shape[1] - n_pre if rows.ndim == 2 else 0
    ids = patient_ids or [f"{prefix}-{i}" for i in range(len(rows))]
    return [
        AlignedSeries(patient_id=pid, values=tuple(float(v) for v in row), n_pre=n_pre, n_during=n_during)
        for pid, row in zip(ids, rows)
    ]
