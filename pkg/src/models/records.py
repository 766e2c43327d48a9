"""Raw EHR record models.

Time is counted in whole days since an arbitrary epoch. A year of lookback
is exactly 365 days, leap days are not modelled.
"""

import math

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class LabObservation(BaseModel):
    """One laboratory measurement in mg/dL."""

    model_config = ConfigDict(frozen=True)

    patient_id: str = Field(..., min_length=1)
    day: int
    value: float = Field(..., ge=0.0)

    @field_validator("value")
    @classmethod
    def validate_finite(cls, v: float) -> float:
        """Reject NaN and infinities.

        Args:
            v: Measurement value

        Returns:
            Validated value

        Raises:
            ValueError: If value is not finite
        """
        if not math.isfinite(v):
            raise ValueError("value must be finite")
        return v


class PrescriptionRecord(BaseModel):
    """A drug prescription covering [start_day, end_day]."""

    model_config = ConfigDict(frozen=True)

    patient_id: str = Field(..., min_length=1)
    drug_code: str = Field(..., min_length=1)
    start_day: int
    end_day: int

    @model_validator(mode="after")
    def validate_interval(self) -> "PrescriptionRecord":
        """Check start_day <= end_day."""
        if self.start_day > self.end_day:
            raise ValueError(f"start_day {self.start_day} after end_day {self.end_day}")
        return self


class DiagnosisRecord(BaseModel):
    """An ICD-9 diagnosis code recorded on a given day."""

    model_config = ConfigDict(frozen=True)

    patient_id: str = Field(..., min_length=1)
    icd9_code: str = Field(..., min_length=1)
    day: int


class ExposureEra(BaseModel):
    """Maximal interval of continuous drug exposure."""

    model_config = ConfigDict(frozen=True)

    patient_id: str = Field(..., min_length=1)
    start_day: int
    end_day: int

    @model_validator(mode="after")
    def validate_interval(self) -> "ExposureEra":
        """Check start_day <= end_day."""
        if self.start_day > self.end_day:
            raise ValueError(f"start_day {self.start_day} after end_day {self.end_day}")
        return self


class RawSegment(BaseModel):
    """Pre-exposure and during-exposure measurements around one era.

    Attributes:
        pre: (day, value) pairs in [era.start_day - lookback, era.start_day).
        during: (day, value) pairs in [era.start_day, era.end_day].
        lookback_days: Width of the pre window the segment was cut with.
    """

    model_config = ConfigDict(frozen=True)

    patient_id: str
    pre: tuple[tuple[int, float], ...]
    during: tuple[tuple[int, float], ...]
    era: ExposureEra
    lookback_days: int = 365

    @model_validator(mode="after")
    def validate_windows(self) -> "RawSegment":
        """Check non-empty sides, window membership and increasing days."""
        if not self.pre or not self.during:
            raise ValueError("segment needs at least one pre and one during measurement")
        if self.era.patient_id != self.patient_id:
            raise ValueError("segment and era belong to different patients")
        start, end = self.era.start_day, self.era.end_day
        for day, _ in self.pre:
            if not start - self.lookback_days <= day < start:
                raise ValueError(f"pre day {day} outside [{start - self.lookback_days}, {start})")
        for day, _ in self.during:
            if not start <= day <= end:
                raise ValueError(f"during day {day} outside [{start}, {end}]")
        for side in (self.pre, self.during):
            days = [d for d, _ in side]
            if any(b <= a for a, b in zip(days, days[1:])):
                raise ValueError("days must be strictly increasing")
        return self
