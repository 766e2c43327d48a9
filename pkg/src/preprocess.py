"""Raw observations and prescriptions to normalized aligned series.

Pipeline: exposure eras (prescriptions merged across gaps of at most
max_gap_days) -> one segment per patient (earliest era with measurements
both inside it and within lookback_days before it) -> independent linear
resampling of each side -> normalization to [-1, 1] on the central
percentile interval of the cohort's values.

An observation dated exactly on the era start counts as during exposure.
"""

import logging
from collections import defaultdict
from collections.abc import Iterable

import numpy as np

from .exceptions import DegenerateBoundsError, InsufficientCohortError
from .models.config import PreprocessConfig
from .models.records import (
    DiagnosisRecord,
    ExposureEra,
    LabObservation,
    PrescriptionRecord,
    RawSegment,
)
from .models.series import AlignedSeries, Dataset, NormBounds, Provenance
from .stratify.covariates import build_covariates

logger = logging.getLogger(__name__)


def build_exposure_eras(
    prescriptions: Iterable[PrescriptionRecord],
    drug_class_prefix: str,
    max_gap_days: int = 30,
) -> list[ExposureEra]:
    """Merge matching prescriptions into exposure eras.

    Two consecutive intervals of a patient are merged when the next one
    starts at most max_gap_days after the current one ends; overlaps are
    negative gaps and always merge.

    Args:
        prescriptions: Records in any order, possibly overlapping
        drug_class_prefix: Drug code prefix selecting the drug class
        max_gap_days: Largest tolerated gap between two prescriptions

    Returns:
        Eras sorted by patient then start day
    """
    intervals: dict[str, list[tuple[int, int]]] = defaultdict(list)
    for p in prescriptions:
        if p.drug_code.startswith(drug_class_prefix):
            intervals[p.patient_id].append((p.start_day, p.end_day))

    eras: list[ExposureEra] = []
    for patient_id in sorted(intervals):
        spans = sorted(intervals[patient_id])
        start, end = spans[0]
        for next_start, next_end in spans[1:]:
            if next_start - end <= max_gap_days:
                end = max(end, next_end)
            else:
                eras.append(ExposureEra(patient_id=patient_id, start_day=start, end_day=end))
                start, end = next_start, next_end
        eras.append(ExposureEra(patient_id=patient_id, start_day=start, end_day=end))
    return eras


def _daily_points(observations: list[LabObservation]) -> list[tuple[int, float]]:
    """Sort by day and average same-day measurements."""
    by_day: dict[int, list[float]] = defaultdict(list)
    for o in observations:
        by_day[o.day].append(o.value)
    return [(day, float(np.mean(by_day[day]))) for day in sorted(by_day)]


def extract_segments(
    observations: Iterable[LabObservation],
    eras: Iterable[ExposureEra],
    lookback_days: int = 365,
) -> list[RawSegment]:
    """Cut one pre/during segment per patient.

    The earliest era having at least one measurement inside it and one in
    [start - lookback_days, start) is kept; other eras are excluded.

    Args:
        observations: Lab observations of any patients
        eras: Exposure eras from build_exposure_eras
        lookback_days: Width of the pre-exposure window

    Returns:
        Segments sorted by patient id
    """
    points: dict[str, list[tuple[int, float]]] = {}
    grouped: dict[str, list[LabObservation]] = defaultdict(list)
    for o in observations:
        grouped[o.patient_id].append(o)
    for patient_id, obs in grouped.items():
        points[patient_id] = _daily_points(obs)

    eras_by_patient: dict[str, list[ExposureEra]] = defaultdict(list)
    for era in eras:
        eras_by_patient[era.patient_id].append(era)

    segments: list[RawSegment] = []
    for patient_id in sorted(eras_by_patient):
        series = points.get(patient_id, [])
        for era in sorted(eras_by_patient[patient_id], key=lambda e: e.start_day):
            pre = [(d, v) for d, v in series if era.start_day - lookback_days <= d < era.start_day]
            during = [(d, v) for d, v in series if era.start_day <= d <= era.end_day]
            if pre and during:
                segments.append(
                    RawSegment(
                        patient_id=patient_id,
                        pre=tuple(pre),
                        during=tuple(during),
                        era=era,
                        lookback_days=lookback_days,
                    )
                )
                break
    return segments


def _resample(points: tuple[tuple[int, float], ...], n: int) -> np.ndarray:
    days = np.array([d for d, _ in points], dtype=np.float64)
    values = np.array([v for _, v in points], dtype=np.float64)
    if len(points) == 1:
        return np.full(n, values[0])
    grid = np.linspace(days[0], days[-1], n)
    return np.interp(grid, days, values)


def interpolate_segment(seg: RawSegment, n_pre: int = 8, n_during: int = 8) -> np.ndarray:
    """Resample each side of a segment onto an evenly spaced day grid.

    The grid of each side runs from its first to its last measurement day,
    so endpoints are preserved. The two sides never read each other.

    Args:
        seg: Segment to resample
        n_pre: Points before exposure
        n_during: Points during exposure

    Returns:
        mg/dL vector of n_pre + n_during values, pre side first
    """
    return np.concatenate([_resample(seg.pre, n_pre), _resample(seg.during, n_during)])


def compute_norm_bounds(values: Iterable[float], central_mass: float = 0.99) -> NormBounds:
    """Central percentile interval with linear interpolation between order statistics.

    Args:
        values: mg/dL measurements
        central_mass: Mass kept between the bounds (0.99 -> 0.5% and 99.5%)

    Returns:
        NormBounds(lo, hi)

    Raises:
        DegenerateBoundsError: If the interval collapses (fewer than two
            distinct values, or too few of them to separate the quantiles)
    """
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size < 2 or np.unique(arr).size < 2:
        raise DegenerateBoundsError("need at least two distinct values to compute bounds")
    tail = (1.0 - central_mass) / 2.0
    lo, hi = np.quantile(arr, [tail, 1.0 - tail], method="linear")
    if not lo < hi:
        raise DegenerateBoundsError(f"central {central_mass:.1%} interval collapses to {lo}")
    return NormBounds(lo=float(lo), hi=float(hi))


def normalize(raw: np.ndarray, b: NormBounds) -> np.ndarray:
    """Affine map of [lo, hi] onto [-1, 1], clamped."""
    y = 2.0 * (np.asarray(raw, dtype=np.float64) - b.lo) / (b.hi - b.lo) - 1.0
    return np.clip(y, -1.0, 1.0)


def denormalize(y: np.ndarray, b: NormBounds) -> np.ndarray:
    """Inverse of the unclamped affine map of normalize."""
    return (np.asarray(y, dtype=np.float64) + 1.0) * (b.hi - b.lo) / 2.0 + b.lo


def preprocess_pipeline(
    observations: list[LabObservation],
    prescriptions: list[PrescriptionRecord],
    config: PreprocessConfig | None = None,
    diagnoses: list[DiagnosisRecord] | None = None,
    provenance: Provenance | None = None,
) -> Dataset:
    """Eras, segments, interpolation, cohort bounds and normalization.

    Bounds are computed over every observation of the included patients.
    When diagnoses are given, covariates are built from each included
    patient's diagnoses and prescriptions dated before the segment's era.

    Args:
        observations: Raw lab observations
        prescriptions: Raw prescriptions
        config: Preprocessing parameters
        diagnoses: Optional diagnoses for covariate construction
        provenance: Provenance recorded in the dataset

    Returns:
        Dataset with one series per included patient, sorted by patient id

    Raises:
        InsufficientCohortError: If fewer than two patients are included
    """
    cfg = config or PreprocessConfig()
    eras = build_exposure_eras(prescriptions, cfg.drug_prefix, cfg.max_gap_days)
    segments = extract_segments(observations, eras, cfg.lookback_days)
    n_patients = len({o.patient_id for o in observations})
    logger.info(
        "%d eras, %d segments kept out of %d patients with observations",
        len(eras),
        len(segments),
        n_patients,
    )
    if len(segments) < 2:
        raise InsufficientCohortError(
            f"only {len(segments)} patient(s) have both pre and during exposure data"
        )

    included = {s.patient_id for s in segments}
    bounds = compute_norm_bounds(
        (o.value for o in observations if o.patient_id in included), cfg.central_mass
    )
    series = tuple(
        AlignedSeries(
            patient_id=seg.patient_id,
            values=tuple(float(v) for v in normalize(interpolate_segment(seg, cfg.n_pre, cfg.n_during), bounds)),
            n_pre=cfg.n_pre,
            n_during=cfg.n_during,
        )
        for seg in segments
    )

    vocabulary = None
    covariates = None
    if diagnoses is not None:
        vocabulary, covariates = build_covariates(prescriptions, diagnoses, [s.era for s in segments])

    return Dataset(
        series=series,
        bounds=bounds,
        provenance=provenance or Provenance(),
        n_pre=cfg.n_pre,
        n_during=cfg.n_during,
        vocabulary=vocabulary,
        covariates=tuple(covariates) if covariates is not None else None,
    )
