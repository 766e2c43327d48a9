"""Data models."""

from .config import (
    AutoencoderConfig,
    ClusterSpec,
    ExperimentConfig,
    GanTrainConfig,
    PreprocessConfig,
    SimConfig,
    StratifyConfig,
    TsneConfig,
)
from .records import (
    DiagnosisRecord,
    ExposureEra,
    LabObservation,
    PrescriptionRecord,
    RawSegment,
)
from .reports import (
    ClusterAssignment,
    ClusterEffect,
    ComparisonReport,
    DleReport,
    ExperimentSummary,
    GroundTruth,
    OracleReport,
    PredictivityReport,
    SeedResult,
    StratificationResult,
    TableRow,
)
from .series import (
    AlignedSeries,
    CovariateVector,
    Dataset,
    NormBounds,
    Provenance,
    series_from_matrix,
)

__all__ = [
    "AlignedSeries",
    "AutoencoderConfig",
    "ClusterAssignment",
    "ClusterEffect",
    "ClusterSpec",
    "ComparisonReport",
    "CovariateVector",
    "Dataset",
    "DiagnosisRecord",
    "DleReport",
    "ExperimentConfig",
    "ExperimentSummary",
    "ExposureEra",
    "GanTrainConfig",
    "GroundTruth",
    "LabObservation",
    "NormBounds",
    "OracleReport",
    "PredictivityReport",
    "PreprocessConfig",
    "PrescriptionRecord",
    "Provenance",
    "RawSegment",
    "SeedResult",
    "SimConfig",
    "StratificationResult",
    "StratifyConfig",
    "TableRow",
    "TsneConfig",
    "series_from_matrix",
]
