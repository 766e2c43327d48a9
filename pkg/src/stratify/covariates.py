"""Binary clinical covariates from the period before exposure."""

from collections import defaultdict
from collections.abc import Iterable

from ..models.records import DiagnosisRecord, ExposureEra, PrescriptionRecord
from ..models.series import CovariateVector

ATC_PREFIX = "atc:"
ICD9_PREFIX = "icd9:"
ATC_CLASS_LENGTH = 5


def drug_feature(code: str) -> str:
    """Vocabulary entry of a drug code: its ATC chemical subgroup (5 characters)."""
    return ATC_PREFIX + code.strip()[:ATC_CLASS_LENGTH]


def diagnosis_feature(code: str) -> str:
    """Vocabulary entry of an ICD-9 code: its 3-character group."""
    return ICD9_PREFIX + code.strip()[:3]


def build_covariates(
    prescriptions: Iterable[PrescriptionRecord],
    diagnoses: Iterable[DiagnosisRecord],
    eras: list[ExposureEra],
) -> tuple[tuple[str, ...], list[CovariateVector]]:
    """Encode codes dated strictly before each patient's era start.

    Args:
        prescriptions: Drug prescriptions (dated by start_day)
        diagnoses: ICD-9 diagnoses
        eras: One era per patient, defines the order of the output rows

    Returns:
        (sorted vocabulary, one covariate row per era). A patient without
        any code keeps an all-zero row.
    """
    start = {era.patient_id: era.start_day for era in eras}
    codes: dict[str, set[str]] = defaultdict(set)
    for p in prescriptions:
        if p.patient_id in start and p.start_day < start[p.patient_id]:
            codes[p.patient_id].add(drug_feature(p.drug_code))
    for d in diagnoses:
        if d.patient_id in start and d.day < start[d.patient_id]:
            codes[d.patient_id].add(diagnosis_feature(d.icd9_code))
    return encode_code_sets({era.patient_id: codes.get(era.patient_id, set()) for era in eras})


def encode_code_sets(
    code_sets: dict[str, set[str]],
    vocabulary: Iterable[str] | None = None,
) -> tuple[tuple[str, ...], list[CovariateVector]]:
    """Binary presence encoding of per-patient code sets.

    Args:
        code_sets: Codes per patient, insertion order gives row order
        vocabulary: Fixed vocabulary; defaults to the sorted union of codes

    Returns:
        (vocabulary, rows)
    """
    vocab = tuple(sorted(set().union(*code_sets.values()))) if vocabulary is None else tuple(vocabulary)
    rows = [
        CovariateVector(patient_id=pid, bits=tuple(1 if code in codes else 0 for code in vocab))
        for pid, codes in code_sets.items()
    ]
    return vocab, rows
