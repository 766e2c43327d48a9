"""Reading and writing labgan tables and JSON containers.

Raw inputs are CSV files with fixed headers. Datasets, models and reports
are JSON documents carrying a `format_version` and a `kind`. Floats are
written with Python's shortest round-trip repr, so a read after a write
reproduces every value bit for bit.
"""

import json
from collections.abc import Callable, Iterable
from pathlib import Path
from typing import Any, TypeVar

import pandas as pd
from pydantic import BaseModel
from pydantic import ValidationError as PydanticValidationError

from .exceptions import FormatVersionError, ParseError, ValidationError
from .models.records import DiagnosisRecord, LabObservation, PrescriptionRecord
from .models.series import AlignedSeries, CovariateVector, Dataset, NormBounds, Provenance

FORMAT_VERSION = 1

OBSERVATION_COLUMNS = ["patient_id", "day", "value"]
PRESCRIPTION_COLUMNS = ["patient_id", "drug_code", "start_day", "end_day"]
DIAGNOSIS_COLUMNS = ["patient_id", "icd9_code", "day"]
COVARIATE_COLUMNS = ["patient_id", "code"]

RecordT = TypeVar("RecordT", bound=BaseModel)


# ---------------------------------------------------------------------------
# CSV tables
# ---------------------------------------------------------------------------


def _read_table(path: Path, columns: list[str]) -> pd.DataFrame:
    """Read a CSV as strings and check its header."""
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=True)
    except FileNotFoundError as e:
        raise ParseError("file not found", path=str(path)) from e
    except pd.errors.EmptyDataError as e:
        raise ParseError("missing header", path=str(path), line=1) from e
    except pd.errors.ParserError as e:
        raise ParseError(f"malformed CSV: {e}", path=str(path)) from e
    if list(df.columns) != columns:
        raise ParseError(
            f"expected header {','.join(columns)}, got {','.join(map(str, df.columns))}",
            path=str(path),
            line=1,
        )
    return df


def _parse_rows(
    path: Path,
    columns: list[str],
    converters: dict[str, Callable[[str], Any]],
    model: type[RecordT],
) -> list[RecordT]:
    """Convert every row of a table into a model, naming the line on failure.

    Type conversion failures are parse errors, invariant breaches on well
    typed rows (a negative value, an inverted interval) are validation errors.
    """
    df = _read_table(path, columns)
    records: list[RecordT] = []
    for offset, row in enumerate(df.itertuples(index=False, name=None)):
        line = offset + 2
        raw = dict(zip(columns, row))
        try:
            fields = {name: converters.get(name, str)(raw[name].strip()) for name in columns}
        except ValueError as e:
            raise ParseError(f"cannot parse row {row!r}: {e}", path=str(path), line=line) from e
        try:
            records.append(model(**fields))
        except PydanticValidationError as e:
            raise ValidationError(f"{path}:{line}: {e.errors()[0]['msg']}") from e
    return records


def read_observations(path: Path) -> list[LabObservation]:
    """Read `patient_id,day,value` rows in file order.

    Args:
        path: CSV file

    Returns:
        One LabObservation per data row

    Raises:
        ParseError: On a malformed row (line number included)
        ValidationError: On a negative or non-finite value
    """
    return _parse_rows(path, OBSERVATION_COLUMNS, {"day": int, "value": float}, LabObservation)


def read_prescriptions(path: Path) -> list[PrescriptionRecord]:
    """Read `patient_id,drug_code,start_day,end_day` rows in file order."""
    return _parse_rows(
        path, PRESCRIPTION_COLUMNS, {"start_day": int, "end_day": int}, PrescriptionRecord
    )


def read_diagnoses(path: Path) -> list[DiagnosisRecord]:
    """Read `patient_id,icd9_code,day` rows in file order."""
    return _parse_rows(path, DIAGNOSIS_COLUMNS, {"day": int}, DiagnosisRecord)


def read_covariates(path: Path) -> dict[str, set[str]]:
    """Read long-form `patient_id,code` rows into a code set per patient."""
    df = _read_table(path, COVARIATE_COLUMNS)
    codes: dict[str, set[str]] = {}
    for offset, (pid, code) in enumerate(df.itertuples(index=False, name=None)):
        if not pid.strip() or not code.strip():
            raise ParseError("empty patient_id or code", path=str(path), line=offset + 2)
        codes.setdefault(pid.strip(), set()).add(code.strip())
    return codes


def _write_table(rows: Iterable[dict[str, Any]], columns: list[str], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(list(rows), columns=columns).to_csv(path, index=False, lineterminator="\n")


def write_observations(records: Iterable[LabObservation], path: Path) -> None:
    """Write observations as CSV."""
    _write_table((r.model_dump() for r in records), OBSERVATION_COLUMNS, path)


def write_prescriptions(records: Iterable[PrescriptionRecord], path: Path) -> None:
    """Write prescriptions as CSV."""
    _write_table((r.model_dump() for r in records), PRESCRIPTION_COLUMNS, path)


def write_diagnoses(records: Iterable[DiagnosisRecord], path: Path) -> None:
    """Write diagnoses as CSV."""
    _write_table((r.model_dump() for r in records), DIAGNOSIS_COLUMNS, path)


def write_covariates(vocabulary: tuple[str, ...], covariates: Iterable[CovariateVector], path: Path) -> None:
    """Write covariates in long form, one row per set bit."""
    rows = (
        {"patient_id": c.patient_id, "code": code}
        for c in covariates
        for code, bit in zip(vocabulary, c.bits)
        if bit
    )
    _write_table(rows, COVARIATE_COLUMNS, path)


def write_rows(rows: list[dict[str, Any]], path: Path, columns: list[str] | None = None) -> None:
    """Write arbitrary dict rows as CSV (loss curves, tables)."""
    _write_table(rows, columns or (list(rows[0].keys()) if rows else []), path)


# ---------------------------------------------------------------------------
# JSON containers
# ---------------------------------------------------------------------------


def write_document(kind: str, payload: dict[str, Any], path: Path) -> None:
    """Write a versioned JSON document.

    Args:
        kind: Document kind ("dataset", "gan-model", "clusters", ...)
        payload: JSON-serialisable body
        path: Destination file
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {"format_version": FORMAT_VERSION, "kind": kind, **payload}
    path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")


def read_document(path: Path, kind: str) -> dict[str, Any]:
    """Read a versioned JSON document and check its version and kind.

    Raises:
        ParseError: If the file is missing or not JSON
        FormatVersionError: On a version mismatch
        ValidationError: If the document is of another kind
    """
    try:
        document = json.loads(path.read_text())
    except FileNotFoundError as e:
        raise ParseError("file not found", path=str(path)) from e
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", path=str(path), line=e.lineno) from e
    if not isinstance(document, dict):
        raise ValidationError(f"{path}: top-level JSON value must be an object")
    if document.get("format_version") != FORMAT_VERSION:
        raise FormatVersionError(document.get("format_version"), FORMAT_VERSION)
    if document.get("kind") != kind:
        raise ValidationError(f"{path}: expected a '{kind}' document, found '{document.get('kind')}'")
    return document


def dataset_to_payload(ds: Dataset) -> dict[str, Any]:
    """JSON body of a dataset document."""
    return {
        "count": len(ds.series),
        "n_pre": ds.n_pre,
        "n_during": ds.n_during,
        "bounds": ds.bounds.model_dump(),
        "provenance": ds.provenance.model_dump(),
        "series": [{"patient_id": s.patient_id, "values": list(s.values)} for s in ds.series],
        "vocabulary": list(ds.vocabulary) if ds.vocabulary is not None else None,
        "covariates": (
            [{"patient_id": c.patient_id, "bits": list(c.bits)} for c in ds.covariates]
            if ds.covariates is not None
            else None
        ),
    }


def dataset_from_payload(document: dict[str, Any], source: str = "<memory>") -> Dataset:
    """Rebuild a dataset from its JSON body.

    Raises:
        ValidationError: On count or covariate length mismatch, or any
            invariant breach in the series
    """
    try:
        series_rows = document["series"]
        n_pre, n_during = int(document["n_pre"]), int(document["n_during"])
        if document.get("count") != len(series_rows):
            raise ValidationError(
                f"{source}: declares {document.get('count')} series but holds {len(series_rows)}"
            )
        covariate_rows = document.get("covariates")
        if covariate_rows is not None and len(covariate_rows) != len(series_rows):
            raise ValidationError(
                f"{source}: {len(series_rows)} series but {len(covariate_rows)} covariate rows"
            )
        vocabulary = document.get("vocabulary")
        return Dataset(
            series=tuple(
                AlignedSeries(patient_id=row["patient_id"], values=tuple(row["values"]), n_pre=n_pre, n_during=n_during)
                for row in series_rows
            ),
            bounds=NormBounds(**document["bounds"]),
            provenance=Provenance(**document.get("provenance", {})),
            n_pre=n_pre,
            n_during=n_during,
            vocabulary=tuple(vocabulary) if vocabulary is not None else None,
            covariates=(
                tuple(CovariateVector(patient_id=row["patient_id"], bits=tuple(row["bits"])) for row in covariate_rows)
                if covariate_rows is not None
                else None
            ),
        )
    except KeyError as e:
        raise ValidationError(f"{source}: missing field {e}") from e
    except PydanticValidationError as e:
        raise ValidationError(f"{source}: {e}") from e


def write_dataset(ds: Dataset, path: Path) -> None:
    """Write a dataset as a versioned JSON document."""
    write_document("dataset", dataset_to_payload(ds), path)


def read_dataset(path: Path) -> Dataset:
    """Read a dataset written by write_dataset."""
    return dataset_from_payload(read_document(path, "dataset"), source=str(path))


def write_model(model: BaseModel, kind: str, path: Path) -> None:
    """Write any pydantic model (reports, clusters, truth) as a JSON document."""
    write_document(kind, {"body": model.model_dump(mode="json")}, path)


def read_model(path: Path, kind: str, model: type[RecordT]) -> RecordT:
    """Read a pydantic model written by write_model."""
    document = read_document(path, kind)
    try:
        return model(**document["body"])
    except (KeyError, TypeError, PydanticValidationError) as e:
        raise ValidationError(f"{path}: invalid {kind} document: {e}") from e
