"""Custom exceptions for labgan."""


class LabganError(Exception):
    """Base exception for labgan."""

    pass


class ConfigError(LabganError):
    """Configuration related errors."""

    pass


class ValidationError(LabganError):
    """A value or container breaks one of its invariants."""

    pass


class ParseError(ValidationError):
    """Malformed row in an input table."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None) -> None:
        """Initialize parse error.

        Args:
            message: Error message
            path: File being read, if any
            line: 1-based line number in the file (header is line 1)
        """
        location = ""
        if path is not None:
            location = f"{path}"
        if line is not None:
            location = f"{location}:{line}" if location else f"line {line}"
        super().__init__(f"{location}: {message}" if location else message)
        self.path = path
        self.line = line


class FormatVersionError(ValidationError):
    """JSON container written by an incompatible format version."""

    def __init__(self, found: object, expected: int) -> None:
        """Initialize format version error.

        Args:
            found: Version read from the file
            expected: Version this build understands
        """
        super().__init__(f"Unsupported format_version {found!r} (expected {expected})")
        self.found = found
        self.expected = expected


class ShapeError(LabganError):
    """Array shapes do not chain."""

    pass


class DegenerateBoundsError(LabganError):
    """Normalization bounds collapse to a single value."""

    pass


class InsufficientCohortError(LabganError):
    """Too few patients survive preprocessing."""

    pass


class TrainingDivergenceError(LabganError):
    """A loss or gradient became non-finite."""

    pass


class InsufficientPointsError(LabganError):
    """Too few points for the requested embedding or clustering."""

    pass


class DegenerateGeometryError(LabganError):
    """Point cloud has no usable spread (e.g. all points identical)."""

    pass


class ZeroVarianceError(LabganError):
    """Paired differences have zero variance, no p-value exists."""

    pass


class StageError(LabganError):
    """An experiment stage failed."""

    def __init__(self, stage: str, cause: Exception) -> None:
        """Initialize stage error.

        Args:
            stage: Name of the failing stage (simulate, preprocess, ...)
            cause: Underlying exception
        """
        super().__init__(f"Stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
