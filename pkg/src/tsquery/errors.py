"""Exception types shared across the package."""


class TsQueryError(Exception):
    """Base class for all tsquery errors."""


class InvalidInputError(TsQueryError, ValueError):
    """Malformed or out-of-contract arguments (length mismatch, bad window, ...)."""


class NumericConsistencyError(TsQueryError):
    """A numerical identity that should hold to tolerance was violated."""


class DegenerateSeriesError(TsQueryError):
    """Constant series cannot be normalized; carries the series mean."""

    def __init__(self, message: str, mean: float):
        super().__init__(message)
        self.mean = mean


class UnsafeTransformationError(TsQueryError):
    """Transformation is not safe for the feature-space representation in use."""


class DataFormatError(TsQueryError):
    """Input data file could not be parsed; message names offending rows/columns."""


class UnknownTransformError(TsQueryError):
    """Transformation name not present in the registry."""


class SnapshotError(TsQueryError):
    """Base class for index snapshot load failures."""


class SnapshotVersionError(SnapshotError):
    """Snapshot format version (or magic) is not supported."""


class SnapshotChecksumError(SnapshotError):
    """Snapshot payload checksum does not match."""


class SnapshotTruncatedError(SnapshotError):
    """Snapshot file ended before the payload was complete."""
