"""Exception types shared across the pipeline.

Analyzer-internal problems (a file that will not parse, a trace line that
will not decode) are recorded and skipped; exceptions here are reserved for
contract violations the caller must handle.
"""


class PkgvetError(Exception):
    """Base class for all pipeline errors."""


class NotFoundError(PkgvetError):
    """Requested package/version is absent from the source."""


class SchemaError(PkgvetError):
    """A registry response or fixture document does not match the schema."""


class ArchiveCorruptError(PkgvetError):
    """Package archive could not be extracted."""


class ManifestUnparseableError(PkgvetError):
    """Package manifest (setup.py / package.json / gemspec) unreadable."""


class ConfigInvalidError(PkgvetError):
    """A config file failed validation.

    ``row`` is the 1-based row/entry number when applicable.
    """

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class TraceMalformedError(PkgvetError):
    """A trace stream line failed to decode. Carries the line number."""

    def __init__(self, message: str, line_no: int):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class VersionOrderError(PkgvetError):
    """Version diff called with old >= new."""


class NotInGraphError(PkgvetError):
    """Coordinate missing from the dependency graph."""


class MissingDepSummaryError(PkgvetError):
    """A dependency summary was not available; scheduling bug."""


class CacheIOError(PkgvetError):
    """Cache backend failed to read or write."""


class UnknownReportError(PkgvetError):
    """Label applied to a coordinate with no suspicion report."""
