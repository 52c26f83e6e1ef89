"""Exception types shared across the package."""

from __future__ import annotations


class ToolError(Exception):
    """Base class for every error this package raises on purpose.

    Anything else escaping the public API is a bug.
    """


class EncodingError(ToolError):
    """Input bytes are not valid UTF-8."""


class CsvError(ToolError):
    """Malformed delimited-table content.

    ``row`` carries the 1-based record number when the problem can be pinned
    to one record (the header counts as record 1).
    """

    def __init__(self, message: str, row: int | None = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class FrontMatterError(ToolError):
    """Malformed or unsupported YAML front matter."""


class SchemaError(ToolError):
    """Invalid table-schema content or structure."""


class DictionaryError(ToolError):
    """Invalid data-dictionary content."""


class ManifestError(ToolError):
    """Malformed checksum manifest."""


class ChunkError(ToolError):
    """Invalid chunking or reassembly request."""


class PackError(ToolError):
    """Archive packing refused or failed."""


class ScaffoldError(ToolError):
    """Invalid scaffold request or destination."""


class ScanError(ToolError):
    """A directory tree cannot be inventoried."""


class ConfigError(ToolError):
    """Malformed lint configuration."""
