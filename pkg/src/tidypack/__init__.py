"""Tools for tidy research data packages.

Scaffold a package skeleton, describe tables with schemas and data
dictionaries, lint the result against conformance rules, checksum and
verify every file, split oversized tables into chunks, and pack the whole
thing into a byte-reproducible archive.
"""

from __future__ import annotations

from .errors import (
    ChunkError,
    ConfigError,
    CsvError,
    DictionaryError,
    EncodingError,
    FrontMatterError,
    ManifestError,
    PackError,
    ScaffoldError,
    ScanError,
    SchemaError,
    ToolError,
)
from .integrity import (
    ChecksumManifest,
    ChunkPlan,
    ManifestEntry,
    VerifyReport,
    chunk_table,
    compute_manifest,
    md5_hex,
    pack,
    parse_manifest,
    serialize_manifest,
    unchunk,
    verify_manifest,
)
from .licenses import LicenseKind, SPDX_IDS, detect_license, license_text
from .lint import (
    Finding,
    LintConfig,
    LintReport,
    LintRule,
    RULES,
    lint_package,
    load_config,
    parse_config,
    report_to_json,
    report_to_text,
)
from .model import (
    DataPackage,
    Dataset,
    DocumentRef,
    FileKind,
    FileRef,
    LicenseRef,
    PackagePool,
    classify_file,
    iter_files,
    scan_package,
)
from .scaffold import Author, ScaffoldRequest, scaffold
from .schema import (
    DataDictionary,
    DictionaryEntry,
    FieldDescriptor,
    TableSchema,
    ValidationReport,
    Violation,
    dictionary_from_csv,
    dictionary_from_schema,
    dictionary_from_table,
    dictionary_to_csv,
    dictionary_to_markdown,
    infer_field_type,
    infer_schema,
    normalize_class,
    schema_from_front_matter,
    schema_from_json,
    schema_to_json,
    validate_table,
)
from .tabular import (
    CsvTable,
    Dialect,
    FrontMatter,
    MissingProfile,
    detect_dialect,
    detect_missing_tokens,
    is_boolean_token,
    is_date_token,
    is_integer_token,
    is_number_token,
    parse_csvy,
    parse_table,
    read_csvy,
    serialize_csvy,
    serialize_table,
)

__version__ = "0.1.0"

__all__ = [
    "Author",
    "ChecksumManifest",
    "ChunkError",
    "ChunkPlan",
    "ConfigError",
    "CsvError",
    "CsvTable",
    "DataDictionary",
    "DataPackage",
    "Dataset",
    "Dialect",
    "DictionaryEntry",
    "DictionaryError",
    "DocumentRef",
    "EncodingError",
    "FieldDescriptor",
    "FileKind",
    "FileRef",
    "Finding",
    "FrontMatter",
    "FrontMatterError",
    "LicenseKind",
    "LicenseRef",
    "LintConfig",
    "LintReport",
    "LintRule",
    "ManifestEntry",
    "ManifestError",
    "MissingProfile",
    "PackError",
    "PackagePool",
    "RULES",
    "SPDX_IDS",
    "ScaffoldError",
    "ScaffoldRequest",
    "ScanError",
    "SchemaError",
    "TableSchema",
    "ToolError",
    "ValidationReport",
    "VerifyReport",
    "Violation",
    "chunk_table",
    "classify_file",
    "compute_manifest",
    "detect_dialect",
    "detect_license",
    "detect_missing_tokens",
    "dictionary_from_csv",
    "dictionary_from_schema",
    "dictionary_from_table",
    "dictionary_to_csv",
    "dictionary_to_markdown",
    "infer_field_type",
    "infer_schema",
    "is_boolean_token",
    "is_date_token",
    "is_integer_token",
    "is_number_token",
    "license_text",
    "lint_package",
    "load_config",
    "md5_hex",
    "normalize_class",
    "pack",
    "parse_config",
    "parse_csvy",
    "parse_manifest",
    "parse_table",
    "read_csvy",
    "report_to_json",
    "report_to_text",
    "scaffold",
    "iter_files",
    "scan_package",
    "schema_from_front_matter",
    "schema_from_json",
    "schema_to_json",
    "serialize_csvy",
    "serialize_manifest",
    "serialize_table",
    "unchunk",
    "validate_table",
    "verify_manifest",
]
