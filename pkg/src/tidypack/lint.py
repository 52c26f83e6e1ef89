"""Conformance linting for data packages.

Eighteen rules cover documentation, dictionaries, licensing, citation,
metadata, raw data, plain-text data, naming, dates, missing values,
checksums, hosting limits, and code consistency.  Each rule carries a fixed
severity ceiling; a configuration may lower a rule's severity or switch it
off, never raise it.  A package passes when linting produces zero
error-severity findings.

Linting only reads: no file under the package root is created, modified,
or deleted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator

from .errors import ConfigError, ManifestError, SchemaError, ToolError
from .integrity import parse_manifest, verify_manifest
from .model import (
    CHECKSUMS_NAME,
    DataPackage,
    Dataset,
    FileKind,
    FileRef,
)
from .licenses import LicenseKind
from .schema import (
    DataDictionary,
    TableSchema,
    dictionary_from_csv,
    schema_from_json,
    validate_table,
)
from .tabular import CsvTable, detect_missing_tokens, is_date_token, read_csvy

SEVERITIES = ("error", "warning", "info")
_SEVERITY_RANK = {name: rank for rank, name in enumerate(SEVERITIES)}

_CATCHALL_RULE_ID = "R00"


@dataclass(frozen=True)
class LintRule:
    """One check: an identifier, what it wants, how bad a miss is, and the
    doctrine anchor printed in text reports."""

    id: str
    title: str
    severity: str
    anchor: str


RULES: tuple[LintRule, ...] = (
    LintRule("R01", "README file at the package top level", "error", "§2.1"),
    LintRule("R02", "README answers who, what, when, where, why, and how", "warning", "§2.1"),
    LintRule("R03", "data dictionary shipped as a plain-text table", "error", "§2.2"),
    LintRule("R04", "dictionary describes every column of the data tables", "error", "§2.2"),
    LintRule("R05", "license file at the package top level", "error", "§2.3"),
    LintRule("R06", "license text recognized (CC BY 4.0, CC0 1.0, or ODbL)", "warning", "§2.3"),
    LintRule("R07", "citation file present, with a DOI", "warning", "§2.4"),
    LintRule("R08", "machine-readable metadata per dataset", "warning", "§2.5"),
    LintRule("R09", "schema JSON is valid and matches its table", "error", "§2.5"),
    LintRule("R10", "raw data shared under data-raw/", "info", "§2.6"),
    LintRule("R11", "cleaning scripts accompany raw data", "warning", "§2.7"),
    LintRule("R12", "analysis-ready data is plain text under data/", "error", "§2.8"),
    LintRule("R13", "column names are short and machine-friendly", "warning", "§2.2"),
    LintRule("R14", "date columns use YYYY-MM-DD", "warning", "§2.2"),
    LintRule("R15", "missing-value tokens are declared", "warning", "§2.2"),
    LintRule("R16", "checksum manifest present and verified", "warning", "Rule 8"),
    LintRule("R17", "file sizes fit common hosting limits", "info", "§5"),
    LintRule("R18", "value codes agree across variables", "info", "§2.2"),
)

RULES_BY_ID = {rule.id: rule for rule in RULES}

_CATCHALL_ANCHOR = "internal"


@dataclass(frozen=True)
class Finding:
    """One lint result.

    ``machine_data`` carries structured details for tooling and tests; it
    is never serialized into reports.
    """

    rule_id: str
    severity: str
    detail: str
    path: str | None = None
    machine_data: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class LintReport:
    findings: list[Finding]
    counts: dict[str, int]
    passed: bool


@dataclass(frozen=True)
class LintConfig:
    """Per-rule severity overrides.

    ``levels`` maps rule ids to ``off`` or a severity.  A configured
    severity below the rule's ceiling (e.g. ``error`` for a ``warning``
    rule) cannot raise it; the ceiling wins.
    """

    levels: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for rule_id, level in self.levels.items():
            if rule_id not in RULES_BY_ID:
                known = ", ".join(sorted(RULES_BY_ID))
                raise ConfigError(f"unknown rule {rule_id!r}; known rules: {known}")
            if level != "off" and level not in _SEVERITY_RANK:
                raise ConfigError(
                    f"rule {rule_id}: level must be one of off, error, warning, info; got {level!r}"
                )

    def effective_severity(self, rule: LintRule) -> str | None:
        """The severity this configuration gives a rule, or None for off."""
        configured = self.levels.get(rule.id)
        if configured is None:
            return rule.severity
        if configured == "off":
            return None
        if _SEVERITY_RANK[configured] < _SEVERITY_RANK[rule.severity]:
            return rule.severity
        return configured


def parse_config(text: str) -> LintConfig:
    """Parse ``RNN = level`` lines; ``#`` comments and blank lines ignored."""
    levels: dict[str, str] = {}
    for line_number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(
                f"line {line_number}: expected 'RULE = level', got {line!r}"
            )
        rule_id, _, level = line.partition("=")
        levels[rule_id.strip()] = level.strip()
    return LintConfig(levels=levels)


def load_config(path) -> LintConfig:
    """Read a configuration file; see ``parse_config`` for the format."""
    from pathlib import Path

    return parse_config(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Evaluation context


class _Context:
    """Memoized file access shared by the rule evaluators."""

    def __init__(self, pkg: DataPackage):
        self.pkg = pkg
        self._tables: dict[str, tuple[CsvTable | None, str | None]] = {}
        self._schemas: dict[str, tuple[TableSchema | None, str | None]] = {}
        self._dictionaries: dict[str, tuple[DataDictionary | None, str | None]] = {}

    def _read(self, rel: str) -> bytes:
        return (self.pkg.root / rel).read_bytes()

    def _table_entry(self, rel: str) -> tuple[CsvTable | None, str | None]:
        if rel not in self._tables:
            try:
                _, table = read_csvy(self.pkg.root / rel)
                self._tables[rel] = (table, None)
            except (ToolError, OSError) as exc:
                self._tables[rel] = (None, str(exc))
        return self._tables[rel]

    def table(self, rel: str) -> CsvTable | None:
        return self._table_entry(rel)[0]

    def table_error(self, rel: str) -> str | None:
        return self._table_entry(rel)[1]

    def _schema_entry(self, rel: str) -> tuple[TableSchema | None, str | None]:
        if rel not in self._schemas:
            try:
                self._schemas[rel] = (schema_from_json(self._read(rel)), None)
            except (SchemaError, OSError) as exc:
                self._schemas[rel] = (None, str(exc))
        return self._schemas[rel]

    def schema(self, rel: str) -> TableSchema | None:
        return self._schema_entry(rel)[0]

    def schema_error(self, rel: str) -> str | None:
        return self._schema_entry(rel)[1]

    def _dictionary_entry(self, rel: str) -> tuple[DataDictionary | None, str | None]:
        if rel not in self._dictionaries:
            try:
                self._dictionaries[rel] = (dictionary_from_csv(self._read(rel)), None)
            except (ToolError, OSError) as exc:
                self._dictionaries[rel] = (None, str(exc))
        return self._dictionaries[rel]

    def dictionary(self, rel: str) -> DataDictionary | None:
        return self._dictionary_entry(rel)[0]

    def dictionary_error(self, rel: str) -> str | None:
        return self._dictionary_entry(rel)[1]

    # Shared derived views -------------------------------------------------

    def dataset_dictionary_refs(self, ds: Dataset) -> list[FileRef]:
        refs = [
            ref
            for ref in list(ds.dictionary_files) + list(self.pkg.pool.dictionary_files)
            if ref.kind is FileKind.PLAIN_TEXT_TABLE
        ]
        return sorted(refs, key=lambda ref: ref.path)

    def all_dictionary_refs(self) -> list[FileRef]:
        by_path: dict[str, FileRef] = {}
        for ds in self.pkg.datasets:
            for ref in ds.dictionary_files:
                by_path[ref.path] = ref
        for ref in self.pkg.pool.dictionary_files:
            by_path[ref.path] = ref
        return [
            by_path[path]
            for path in sorted(by_path)
            if by_path[path].kind is FileKind.PLAIN_TEXT_TABLE
        ]

    def json_metadata_refs(self, ds: Dataset) -> list[FileRef]:
        return sorted(
            (ref for ref in ds.metadata_files if ref.path.lower().endswith(".json")),
            key=lambda ref: ref.path,
        )

    def declared_missing(self, ds: Dataset) -> frozenset[str]:
        """Missing-value tokens declared by the dataset's schema files and
        dictionaries.  Nothing declared means an empty set, not a default."""
        declared: set[str] = set()
        for ref in self.json_metadata_refs(ds):
            schema = self.schema(ref.path)
            if schema is not None:
                declared |= schema.missing_values
        for ref in self.dataset_dictionary_refs(ds):
            dictionary = self.dictionary(ref.path)
            if dictionary is not None:
                for entry in dictionary.entries:
                    declared |= entry.missing_codes
        return frozenset(declared)

    def dataset_tables(self, ds: Dataset) -> list[tuple[FileRef, CsvTable]]:
        out = []
        for ref in sorted(ds.data_files, key=lambda ref: ref.path):
            table = self.table(ref.path)
            if table is not None:
                out.append((ref, table))
        return out


# ---------------------------------------------------------------------------
# Rule evaluators.  Each yields findings with a declared severity no higher
# than its rule's ceiling; lint_package applies configuration afterwards.


def _f(rule_id: str, severity: str, detail: str, path: str | None = None, **data: str) -> Finding:
    return Finding(
        rule_id=rule_id, severity=severity, detail=detail, path=path, machine_data=dict(data)
    )


def _eval_r01(ctx: _Context) -> Iterator[Finding]:
    if ctx.pkg.readme is None:
        yield _f("R01", "error", "no README file at the package top level")


_README_QUESTIONS = (
    ("who", re.compile(r"\bwho\b|\bauthor", re.IGNORECASE)),
    ("what", re.compile(r"\bwhat\b|\bdata\b", re.IGNORECASE)),
    ("when", re.compile(r"\bwhen\b|\bdate", re.IGNORECASE)),
    ("where", re.compile(r"\bwhere\b|\blocation", re.IGNORECASE)),
    ("why", re.compile(r"\bwhy\b|\bpurpose", re.IGNORECASE)),
    ("how", re.compile(r"\bhow\b|\bmethod", re.IGNORECASE)),
)


def _eval_r02(ctx: _Context) -> Iterator[Finding]:
    readme = ctx.pkg.readme
    if readme is None:
        return
    text = (ctx.pkg.root / readme.path).read_text(encoding="utf-8", errors="replace")
    unanswered = [name for name, pattern in _README_QUESTIONS if not pattern.search(text)]
    if unanswered:
        yield _f(
            "R02",
            "warning",
            "README does not appear to answer: " + ", ".join(unanswered),
            path=readme.path,
            questions=",".join(unanswered),
        )


def _eval_r03(ctx: _Context) -> Iterator[Finding]:
    pkg = ctx.pkg
    pool_has = any(
        ref.kind is FileKind.PLAIN_TEXT_TABLE for ref in pkg.pool.dictionary_files
    )
    if not pkg.datasets:
        if not pool_has:
            yield _f("R03", "error", "no data dictionary anywhere in the package")
        return
    for ds in pkg.datasets:
        ds_has = any(
            ref.kind is FileKind.PLAIN_TEXT_TABLE for ref in ds.dictionary_files
        )
        if not ds_has and not pool_has:
            path = ds.data_files[0].path if ds.data_files else None
            yield _f(
                "R03",
                "error",
                f"dataset {ds.name!r} has no data dictionary (a plain-text table of variables)",
                path=path,
                dataset=ds.name,
            )


def _eval_r04(ctx: _Context) -> Iterator[Finding]:
    pkg = ctx.pkg
    for ref in ctx.all_dictionary_refs():
        if ctx.dictionary(ref.path) is None:
            yield _f(
                "R04",
                "error",
                f"data dictionary cannot be parsed: {ctx.dictionary_error(ref.path)}",
                path=ref.path,
            )
    for ds in pkg.datasets:
        refs = ctx.dataset_dictionary_refs(ds)
        if not refs:
            continue
        parsed = [ctx.dictionary(ref.path) for ref in refs]
        dictionaries = [d for d in parsed if d is not None]
        if not dictionaries:
            continue
        variables: set[str] = set()
        for dictionary in dictionaries:
            variables.update(dictionary.variable_names())
        for ref, table in ctx.dataset_tables(ds):
            undescribed = [
                name for name in table.column_names if name not in variables
            ]
            if undescribed:
                yield _f(
                    "R04",
                    "error",
                    "dictionary does not describe column(s): " + ", ".join(undescribed),
                    path=ref.path,
                    columns=",".join(undescribed),
                )


def _eval_r05(ctx: _Context) -> Iterator[Finding]:
    if ctx.pkg.license is None:
        yield _f("R05", "error", "no license file at the package top level")


def _eval_r06(ctx: _Context) -> Iterator[Finding]:
    license_ref = ctx.pkg.license
    if license_ref is None:
        return
    if license_ref.detected is LicenseKind.UNKNOWN:
        yield _f(
            "R06",
            "warning",
            "license text is not recognized; expected CC BY 4.0, CC0 1.0, or ODbL 1.0",
            path=license_ref.path,
        )


_DOI_RE = re.compile(r"\b10\.[0-9]{4,}(?:\.[0-9]+)*/[^\s\"<>]+")


def _eval_r07(ctx: _Context) -> Iterator[Finding]:
    citation = ctx.pkg.citation
    if citation is None:
        yield _f("R07", "warning", "no citation file at the package top level")
        return
    text = (ctx.pkg.root / citation.path).read_text(encoding="utf-8", errors="replace")
    if not _DOI_RE.search(text):
        yield _f(
            "R07",
            "info",
            "citation file has no DOI; add one once the data is archived",
            path=citation.path,
        )


def _eval_r08(ctx: _Context) -> Iterator[Finding]:
    for ds in ctx.pkg.datasets:
        if not ds.metadata_files:
            path = ds.data_files[0].path if ds.data_files else None
            yield _f(
                "R08",
                "warning",
                f"dataset {ds.name!r} has no machine-readable metadata under metadata/",
                path=path,
                dataset=ds.name,
            )


def _describe_violation(v) -> str:
    if v.row is None:
        return f"{v.kind} for field {v.field!r}"
    return f"{v.kind} at row {v.row}, field {v.field!r}, value {v.value!r}"


def _eval_r09(ctx: _Context) -> Iterator[Finding]:
    pkg = ctx.pkg
    seen: set[str] = set()
    jobs: list[tuple[FileRef, Dataset | None]] = []
    for ds in pkg.datasets:
        for ref in ctx.json_metadata_refs(ds):
            if ref.path not in seen:
                seen.add(ref.path)
                jobs.append((ref, ds))
    for ref in sorted(pkg.pool.metadata_files, key=lambda r: r.path):
        if ref.path.lower().endswith(".json") and ref.path not in seen:
            seen.add(ref.path)
            jobs.append((ref, None))

    for ref, ds in sorted(jobs, key=lambda job: job[0].path):
        schema = ctx.schema(ref.path)
        if schema is None:
            yield _f(
                "R09",
                "error",
                f"not valid schema JSON: {ctx.schema_error(ref.path)}",
                path=ref.path,
            )
            continue
        target: str | None = None
        if schema.path is not None:
            normalized = schema.path.split("/")
            if schema.path.startswith("/") or ".." in normalized:
                yield _f(
                    "R09",
                    "error",
                    f"schema 'path' must stay inside the package: {schema.path!r}",
                    path=ref.path,
                )
                continue
            if not (pkg.root / schema.path).is_file():
                yield _f(
                    "R09",
                    "error",
                    f"schema points at a missing table: {schema.path}",
                    path=ref.path,
                )
                continue
            target = schema.path
        elif ds is not None and ds.data_files:
            target = sorted(ds.data_files, key=lambda r: r.path)[0].path
        if target is None:
            continue
        table = ctx.table(target)
        if table is None:
            yield _f(
                "R09",
                "error",
                f"table {target} cannot be parsed: {ctx.table_error(target)}",
                path=ref.path,
            )
            continue
        result = validate_table(table, schema)
        if not result.ok:
            first = result.violations[0]
            yield _f(
                "R09",
                "error",
                f"{target} does not match the schema: {len(result.violations)} violation(s); "
                f"first: {_describe_violation(first)}",
                path=ref.path,
                violations=str(len(result.violations)),
            )


def _eval_r10(ctx: _Context) -> Iterator[Finding]:
    pkg = ctx.pkg
    has_raw = any(ds.raw_files for ds in pkg.datasets) or bool(pkg.pool.raw_files)
    if not has_raw:
        yield _f(
            "R10",
            "info",
            "no raw data under data-raw/; share the untouched originals when you can",
        )


def _eval_r11(ctx: _Context) -> Iterator[Finding]:
    pkg = ctx.pkg
    for ds in pkg.datasets:
        if ds.raw_files and not ds.scripts:
            yield _f(
                "R11",
                "warning",
                f"dataset {ds.name!r} has raw data but no cleaning script under data-raw/",
                path=ds.raw_files[0].path,
                dataset=ds.name,
            )
    any_scripts = bool(pkg.pool.scripts) or any(ds.scripts for ds in pkg.datasets)
    if pkg.pool.raw_files and not any_scripts:
        yield _f(
            "R11",
            "warning",
            "raw data is present but no cleaning script accompanies it",
            path=pkg.pool.raw_files[0].path,
        )


def _eval_r12(ctx: _Context) -> Iterator[Finding]:
    pkg = ctx.pkg
    if not pkg.datasets:
        yield _f("R12", "error", "no analysis-ready tables under data/")
    for ds in pkg.datasets:
        for ref in sorted(ds.data_files, key=lambda r: r.path):
            if ctx.table(ref.path) is None:
                yield _f(
                    "R12",
                    "error",
                    f"table cannot be parsed: {ctx.table_error(ref.path)}",
                    path=ref.path,
                )
    for ref in sorted(pkg.pool.data_files, key=lambda r: r.path):
        if ref.kind is FileKind.BINARY_DATA:
            yield _f(
                "R12",
                "error",
                "binary data under data/; ship the analysis-ready table as plain text",
                path=ref.path,
            )


_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_NAME_LENGTH_LIMIT = 32


def _eval_r13(ctx: _Context) -> Iterator[Finding]:
    for ds in ctx.pkg.datasets:
        for ref, table in ctx.dataset_tables(ds):
            names = table.column_names
            awkward = [name for name in names if not _NAME_RE.fullmatch(name)]
            if awkward:
                yield _f(
                    "R13",
                    "warning",
                    "column name(s) are not machine-friendly: "
                    + ", ".join(repr(name) for name in awkward)
                    + "; use letters, digits, and underscores, starting with a letter",
                    path=ref.path,
                    columns=",".join(awkward),
                )
            lengthy = [name for name in names if len(name) > _NAME_LENGTH_LIMIT]
            if lengthy:
                yield _f(
                    "R13",
                    "info",
                    f"column name(s) longer than {_NAME_LENGTH_LIMIT} characters: "
                    + ", ".join(repr(name) for name in lengthy),
                    path=ref.path,
                )


_DATEISH_RES = (
    re.compile(r"[0-9]{4}-[0-9]{1,2}-[0-9]{1,2}"),
    re.compile(r"[0-9]{1,2}-[0-9]{1,2}-[0-9]{4}"),
    re.compile(r"[0-9]{4}/[0-9]{1,2}/[0-9]{1,2}"),
    re.compile(r"[0-9]{1,2}/[0-9]{1,2}/[0-9]{2,4}"),
)


def _looks_dateish(cell: str) -> bool:
    return any(pattern.fullmatch(cell) for pattern in _DATEISH_RES)


def _eval_r14(ctx: _Context) -> Iterator[Finding]:
    for ds in ctx.pkg.datasets:
        declared = ctx.declared_missing(ds)
        for ref, table in ctx.dataset_tables(ds):
            for index, name in enumerate(table.column_names):
                considered = [
                    row[index]
                    for row in table.rows
                    if row[index] != "" and row[index] not in declared
                ]
                if not considered or not all(_looks_dateish(c) for c in considered):
                    continue
                offending = [c for c in considered if not is_date_token(c)]
                if offending:
                    yield _f(
                        "R14",
                        "warning",
                        f"column {name!r} holds dates but {len(offending)} value(s) "
                        f"are not calendar-valid YYYY-MM-DD (e.g. {offending[0]!r})",
                        path=ref.path,
                        column=name,
                        example=offending[0],
                    )


def _eval_r15(ctx: _Context) -> Iterator[Finding]:
    for ds in ctx.pkg.datasets:
        declared = ctx.declared_missing(ds)
        for ref, table in ctx.dataset_tables(ds):
            suspicious: list[str] = []
            for index, name in enumerate(table.column_names):
                cells = [row[index] for row in table.rows]
                profile = detect_missing_tokens(cells, declared)
                if profile.suspects:
                    tokens = ", ".join(repr(t) for t in sorted(profile.suspects))
                    suspicious.append(f"{name}: {tokens}")
            if suspicious:
                yield _f(
                    "R15",
                    "warning",
                    "undeclared missing-value token(s) found -- " + "; ".join(suspicious),
                    path=ref.path,
                )


def _eval_r16(ctx: _Context) -> Iterator[Finding]:
    pkg = ctx.pkg
    if pkg.checksums is None:
        yield _f(
            "R16",
            "warning",
            f"no {CHECKSUMS_NAME} manifest at the package top level",
        )
        return
    try:
        manifest = parse_manifest((pkg.root / pkg.checksums.path).read_bytes())
    except ManifestError as exc:
        yield _f("R16", "warning", f"manifest cannot be parsed: {exc}", path=pkg.checksums.path)
        return
    report = verify_manifest(
        pkg.root, manifest, include=lambda rel: rel != pkg.checksums.path
    )
    if report.mismatched:
        yield _f(
            "R16",
            "warning",
            "checksum mismatch for: " + ", ".join(report.mismatched),
            path=pkg.checksums.path,
            mismatched=",".join(report.mismatched),
        )
    if report.missing:
        yield _f(
            "R16",
            "warning",
            "manifest lists file(s) that do not exist: " + ", ".join(report.missing),
            path=pkg.checksums.path,
            missing=",".join(report.missing),
        )
    if report.extra:
        yield _f(
            "R16",
            "info",
            "file(s) not covered by the manifest: " + ", ".join(report.extra),
            path=pkg.checksums.path,
            extra=",".join(report.extra),
        )


_RELEASE_LIMIT_BYTES = 2_000_000_000
_ARCHIVE_LIMIT_BYTES = 50_000_000_000


def _eval_r17(ctx: _Context) -> Iterator[Finding]:
    pkg = ctx.pkg
    sized: list[tuple[str, int]] = [
        (ref.path, ref.size_bytes) for ref in pkg.all_file_refs()
    ]
    for doc in (pkg.readme, pkg.citation, pkg.checksums):
        if doc is not None:
            sized.append((doc.path, doc.size_bytes))
    if pkg.license is not None:
        sized.append((pkg.license.path, pkg.license.size_bytes))
    for path, size in sorted(sized):
        if size > _RELEASE_LIMIT_BYTES:
            yield _f(
                "R17",
                "info",
                f"{size} bytes exceeds the 2 GB single-file ceiling common for "
                "repository releases; consider chunking",
                path=path,
            )
        if size > _ARCHIVE_LIMIT_BYTES:
            yield _f(
                "R17",
                "info",
                f"{size} bytes exceeds the 50 GB single-file ceiling common for "
                "archival deposits",
                path=path,
            )


def _eval_r18(ctx: _Context) -> Iterator[Finding]:
    groups: dict[frozenset[str], list[tuple[str, dict[str, str]]]] = {}
    for ref in ctx.all_dictionary_refs():
        dictionary = ctx.dictionary(ref.path)
        if dictionary is None:
            continue
        for entry in dictionary.entries:
            if entry.codes:
                key = frozenset(entry.codes)
                groups.setdefault(key, []).append((entry.variable_name, entry.codes))
    for key in sorted(groups, key=sorted):
        members = groups[key]
        if len(members) < 2:
            continue
        for code in sorted(key):
            labels = {codes[code] for _, codes in members}
            if len(labels) > 1:
                variables = ", ".join(sorted(name for name, _ in members))
                yield _f(
                    "R18",
                    "info",
                    f"code {code!r} means different things across variables sharing "
                    f"a code set ({variables}): " + ", ".join(sorted(labels)),
                    code=code,
                )


_EVALUATORS: tuple[tuple[LintRule, Callable[[_Context], Iterable[Finding]]], ...] = tuple(
    (RULES_BY_ID[name], evaluator)
    for name, evaluator in (
        ("R01", _eval_r01),
        ("R02", _eval_r02),
        ("R03", _eval_r03),
        ("R04", _eval_r04),
        ("R05", _eval_r05),
        ("R06", _eval_r06),
        ("R07", _eval_r07),
        ("R08", _eval_r08),
        ("R09", _eval_r09),
        ("R10", _eval_r10),
        ("R11", _eval_r11),
        ("R12", _eval_r12),
        ("R13", _eval_r13),
        ("R14", _eval_r14),
        ("R15", _eval_r15),
        ("R16", _eval_r16),
        ("R17", _eval_r17),
        ("R18", _eval_r18),
    )
)


def lint_package(pkg: DataPackage, config: LintConfig | None = None) -> LintReport:
    """Run every enabled rule over a scanned package.

    Findings are ordered by severity (errors first), rule id, path, and
    detail, so the same package always yields the same report.  A rule
    evaluator that crashes becomes a single ``R00`` warning naming the rule
    instead of taking the whole run down.
    """
    config = config or LintConfig()
    ctx = _Context(pkg)
    findings: list[Finding] = []
    for rule, evaluator in _EVALUATORS:
        effective = config.effective_severity(rule)
        if effective is None:
            continue
        try:
            produced = list(evaluator(ctx))
        except Exception as exc:  # noqa: BLE001 - the catch-all rule reports it
            findings.append(
                Finding(
                    rule_id=_CATCHALL_RULE_ID,
                    severity="warning",
                    detail=f"{rule.id} ({rule.title}) could not be evaluated: {exc}",
                    machine_data={"rule": rule.id},
                )
            )
            continue
        for finding in produced:
            final_rank = max(_SEVERITY_RANK[effective], _SEVERITY_RANK[finding.severity])
            findings.append(replace(finding, severity=SEVERITIES[final_rank]))

    findings.sort(
        key=lambda f: (_SEVERITY_RANK[f.severity], f.rule_id, f.path or "", f.detail)
    )
    counts = {name: 0 for name in SEVERITIES}
    for finding in findings:
        counts[finding.severity] += 1
    return LintReport(findings=findings, counts=counts, passed=counts["error"] == 0)


def report_to_json(report: LintReport) -> bytes:
    """Serialize a report to stable JSON bytes.

    Key order is fixed (``pass``, ``counts``, ``findings``), the indent is
    two spaces, lines end with LF, and the output ends with a newline, so
    linting the same package twice yields identical bytes.
    """
    import json

    obj = {
        "pass": report.passed,
        "counts": {name: report.counts[name] for name in SEVERITIES},
        "findings": [
            {
                "rule_id": f.rule_id,
                "severity": f.severity,
                "path": f.path,
                "detail": f.detail,
            }
            for f in report.findings
        ],
    }
    return (json.dumps(obj, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _anchor_for(rule_id: str) -> str:
    rule = RULES_BY_ID.get(rule_id)
    return rule.anchor if rule is not None else _CATCHALL_ANCHOR


def report_to_text(report: LintReport) -> str:
    """Render a report for the terminal, grouped by severity."""
    counts = report.counts
    lines = [
        ("PASS" if report.passed else "FAIL")
        + f": {counts['error']} error(s), {counts['warning']} warning(s), {counts['info']} info"
    ]
    for severity in SEVERITIES:
        group = [f for f in report.findings if f.severity == severity]
        if not group:
            continue
        lines.append("")
        lines.append(severity.upper())
        for f in group:
            location = f"  {f.path}: " if f.path else "  "
            lines.append(f"{location}{f.rule_id} [{_anchor_for(f.rule_id)}] {f.detail}")
    return "\n".join(lines) + "\n"
