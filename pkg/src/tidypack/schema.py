"""Table schemas and data dictionaries: inference, validation, serialization.

A schema types each column with one of five field types.  Inference walks a
column's non-missing cells and picks the most specific type every cell
satisfies: ``integer`` is inside ``number``; ``boolean`` and ``date`` stand
apart; ``string`` accepts anything.  A column with no non-missing cells is a
``string`` column.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .errors import DictionaryError, SchemaError
from .tabular import (
    CsvTable,
    Dialect,
    is_boolean_token,
    is_date_token,
    is_integer_token,
    is_number_token,
    parse_csvy,
    serialize_table,
)

FIELD_TYPES = ("string", "integer", "number", "boolean", "date")

#: Default declared missing values when nothing else is specified.
DEFAULT_MISSING_VALUES = frozenset({"NA"})

_TYPE_CHECKS = {
    "integer": is_integer_token,
    "number": is_number_token,
    "boolean": is_boolean_token,
    "date": is_date_token,
}

# Most specific first; the first type every cell satisfies wins.
_INFERENCE_ORDER = ("integer", "number", "boolean", "date")


@dataclass(frozen=True)
class FieldDescriptor:
    """One column in a table schema."""

    name: str
    type: str = "string"
    description: str = ""
    codes: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.name or not self.name.strip():
            raise SchemaError("field name must be non-empty")
        if self.type not in FIELD_TYPES:
            allowed = ",".join(FIELD_TYPES)
            raise SchemaError(f"unknown field type {self.type!r}; allowed: {allowed}")
        if self.codes and self.type not in ("string", "integer"):
            raise SchemaError(
                f"field {self.name!r}: codes only make sense on string or integer fields, not {self.type}"
            )


@dataclass(frozen=True)
class TableSchema:
    """Column types and missing-value declarations for one table."""

    name: str
    fields: list[FieldDescriptor]
    path: str | None = None
    missing_values: frozenset[str] = DEFAULT_MISSING_VALUES
    license_id: str | None = None

    def __post_init__(self):
        if not self.name or not self.name.strip():
            raise SchemaError("schema name must be non-empty")
        object.__setattr__(self, "missing_values", frozenset(self.missing_values))
        seen: set[str] = set()
        for f in self.fields:
            if f.name in seen:
                raise SchemaError(f"duplicate field name {f.name!r}")
            seen.add(f.name)

    def field_names(self) -> list[str]:
        return [f.name for f in self.fields]

    def field(self, name: str) -> FieldDescriptor:
        for f in self.fields:
            if f.name == name:
                return f
        raise SchemaError(f"schema has no field named {name!r}")


@dataclass(frozen=True)
class Violation:
    """One way a table fails its schema.

    ``row`` is the 1-based data-row index, or ``None`` for structural
    problems (missing or unknown columns).
    """

    kind: str  # type_mismatch | bad_date_format | undeclared_missing_token | missing_column | unknown_column
    field: str
    row: int | None = None
    value: str = ""


@dataclass(frozen=True)
class ValidationReport:
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations


def infer_field_type(
    cells: Iterable[str], missing_values: Iterable[str] = DEFAULT_MISSING_VALUES
) -> str:
    """Pick the most specific field type every non-missing cell satisfies."""
    missing = frozenset(missing_values)
    observed = [cell for cell in cells if cell not in missing]
    if not observed:
        return "string"
    for candidate in _INFERENCE_ORDER:
        check = _TYPE_CHECKS[candidate]
        if all(check(cell) for cell in observed):
            return candidate
    return "string"


def infer_schema(
    table: CsvTable,
    *,
    name: str | None = None,
    path: str | None = None,
    missing_values: Iterable[str] = DEFAULT_MISSING_VALUES,
) -> TableSchema:
    """Infer a schema from a table's header and cells.

    Column order follows the table.  Raises ``SchemaError`` for a headerless
    table.
    """
    if not table.header:
        raise SchemaError("table has no header row; cannot infer a schema")
    if name is None:
        if table.source:
            from pathlib import PurePath

            name = PurePath(table.source).stem
        else:
            name = "table"
    missing = frozenset(missing_values)
    fields = []
    for index, column_name in enumerate(table.column_names):
        cells = [row[index] for row in table.rows]
        fields.append(
            FieldDescriptor(name=column_name, type=infer_field_type(cells, missing))
        )
    return TableSchema(name=name, fields=fields, path=path, missing_values=missing)


def validate_table(table: CsvTable, schema: TableSchema) -> ValidationReport:
    """Check a table against a schema.

    Structural violations (schema columns absent from the table, table
    columns unknown to the schema) come first, then cell violations ordered
    by row and column.  Cells equal to a declared missing value are skipped.
    A cell that fails its type but matches the common missing-value
    watchlist is reported as ``undeclared_missing_token``; a bad cell under
    a ``date`` field is ``bad_date_format``; anything else is
    ``type_mismatch``.
    """
    from .tabular import MISSING_WATCHLIST

    violations: list[Violation] = []
    names = table.column_names
    present = set(names)
    schema_names = set(schema.field_names())

    for f in schema.fields:
        if f.name not in present:
            violations.append(Violation(kind="missing_column", field=f.name))
    for column_name in names:
        if column_name not in schema_names:
            violations.append(Violation(kind="unknown_column", field=column_name))

    checked = [
        (index, name, schema.field(name))
        for index, name in enumerate(names)
        if name in schema_names
    ]
    for row_number, row in enumerate(table.rows, start=1):
        for index, name, descriptor in checked:
            cell = row[index]
            if cell in schema.missing_values:
                continue
            if descriptor.type == "string":
                continue
            if _TYPE_CHECKS[descriptor.type](cell):
                continue
            if cell in MISSING_WATCHLIST:
                kind = "undeclared_missing_token"
            elif descriptor.type == "date":
                kind = "bad_date_format"
            else:
                kind = "type_mismatch"
            violations.append(
                Violation(kind=kind, field=name, row=row_number, value=cell)
            )
    return ValidationReport(violations=violations)


def _field_to_obj(f: FieldDescriptor) -> dict[str, Any]:
    obj: dict[str, Any] = {"name": f.name, "type": f.type}
    if f.description:
        obj["description"] = f.description
    if f.codes:
        obj["codes"] = {key: f.codes[key] for key in sorted(f.codes)}
    return obj


def schema_to_json(schema: TableSchema) -> bytes:
    """Serialize a schema to canonical JSON bytes.

    Canonical means: fixed key order (``name``, ``path``, ``schema``,
    ``missingValues``, ``license``), two-space indent, LF line endings, a
    trailing newline, and non-ASCII characters kept as-is.  ``path`` and
    ``license`` are omitted when unset; ``missingValues`` is always present
    and sorted.
    """
    obj: dict[str, Any] = {"name": schema.name}
    if schema.path is not None:
        obj["path"] = schema.path
    obj["schema"] = {"fields": [_field_to_obj(f) for f in schema.fields]}
    obj["missingValues"] = sorted(schema.missing_values)
    if schema.license_id is not None:
        obj["license"] = schema.license_id
    return (json.dumps(obj, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _field_from_obj(obj: Any, where: str) -> FieldDescriptor:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where} must be an object")
    name = obj.get("name")
    if not isinstance(name, str) or not name.strip():
        raise SchemaError(f"{where} is missing a non-empty 'name'")
    type_name = obj.get("type", "string")
    if not isinstance(type_name, str) or type_name not in FIELD_TYPES:
        allowed = ",".join(FIELD_TYPES)
        raise SchemaError(f"unknown field type {type_name!r}; allowed: {allowed}")
    description = obj.get("description", "")
    if not isinstance(description, str):
        raise SchemaError(f"{where}: 'description' must be a string")
    codes_obj = obj.get("codes", {})
    if not isinstance(codes_obj, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in codes_obj.items()
    ):
        raise SchemaError(f"{where}: 'codes' must map strings to strings")
    return FieldDescriptor(
        name=name, type=type_name, description=description, codes=dict(codes_obj)
    )


def _schema_from_mapping(obj: Mapping[str, Any], *, where: str) -> TableSchema:
    name = obj.get("name")
    if not isinstance(name, str) or not name.strip():
        raise SchemaError(f"{where}: missing required key 'name'")
    schema_obj = obj.get("schema")
    if not isinstance(schema_obj, Mapping):
        raise SchemaError(f"{where}: missing required key 'schema'")
    fields_obj = schema_obj.get("fields")
    if not isinstance(fields_obj, list):
        raise SchemaError(f"{where}: missing required key 'schema.fields'")
    fields = [
        _field_from_obj(f, f"{where}: schema.fields[{i}]")
        for i, f in enumerate(fields_obj)
    ]
    path = obj.get("path")
    if path is not None and not isinstance(path, str):
        raise SchemaError(f"{where}: 'path' must be a string")
    missing_obj = obj.get("missingValues", sorted(DEFAULT_MISSING_VALUES))
    if not isinstance(missing_obj, list) or not all(
        isinstance(v, str) for v in missing_obj
    ):
        raise SchemaError(f"{where}: 'missingValues' must be a list of strings")
    license_id = obj.get("license")
    if license_id is not None and not isinstance(license_id, str):
        raise SchemaError(f"{where}: 'license' must be a string")
    return TableSchema(
        name=name,
        fields=fields,
        path=path,
        missing_values=frozenset(missing_obj),
        license_id=license_id,
    )


def schema_from_json(data: bytes | str) -> TableSchema:
    """Parse schema JSON produced by ``schema_to_json`` (or shaped like it).

    Unknown keys are ignored so hand-edited files with extra metadata still
    load.  Raises ``SchemaError`` for invalid JSON, a missing ``name`` or
    ``schema.fields``, or an unknown field type.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaError(f"schema JSON is not valid UTF-8: {exc}") from None
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"schema is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise SchemaError("schema JSON must be an object")
    return _schema_from_mapping(obj, where="schema JSON")


def schema_from_front_matter(mapping: Mapping[str, Any]) -> TableSchema:
    """Extract a schema from parsed front matter carrying a ``schema`` block."""
    return _schema_from_mapping(mapping, where="front matter")


# ---------------------------------------------------------------------------
# Data dictionaries


#: How R reports column classes, mapped onto our field types.
R_CLASS_MAP = {
    "character": "string",
    "factor": "string",
    "double": "number",
    "numeric": "number",
    "integer": "integer",
    "logical": "boolean",
    "date": "date",
}


def normalize_class(raw: str) -> str:
    """Map a column-class label onto a field type where possible.

    Labels already naming a field type pass through; R class names map per
    ``R_CLASS_MAP``; a parenthetical qualifier is dropped before matching,
    so ``integer (date)`` normalizes to ``integer``.  Anything unrecognized
    is kept verbatim (trimmed) rather than guessed at.
    """
    trimmed = raw.strip()
    base = trimmed.split("(", 1)[0].strip().lower()
    if base in FIELD_TYPES:
        return base
    if base in R_CLASS_MAP:
        return R_CLASS_MAP[base]
    return trimmed


#: Separators used by the dictionary CSV encoding; they may not occur inside
#: the values they separate.
_CODE_PAIR_SEP = "; "
_CODE_KV_SEP = " = "


@dataclass(frozen=True)
class DictionaryEntry:
    """One variable in a data dictionary."""

    variable_name: str
    class_name: str
    label: str = ""
    description: str = ""
    codes: dict[str, str] = field(default_factory=dict)
    missing_codes: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.variable_name or not self.variable_name.strip():
            raise DictionaryError("dictionary entry is missing a variable name")
        if not self.class_name or not self.class_name.strip():
            raise DictionaryError(
                f"dictionary entry {self.variable_name!r} is missing a class"
            )
        object.__setattr__(self, "missing_codes", frozenset(self.missing_codes))
        for key, value in self.codes.items():
            if ";" in key or ";" in value:
                raise DictionaryError(
                    f"variable {self.variable_name!r}: ';' cannot occur in a code or its label"
                )
            if "=" in key:
                raise DictionaryError(
                    f"variable {self.variable_name!r}: '=' cannot occur in a code"
                )
        for token in self.missing_codes:
            if ";" in token:
                raise DictionaryError(
                    f"variable {self.variable_name!r}: ';' cannot occur in a missing code"
                )


@dataclass(frozen=True)
class DataDictionary:
    """An ordered collection of variable descriptions."""

    entries: list[DictionaryEntry]

    def __post_init__(self):
        seen: set[str] = set()
        for entry in self.entries:
            if entry.variable_name in seen:
                raise DictionaryError(f"duplicate variable {entry.variable_name!r}")
            seen.add(entry.variable_name)

    def variable_names(self) -> list[str]:
        return [entry.variable_name for entry in self.entries]


def dictionary_from_schema(schema: TableSchema) -> DataDictionary:
    """Build a dictionary skeleton from a schema, one entry per field."""
    entries = [
        DictionaryEntry(
            variable_name=f.name,
            class_name=f.type,
            description=f.description,
            codes=dict(f.codes),
            missing_codes=schema.missing_values,
        )
        for f in schema.fields
    ]
    return DataDictionary(entries=entries)


_DICTIONARY_COLUMNS = ("variable", "class", "description", "codes", "missing_codes")


def _parse_codes_cell(cell: str, variable: str) -> dict[str, str]:
    cell = cell.strip()
    if not cell:
        return {}
    codes: dict[str, str] = {}
    for pair in cell.split(";"):
        pair = pair.strip()
        if not pair:
            continue
        if "=" not in pair:
            raise DictionaryError(
                f"variable {variable!r}: malformed codes cell; expected 'code = label' pairs"
            )
        key, _, value = pair.partition("=")
        codes[key.strip()] = value.strip()
    return codes


def _parse_missing_cell(cell: str) -> frozenset[str]:
    cell = cell.strip()
    if not cell:
        return frozenset()
    return frozenset(token.strip() for token in cell.split(";") if token.strip())


def dictionary_from_table(table: CsvTable) -> DataDictionary:
    """Read a dictionary from a parsed table.

    Columns are matched case-insensitively; ``variable`` and ``class`` are
    required, ``description``, ``codes``, and ``missing_codes`` optional.
    Class labels are normalized (``character`` becomes ``string``,
    ``integer (date)`` becomes ``integer``, and so on).
    """
    lowered = {name.lower(): name for name in table.column_names}
    for required in ("variable", "class"):
        if required not in lowered:
            have = ", ".join(table.column_names) or "(none)"
            raise DictionaryError(
                f"dictionary table needs a {required!r} column; found: {have}"
            )

    def cells(key: str) -> list[str] | None:
        if key in lowered:
            return table.column(lowered[key])
        return None

    variables = cells("variable")
    classes = cells("class")
    descriptions = cells("description")
    codes_cells = cells("codes")
    missing_cells = cells("missing_codes")

    entries = []
    assert variables is not None and classes is not None
    for index, variable in enumerate(variables):
        variable = variable.strip()
        entries.append(
            DictionaryEntry(
                variable_name=variable,
                class_name=normalize_class(classes[index]),
                description=(descriptions[index].strip() if descriptions else ""),
                codes=(
                    _parse_codes_cell(codes_cells[index], variable)
                    if codes_cells
                    else {}
                ),
                missing_codes=(
                    _parse_missing_cell(missing_cells[index]) if missing_cells else frozenset()
                ),
            )
        )
    return DataDictionary(entries=entries)


def dictionary_from_csv(data: bytes) -> DataDictionary:
    """Parse dictionary CSV bytes (front matter tolerated and ignored)."""
    _, table = parse_csvy(data)
    return dictionary_from_table(table)


def _render_codes(codes: dict[str, str]) -> str:
    return _CODE_PAIR_SEP.join(
        f"{key}{_CODE_KV_SEP}{codes[key]}" for key in sorted(codes)
    )


def _render_missing(missing: frozenset[str]) -> str:
    return _CODE_PAIR_SEP.join(sorted(missing))


def dictionary_to_csv(dictionary: DataDictionary) -> bytes:
    """Serialize a dictionary to its five-column CSV form.

    The header is exactly ``variable,class,description,codes,missing_codes``.
    Codes render as ``code = label`` pairs joined by ``"; "`` in sorted
    order; missing codes are sorted and joined the same way.  Labels are an
    in-memory convenience and are not serialized.
    """
    rows = [
        [
            entry.variable_name,
            entry.class_name,
            entry.description,
            _render_codes(entry.codes),
            _render_missing(entry.missing_codes),
        ]
        for entry in dictionary.entries
    ]
    table = CsvTable(header=list(_DICTIONARY_COLUMNS), rows=rows, dialect=Dialect())
    return serialize_table(table)


def _markdown_escape(text: str) -> str:
    return text.replace("|", "\\|").replace("\n", " ")


def dictionary_to_markdown(dictionary: DataDictionary) -> str:
    """Render a dictionary as a Markdown pipe table.

    Always shows Variable, Class, and Description; adds Codes and Missing
    columns only when some entry has content for them.
    """
    show_codes = any(entry.codes for entry in dictionary.entries)
    show_missing = any(entry.missing_codes for entry in dictionary.entries)
    columns = ["Variable", "Class", "Description"]
    if show_codes:
        columns.append("Codes")
    if show_missing:
        columns.append("Missing")

    lines = [
        "| " + " | ".join(columns) + " |",
        "| " + " | ".join("---" for _ in columns) + " |",
    ]
    for entry in dictionary.entries:
        cells = [entry.variable_name, entry.class_name, entry.description]
        if show_codes:
            cells.append(_render_codes(entry.codes))
        if show_missing:
            cells.append(_render_missing(entry.missing_codes))
        lines.append("| " + " | ".join(_markdown_escape(cell) for cell in cells) + " |")
    return "\n".join(lines) + "\n"
