"""Delimited plain-text tables: dialect detection, parsing, and csvy front matter.

Tables are parsed by a small state machine rather than the stdlib ``csv``
module so that errors carry 1-based record numbers, cells round-trip
byte-exactly, and the quoting rules stay pinned to what this package
serializes: a field that starts with a double quote runs, delimiters and
newlines included, until the matching close quote, and a doubled quote
inside it is a literal quote.
"""

from __future__ import annotations

import datetime
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable

import yaml

from .errors import CsvError, EncodingError, FrontMatterError

if TYPE_CHECKING:  # pragma: no cover - import cycle guard, types only
    from .schema import TableSchema

LF = "\n"
CRLF = "\r\n"

#: Candidate delimiters, in preference order for detection ties.
DELIMITERS = (",", "\t", ";")

QUOTE = '"'

#: Tokens that commonly stand in for a missing value.  Cells equal to one of
#: these are flagged when they are not declared as missing codes.
MISSING_WATCHLIST = frozenset({"NA", "N/A", "", "-99", "-999", "unknown", "NULL", "."})

_INTEGER_RE = re.compile(r"[+-]?[0-9]+")
_NUMBER_RE = re.compile(r"[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?")
_DATE_RE = re.compile(r"([0-9]{4})-([0-9]{2})-([0-9]{2})")
_BOOLEAN_TOKENS = frozenset({"true", "false", "TRUE", "FALSE"})


def is_integer_token(cell: str) -> bool:
    """True for an optionally signed run of digits, e.g. ``-42``."""
    return _INTEGER_RE.fullmatch(cell) is not None


def is_number_token(cell: str) -> bool:
    """True for a decimal number with optional sign, fraction, and exponent.

    Thousands separators and other locale decorations do not count.
    """
    return _NUMBER_RE.fullmatch(cell) is not None


def is_boolean_token(cell: str) -> bool:
    """True for exactly ``true``, ``false``, ``TRUE``, or ``FALSE``."""
    return cell in _BOOLEAN_TOKENS


def is_date_token(cell: str) -> bool:
    """True for a calendar-valid ``YYYY-MM-DD`` date.

    The shape must match exactly (four digits, dash, two, dash, two) and the
    date must exist: ``2019-02-30`` and ``22-01-2019`` are both rejected.
    """
    m = _DATE_RE.fullmatch(cell)
    if m is None:
        return False
    year, month, day = (int(g) for g in m.groups())
    try:
        datetime.date(year, month, day)
    except ValueError:
        return False
    return True


@dataclass(frozen=True)
class Dialect:
    """How a delimited table is written down.

    ``fallback`` records that detection could not find a consistent
    delimiter and defaulted to the comma.
    """

    delimiter: str = ","
    quote: str = QUOTE
    line_ending: str = LF
    has_header: bool = True
    fallback: bool = False

    def __post_init__(self):
        if self.delimiter not in DELIMITERS:
            raise CsvError(f"unsupported delimiter {self.delimiter!r}; use comma, tab, or semicolon")
        if self.quote != QUOTE:
            raise CsvError(f"unsupported quote character {self.quote!r}")
        if self.line_ending not in (LF, CRLF):
            raise CsvError(f"unsupported line ending {self.line_ending!r}")


@dataclass(frozen=True)
class CsvTable:
    """An in-memory table: a header row plus data rows of equal width.

    Cells are kept verbatim; nothing is trimmed or type-coerced here.
    ``header`` may be empty for headerless input, in which case all rows
    share the width of the first row.
    """

    header: list[str]
    rows: list[list[str]]
    dialect: Dialect = field(default_factory=Dialect)
    source: str | None = None

    def __post_init__(self):
        if self.header:
            names = [name.strip() for name in self.header]
            seen: set[str] = set()
            for name in names:
                if name in seen:
                    raise CsvError(f"duplicate column name {name!r}")
                seen.add(name)
            width = len(self.header)
        elif self.rows:
            width = len(self.rows[0])
        else:
            width = 0
        if self.rows and width == 0:
            raise CsvError("rows must have at least one cell")
        offset = 1 if self.header else 0
        for index, row in enumerate(self.rows, start=1):
            if len(row) != width:
                raise CsvError(
                    f"expected {width} cells, found {len(row)}", row=index + offset
                )

    @property
    def column_names(self) -> list[str]:
        """Header cells with surrounding whitespace trimmed."""
        return [name.strip() for name in self.header]

    @property
    def width(self) -> int:
        if self.header:
            return len(self.header)
        if self.rows:
            return len(self.rows[0])
        return 0

    def column(self, name: str) -> list[str]:
        """All cells under the named column, in row order."""
        names = self.column_names
        try:
            index = names.index(name.strip())
        except ValueError:
            raise CsvError(f"no column named {name!r}; have {names}") from None
        return [row[index] for row in self.rows]


@dataclass(frozen=True)
class FrontMatter:
    """YAML front matter attached to a table.

    ``raw_yaml`` holds the verbatim text between the fences so a parse and
    re-serialize round trip reproduces the input byte for byte.  ``mapping``
    is the parsed value and ``schema`` is extracted from it when the mapping
    carries a ``schema`` block with ``fields``.
    """

    raw_yaml: str = ""
    mapping: dict = field(default_factory=dict)
    schema: "TableSchema | None" = None

    def __post_init__(self):
        for line in self.raw_yaml.split("\n"):
            if line.rstrip("\r") == _FENCE:
                raise FrontMatterError(
                    "raw_yaml may not contain a bare '---' line; it would close the fence early"
                )


def _decode(data: bytes) -> str:
    """Decode UTF-8 input, tolerating and stripping a leading BOM."""
    if data[:3] == b"\xef\xbb\xbf":
        data = data[3:]
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EncodingError(f"input is not valid UTF-8: {exc}") from None


def _split_records(
    text: str,
    delimiter: str,
    *,
    lenient: bool = False,
    limit: int | None = None,
) -> list[tuple[int, list[str]]]:
    """Split text into ``(record_number, cells)`` pairs.

    Record numbers are 1-based and count emitted records only; lines with no
    characters at all are skipped, so a trailing newline does not produce a
    phantom empty record.  With ``lenient`` set, an unterminated quote at end
    of input closes the field instead of raising (detection uses this on
    truncated samples).  ``limit`` stops after that many records.
    """
    records: list[tuple[int, list[str]]] = []
    cells: list[str] = []
    buf: list[str] = []
    in_quotes = False
    quoted_field = False  # current field began with an opening quote
    started = False  # current record has consumed at least one character
    i = 0
    n = len(text)

    def end_record() -> None:
        nonlocal quoted_field, started
        cells.append("".join(buf))
        buf.clear()
        records.append((len(records) + 1, cells.copy()))
        cells.clear()
        quoted_field = False
        started = False

    while i < n:
        ch = text[i]
        if in_quotes:
            if ch == QUOTE:
                if i + 1 < n and text[i + 1] == QUOTE:
                    buf.append(QUOTE)
                    i += 2
                    continue
                in_quotes = False
                i += 1
                continue
            buf.append(ch)
            i += 1
            continue
        if ch == QUOTE and not buf and not quoted_field:
            in_quotes = True
            quoted_field = True
            started = True
            i += 1
            continue
        if ch == delimiter:
            cells.append("".join(buf))
            buf.clear()
            quoted_field = False
            started = True
            i += 1
            continue
        if ch == "\n" or (ch == "\r" and i + 1 < n and text[i + 1] == "\n"):
            i += 2 if ch == "\r" else 1
            if not started:
                continue  # a line with no characters is not a record
            end_record()
            if limit is not None and len(records) >= limit:
                return records
            continue
        buf.append(ch)
        started = True
        i += 1

    if in_quotes and not lenient:
        raise CsvError("unterminated quoted field", row=len(records) + 1)
    if started:
        end_record()
    return records


def parse_table(data: bytes, dialect: Dialect) -> CsvTable:
    """Parse delimited bytes into a table, honoring the given dialect.

    Raises ``CsvError`` with the offending 1-based record number for ragged
    rows and unterminated quotes, and ``EncodingError`` for non-UTF-8 input.
    """
    text = _decode(data)
    records = _split_records(text, dialect.delimiter)
    if dialect.has_header:
        if not records:
            raise CsvError("table is empty; expected a header row")
        header = records[0][1]
        body = records[1:]
    else:
        header = []
        body = records
    if header:
        width = len(header)
    else:
        width = len(body[0][1]) if body else 0
    rows: list[list[str]] = []
    for number, cells in body:
        if len(cells) != width:
            raise CsvError(f"expected {width} cells, found {len(cells)}", row=number)
        rows.append(cells)
    return CsvTable(header=header, rows=rows, dialect=dialect)


def _detect_from_text(text: str) -> Dialect:
    line_ending = CRLF if CRLF in text else LF

    consistent: dict[str, int] = {}
    for delimiter in DELIMITERS:
        counts = [
            len(cells)
            for _, cells in _split_records(text, delimiter, lenient=True, limit=20)
        ]
        if not counts:
            continue
        modal = max(set(counts), key=lambda value: (counts.count(value), value))
        if counts.count(modal) == len(counts):
            consistent[delimiter] = modal

    fallback = False
    if consistent:
        best = max(consistent.values())
        delimiter = next(d for d in DELIMITERS if consistent.get(d) == best)
    else:
        delimiter = ","
        fallback = True

    records = _split_records(text, delimiter, lenient=True, limit=21)
    has_header = False
    if len(records) >= 2:
        first = records[0][1]
        if first and not any(is_number_token(cell) for cell in first):
            width = len(first)
            body = [cells for _, cells in records[1:] if len(cells) == width]
            if body:
                for j in range(width):
                    if all(is_number_token(row[j]) for row in body):
                        has_header = True
                        break
    return Dialect(
        delimiter=delimiter,
        line_ending=line_ending,
        has_header=has_header,
        fallback=fallback,
    )


def detect_dialect(sample: bytes) -> Dialect:
    """Guess delimiter, line ending, and headeredness from a sample.

    Candidates are comma, tab, and semicolon.  Each is scored over the first
    20 records (quote-aware, blank lines skipped): a candidate is consistent
    when every record has the same field count.  Among consistent candidates
    the one with the most fields wins; ties fall to comma, then tab, then
    semicolon.  When none is consistent the result is comma with
    ``fallback=True``.  ``has_header`` is set when the first record has no
    numeric cell but at least one full column below it is numeric.

    Raises ``CsvError`` on an empty sample.
    """
    if not sample:
        raise CsvError("cannot detect a dialect from an empty sample")
    return _detect_from_text(_decode(sample))


_FENCE = "---"


def _line_split_keepends(text: str) -> list[str]:
    """Split into lines, keeping terminators, without splitting on exotica.

    ``str.splitlines`` also breaks on form feeds and unicode separators,
    which would corrupt the byte-exact front-matter round trip, so this
    splits only on LF.
    """
    lines = text.split("\n")
    out = [line + "\n" for line in lines[:-1]]
    if lines[-1]:
        out.append(lines[-1])
    return out


class _FrontMatterLoader(yaml.SafeLoader):
    """SafeLoader minus implicit timestamps, so dates stay strings."""


_FrontMatterLoader.yaml_implicit_resolvers = {
    key: [
        (tag, regexp)
        for tag, regexp in resolvers
        if tag != "tag:yaml.org,2002:timestamp"
    ]
    for key, resolvers in yaml.SafeLoader.yaml_implicit_resolvers.items()
}


_ALLOWED_YAML_TAGS = frozenset(
    f"tag:yaml.org,2002:{name}"
    for name in ("str", "int", "float", "bool", "null", "map", "seq")
)


def _load_front_matter_mapping(raw: str) -> dict:
    """Parse front-matter YAML restricted to a plain-data subset.

    Allowed: one document whose value is a mapping built from mappings,
    sequences, strings, numbers, booleans, and null.  Anchors, aliases,
    non-core tags, and multiple documents are rejected.
    """
    documents = 0
    try:
        for event in yaml.parse(raw, Loader=_FrontMatterLoader):
            if isinstance(event, yaml.DocumentStartEvent):
                documents += 1
                if documents > 1:
                    raise FrontMatterError("front matter must be a single YAML document")
            if getattr(event, "anchor", None):
                raise FrontMatterError("YAML anchors and aliases are not supported in front matter")
            tag = getattr(event, "tag", None)
            if tag and tag not in _ALLOWED_YAML_TAGS:
                raise FrontMatterError(f"YAML tag is not supported in front matter: {tag}")
        value = yaml.load(raw, Loader=_FrontMatterLoader)
    except yaml.YAMLError as exc:
        raise FrontMatterError(f"front matter is not valid YAML: {exc}") from None
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise FrontMatterError("front matter must be a YAML mapping")
    return value


def parse_csvy(data: bytes) -> tuple[FrontMatter, CsvTable]:
    """Parse a table with optional YAML front matter.

    The front matter, when present, is fenced by lines that are exactly
    ``---``; everything between the fences is kept verbatim in
    ``FrontMatter.raw_yaml``.  The body's dialect is detected, and the first
    record is always taken as the header (this format carries named
    columns; a file whose first record looks numeric is data that lost its
    header, which ``chunk_table`` and friends reject on their own terms).

    Raises ``FrontMatterError`` for an unclosed fence or YAML outside the
    supported subset, and ``CsvError``/``EncodingError`` for a bad body.
    """
    text = _decode(data)
    raw_yaml = ""
    mapping: dict = {}
    schema = None
    body = text

    lines = _line_split_keepends(text)
    if lines and lines[0].rstrip("\r\n") == _FENCE:
        close_index = None
        for index in range(1, len(lines)):
            if lines[index].rstrip("\r\n") == _FENCE:
                close_index = index
                break
        if close_index is None:
            raise FrontMatterError("front matter fence '---' is never closed")
        raw_yaml = "".join(lines[1:close_index])
        body = "".join(lines[close_index + 1 :])
        mapping = _load_front_matter_mapping(raw_yaml)
        if "schema" in mapping:
            from .schema import schema_from_front_matter

            schema = schema_from_front_matter(mapping)

    front = FrontMatter(raw_yaml=raw_yaml, mapping=mapping, schema=schema)

    stripped = body.strip("\r\n")
    if not stripped:
        return front, CsvTable(header=[], rows=[])
    dialect = _detect_from_text(body)
    records = _split_records(body, dialect.delimiter)
    header = records[0][1]
    width = len(header)
    rows: list[list[str]] = []
    for number, cells in records[1:]:
        if len(cells) != width:
            raise CsvError(f"expected {width} cells, found {len(cells)}", row=number)
        rows.append(cells)
    table = CsvTable(
        header=header,
        rows=rows,
        dialect=Dialect(
            delimiter=dialect.delimiter,
            line_ending=dialect.line_ending,
            has_header=True,
            fallback=dialect.fallback,
        ),
    )
    return front, table


def _render_cell(cell: str, delimiter: str) -> str:
    if QUOTE in cell or delimiter in cell or "\n" in cell or "\r" in cell:
        return QUOTE + cell.replace(QUOTE, QUOTE + QUOTE) + QUOTE
    return cell


def _render_line(cells: list[str], delimiter: str) -> str:
    line = delimiter.join(_render_cell(cell, delimiter) for cell in cells)
    # A lone empty cell would render as a blank line, which parsers skip;
    # write it as a quoted empty instead so the record survives.
    return '""' if line == "" else line


def serialize_table(table: CsvTable) -> bytes:
    """Serialize a table canonically: LF endings, minimal quoting.

    A cell is quoted exactly when it contains the delimiter, a double
    quote, or a line break (plus the one blank-line exception above).
    Output always ends with a newline unless the table is completely empty.
    """
    delimiter = table.dialect.delimiter
    lines: list[str] = []
    if table.header:
        lines.append(_render_line(table.header, delimiter))
    for row in table.rows:
        lines.append(_render_line(row, delimiter))
    if not lines:
        return b""
    return ("\n".join(lines) + "\n").encode("utf-8")


def serialize_csvy(front: FrontMatter | None, table: CsvTable) -> bytes:
    """Serialize front matter (when any) and a table to canonical bytes.

    The front-matter block is emitted verbatim from ``raw_yaml`` between
    ``---`` fences; an empty ``raw_yaml`` means no block at all, so plain
    tables pass through unchanged.
    """
    parts: list[bytes] = []
    if front is not None and front.raw_yaml:
        raw = front.raw_yaml
        if not raw.endswith("\n"):
            raw += "\n"
        parts.append(b"---\n")
        parts.append(raw.encode("utf-8"))
        parts.append(b"---\n")
    body = serialize_table(table)
    if not parts and body.startswith(b"---\n"):
        # A first line of exactly --- would reparse as a front-matter
        # fence; quote that lone cell so the table stays a table.
        body = b'"---"' + body[3:]
    parts.append(body)
    return b"".join(parts)


def read_csvy(path: str | Path) -> tuple[FrontMatter, CsvTable]:
    """Read and parse a table file (with or without front matter) from disk."""
    from dataclasses import replace

    path = Path(path)
    front, table = parse_csvy(path.read_bytes())
    return front, replace(table, source=str(path))


@dataclass(frozen=True)
class MissingProfile:
    """What a column's cells say about missing values.

    ``count`` tallies cells equal to a declared missing code, ``seen`` is
    the set of declared codes actually present, and ``suspects`` is the set
    of undeclared cells that look like missing-value stand-ins.
    """

    count: int
    seen: frozenset[str]
    suspects: frozenset[str]


def detect_missing_tokens(
    cells: Iterable[str], declared: Iterable[str] = ()
) -> MissingProfile:
    """Profile a column against declared missing codes and the watchlist."""
    declared_set = frozenset(declared)
    count = 0
    seen: set[str] = set()
    suspects: set[str] = set()
    for cell in cells:
        if cell in declared_set:
            count += 1
            seen.add(cell)
        elif cell in MISSING_WATCHLIST:
            suspects.add(cell)
    return MissingProfile(count=count, seen=frozenset(seen), suspects=frozenset(suspects))
