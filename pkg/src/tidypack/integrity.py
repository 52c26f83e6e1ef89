"""Checksum manifests, table chunking, and deterministic archives.

Manifests use MD5 in the classic ``md5sum`` layout: 32 hex digits, two
spaces, a root-relative POSIX path, one file per line, sorted.  MD5 is a
fixity check against bit rot and truncated copies here, not a defense
against an adversary; the format reserves an ``algorithm:`` prefix on the
digest so stronger hashes can appear later without breaking parsers.
"""

from __future__ import annotations

import hashlib
import io
import math
import re
import tarfile
from dataclasses import dataclass, replace
from pathlib import Path, PurePosixPath
from typing import Callable, Sequence

from .errors import ChunkError, ManifestError, PackError
from .model import iter_files
from .tabular import CsvTable, is_number_token, read_csvy, serialize_csvy

_MD5_HEX_RE = re.compile(r"[0-9a-f]{32}")
_MANIFEST_LINE_RE = re.compile(r"(?:(?P<algo>[a-z0-9]+):)?(?P<hex>[0-9a-fA-F]+)  (?P<path>.+)")

_READ_BLOCK = 1024 * 1024


def md5_hex(data: bytes) -> str:
    """MD5 digest of the given bytes, as lowercase hex."""
    return hashlib.md5(data).hexdigest()


def _md5_file(path: Path) -> str:
    digest = hashlib.md5()
    with open(path, "rb") as handle:
        while True:
            block = handle.read(_READ_BLOCK)
            if not block:
                break
            digest.update(block)
    return digest.hexdigest()


@dataclass(frozen=True)
class ManifestEntry:
    """One checksummed file."""

    path: str
    md5: str

    def __post_init__(self):
        if not self.path or self.path.startswith("/") or ".." in self.path.split("/"):
            raise ManifestError(f"manifest path must be relative: {self.path!r}")
        if not _MD5_HEX_RE.fullmatch(self.md5):
            raise ManifestError(
                f"digest for {self.path!r} must be 32 lowercase hex characters"
            )


@dataclass(frozen=True)
class ChecksumManifest:
    """A sorted set of path/digest pairs."""

    entries: list[ManifestEntry]

    def __post_init__(self):
        paths = [entry.path for entry in self.entries]
        if len(set(paths)) != len(paths):
            duplicates = sorted({p for p in paths if paths.count(p) > 1})
            raise ManifestError(f"duplicate manifest paths: {', '.join(duplicates)}")
        object.__setattr__(
            self, "entries", sorted(self.entries, key=lambda entry: entry.path)
        )

    def paths(self) -> list[str]:
        return [entry.path for entry in self.entries]

    def digest_for(self, path: str) -> str | None:
        for entry in self.entries:
            if entry.path == path:
                return entry.md5
        return None


def serialize_manifest(manifest: ChecksumManifest) -> bytes:
    """Render ``<md5>  <path>`` lines, LF-terminated, sorted by path."""
    lines = [f"{entry.md5}  {entry.path}" for entry in manifest.entries]
    if not lines:
        return b""
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_manifest(data: bytes) -> ChecksumManifest:
    """Parse manifest bytes.

    Blank lines are tolerated.  A digest may carry an ``algorithm:`` prefix;
    only ``md5:`` (or none) is accepted today, anything else raises
    ``ManifestError`` naming the unsupported algorithm.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ManifestError(f"manifest is not valid UTF-8: {exc}") from None
    entries: list[ManifestEntry] = []
    for line_number, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line:
            continue
        match = _MANIFEST_LINE_RE.fullmatch(line)
        if match is None:
            raise ManifestError(
                f"line {line_number}: expected '<md5>  <path>' (two spaces), got {line!r}"
            )
        algorithm = match.group("algo")
        if algorithm is not None and algorithm != "md5":
            raise ManifestError(
                f"line {line_number}: unsupported digest algorithm {algorithm!r}; only md5 is supported"
            )
        hex_digest = match.group("hex").lower()
        if not _MD5_HEX_RE.fullmatch(hex_digest):
            raise ManifestError(
                f"line {line_number}: digest must be 32 hex characters, got {match.group('hex')!r}"
            )
        entries.append(ManifestEntry(path=match.group("path"), md5=hex_digest))
    return ChecksumManifest(entries=entries)


def compute_manifest(
    root: str | Path, include: Callable[[str], bool] | None = None
) -> ChecksumManifest:
    """Checksum every regular file under ``root`` (symlinks skipped).

    ``include`` filters by root-relative POSIX path; by default everything
    is checksummed, including any existing ``checksums.txt`` (callers that
    maintain a package manifest exclude it themselves).
    """
    root = Path(root)
    entries = []
    for path in iter_files(root):
        rel = path.relative_to(root).as_posix()
        if include is not None and not include(rel):
            continue
        entries.append(ManifestEntry(path=rel, md5=_md5_file(path)))
    return ChecksumManifest(entries=entries)


@dataclass(frozen=True)
class VerifyReport:
    """How the tree compares against a manifest.

    ``mismatched`` lists manifest paths whose current digest differs,
    ``missing`` lists manifest paths with no file, and ``extra`` lists
    files on disk the manifest does not cover.  Extras are reported but do
    not fail verification.
    """

    mismatched: list[str]
    missing: list[str]
    extra: list[str]

    @property
    def ok(self) -> bool:
        return not self.mismatched and not self.missing


def verify_manifest(
    root: str | Path,
    manifest: ChecksumManifest,
    include: Callable[[str], bool] | None = None,
) -> VerifyReport:
    """Recompute digests under ``root`` and compare with the manifest."""
    actual = {
        entry.path: entry.md5
        for entry in compute_manifest(root, include=include).entries
    }
    expected = {entry.path: entry.md5 for entry in manifest.entries}
    mismatched = sorted(
        path
        for path, digest in expected.items()
        if path in actual and actual[path] != digest
    )
    missing = sorted(path for path in expected if path not in actual)
    extra = sorted(path for path in actual if path not in expected)
    return VerifyReport(mismatched=mismatched, missing=missing, extra=extra)


# ---------------------------------------------------------------------------
# Chunking


@dataclass(frozen=True)
class ChunkPlan:
    """What a chunking run produced."""

    source: str
    max_rows_per_chunk: int
    data_rows: int
    chunk_paths: list[str]

    def __post_init__(self):
        if self.max_rows_per_chunk < 1:
            raise ChunkError("max_rows_per_chunk must be at least 1")
        expected = max(1, math.ceil(self.data_rows / self.max_rows_per_chunk))
        if len(self.chunk_paths) != expected:
            raise ChunkError(
                f"{self.data_rows} rows at {self.max_rows_per_chunk} per chunk "
                f"needs {expected} chunks, not {len(self.chunk_paths)}"
            )


def _chunk_name(stem: str, index: int, suffix: str) -> str:
    return f"{stem}-{index}{suffix}"


_CHUNK_STEM_RE = re.compile(r"(?P<stem>.+)-(?P<index>[0-9]+)")


def chunk_table(source: str | Path, max_rows_per_chunk: int) -> ChunkPlan:
    """Split a table file into row-limited chunks next to it.

    Chunks are named ``<stem>-<k><ext>`` with ``k`` counting from 1, each
    repeating the source's header (and front matter, if any).  A table of
    ``n`` data rows yields ``ceil(n / max_rows_per_chunk)`` chunks, except
    that zero rows still yield one header-only chunk.  Refuses to overwrite:
    if any target chunk path already exists, nothing is written.
    """
    if max_rows_per_chunk < 1:
        raise ChunkError("max_rows_per_chunk must be at least 1")
    source = Path(source)
    front, table = read_csvy(source)
    if not table.header:
        raise ChunkError(f"{source.name} is empty; nothing to chunk")
    if any(is_number_token(cell) for cell in table.header):
        raise ChunkError(
            f"{source.name} appears to have no header row "
            "(its first record contains numeric cells); chunking needs one"
        )

    count = max(1, math.ceil(len(table.rows) / max_rows_per_chunk))
    targets = [
        source.with_name(_chunk_name(source.stem, index, source.suffix))
        for index in range(1, count + 1)
    ]
    for target in targets:
        if target.exists():
            raise ChunkError(f"refusing to overwrite existing file {target}")

    for index, target in enumerate(targets):
        start = index * max_rows_per_chunk
        piece = replace(table, rows=table.rows[start : start + max_rows_per_chunk], source=None)
        target.write_bytes(serialize_csvy(front, piece))

    return ChunkPlan(
        source=str(source),
        max_rows_per_chunk=max_rows_per_chunk,
        data_rows=len(table.rows),
        chunk_paths=[str(target) for target in targets],
    )


def unchunk(chunk_paths: Sequence[str | Path]) -> bytes:
    """Reassemble chunk files into one canonical table.

    The chunks must share one stem and extension, be numbered contiguously
    from 1 in the order given, and agree on header, front matter, and
    delimiter; the first offending file is named in the error.  Returns the
    canonical serialization (LF endings) of the concatenated table.
    """
    if not chunk_paths:
        raise ChunkError("no chunk files given")

    paths = [Path(p) for p in chunk_paths]
    base_stem: str | None = None
    base_suffix: str | None = None
    for expected_index, path in enumerate(paths, start=1):
        match = _CHUNK_STEM_RE.fullmatch(path.stem)
        if match is None:
            raise ChunkError(
                f"{path.name} is not a chunk name; expected '<stem>-<number>{path.suffix or '.csv'}'"
            )
        stem = match.group("stem")
        index = int(match.group("index"))
        if base_stem is None:
            base_stem, base_suffix = stem, path.suffix
        elif stem != base_stem or path.suffix != base_suffix:
            raise ChunkError(
                f"{path.name} does not belong to the {base_stem!r} chunk family"
            )
        if index != expected_index:
            raise ChunkError(
                f"chunk sequence is broken: expected {base_stem}-{expected_index}{base_suffix}, "
                f"got {path.name}"
            )

    front0 = None
    merged: CsvTable | None = None
    rows: list[list[str]] = []
    for path in paths:
        front, table = read_csvy(path)
        if merged is None:
            front0, merged = front, table
        else:
            if table.header != merged.header:
                raise ChunkError(f"{path.name} has a different header than the first chunk")
            if front.raw_yaml != front0.raw_yaml:
                raise ChunkError(f"{path.name} has different front matter than the first chunk")
            if table.dialect.delimiter != merged.dialect.delimiter:
                raise ChunkError(f"{path.name} uses a different delimiter than the first chunk")
        rows.extend(table.rows)

    assert merged is not None and front0 is not None
    return serialize_csvy(front0, replace(merged, rows=rows, source=None))


# ---------------------------------------------------------------------------
# Packing


def pack(
    root: str | Path,
    manifest: ChecksumManifest,
    destination: str | Path,
) -> Path:
    """Write a byte-reproducible USTAR archive of the manifest's files.

    Verification runs first: any mismatched or missing manifest entry
    aborts the pack.  The archive contains exactly the manifest's files
    plus a generated ``checksums.txt``, with entries sorted by path,
    ``mtime`` pinned to zero, numeric owner 0:0, blank owner names, mode
    0644 for files and 0755 for directories, and no compression, so packing
    the same tree twice yields identical bytes.
    """
    root = Path(root)
    destination = Path(destination)
    if destination.exists():
        raise PackError(f"refusing to overwrite existing archive {destination}")

    allowed = set(manifest.paths())
    report = verify_manifest(root, manifest, include=lambda rel: rel in allowed)
    if not report.ok:
        problems = []
        if report.mismatched:
            problems.append("mismatched: " + ", ".join(report.mismatched))
        if report.missing:
            problems.append("missing: " + ", ".join(report.missing))
        raise PackError("manifest verification failed; " + "; ".join(problems))

    if "checksums.txt" in allowed:
        raise PackError(
            "the manifest may not list checksums.txt; the archive embeds a fresh copy"
        )

    directories: set[str] = set()
    for rel in allowed:
        parent = PurePosixPath(rel).parent.as_posix()
        while parent != ".":
            directories.add(parent)
            parent = PurePosixPath(parent).parent.as_posix()

    def _dir_info(name: str) -> tarfile.TarInfo:
        info = tarfile.TarInfo(name=name)
        info.type = tarfile.DIRTYPE
        info.mode = 0o755
        info.mtime = 0
        info.uid = info.gid = 0
        info.uname = info.gname = ""
        return info

    def _file_info(name: str, size: int) -> tarfile.TarInfo:
        info = tarfile.TarInfo(name=name)
        info.type = tarfile.REGTYPE
        info.mode = 0o644
        info.size = size
        info.mtime = 0
        info.uid = info.gid = 0
        info.uname = info.gname = ""
        return info

    manifest_bytes = serialize_manifest(manifest)
    members: list[tuple[str, bytes | Path | None]] = [(d, None) for d in directories]
    members.extend((rel, root / rel) for rel in allowed)
    members.append(("checksums.txt", manifest_bytes))
    members.sort(key=lambda item: item[0])

    try:
        with tarfile.open(destination, mode="w", format=tarfile.USTAR_FORMAT) as archive:
            for name, payload in members:
                if payload is None:
                    archive.addfile(_dir_info(name))
                elif isinstance(payload, bytes):
                    archive.addfile(_file_info(name, len(payload)), io.BytesIO(payload))
                else:
                    with open(payload, "rb") as handle:
                        archive.addfile(
                            _file_info(name, payload.stat().st_size), handle
                        )
    except ValueError as exc:
        destination.unlink(missing_ok=True)
        raise PackError(f"cannot archive: {exc}") from None
    except BaseException:
        destination.unlink(missing_ok=True)
        raise
    return destination
