"""The data-package domain model and the directory scanner that builds it.

A package follows a fixed layout: documentation files at the top level
(README, LICENSE, citation, checksums.txt), analysis-ready tables under
``data/``, raw inputs and cleaning scripts under ``data-raw/``, and
machine-readable descriptions under ``metadata/``.  Scanning inventories
every regular file exactly once: into a dataset, the package-level pool,
one of the special top-level slots, or the unclassified list.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath

from .errors import ScanError
from .licenses import LicenseKind, detect_license

DATA_DIR = "data"
RAW_DIR = "data-raw"
METADATA_DIR = "metadata"
CHECKSUMS_NAME = "checksums.txt"

_DICTIONARY_SUFFIX = "-dictionary"


class FileKind(str, enum.Enum):
    """What a file is, judged by extension and location."""

    PLAIN_TEXT_TABLE = "plain_text_table"
    BINARY_DATA = "binary_data"
    SCRIPT = "script"
    METADATA = "metadata"
    DOCUMENT = "document"
    OTHER = "other"


_TABLE_EXTENSIONS = frozenset({"csv", "tsv", "txt", "csvy"})
_BINARY_EXTENSIONS = frozenset(
    {"rds", "rda", "rdata", "sav", "dta", "sas7bdat", "xlsx", "xls", "parquet", "feather", "fits"}
)
_SCRIPT_EXTENSIONS = frozenset({"r", "py", "jl", "sh", "do", "sas", "sql"})
_METADATA_EXTENSIONS = frozenset({"json", "yml", "yaml"})
_DOCUMENT_EXTENSIONS = frozenset({"md", "pdf"})


def classify_file(path: str | PurePosixPath) -> FileKind:
    """Classify a relative path by extension.

    ``.txt`` counts as a document at the package top level and as a
    plain-text table anywhere else.  Unknown or missing extensions are
    ``OTHER``.
    """
    pure = PurePosixPath(path)
    extension = pure.suffix[1:].lower()
    top_level = len(pure.parts) == 1
    if extension in _TABLE_EXTENSIONS:
        if extension == "txt" and top_level:
            return FileKind.DOCUMENT
        return FileKind.PLAIN_TEXT_TABLE
    if extension in _BINARY_EXTENSIONS:
        return FileKind.BINARY_DATA
    if extension in _SCRIPT_EXTENSIONS:
        return FileKind.SCRIPT
    if extension in _METADATA_EXTENSIONS:
        return FileKind.METADATA
    if extension in _DOCUMENT_EXTENSIONS:
        return FileKind.DOCUMENT
    return FileKind.OTHER


def _check_relative(path: str) -> None:
    if not path:
        raise ScanError("file path must be non-empty")
    pure = PurePosixPath(path)
    if pure.is_absolute() or ".." in pure.parts:
        raise ScanError(f"file path must be relative and stay inside the package: {path!r}")


@dataclass(frozen=True)
class FileRef:
    """One regular file inside a package, by root-relative POSIX path."""

    path: str
    size_bytes: int
    kind: FileKind

    def __post_init__(self):
        _check_relative(self.path)
        if self.size_bytes < 0:
            raise ScanError(f"negative size for {self.path!r}")

    @property
    def name(self) -> str:
        return PurePosixPath(self.path).name

    @property
    def stem(self) -> str:
        return PurePosixPath(self.path).stem


@dataclass(frozen=True)
class DocumentRef:
    """A top-level documentation file (README, citation, checksums)."""

    path: str
    size_bytes: int

    def __post_init__(self):
        _check_relative(self.path)


@dataclass(frozen=True)
class LicenseRef:
    """The package's license file plus what its content was recognized as."""

    path: str
    size_bytes: int
    detected: LicenseKind

    def __post_init__(self):
        _check_relative(self.path)


@dataclass(frozen=True)
class Dataset:
    """One dataset and every file attached to it.

    A dataset is named by the stem of a table directly under ``data/``.
    Raw files, scripts, metadata, and dictionaries attach by stem prefix.
    """

    name: str
    data_files: list[FileRef] = field(default_factory=list)
    raw_files: list[FileRef] = field(default_factory=list)
    scripts: list[FileRef] = field(default_factory=list)
    metadata_files: list[FileRef] = field(default_factory=list)
    dictionary_files: list[FileRef] = field(default_factory=list)

    def __post_init__(self):
        if not self.name:
            raise ScanError("dataset name must be non-empty")


@dataclass(frozen=True)
class PackagePool:
    """Files that follow the layout but belong to no single dataset."""

    data_files: list[FileRef] = field(default_factory=list)
    raw_files: list[FileRef] = field(default_factory=list)
    scripts: list[FileRef] = field(default_factory=list)
    metadata_files: list[FileRef] = field(default_factory=list)
    dictionary_files: list[FileRef] = field(default_factory=list)


@dataclass(frozen=True)
class DataPackage:
    """Everything the scanner found, with each file in exactly one place."""

    root: Path
    datasets: list[Dataset]
    readme: DocumentRef | None
    license: LicenseRef | None
    citation: DocumentRef | None
    checksums: DocumentRef | None
    pool: PackagePool = field(default_factory=PackagePool)
    unclassified: list[FileRef] = field(default_factory=list)

    def dataset(self, name: str) -> Dataset:
        for ds in self.datasets:
            if ds.name == name:
                return ds
        raise KeyError(f"no dataset named {name!r}")

    def all_file_refs(self) -> list[FileRef]:
        """Every FileRef in the inventory (documentation slots excluded)."""
        refs: list[FileRef] = []
        for ds in self.datasets:
            refs.extend(ds.data_files)
            refs.extend(ds.raw_files)
            refs.extend(ds.scripts)
            refs.extend(ds.metadata_files)
            refs.extend(ds.dictionary_files)
        refs.extend(self.pool.data_files)
        refs.extend(self.pool.raw_files)
        refs.extend(self.pool.scripts)
        refs.extend(self.pool.metadata_files)
        refs.extend(self.pool.dictionary_files)
        refs.extend(self.unclassified)
        return refs

    def all_paths(self) -> list[str]:
        """Every inventoried path, documentation slots included, sorted."""
        paths = [ref.path for ref in self.all_file_refs()]
        for doc in (self.readme, self.citation, self.checksums):
            if doc is not None:
                paths.append(doc.path)
        if self.license is not None:
            paths.append(self.license.path)
        return sorted(paths)


def iter_files(root: str | Path) -> list[Path]:
    """All regular files under ``root``, sorted by relative POSIX path.

    Symbolic links are skipped, never followed.  A directory cycle (which
    can only appear through links, so in practice never) raises
    ``ScanError`` instead of hanging.
    """
    root = Path(root)
    files: list[Path] = []
    seen_dirs: set[Path] = set()

    def recurse(directory: Path) -> None:
        marker = directory.resolve()
        if marker in seen_dirs:
            raise ScanError(f"directory cycle detected at {directory}")
        seen_dirs.add(marker)
        for entry in sorted(directory.iterdir(), key=lambda p: p.name):
            if entry.is_symlink():
                continue
            if entry.is_dir():
                recurse(entry)
            elif entry.is_file():
                files.append(entry)

    recurse(root)
    files.sort(key=lambda p: p.relative_to(root).as_posix())
    return files


_SPECIAL_STEMS = {"readme": "readme", "license": "license", "citation": "citation"}


def _special_rank(name: str) -> tuple[int, str]:
    suffix = PurePosixPath(name).suffix.lower()
    if suffix == ".md":
        return (0, name)
    if suffix == "":
        return (1, name)
    return (2, name)


def _is_dictionary_stem(stem: str) -> bool:
    return stem == "dictionary" or stem.endswith(_DICTIONARY_SUFFIX)


def _dictionary_prefix(stem: str) -> str | None:
    """The dataset stem a dictionary file names, or None for a bare one."""
    if stem.endswith(_DICTIONARY_SUFFIX):
        return stem[: -len(_DICTIONARY_SUFFIX)]
    return None


def scan_package(root: str | Path) -> DataPackage:
    """Inventory a package directory into the domain model.

    Reads the directory tree and the license file's content (for
    recognition); nothing is written.  Raises ``FileNotFoundError`` or
    ``NotADirectoryError`` for a bad root and lets other ``OSError``s
    propagate.
    """
    root = Path(root)
    if not root.exists():
        raise FileNotFoundError(f"package root does not exist: {root}")
    if not root.is_dir():
        raise NotADirectoryError(f"package root is not a directory: {root}")

    refs: dict[str, FileRef] = {}
    for path in iter_files(root):
        rel = path.relative_to(root).as_posix()
        refs[rel] = FileRef(
            path=rel, size_bytes=path.stat().st_size, kind=classify_file(rel)
        )

    claimed: set[str] = set()

    def claim(rel: str) -> FileRef:
        claimed.add(rel)
        return refs[rel]

    # Special top-level slots.  Among case-insensitive stem matches, prefer
    # .md, then no extension, then anything else (alphabetically).
    special: dict[str, str] = {}
    for slot in _SPECIAL_STEMS:
        candidates = [
            rel
            for rel, ref in refs.items()
            if "/" not in rel and PurePosixPath(rel).stem.casefold() == slot
        ]
        if candidates:
            special[slot] = min(candidates, key=_special_rank)

    readme = None
    if "readme" in special:
        ref = claim(special["readme"])
        readme = DocumentRef(path=ref.path, size_bytes=ref.size_bytes)
    citation = None
    if "citation" in special:
        ref = claim(special["citation"])
        citation = DocumentRef(path=ref.path, size_bytes=ref.size_bytes)
    license_ref = None
    if "license" in special:
        ref = claim(special["license"])
        try:
            text = (root / ref.path).read_bytes().decode("utf-8", errors="replace")
            detected = detect_license(text)
        except OSError:
            detected = LicenseKind.UNKNOWN
        license_ref = LicenseRef(path=ref.path, size_bytes=ref.size_bytes, detected=detected)

    checksums = None
    checksum_candidates = sorted(
        rel for rel in refs if "/" not in rel and rel.casefold() == CHECKSUMS_NAME
    )
    if checksum_candidates:
        ref = claim(checksum_candidates[0])
        checksums = DocumentRef(path=ref.path, size_bytes=ref.size_bytes)

    def direct_children(directory: str) -> list[FileRef]:
        prefix = directory + "/"
        return [
            ref
            for rel, ref in sorted(refs.items())
            if rel.startswith(prefix) and "/" not in rel[len(prefix):]
        ]

    # Datasets are named by table stems directly under data/, dictionaries
    # excluded.
    data_children = direct_children(DATA_DIR)
    dataset_names = sorted(
        {
            ref.stem
            for ref in data_children
            if ref.kind is FileKind.PLAIN_TEXT_TABLE and not _is_dictionary_stem(ref.stem)
        }
    )

    datasets = {
        name: {
            "data_files": [],
            "raw_files": [],
            "scripts": [],
            "metadata_files": [],
            "dictionary_files": [],
        }
        for name in dataset_names
    }
    pool: dict[str, list[FileRef]] = {
        "data_files": [],
        "raw_files": [],
        "scripts": [],
        "metadata_files": [],
        "dictionary_files": [],
    }

    def attach_by_prefix(ref: FileRef, bucket: str) -> None:
        """File -> dataset whose name prefixes the file stem; else the pool."""
        matches = [name for name in dataset_names if ref.stem.startswith(name)]
        if matches:
            owner = max(matches, key=len)
            datasets[owner][bucket].append(claim(ref.path))
        else:
            pool[bucket].append(claim(ref.path))

    for ref in data_children:
        if ref.kind is FileKind.PLAIN_TEXT_TABLE and _is_dictionary_stem(ref.stem):
            named = _dictionary_prefix(ref.stem)
            if named in datasets:
                datasets[named]["dictionary_files"].append(claim(ref.path))
            else:
                pool["dictionary_files"].append(claim(ref.path))
        elif ref.kind is FileKind.PLAIN_TEXT_TABLE:
            datasets[ref.stem]["data_files"].append(claim(ref.path))
        else:
            pool["data_files"].append(claim(ref.path))

    for ref in direct_children(RAW_DIR):
        bucket = "scripts" if ref.kind is FileKind.SCRIPT else "raw_files"
        attach_by_prefix(ref, bucket)

    for ref in direct_children(METADATA_DIR):
        if ref.kind is FileKind.PLAIN_TEXT_TABLE and _is_dictionary_stem(ref.stem):
            named = _dictionary_prefix(ref.stem)
            if named in datasets:
                datasets[named]["dictionary_files"].append(claim(ref.path))
            else:
                pool["dictionary_files"].append(claim(ref.path))
        elif ref.kind is FileKind.METADATA:
            attach_by_prefix(ref, "metadata_files")
        # anything else under metadata/ stays unclaimed -> unclassified

    # A single-dataset package has no attachment ambiguity: everything left
    # in the pool belongs to that dataset.
    if len(dataset_names) == 1:
        only = dataset_names[0]
        for bucket in ("raw_files", "scripts", "metadata_files", "dictionary_files"):
            datasets[only][bucket].extend(pool[bucket])
            pool[bucket] = []

    unclassified = [ref for rel, ref in sorted(refs.items()) if rel not in claimed]

    return DataPackage(
        root=root,
        datasets=[
            Dataset(name=name, **datasets[name]) for name in dataset_names
        ],
        readme=readme,
        license=license_ref,
        citation=citation,
        checksums=checksums,
        pool=PackagePool(**pool),
        unclassified=unclassified,
    )
