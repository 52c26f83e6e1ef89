"""Acceptance gate: eight end-to-end criteria with pinned tolerances.

Each test prints one ``[acceptance N] name: PASS/FAIL`` line and enforces
its runtime budget.  Randomized criteria use fixed seeds so a failure is
reproducible.
"""

from __future__ import annotations

import contextlib
import json
import math
import random
import string
import time
from pathlib import Path

import yaml

from tidypack import (
    Author,
    CsvTable,
    FrontMatter,
    LicenseKind,
    ScaffoldRequest,
    chunk_table,
    compute_manifest,
    dictionary_from_csv,
    dictionary_to_markdown,
    infer_schema,
    lint_package,
    parse_csvy,
    report_to_json,
    scaffold,
    scan_package,
    schema_to_json,
    serialize_csvy,
    serialize_table,
    unchunk,
    validate_table,
    verify_manifest,
)
from tidypack.licenses import SPDX_IDS, license_text
from tidypack.schema import FieldDescriptor, TableSchema


@contextlib.contextmanager
def criterion(capfd, number: int, name: str, limit_s: float):
    start = time.perf_counter()
    ok = False
    try:
        yield
        elapsed = time.perf_counter() - start
        assert elapsed < limit_s, f"took {elapsed:.2f}s, limit {limit_s:.0f}s"
        ok = True
    finally:
        with capfd.disabled():
            print(f"[acceptance {number}] {name}: {'PASS' if ok else 'FAIL'}")


def _word(rng: random.Random, low: int = 3, high: int = 8) -> str:
    return "".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(low, high)))


def _write(root: Path, rel: str, data: bytes) -> None:
    path = root / rel
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)


# ---------------------------------------------------------------------------
# 1. Demographics table: inference and canonical JSON structure.  Exact.

_DEMOGRAPHICS = (
    b"age,height,nationality\n"
    b"12,161.5,Australian\n"
    b"21,181.2,American\n"
    b"37,178.3,New Zealand\n"
)


def test_acceptance_1(capfd):
    with criterion(capfd, 1, "demographics-schema-inference", 1.0):
        _, table = parse_csvy(_DEMOGRAPHICS)
        schema = infer_schema(table, name="demographics")
        assert [(f.name, f.type) for f in schema.fields] == [
            ("age", "integer"),
            ("height", "number"),
            ("nationality", "string"),
        ]
        doc = json.loads(schema_to_json(schema))
        assert doc["schema"]["fields"] == [
            {"name": "age", "type": "integer"},
            {"name": "height", "type": "number"},
            {"name": "nationality", "type": "string"},
        ]


# ---------------------------------------------------------------------------
# 2. Prisoner-summary dictionary: import and markdown rendering.  Exact.

_PRISONER_DICTIONARY = (
    b"variable,class,description\n"
    b"year,integer (date),Year\n"
    b'urbanicity,character,"County-type (urban, suburban, small/mid, rural)"\n'
    b'pop_category,character,"Category for population - either race, gender, or Total"\n'
    b'rate_per_100000,double,"Rate within a category for prison population per 100,000 people"\n'
)

_PRISONER_ROWS = [
    ("year", "integer", "Year"),
    ("urbanicity", "string", "County-type (urban, suburban, small/mid, rural)"),
    ("pop_category", "string", "Category for population - either race, gender, or Total"),
    (
        "rate_per_100000",
        "number",
        "Rate within a category for prison population per 100,000 people",
    ),
]


def test_acceptance_2(capfd):
    with criterion(capfd, 2, "prisoner-dictionary-import", 1.0):
        dictionary = dictionary_from_csv(_PRISONER_DICTIONARY)
        assert [
            (e.variable_name, e.class_name, e.description) for e in dictionary.entries
        ] == _PRISONER_ROWS
        markdown = dictionary_to_markdown(dictionary)
        for variable, class_name, description in _PRISONER_ROWS:
            assert variable in markdown
            assert class_name in markdown
            assert description in markdown


# ---------------------------------------------------------------------------
# 3. Scaffold-lint closure over 100 randomized valid requests.


def _random_seed_csv(rng: random.Random) -> bytes:
    width = rng.randint(1, 4)
    header = [f"{_word(rng)}{i}" for i in range(width)]
    lines = [",".join(header)]
    for _ in range(rng.randint(0, 6)):
        cells = []
        for _ in range(width):
            cells.append(
                rng.choice(
                    [
                        str(rng.randint(0, 500)),
                        f"{rng.uniform(0, 9):.2f}",
                        _word(rng),
                        "NA",
                    ]
                )
            )
        lines.append(",".join(cells))
    return ("\n".join(lines) + "\n").encode()


def _random_request(rng: random.Random, index: int, seed_dir: Path) -> ScaffoldRequest:
    dataset_names = [f"{_word(rng)}{d}" for d in range(rng.randint(1, 3))]
    seeds: list[Path] = []
    for j in range(rng.randint(0, len(dataset_names))):
        seed = seed_dir / f"seed-{index}-{j}.csv"
        seed.write_bytes(_random_seed_csv(rng))
        seeds.append(seed)
    authors = []
    for _ in range(rng.randint(0, 2)):
        orcid = None
        if rng.random() < 0.5:
            orcid = (
                f"{rng.randint(0, 9999):04d}-{rng.randint(0, 9999):04d}-"
                f"{rng.randint(0, 9999):04d}-{rng.randint(0, 999):03d}"
                + rng.choice("0123456789X")
            )
        authors.append(Author(name=f"{_word(rng).title()} {_word(rng).title()}", orcid=orcid))
    return ScaffoldRequest(
        package_name=f"{_word(rng)}{index}",
        dataset_names=dataset_names,
        license=rng.choice(list(SPDX_IDS)),
        authors=authors,
        doi=f"10.{rng.randint(1000, 99999)}/z{_word(rng)}" if rng.random() < 0.5 else None,
        year=rng.randint(1900, 2026) if rng.random() < 0.5 else None,
        seed_tables=seeds,
    )


def test_acceptance_3(capfd, tmp_path):
    with criterion(capfd, 3, "scaffold-lint-closure", 30.0):
        rng = random.Random(20260817)
        seed_dir = tmp_path / "seeds"
        seed_dir.mkdir()
        for index in range(100):
            request = _random_request(rng, index, seed_dir)
            package = scaffold(request, tmp_path / f"pkg{index:03d}")
            report = lint_package(package)
            assert report.counts["error"] == 0, (
                f"package {index} ({request.package_name}) has errors: "
                + "; ".join(f.detail for f in report.findings if f.severity == "error")
            )


# ---------------------------------------------------------------------------
# 4. Chunk round trip over 200 randomized tables.

_CELL_ALPHABET = 'abcdefghijklmnopqrstuvwxyz0123456789 ,"é' + "\n"


def _random_cell(rng: random.Random, max_len: int = 8) -> str:
    return "".join(rng.choice(_CELL_ALPHABET) for _ in range(rng.randint(0, max_len)))


def _random_table(rng: random.Random, max_rows: int) -> CsvTable:
    width = rng.randint(1, 5)
    header = [f"c{i}{_random_cell(rng, 4)}" for i in range(width)]
    rows = [
        [_random_cell(rng) for _ in range(width)] for _ in range(rng.randint(0, max_rows))
    ]
    return CsvTable(header=header, rows=rows)


def test_acceptance_4(capfd, tmp_path):
    with criterion(capfd, 4, "chunk-round-trip", 60.0):
        rng = random.Random(41)
        for index in range(200):
            table = _random_table(rng, max_rows=1000)
            max_rows = rng.randint(1, 50)
            original = serialize_table(table)
            case_dir = tmp_path / f"case{index}"
            case_dir.mkdir()
            source = case_dir / "t.csv"
            source.write_bytes(original)

            plan = chunk_table(source, max_rows)
            expected = max(1, math.ceil(len(table.rows) / max_rows))
            assert [Path(p).name for p in plan.chunk_paths] == [
                f"t-{k}.csv" for k in range(1, expected + 1)
            ]
            assert unchunk(plan.chunk_paths) == original


# ---------------------------------------------------------------------------
# 5. Checksum oracle and tamper detection.


def test_acceptance_5(capfd, tmp_path):
    with criterion(capfd, 5, "checksum-oracle", 10.0):
        _write(tmp_path, "empty.txt", b"")
        _write(tmp_path, "abc.txt", b"abc")
        manifest = compute_manifest(tmp_path)
        assert manifest.digest_for("empty.txt") == "d41d8cd98f00b204e9800998ecf8427e"
        assert manifest.digest_for("abc.txt") == "900150983cd24fb0d6963f7d28e17f72"

        rng = random.Random(5)
        paths = []
        for i in range(50):
            rel = f"sub{i % 5}/f{i:02d}.bin"
            _write(tmp_path, rel, rng.randbytes(rng.randint(0, 2048)))
            paths.append(rel)
        manifest = compute_manifest(tmp_path)
        assert verify_manifest(tmp_path, manifest).ok

        for rel in paths:
            target = tmp_path / rel
            original = target.read_bytes()
            if original:
                offset = rng.randrange(len(original))
                tampered = bytearray(original)
                tampered[offset] ^= 0x01
                target.write_bytes(bytes(tampered))
            else:
                target.write_bytes(b"\x00")
            report = verify_manifest(tmp_path, manifest)
            assert report.mismatched == [rel]
            assert report.missing == [] and not report.ok
            target.write_bytes(original)
        assert verify_manifest(tmp_path, manifest).ok


# ---------------------------------------------------------------------------
# 6. csvy round trip over 200 randomized (front matter, table) pairs.


def _random_front(rng: random.Random) -> FrontMatter:
    mapping = {}
    for _ in range(rng.randint(1, 4)):
        key = _word(rng)
        while key == "schema" or key in mapping:
            key = _word(rng)
        kind = rng.randrange(5)
        if kind == 0:
            value = _word(rng)
        elif kind == 1:
            value = rng.randint(-1000, 1000)
        elif kind == 2:
            value = rng.random() < 0.5
        elif kind == 3:
            value = [_word(rng) for _ in range(rng.randint(1, 3))]
        else:
            value = {_word(rng): _word(rng)}
        mapping[key] = value
    raw = yaml.safe_dump(mapping, sort_keys=True, allow_unicode=True)
    return FrontMatter(raw_yaml=raw, mapping=mapping)


def test_acceptance_6(capfd):
    with criterion(capfd, 6, "csvy-round-trip", 30.0):
        rng = random.Random(6)
        for _ in range(200):
            front = _random_front(rng)
            table = _random_table(rng, max_rows=30)
            data = serialize_csvy(front, table)
            parsed_front, parsed_table = parse_csvy(data)
            assert parsed_front is not None
            assert parsed_front.raw_yaml == front.raw_yaml
            assert parsed_front.mapping == front.mapping
            assert parsed_table.header == table.header
            assert parsed_table.rows == table.rows
            assert serialize_csvy(parsed_front, parsed_table) == data


# ---------------------------------------------------------------------------
# 7. Lint determinism over 20 fixtures; monotone error count to pass.

_GOOD_README = (
    b"# demo\n\nWho collected the data? A. Person.\n"
    b"What is the data? One table.\nWhen was it collected? 2020.\n"
    b"Where was it collected? The lab.\nWhy was it collected? Testing.\n"
    b"How was it collected? By hand.\n"
)


def _clean_tree(root: Path) -> None:
    _write(root, "README.md", _GOOD_README)
    _write(root, "LICENSE", license_text(LicenseKind.CC_BY_4).encode())
    _write(root, "citation", b"Person, A. (2020). Demo. https://doi.org/10.1234/abcd\n")
    _write(root, "data/t.csv", b"id,score\n1,3.5\n2,NA\n")
    _write(
        root,
        "data/t-dictionary.csv",
        b"variable,class,description,codes,missing_codes\n"
        b"id,integer,Row id,,NA\nscore,number,Score,,NA\n",
    )
    _write(
        root,
        "metadata/t.json",
        schema_to_json(
            TableSchema(
                name="t",
                path="data/t.csv",
                fields=[
                    FieldDescriptor(name="id", type="integer"),
                    FieldDescriptor(name="score", type="number"),
                ],
            )
        ),
    )
    _write(root, "data-raw/t-raw.csv", b"id,score\n1,3.50\n")
    _write(root, "data-raw/t-clean.py", b"print('tidy')\n")
    from tidypack import serialize_manifest

    manifest = compute_manifest(root, include=lambda rel: rel != "checksums.txt")
    _write(root, "checksums.txt", serialize_manifest(manifest))


def _fixture_packages(base: Path) -> list[Path]:
    roots: list[Path] = []

    def fresh(name: str) -> Path:
        root = base / name
        root.mkdir()
        roots.append(root)
        return root

    fresh("empty")
    clean = fresh("clean")
    _clean_tree(clean)

    scaffold(ScaffoldRequest(package_name="s1", dataset_names=["obs"]), fresh("s1"))
    scaffold(
        ScaffoldRequest(
            package_name="s2",
            dataset_names=["a", "b"],
            license=LicenseKind.CC_BY_4,
            doi="10.1234/abcd",
            year=2020,
            authors=[Author(name="A Person")],
        ),
        fresh("s2"),
    )
    scaffold(
        ScaffoldRequest(
            package_name="s3", dataset_names=["obs"], license=LicenseKind.ODBL_1
        ),
        fresh("s3"),
    )

    removals = {
        "no-readme": "README.md",
        "no-license": "LICENSE",
        "no-dictionary": "data/t-dictionary.csv",
        "no-citation": "citation",
        "no-checksums": "checksums.txt",
        "no-metadata": "metadata/t.json",
    }
    for name, victim in removals.items():
        root = fresh(name)
        _clean_tree(root)
        (root / victim).unlink()

    mutations = {
        "tampered": lambda r: _write(r, "data/t.csv", b"id,score\n9,9.9\n"),
        "binary": lambda r: _write(r, "data/blob.rds", b"\x00\x01"),
        "broken-table": lambda r: _write(r, "data/u.csv", b'x\n"oops\n'),
        "missing-tokens": lambda r: _write(r, "data/m.csv", b"v\n-99\n1\n"),
        "date-anomaly": lambda r: _write(r, "data/d.csv", b"when\n2019-01-22\n2019-02-30\n"),
        "vague-readme": lambda r: _write(r, "README.md", b"# demo\n"),
        "odd-license": lambda r: _write(r, "LICENSE", b"do whatever\n"),
        "ghost-entry": lambda r: (r / "checksums.txt").open("ab").write(
            b"a" * 32 + b"  ghost.bin\n"
        ),
        "code-conflict": lambda r: _write(
            r,
            "data/t-dictionary.csv",
            b"variable,class,description,codes,missing_codes\n"
            b"id,integer,Row id,0 = no; 1 = yes,NA\n"
            b"score,number,Score,0 = No; 1 = yes,NA\n",
        ),
    }
    for name, mutate in mutations.items():
        root = fresh(name)
        _clean_tree(root)
        mutate(root)

    return roots


def test_acceptance_7(capfd, tmp_path):
    with criterion(capfd, 7, "lint-determinism-monotonicity", 10.0):
        fixture_base = tmp_path / "fixtures"
        fixture_base.mkdir()
        fixtures = _fixture_packages(fixture_base)
        assert len(fixtures) == 20
        for root in fixtures:
            first = report_to_json(lint_package(scan_package(root)))
            second = report_to_json(lint_package(scan_package(root)))
            assert first == second, f"non-deterministic report for {root.name}"

        stages = tmp_path / "stages"
        stages.mkdir()
        error_counts = []

        def errors() -> int:
            report = lint_package(scan_package(stages))
            error_counts.append(report.counts["error"])
            return report.counts["error"]

        assert errors() == 4
        _write(stages, "README.md", _GOOD_README)
        assert errors() == 3
        _write(stages, "LICENSE", license_text(LicenseKind.CC_BY_4).encode())
        assert errors() == 2
        _write(stages, "data/x.csv", b"v\n1\n")
        assert errors() == 1
        _write(stages, "data/x-dictionary.csv", b"variable,class\nv,integer\n")
        assert errors() == 0
        assert error_counts == sorted(error_counts, reverse=True)
        assert lint_package(scan_package(stages)).passed


# ---------------------------------------------------------------------------
# 8. Date discipline under a date field.


def test_acceptance_8(capfd):
    with criterion(capfd, 8, "date-discipline", 1.0):
        schema = TableSchema(name="t", fields=[FieldDescriptor(name="when", type="date")])

        good = CsvTable(header=["when"], rows=[["2019-01-22"]])
        assert validate_table(good, schema).ok

        for bad in ("22-01-2019", "2019-02-30"):
            table = CsvTable(header=["when"], rows=[[bad]])
            report = validate_table(table, schema)
            assert not report.ok
            assert [(v.kind, v.field, v.row, v.value) for v in report.violations] == [
                ("bad_date_format", "when", 1, bad)
            ]
