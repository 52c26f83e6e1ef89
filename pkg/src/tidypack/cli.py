"""Command-line interface.

Subcommands: init, lint, schema (infer/validate), dict, checksum, verify,
chunk, unchunk, pack.  Exit codes are uniform: 0 on success, 1 when a
check found problems (lint errors, failed verification, schema
violations), 2 for usage, configuration, or malformed-input errors, and 3
for I/O failures.  With ``--format json`` every command writes exactly one
JSON document to stdout, also on failure (an ``error`` object).  Output is
plain text; no color escapes are emitted, so ``NO_COLOR`` has nothing to
strip.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .errors import ToolError
from .integrity import (
    chunk_table,
    compute_manifest,
    pack,
    parse_manifest,
    serialize_manifest,
    unchunk,
    verify_manifest,
)
from .licenses import CLI_CHOICES
from .lint import LintConfig, lint_package, load_config, report_to_json, report_to_text
from .model import CHECKSUMS_NAME, scan_package
from .scaffold import Author, ScaffoldRequest, scaffold
from .schema import (
    dictionary_from_csv,
    dictionary_from_schema,
    dictionary_to_csv,
    dictionary_to_markdown,
    infer_schema,
    schema_from_json,
    schema_to_json,
    validate_table,
)
from .tabular import read_csvy

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_IO = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise _UsageError(message)


def _emit_json(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")


def _fail(json_mode: bool, code: int, message: str) -> int:
    if json_mode:
        _emit_json({"error": {"code": code, "message": message}})
    else:
        print(f"error: {message}", file=sys.stderr)
    return code


_AUTHOR_RE = re.compile(r"(?P<name>[^<>]+?)\s*<(?P<orcid>[^<>]+)>\s*\Z")


def _parse_author(text: str) -> Author:
    match = _AUTHOR_RE.fullmatch(text)
    if match:
        return Author(name=match.group("name").strip(), orcid=match.group("orcid").strip())
    return Author(name=text.strip())


# ---------------------------------------------------------------------------
# Handlers


def _cmd_init(args) -> int:
    request = ScaffoldRequest(
        package_name=args.name or Path(args.destination).name,
        dataset_names=list(args.dataset),
        license=CLI_CHOICES[args.license],
        authors=[_parse_author(a) for a in args.author],
        doi=args.doi,
        year=args.year,
        seed_tables=[Path(s) for s in args.seed],
    )
    package = scaffold(request, args.destination)
    paths = package.all_paths()
    if args.format == "json":
        _emit_json({"root": str(package.root), "files": paths})
    else:
        print(f"created {package.root} with {len(paths)} files")
        for rel in paths:
            print(f"  {rel}")
    return EXIT_OK


def _cmd_lint(args) -> int:
    config = load_config(args.config) if args.config else LintConfig()
    package = scan_package(args.target)
    report = lint_package(package, config)
    if args.format == "json":
        sys.stdout.write(report_to_json(report).decode("utf-8"))
    else:
        sys.stdout.write(report_to_text(report))
    failed = not report.passed or (args.strict and report.counts["warning"] > 0)
    return EXIT_FINDINGS if failed else EXIT_OK


def _cmd_schema_infer(args) -> int:
    _, table = read_csvy(args.table)
    schema = infer_schema(
        table, name=Path(args.table).stem, path=str(args.table)
    )
    sys.stdout.write(schema_to_json(schema).decode("utf-8"))
    return EXIT_OK


def _cmd_schema_validate(args) -> int:
    schema = schema_from_json(Path(args.schema).read_bytes())
    _, table = read_csvy(args.table)
    result = validate_table(table, schema)
    if args.format == "json":
        _emit_json(
            {
                "ok": result.ok,
                "violations": [
                    {
                        "kind": v.kind,
                        "field": v.field,
                        "row": v.row,
                        "value": v.value,
                    }
                    for v in result.violations
                ],
            }
        )
    else:
        if result.ok:
            print(f"{args.table} matches {args.schema}")
        else:
            print(f"{args.table} violates {args.schema}:")
            for v in result.violations:
                place = "table" if v.row is None else f"row {v.row}"
                print(f"  {place}, field {v.field!r}: {v.kind}" + (f" (value {v.value!r})" if v.value else ""))
    return EXIT_OK if result.ok else EXIT_FINDINGS


def _cmd_dict(args) -> int:
    source = Path(args.source)
    if source.suffix.lower() == ".json":
        dictionary = dictionary_from_schema(schema_from_json(source.read_bytes()))
    else:
        dictionary = dictionary_from_csv(source.read_bytes())
    if args.format == "json":
        _emit_json(
            {
                "entries": [
                    {
                        "variable": entry.variable_name,
                        "class": entry.class_name,
                        "description": entry.description,
                        "codes": dict(sorted(entry.codes.items())),
                        "missing_codes": sorted(entry.missing_codes),
                    }
                    for entry in dictionary.entries
                ]
            }
        )
    elif args.to == "csv":
        sys.stdout.write(dictionary_to_csv(dictionary).decode("utf-8"))
    else:
        sys.stdout.write(dictionary_to_markdown(dictionary))
    return EXIT_OK


def _cmd_checksum(args) -> int:
    root = Path(args.root)
    excluded = {CHECKSUMS_NAME}
    output = Path(args.output) if args.output else None
    if output is not None and output.resolve().is_relative_to(root.resolve()):
        excluded.add(output.resolve().relative_to(root.resolve()).as_posix())
    manifest = compute_manifest(root, include=lambda rel: rel not in excluded)
    text = serialize_manifest(manifest)
    if output is not None:
        output.write_bytes(text)
    if args.format == "json":
        _emit_json(
            {
                "entries": [{"path": e.path, "md5": e.md5} for e in manifest.entries],
                "written": str(output) if output is not None else None,
            }
        )
    elif output is not None:
        print(f"wrote {len(manifest.entries)} checksums to {output}")
    else:
        sys.stdout.write(text.decode("utf-8"))
    return EXIT_OK


def _cmd_verify(args) -> int:
    root = Path(args.root)
    manifest_path = Path(args.manifest) if args.manifest else root / CHECKSUMS_NAME
    manifest = parse_manifest(manifest_path.read_bytes())
    excluded = set()
    if manifest_path.resolve().is_relative_to(root.resolve()):
        excluded.add(manifest_path.resolve().relative_to(root.resolve()).as_posix())
    report = verify_manifest(root, manifest, include=lambda rel: rel not in excluded)
    if args.format == "json":
        _emit_json(
            {
                "ok": report.ok,
                "mismatched": report.mismatched,
                "missing": report.missing,
                "extra": report.extra,
            }
        )
    else:
        if report.ok:
            print(f"OK: {len(manifest.entries)} files verified")
        for path in report.mismatched:
            print(f"MISMATCH {path}")
        for path in report.missing:
            print(f"MISSING  {path}")
        for path in report.extra:
            print(f"EXTRA    {path}")
    return EXIT_OK if report.ok else EXIT_FINDINGS


def _cmd_chunk(args) -> int:
    plan = chunk_table(args.table, args.max_rows)
    if args.format == "json":
        _emit_json(
            {
                "source": plan.source,
                "data_rows": plan.data_rows,
                "max_rows_per_chunk": plan.max_rows_per_chunk,
                "chunks": plan.chunk_paths,
            }
        )
    else:
        print(
            f"split {plan.source} ({plan.data_rows} rows) into {len(plan.chunk_paths)} "
            f"chunk(s) of at most {plan.max_rows_per_chunk} rows"
        )
        for path in plan.chunk_paths:
            print(f"  {path}")
    return EXIT_OK


def _cmd_unchunk(args) -> int:
    if args.format == "json" and not args.output:
        raise _UsageError("--output is required with --format json")
    data = unchunk(args.chunks)
    if args.output:
        Path(args.output).write_bytes(data)
        if args.format == "json":
            _emit_json({"output": args.output, "bytes": len(data)})
        else:
            print(f"wrote {len(data)} bytes to {args.output}")
    else:
        sys.stdout.buffer.write(data)
    return EXIT_OK


def _cmd_pack(args) -> int:
    root = Path(args.root)
    if args.require_lint:
        report = lint_package(scan_package(root))
        if not report.passed:
            message = f"lint found {report.counts['error']} error(s); fix them or drop --require-lint"
            if args.format == "json":
                _emit_json({"error": {"code": EXIT_FINDINGS, "message": message}})
            else:
                print(f"error: {message}", file=sys.stderr)
            return EXIT_FINDINGS
    manifest_path = Path(args.manifest) if args.manifest else root / CHECKSUMS_NAME
    manifest = parse_manifest(manifest_path.read_bytes())
    destination = Path(args.output) if args.output else Path(f"{root.resolve().name}.tar")
    archive = pack(root, manifest, destination)
    if args.format == "json":
        _emit_json({"archive": str(archive), "files": len(manifest.entries) + 1})
    else:
        print(f"wrote {archive} ({len(manifest.entries)} files plus checksums.txt)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _add_format(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format",
        choices=("text", "json"),
        default="text",
        help="output format (json prints exactly one document)",
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="tidypack", description="Scaffold, document, and check research data packages.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("init", help="create a new data package skeleton")
    p.add_argument("destination", help="directory to create (must be absent or empty)")
    p.add_argument("--dataset", action="append", required=True, metavar="NAME", help="dataset name (repeatable)")
    p.add_argument("--license", choices=sorted(CLI_CHOICES), default="cc0", help="license to write")
    p.add_argument("--doi", help="DOI for the citation file, e.g. 10.5281/zenodo.123456")
    p.add_argument("--author", action="append", default=[], metavar='"Name <ORCID>"', help="author (repeatable); ORCID optional")
    p.add_argument("--year", type=int, help="publication year for the citation file")
    p.add_argument("--seed", action="append", default=[], metavar="TABLE", help="existing table to seed a dataset with (pairs with --dataset order)")
    p.add_argument("--name", help="package name (defaults to the destination directory name)")
    _add_format(p)
    p.set_defaults(handler=_cmd_init)

    p = sub.add_parser("lint", help="check a package against the conformance rules")
    p.add_argument("target", help="package root directory")
    p.add_argument("--config", help="rule severity overrides (RNN = off|error|warning|info)")
    p.add_argument("--strict", action="store_true", help="also fail (exit 1) on warnings")
    _add_format(p)
    p.set_defaults(handler=_cmd_lint)

    p = sub.add_parser("schema", help="infer or validate table schemas")
    schema_sub = p.add_subparsers(dest="schema_command", required=True, metavar="action")
    pi = schema_sub.add_parser("infer", help="infer a schema from a table and print JSON")
    pi.add_argument("table", help="delimited table file")
    _add_format(pi)
    pi.set_defaults(handler=_cmd_schema_infer)
    pv = schema_sub.add_parser("validate", help="check a table against a schema")
    pv.add_argument("table", help="delimited table file")
    pv.add_argument("schema", help="schema JSON file")
    _add_format(pv)
    pv.set_defaults(handler=_cmd_schema_validate)

    p = sub.add_parser("dict", help="convert a schema or dictionary table")
    p.add_argument("source", help="schema .json or dictionary table file")
    p.add_argument("--to", choices=("markdown", "csv"), default="markdown", help="text output form")
    _add_format(p)
    p.set_defaults(handler=_cmd_dict)

    p = sub.add_parser("checksum", help="compute an MD5 manifest for a tree")
    p.add_argument("root", help="directory to checksum")
    p.add_argument("--output", help="write the manifest here instead of stdout")
    _add_format(p)
    p.set_defaults(handler=_cmd_checksum)

    p = sub.add_parser("verify", help="verify a tree against its manifest")
    p.add_argument("root", help="directory to verify")
    p.add_argument("--manifest", help=f"manifest file (default: <root>/{CHECKSUMS_NAME})")
    _add_format(p)
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser("chunk", help="split a table into row-limited chunks")
    p.add_argument("table", help="table file to split")
    p.add_argument("--max-rows", type=int, required=True, metavar="N", help="maximum data rows per chunk")
    _add_format(p)
    p.set_defaults(handler=_cmd_chunk)

    p = sub.add_parser("unchunk", help="reassemble chunks into one table")
    p.add_argument("chunks", nargs="+", help="chunk files in order (name-1.csv name-2.csv ...)")
    p.add_argument("--output", help="write the reassembled table here (required with --format json)")
    _add_format(p)
    p.set_defaults(handler=_cmd_unchunk)

    p = sub.add_parser("pack", help="write a reproducible tar archive of a package")
    p.add_argument("root", help="package root directory")
    p.add_argument("--output", help="archive path (default: <root-name>.tar)")
    p.add_argument("--manifest", help=f"manifest to pack from (default: <root>/{CHECKSUMS_NAME})")
    p.add_argument("--require-lint", action="store_true", help="refuse to pack unless lint passes")
    _add_format(p)
    p.set_defaults(handler=_cmd_pack)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    json_requested = "--format=json" in argv or (
        "--format" in argv
        and argv.index("--format") + 1 < len(argv)
        and argv[argv.index("--format") + 1] == "json"
    )
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        return _fail(json_requested, EXIT_USAGE, str(exc))
    json_mode = getattr(args, "format", "text") == "json"
    try:
        return args.handler(args)
    except _UsageError as exc:
        return _fail(json_mode, EXIT_USAGE, str(exc))
    except ToolError as exc:
        return _fail(json_mode, EXIT_USAGE, str(exc))
    except OSError as exc:
        return _fail(json_mode, EXIT_IO, str(exc))


if __name__ == "__main__":
    raise SystemExit(main())
