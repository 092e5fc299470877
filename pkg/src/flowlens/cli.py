"""Operator entry points: analyze, serve, export, check-config."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import List, Optional

from . import analysis, config, pipeline
from .errors import (
    ConfigError,
    DimMismatch,
    DuplicateId,
    EmptyCorpus,
    MalformedRecord,
    NoCorrectSolutions,
    RemoteUnavailable,
)

EXIT_INGEST = 1
EXIT_NO_CORRECT = 2
EXIT_REMOTE = 3


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_analyze(args: argparse.Namespace) -> int:
    try:
        cfg = config.load(args.config)
    except (ConfigError, OSError) as exc:
        return _fail(str(exc), EXIT_INGEST)
    try:
        result = pipeline.run(args.input, cfg)
    except (MalformedRecord, DuplicateId, EmptyCorpus, OSError) as exc:
        return _fail(str(exc), EXIT_INGEST)
    except NoCorrectSolutions as exc:
        return _fail(str(exc), EXIT_NO_CORRECT)
    except (RemoteUnavailable, DimMismatch) as exc:
        return _fail(str(exc), EXIT_REMOTE)
    analysis.write_document(result.document, args.out)
    for stage in result.stats:
        note = f"  ({stage.note})" if stage.note else ""
        print(f"{stage.name:<12} {stage.seconds:8.3f}s{note}")
    doc = result.document
    print(f"submissions    {len(doc['submissions'])}")
    print(f"distinct lines {len(doc['clusters']['distinct_lines'])}")
    print(f"tags           {len(doc['clusters']['tags'])}")
    print(f"steps          {len(doc['steps'])}")
    print(f"wrote {args.out}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from . import service

    try:
        app = service.create_app(args.analysis)
    except (analysis.SchemaMismatch, ValueError) as exc:
        return _fail(str(exc), EXIT_INGEST)
    except OSError as exc:
        return _fail(str(exc), EXIT_INGEST)
    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def _step_rows(doc: dict) -> List[dict]:
    rows = []
    for step in doc["steps"]:
        rows.append(
            {
                "step": step["step"],
                "display_label": step["display_label"],
                "member_lines": step["member_lines"],
                "correct_count": step["correct_count"],
                "incorrect_count": step["incorrect_count"],
                "ratio": step["ratio"],
                "color": step["color"],
            }
        )
    return rows


def _variant_rows(doc: dict) -> List[dict]:
    return [dict(row) for row in doc["variants"]]


def cmd_export(args: argparse.Namespace) -> int:
    try:
        doc, _ = analysis.load_document(args.analysis)
    except (analysis.SchemaMismatch, ValueError) as exc:
        return _fail(str(exc), EXIT_INGEST)
    except OSError as exc:
        return _fail(str(exc), EXIT_INGEST)
    steps = _step_rows(doc)
    variants = _variant_rows(doc)
    if args.format == "json":
        payload = json.dumps(
            {"steps": steps, "variants": variants},
            sort_keys=True,
            indent=2,
            ensure_ascii=False,
        )
        if args.out:
            Path(args.out).write_text(payload + "\n", encoding="utf-8")
            print(f"wrote {args.out}")
        else:
            print(payload)
        return 0
    out_dir = Path(args.out) if args.out else Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, rows in (("steps.csv", steps), ("variants.csv", variants)):
        path = out_dir / name
        with path.open("w", encoding="utf-8", newline="") as handle:
            if rows:
                writer = csv.DictWriter(handle, fieldnames=list(rows[0]))
                writer.writeheader()
                writer.writerows(rows)
        print(f"wrote {path}")
    return 0


def cmd_check_config(args: argparse.Namespace) -> int:
    try:
        cfg = config.load(args.config)
    except (ConfigError, OSError) as exc:
        return _fail(str(exc), EXIT_INGEST)
    print(f"ok: {args.config}")
    print(json.dumps(cfg.effective(), sort_keys=True, indent=2, ensure_ascii=False))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowlens",
        description="Analyze a submission corpus and serve the linked flow views.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser("analyze", help="run the full pipeline")
    p_analyze.add_argument("--input", required=True, help="submissions JSONL")
    p_analyze.add_argument("--config", required=True, help="run configuration file")
    p_analyze.add_argument("--out", required=True, help="analysis file to write")
    p_analyze.set_defaults(func=cmd_analyze)

    p_serve = sub.add_parser("serve", help="serve an analysis file over HTTP")
    p_serve.add_argument("--analysis", required=True)
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.set_defaults(func=cmd_serve)

    p_export = sub.add_parser("export", help="export step and variant tables")
    p_export.add_argument("--analysis", required=True)
    p_export.add_argument("--format", choices=("json", "csv"), default="json")
    p_export.add_argument("--out", help="file (json) or directory (csv)")
    p_export.set_defaults(func=cmd_export)

    p_check = sub.add_parser("check-config", help="validate a configuration file")
    p_check.add_argument("config")
    p_check.set_defaults(func=cmd_check_config)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
