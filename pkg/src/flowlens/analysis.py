"""The analysis file: one JSON document, the contract between analyze and
serve.

Serialization is canonical (sorted keys, fixed separators, no timestamps),
so identical inputs and config produce byte-identical files; the file hash
doubles as the analysis identity the service reports.
"""

from __future__ import annotations

import hashlib
import json
from typing import Dict, List, Tuple

from . import kernels
from .aggregate import LineFacts, ViewIndex, ViewModel
from .align import Alignment, CanonicalProgression
from .cluster import ClusterModel
from .config import Config, ViewConfig
from .corpus import Corpus
from .errors import FlowlensError
from .label import LabelerReport, LineErrorLabel

SCHEMA_VERSION = "1"


class SchemaMismatch(FlowlensError):
    """The analysis file was written by an incompatible version."""


def build_document(
    cfg: Config,
    corpus: Corpus,
    model: ClusterModel,
    progression: CanonicalProgression,
    alignments: Dict[str, Alignment],
    labels: Dict[Tuple[str, int], LineErrorLabel],
    reports: List[LabelerReport],
    index: ViewIndex,
    base_view: ViewModel,
    embed_backend_id: str,
) -> dict:
    distinct_rows = []
    for d_idx, distinct in enumerate(model.distinct_lines):
        tag = model.tag_of_distinct[d_idx]
        v_tag, v_idx = model.variant_of_distinct[d_idx]
        distinct_rows.append(
            {
                "text": distinct.text,
                "kind": distinct.kind,
                "count": distinct.count,
                "tag": tag,
                "variant_id": f"t{v_tag}v{v_idx}",
            }
        )
    tag_rows = [
        {
            "tag": tag.tag,
            "label": tag.label,
            "size": len(tag.member_ids),
            "centroid": [float(x) for x in tag.centroid],
        }
        for tag in model.tags
    ]
    variant_rows = []
    for variant in model.variants:
        line_count = sum(
            model.distinct_lines[m].count for m in variant.member_ids
        )
        subs = {
            ref[0]
            for m in variant.member_ids
            for ref in model.distinct_lines[m].members
        }
        variant_rows.append(
            {
                "variant_id": variant.variant_id,
                "tag": variant.tag,
                "index": variant.index,
                "display_text": variant.display_text,
                "distinct_members": len(variant.member_ids),
                "line_count": line_count,
                "submission_count": len(subs),
            }
        )

    alignment_rows = {
        sub_id: {
            "matched": [[i, j] for i, j in alignment.matched],
            "slot": list(alignment.slot),
        }
        for sub_id, alignment in alignments.items()
    }

    label_rows: Dict[str, List[dict]] = {}
    for (sub_id, _index), label in labels.items():
        label_rows.setdefault(sub_id, []).append(
            {
                "index": label.index,
                "class": label.cls,
                "kind": label.kind,
                "message": label.message,
                "source": label.source,
            }
        )
    for rows in label_rows.values():
        rows.sort(key=lambda r: r["index"])

    submission_rows = []
    for sub_id in index.submission_ids:
        lines = []
        for facts in index.by_submission.get(sub_id, []):
            row = facts.to_dict()
            row.pop("matched")
            lines.append(row)
        submission_rows.append(
            {
                "id": sub_id,
                "passed": index.passed[sub_id],
                "source": index.sources[sub_id],
                "lines": lines,
            }
        )

    report_rows = [
        {
            "submission_id": report.submission_id,
            "parse_status": report.parse_status,
            "retries": report.retries,
            "warnings": list(report.warnings),
            "transcripts": list(report.transcripts),
        }
        for report in reports
    ]

    return {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.effective(),
        "progression": {
            "step_tags": list(progression.step_tags),
            "agreement": list(progression.agreement),
            "min_agreement": progression.min_agreement,
            "min_coverage": progression.min_coverage,
        },
        "steps": [step.to_dict() for step in base_view.steps],
        "variants": variant_rows,
        "clusters": {"distinct_lines": distinct_rows, "tags": tag_rows},
        "alignments": alignment_rows,
        "labels": label_rows,
        "submissions": submission_rows,
        "labeler_reports": report_rows,
        "provenance": {
            "seeds": {"embed_seed": cfg.embed.seed},
            "thresholds": {
                "theta_coarse": cfg.cluster.theta_coarse,
                "theta_fine": cfg.cluster.theta_fine,
                "min_agreement": cfg.align.min_agreement,
                "min_coverage": cfg.align.min_coverage,
            },
            "backend_ids": {
                "embed": embed_backend_id,
                "chat": "chat" if cfg.label.chat_url else None,
            },
            "kernels": {"implementation": kernels.IMPLEMENTATION},
        },
    }


def dumps_document(doc: dict) -> str:
    return (
        json.dumps(doc, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
        + "\n"
    )


def write_document(doc: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_document(doc))


def load_document(path: str) -> Tuple[dict, str]:
    """Read an analysis file. Returns (document, sha256 of the file bytes)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    doc = json.loads(blob.decode("utf-8"))
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaMismatch(
            f"analysis schema {version!r} not supported (expected {SCHEMA_VERSION!r})"
        )
    return doc, hashlib.sha256(blob).hexdigest()


def index_from_document(doc: dict) -> ViewIndex:
    """Rebuild the view index from a loaded analysis document."""
    facts: List[LineFacts] = []
    submission_ids: List[str] = []
    passed: Dict[str, bool] = {}
    sources: Dict[str, str] = {}
    for sub in doc["submissions"]:
        submission_ids.append(sub["id"])
        passed[sub["id"]] = sub["passed"]
        sources[sub["id"]] = sub["source"]
        for row in sub["lines"]:
            facts.append(
                LineFacts(
                    submission_id=sub["id"],
                    index=row["index"],
                    text=row["text"],
                    raw_start=row["raw_start"],
                    raw_end=row["raw_end"],
                    step=row["step"],
                    tag=row["tag"],
                    variant_id=row["variant_id"],
                    label_class=row["label_class"],
                    label_kind=row["label_kind"],
                )
            )
    view_raw = doc["config"]["view"]
    return ViewIndex(
        line_facts=facts,
        submission_ids=submission_ids,
        passed=passed,
        sources=sources,
        step_tags=tuple(doc["progression"]["step_tags"]),
        tag_labels={row["tag"]: row["label"] for row in doc["clusters"]["tags"]},
        variant_display={
            row["variant_id"]: row["display_text"] for row in doc["variants"]
        },
        view_cfg=ViewConfig(
            color_incorrect=view_raw["color_incorrect"],
            color_correct=view_raw["color_correct"],
            page_size=view_raw["page_size"],
        ),
    )
