"""End-to-end pipeline: ingest, normalize, embed, cluster, mine, align,
label, aggregate, and assemble the analysis document."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from . import align as align_mod
from . import analysis, cluster, corpus as corpus_mod, embed, label as label_mod
from .aggregate import ViewIndex
from .config import Config
from .normalize import NormalizedLine, normalize


@dataclass
class StageStats:
    name: str
    seconds: float
    note: str = ""


@dataclass
class PipelineResult:
    document: dict
    stats: List[StageStats] = field(default_factory=list)


def run(input_path: str, cfg: Config) -> PipelineResult:
    stats: List[StageStats] = []

    def timed(name: str):
        start = time.perf_counter()

        def done(note: str = "") -> None:
            stats.append(StageStats(name, time.perf_counter() - start, note))

        return done

    done = timed("ingest")
    corp = corpus_mod.ingest_path(
        input_path, cfg.corpus.exercise_id, cfg.corpus.prompt_text
    )
    done(f"{len(corp)} submissions")

    done = timed("normalize")
    lines_by_sub: Dict[str, List[NormalizedLine]] = {}
    flat_lines: List[NormalizedLine] = []
    for sub in corp.submissions:
        lines = normalize(
            sub, cfg.normalize.allowlist, cfg.normalize.output_functions
        )
        lines_by_sub[sub.id] = lines
        flat_lines.extend(lines)
    done(f"{len(flat_lines)} lines")

    done = timed("embed")
    vectors, backend_id = embed.embed_with_fallback(flat_lines, cfg.embed)
    done(f"backend={backend_id}")

    done = timed("cluster")
    model = cluster.build_model(
        flat_lines, vectors, cfg.cluster.theta_coarse, cfg.cluster.theta_fine
    )
    done(f"{len(model.distinct_lines)} distinct, {len(model.tags)} tags")

    done = timed("align")
    tag_seqs: Dict[str, List[int]] = {
        sub.id: [
            model.line_tag((sub.id, line.index)) for line in lines_by_sub[sub.id]
        ]
        for sub in corp.submissions
    }
    correct_seqs = [tag_seqs[sub.id] for sub in corp.submissions if sub.passed]
    progression = align_mod.mine_progression(
        correct_seqs, cfg.align.min_agreement, cfg.align.min_coverage
    )
    alignments = {
        sub.id: align_mod.align(sub.id, tag_seqs[sub.id], progression)
        for sub in corp.submissions
    }
    done(f"{len(progression.step_tags)} steps")

    done = timed("label")
    labels, reports = label_mod.label_corpus(
        corp,
        lines_by_sub,
        model,
        cfg.label,
        input_example=cfg.corpus.input_example,
        output_example=cfg.corpus.output_example,
    )
    done(f"{len(labels)} labels")

    done = timed("aggregate")
    index = ViewIndex.from_stages(
        corp, model, progression, alignments, labels, lines_by_sub, cfg.view
    )
    base_view = index.build_view(())
    document = analysis.build_document(
        cfg,
        corp,
        model,
        progression,
        alignments,
        labels,
        reports,
        index,
        base_view,
        backend_id,
    )
    done()

    return PipelineResult(document, stats)
