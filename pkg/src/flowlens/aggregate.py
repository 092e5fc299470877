"""View-model materialization and the nested filter algebra.

A ViewIndex is an immutable join of all stage outputs, keyed for the three
questions the views ask: what lines sit at each progression step, which
submissions contain a given variant, and what error kinds occur where.
Every view is recomputed from the index and a filter stack; snapshots are
plain data and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .align import Alignment, CanonicalProgression
from .cluster import ClusterModel
from .config import ViewConfig
from .corpus import Corpus
from .errors import EmptyStack, UnknownErrorKind, UnknownVariant
from .label import CLASS_CORRECT, LineErrorLabel
from .normalize import NormalizedLine


# --------------------------------------------------------------------------
# colors
# --------------------------------------------------------------------------

def parse_hex_color(value: str) -> Tuple[int, int, int]:
    return tuple(int(value[i : i + 2], 16) for i in (1, 3, 5))  # type: ignore[return-value]


def format_hex_color(rgb: Tuple[int, int, int]) -> str:
    return "#{:02X}{:02X}{:02X}".format(*rgb)


def ratio_color(
    ratio: float, incorrect_hex: str, correct_hex: str
) -> Tuple[int, int, int]:
    """Linear interpolation per RGB channel; endpoints map exactly."""
    lo = parse_hex_color(incorrect_hex)
    hi = parse_hex_color(correct_hex)
    return tuple(
        int(round(lo[c] + (hi[c] - lo[c]) * ratio)) for c in range(3)
    )  # type: ignore[return-value]


# --------------------------------------------------------------------------
# view data
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FilterTerm:
    variant_id: str
    error_kind: Optional[str] = None

    def to_dict(self) -> dict:
        return {"variant_id": self.variant_id, "error_kind": self.error_kind}


@dataclass(frozen=True)
class LineFacts:
    """Everything the views need about one normalized line."""

    submission_id: str
    index: int
    text: str
    raw_start: int
    raw_end: int
    step: Optional[int]
    tag: int
    variant_id: str
    label_class: str
    label_kind: str

    def to_dict(self, matched: bool = False) -> dict:
        return {
            "index": self.index,
            "text": self.text,
            "raw_start": self.raw_start,
            "raw_end": self.raw_end,
            "step": self.step,
            "tag": self.tag,
            "variant_id": self.variant_id,
            "label_class": self.label_class,
            "label_kind": self.label_kind,
            "matched": matched,
        }


@dataclass(frozen=True)
class VariantAggregate:
    variant_id: str
    display_text: str
    correct_count: int
    incorrect_count: int
    submission_count: int
    error_facets: Dict[str, int]

    @property
    def member_lines(self) -> int:
        return self.correct_count + self.incorrect_count

    def to_dict(self) -> dict:
        return {
            "variant_id": self.variant_id,
            "display_text": self.display_text,
            "correct_count": self.correct_count,
            "incorrect_count": self.incorrect_count,
            "submission_count": self.submission_count,
            "error_facets": dict(sorted(self.error_facets.items())),
        }


@dataclass(frozen=True)
class StepAggregate:
    step: int
    display_label: str
    member_lines: int
    correct_count: int
    incorrect_count: int
    ratio: float
    color: Tuple[int, int, int]
    variants: Tuple[VariantAggregate, ...]

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "display_label": self.display_label,
            "member_lines": self.member_lines,
            "correct_count": self.correct_count,
            "incorrect_count": self.incorrect_count,
            "ratio": self.ratio,
            "color": format_hex_color(self.color),
            "color_rgb": list(self.color),
            "variants": [v.to_dict() for v in self.variants],
        }


@dataclass(frozen=True)
class SubmissionPage:
    variant_id: str
    error_kind: Optional[str]
    page: int
    page_size: int
    total_matches: int
    page_count: int
    entries: Tuple[dict, ...]

    def to_dict(self) -> dict:
        return {
            "variant_id": self.variant_id,
            "error_kind": self.error_kind,
            "page": self.page,
            "page_size": self.page_size,
            "total_matches": self.total_matches,
            "page_count": self.page_count,
            "entries": list(self.entries),
        }


@dataclass(frozen=True)
class ViewModel:
    steps: Tuple[StepAggregate, ...]
    stack: Tuple[FilterTerm, ...]
    active_submissions: int
    total_submissions: int
    detail: Optional[SubmissionPage]

    def to_dict(self) -> dict:
        return {
            "steps": [s.to_dict() for s in self.steps],
            "stack": [t.to_dict() for t in self.stack],
            "active_submissions": self.active_submissions,
            "total_submissions": self.total_submissions,
            "detail": self.detail.to_dict() if self.detail else None,
        }


# --------------------------------------------------------------------------
# the index
# --------------------------------------------------------------------------

@dataclass
class ViewIndex:
    line_facts: List[LineFacts]
    submission_ids: List[str]  # corpus order
    passed: Dict[str, bool]
    sources: Dict[str, str]  # original text (scrubbed copies are export-only)
    step_tags: Tuple[int, ...]
    tag_labels: Dict[int, str]
    variant_display: Dict[str, str]
    view_cfg: ViewConfig

    # derived joins, filled in __post_init__
    by_step: Dict[int, List[LineFacts]] = field(default_factory=dict)
    by_submission: Dict[str, List[LineFacts]] = field(default_factory=dict)
    subs_with_variant: Dict[str, Set[str]] = field(default_factory=dict)
    subs_with_variant_kind: Dict[Tuple[str, str], Set[str]] = field(
        default_factory=dict
    )
    known_kinds: Set[str] = field(default_factory=set)

    def __post_init__(self) -> None:
        for facts in self.line_facts:
            self.by_submission.setdefault(facts.submission_id, []).append(facts)
            if facts.step is not None:
                self.by_step.setdefault(facts.step, []).append(facts)
            self.subs_with_variant.setdefault(facts.variant_id, set()).add(
                facts.submission_id
            )
            if facts.label_kind:
                self.known_kinds.add(facts.label_kind)
                self.subs_with_variant_kind.setdefault(
                    (facts.variant_id, facts.label_kind), set()
                ).add(facts.submission_id)

    # -- construction ------------------------------------------------------

    @classmethod
    def from_stages(
        cls,
        corpus: Corpus,
        model: ClusterModel,
        progression: CanonicalProgression,
        alignments: Dict[str, Alignment],
        labels: Dict[Tuple[str, int], LineErrorLabel],
        lines_by_sub: Dict[str, List[NormalizedLine]],
        view_cfg: ViewConfig,
    ) -> "ViewIndex":
        facts: List[LineFacts] = []
        for sub in corpus.submissions:
            alignment = alignments[sub.id]
            for line in lines_by_sub[sub.id]:
                ref = (sub.id, line.index)
                tag = model.line_tag(ref)
                v_tag, v_idx = model.line_variant(ref)
                label = labels[ref]
                facts.append(
                    LineFacts(
                        sub.id,
                        line.index,
                        line.text,
                        line.raw_span[0],
                        line.raw_span[1],
                        alignment.slot[line.index],
                        tag,
                        f"t{v_tag}v{v_idx}",
                        label.cls,
                        label.kind,
                    )
                )
        return cls(
            line_facts=facts,
            submission_ids=[sub.id for sub in corpus.submissions],
            passed={sub.id: sub.passed for sub in corpus.submissions},
            sources={sub.id: sub.source for sub in corpus.submissions},
            step_tags=tuple(progression.step_tags),
            tag_labels={tag.tag: tag.label for tag in model.tags},
            variant_display={
                variant.variant_id: variant.display_text
                for variant in model.variants
            },
            view_cfg=view_cfg,
        )

    # -- filter algebra ----------------------------------------------------

    def validate_term(self, term: FilterTerm) -> None:
        if term.variant_id not in self.subs_with_variant:
            raise UnknownVariant(term.variant_id)
        if term.error_kind is not None and term.error_kind not in self.known_kinds:
            raise UnknownErrorKind(term.error_kind)

    def _term_matches(self, term: FilterTerm) -> Set[str]:
        if term.error_kind is None:
            return self.subs_with_variant.get(term.variant_id, set())
        return self.subs_with_variant_kind.get(
            (term.variant_id, term.error_kind), set()
        )

    def active_set(self, stack: Sequence[FilterTerm]) -> Set[str]:
        active = set(self.submission_ids)
        for term in stack:
            active &= self._term_matches(term)
        return active

    # -- views ---------------------------------------------------------------

    def build_view(self, stack: Sequence[FilterTerm] = ()) -> ViewModel:
        for term in stack:
            self.validate_term(term)
        active = self.active_set(stack)
        steps: List[StepAggregate] = []
        for step_id, tag in enumerate(self.step_tags):
            lines = [
                facts
                for facts in self.by_step.get(step_id, [])
                if facts.submission_id in active
            ]
            correct = sum(1 for f in lines if f.label_class == CLASS_CORRECT)
            incorrect = len(lines) - correct
            ratio = correct / len(lines) if lines else 1.0
            steps.append(
                StepAggregate(
                    step=step_id,
                    display_label=self.tag_labels[tag],
                    member_lines=len(lines),
                    correct_count=correct,
                    incorrect_count=incorrect,
                    ratio=ratio,
                    color=ratio_color(
                        ratio,
                        self.view_cfg.color_incorrect,
                        self.view_cfg.color_correct,
                    ),
                    variants=self._step_variants(lines),
                )
            )
        detail = None
        if stack:
            last = stack[-1]
            detail = self.page_submissions(stack, last.variant_id, last.error_kind, 1)
        return ViewModel(
            steps=tuple(steps),
            stack=tuple(stack),
            active_submissions=len(active),
            total_submissions=len(self.submission_ids),
            detail=detail,
        )

    def _step_variants(
        self, lines: Sequence[LineFacts]
    ) -> Tuple[VariantAggregate, ...]:
        grouped: Dict[str, List[LineFacts]] = {}
        for facts in lines:
            grouped.setdefault(facts.variant_id, []).append(facts)
        aggregates = []
        for variant_id, members in grouped.items():
            correct = sum(1 for f in members if f.label_class == CLASS_CORRECT)
            subs = {f.submission_id for f in members}
            facets: Dict[str, int] = {}
            for kind in sorted({f.label_kind for f in members if f.label_kind}):
                facets[kind] = len(
                    {f.submission_id for f in members if f.label_kind == kind}
                )
            aggregates.append(
                VariantAggregate(
                    variant_id=variant_id,
                    display_text=self.variant_display[variant_id],
                    correct_count=correct,
                    incorrect_count=len(members) - correct,
                    submission_count=len(subs),
                    error_facets=facets,
                )
            )
        aggregates.sort(key=lambda v: (-v.member_lines, v.display_text))
        return tuple(aggregates)

    # -- detail pages ------------------------------------------------------

    def page_submissions(
        self,
        stack: Sequence[FilterTerm],
        variant_id: str,
        error_kind: Optional[str],
        page: int,
    ) -> SubmissionPage:
        target = FilterTerm(variant_id, error_kind)
        self.validate_term(target)
        active = self.active_set(stack)
        matches = sorted(active & self._term_matches(target))
        size = self.view_cfg.page_size
        page_count = max(1, -(-len(matches) // size))
        page = max(1, page)
        window = matches[(page - 1) * size : page * size]
        entries = []
        for sub_id in window:
            lines = self.by_submission.get(sub_id, [])
            entries.append(
                {
                    "submission_id": sub_id,
                    "passed": self.passed[sub_id],
                    "source": self.sources[sub_id],
                    "lines": [
                        facts.to_dict(
                            matched=(
                                facts.variant_id == variant_id
                                and (
                                    error_kind is None
                                    or facts.label_kind == error_kind
                                )
                            )
                        )
                        for facts in lines
                    ],
                }
            )
        return SubmissionPage(
            variant_id=variant_id,
            error_kind=error_kind,
            page=page,
            page_size=size,
            total_matches=len(matches),
            page_count=page_count,
            entries=tuple(entries),
        )


# --------------------------------------------------------------------------
# spec-level operations (thin wrappers over the index)
# --------------------------------------------------------------------------

def build_viewmodel(index: ViewIndex, stack: Sequence[FilterTerm] = ()) -> ViewModel:
    return index.build_view(stack)


def push_filter(
    index: ViewIndex, stack: Sequence[FilterTerm], term: FilterTerm
) -> Tuple[Tuple[FilterTerm, ...], ViewModel]:
    index.validate_term(term)
    new_stack = tuple(stack) + (term,)
    return new_stack, index.build_view(new_stack)


def pop_filter(
    index: ViewIndex, stack: Sequence[FilterTerm]
) -> Tuple[Tuple[FilterTerm, ...], ViewModel]:
    if not stack:
        raise EmptyStack("no filter to pop")
    new_stack = tuple(stack)[:-1]
    return new_stack, index.build_view(new_stack)


def clear_filters(
    index: ViewIndex, stack: Sequence[FilterTerm]
) -> Tuple[Tuple[FilterTerm, ...], ViewModel]:
    return (), index.build_view(())


def list_submissions(
    index: ViewIndex,
    stack: Sequence[FilterTerm],
    variant_id: str,
    error_kind: Optional[str] = None,
    page: int = 1,
) -> SubmissionPage:
    return index.page_submissions(stack, variant_id, error_kind, page)
