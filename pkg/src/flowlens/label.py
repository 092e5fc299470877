"""Line-level error labels.

Two labelers share one output shape: a remote chat-completion labeler driven
by a versioned prompt template, and a deterministic divergence heuristic.
The chain is per submission: the remote labeler is tried first when
configured, and any failure (unreachable service, unparseable response after
one re-ask) falls through to the divergence rules for that submission only.
Passed submissions are all-Correct by definition and never cost a remote
call.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from time import sleep
from typing import Dict, List, Optional, Sequence, Set, Tuple

import httpx

from . import lexer
from .cluster import ClusterModel, LineRef
from .config import LabelConfig
from .corpus import Corpus, Submission
from .errors import RemoteUnavailable, UnparseableResponse
from .normalize import NormalizedLine

CLASS_CORRECT = "Correct"
CLASS_SYNTAX = "Syntax"
CLASS_RUNTIME = "Runtime"
CLASS_SEMANTIC = "Semantic"

MAX_ERROR_RECORDS = 7
DEFAULT_PROMPT_RESOURCE = "error_prompt_v1.txt"

_SYNTAX_KINDS = frozenset(("SyntaxError", "IndentationError", "TabError"))
_RUNTIME_KINDS = frozenset(
    (
        "AttributeError", "ValueError", "NameError", "TypeError", "KeyError",
        "IndexError", "ZeroDivisionError", "RuntimeError", "RecursionError",
        "OverflowError", "UnboundLocalError", "ImportError",
        "ModuleNotFoundError", "StopIteration", "FileNotFoundError",
        "OSError", "MemoryError", "UnicodeDecodeError", "UnicodeEncodeError",
        "AssertionError",
    )
)
_KIND_ALIASES = {
    kind.lower(): kind
    for kind in _SYNTAX_KINDS | _RUNTIME_KINDS | {"LogicalError"}
}


@dataclass(frozen=True)
class LineErrorLabel:
    submission_id: str
    index: int
    cls: str  # Correct | Syntax | Runtime | Semantic
    kind: str = ""
    message: str = ""
    source: str = "divergence"  # llm | divergence | override


@dataclass
class LabelerReport:
    submission_id: str
    transcripts: List[str] = field(default_factory=list)
    parse_status: str = "divergence"  # ok | fallback | divergence
    retries: int = 0
    warnings: List[str] = field(default_factory=list)


def classify_kind(kind: str) -> str:
    if kind in _SYNTAX_KINDS:
        return CLASS_SYNTAX
    if kind in _RUNTIME_KINDS:
        return CLASS_RUNTIME
    # LogicalError and anything unrecognized: semantic, kind preserved
    return CLASS_SEMANTIC


# --------------------------------------------------------------------------
# response grammar
# --------------------------------------------------------------------------

_RECORD_RE = re.compile(
    r"ERROR\s+\d+\s*:\s*(?P<kind>[^:|]+?)\s*:\s*(?P<msg>[^|]*?)"
    r"\s*\|\s*Line Number\s+(?P<line>\d+)\s*:"
)
_CANDIDATE_RE = re.compile(r"^\s*ERROR\s+\d")


def _normalize_kind(raw: str) -> str:
    squeezed = raw.strip().replace(" ", "").lower()
    return _KIND_ALIASES.get(squeezed, raw.strip())


def parse_llm_output(text: str) -> List[Tuple[int, str, str]]:
    """Extract (line number, kind, message) records from a response.

    Tolerates code fences, blank lines, and prose around the records.
    Raises UnparseableResponse when lines that look like records exist but
    none parse; a response with no records at all means no errors.
    """
    records: List[Tuple[int, str, str]] = []
    candidates = 0
    for raw_line in text.splitlines():
        if raw_line.strip().startswith("```"):
            continue
        if _CANDIDATE_RE.match(raw_line):
            candidates += 1
        match = _RECORD_RE.search(raw_line)
        if match:
            records.append(
                (
                    int(match.group("line")),
                    _normalize_kind(match.group("kind")),
                    match.group("msg").strip(),
                )
            )
    if candidates and not records:
        raise UnparseableResponse(
            f"{candidates} record-like line(s), none matched the grammar"
        )
    return records


def render_llm_output(records: Sequence[Tuple[int, str, str, str]]) -> str:
    """Inverse of parse_llm_output, for tests and transcript tooling.

    Each record is (line number, kind, message, code snippet).
    """
    out = []
    for n, (line_no, kind, message, code) in enumerate(records, start=1):
        out.append(
            f'ERROR {n}: {kind}: {message}  |  Line Number {line_no}: "{code}"'
        )
    return "\n".join(out)


# --------------------------------------------------------------------------
# remote labeler
# --------------------------------------------------------------------------

class ChatBackend:
    """Client for the chat-completion wire contract (POST /v1/chat)."""

    def __init__(
        self,
        url: str,
        max_tokens: int = 512,
        max_retries: int = 3,
        base_delay: float = 0.5,
        client: Optional[httpx.Client] = None,
    ):
        self.url = url.rstrip("/") + "/v1/chat"
        self.max_tokens = max_tokens
        self.max_retries = max_retries
        self.base_delay = base_delay
        self._client = client or httpx.Client(timeout=60.0)

    def chat(self, prompt: str) -> str:
        last_error = "no attempts made"
        for attempt in range(self.max_retries):
            if attempt:
                sleep(self.base_delay * (2 ** (attempt - 1)))
            try:
                resp = self._client.post(
                    self.url, json={"prompt": prompt, "max_tokens": self.max_tokens}
                )
            except httpx.HTTPError as exc:
                last_error = str(exc)
                continue
            if resp.status_code != 200:
                last_error = f"HTTP {resp.status_code}"
                continue
            text = resp.json().get("text")
            if not isinstance(text, str):
                raise RemoteUnavailable("chat", "malformed /v1/chat response")
            return text
        raise RemoteUnavailable("chat", last_error)


def load_prompt_template(path: Optional[str] = None) -> str:
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    return (
        importlib_resources.files("flowlens.resources")
        .joinpath(DEFAULT_PROMPT_RESOURCE)
        .read_text(encoding="utf-8")
    )


def render_prompt(
    template: str,
    problem: str,
    input_example: str,
    output_example: str,
    compile_error: str,
    code: str,
) -> str:
    filled = (
        template.replace("{Problem Description}", problem)
        .replace("{Input Example}", input_example)
        .replace("{Output Example}", output_example)
        .replace("{OEmessage}", compile_error or "None")
    )
    return filled + "\nCode Sample:\n```\n" + code + "\n```\n"


def _map_raw_line(lines: Sequence[NormalizedLine], raw_line: int) -> Optional[int]:
    """First normalized line whose raw span covers the 0-based source line."""
    for line in lines:
        if line.raw_span[0] <= raw_line <= line.raw_span[1]:
            return line.index
    return None


def label_llm(
    sub: Submission,
    lines: Sequence[NormalizedLine],
    backend: ChatBackend,
    template: str,
    problem: str = "",
    input_example: str = "",
    output_example: str = "",
    report: Optional[LabelerReport] = None,
) -> List[LineErrorLabel]:
    """Label one submission through the remote chain.

    Raises RemoteUnavailable or UnparseableResponse (after one re-ask);
    callers fall through to the divergence labeler then.
    """
    report = report if report is not None else LabelerReport(sub.id)
    prompt = render_prompt(
        template,
        problem,
        input_example,
        output_example,
        sub.meta.get("compile_error", "None"),
        sub.source,
    )
    records = None
    failure: Optional[UnparseableResponse] = None
    for attempt in range(2):  # one re-ask on an unparseable response
        text = backend.chat(prompt)
        report.transcripts.append(text)
        report.retries = attempt
        try:
            records = parse_llm_output(text)
            break
        except UnparseableResponse as exc:
            failure = exc
    if records is None:
        assert failure is not None
        raise failure

    if len(records) > MAX_ERROR_RECORDS:
        report.warnings.append(
            f"{len(records) - MAX_ERROR_RECORDS} record(s) beyond the "
            f"{MAX_ERROR_RECORDS}-error cap dropped"
        )
        records = records[:MAX_ERROR_RECORDS]

    by_index: Dict[int, LineErrorLabel] = {}
    for raw_line, kind, message in records:
        index = _map_raw_line(lines, raw_line)
        if index is None:
            report.warnings.append(
                f"label on source line {raw_line} maps to no normalized line; dropped"
            )
            continue
        if index in by_index:
            report.warnings.append(
                f"duplicate label for normalized line {index}; first kept"
            )
            continue
        by_index[index] = LineErrorLabel(
            sub.id, index, classify_kind(kind), kind, message, "llm"
        )
    report.parse_status = "ok"
    return [
        by_index.get(line.index)
        or LineErrorLabel(sub.id, line.index, CLASS_CORRECT, source="llm")
        for line in lines
    ]


# --------------------------------------------------------------------------
# divergence labeler
# --------------------------------------------------------------------------

def variants_with_passed_lines(
    model: ClusterModel, passed_ids: Set[str]
) -> Set[Tuple[int, int]]:
    out: Set[Tuple[int, int]] = set()
    for idx, distinct in enumerate(model.distinct_lines):
        if any(sid in passed_ids for sid, _ in distinct.members):
            out.add(model.variant_of_distinct[idx])
    return out


def label_divergence(
    sub: Submission,
    lines: Sequence[NormalizedLine],
    model: ClusterModel,
    passed_variants: Set[Tuple[int, int]],
) -> List[LineErrorLabel]:
    """Deterministic fallback labeler.

    Failed submissions: a line whose variant never occurs in any passed
    submission is Semantic/LogicalError; a line from a logical line with
    broken brackets, an unterminated string, or an impossible dedent is
    Syntax/SyntaxError; if neither rule fires anywhere, every line is
    flagged Semantic (the degraded mode the rules improve on).
    """
    if sub.passed:
        return [
            LineErrorLabel(sub.id, line.index, CLASS_CORRECT) for line in lines
        ]

    health: Dict[Tuple[int, int], bool] = {}
    for logical in lexer.logical_lines(sub.source):
        span = (logical.raw_start, logical.raw_end)
        health[span] = (
            health.get(span, False) or logical.bracket_broken or logical.indent_broken
        )

    labels: List[LineErrorLabel] = []
    for line in lines:
        variant = model.line_variant((sub.id, line.index))
        if variant not in passed_variants:
            labels.append(
                LineErrorLabel(
                    sub.id,
                    line.index,
                    CLASS_SEMANTIC,
                    "LogicalError",
                    "implementation appears only in failing submissions",
                )
            )
        elif health.get(line.raw_span, False):
            labels.append(
                LineErrorLabel(
                    sub.id,
                    line.index,
                    CLASS_SYNTAX,
                    "SyntaxError",
                    "unbalanced brackets or inconsistent indentation",
                )
            )
        else:
            labels.append(LineErrorLabel(sub.id, line.index, CLASS_CORRECT))

    if labels and all(label.cls == CLASS_CORRECT for label in labels):
        labels = [
            LineErrorLabel(
                sub.id,
                label.index,
                CLASS_SEMANTIC,
                "LogicalError",
                "submission fails its tests; no single line implicated",
            )
            for label in labels
        ]
    return labels


# --------------------------------------------------------------------------
# corpus-level orchestration
# --------------------------------------------------------------------------

def label_corpus(
    corpus: Corpus,
    lines_by_sub: Dict[str, List[NormalizedLine]],
    model: ClusterModel,
    cfg: LabelConfig,
    input_example: str = "",
    output_example: str = "",
) -> Tuple[Dict[LineRef, LineErrorLabel], List[LabelerReport]]:
    """Label every line of every submission; returns (labels, reports).

    Labels are keyed by (submission_id, line index). The Correct-on-passed
    invariant is enforced here no matter which labeler produced the labels.
    """
    passed_ids = {sub.id for sub in corpus.submissions if sub.passed}
    passed_variants = variants_with_passed_lines(model, passed_ids)
    backend = (
        ChatBackend(cfg.chat_url, cfg.max_tokens, cfg.max_retries)
        if cfg.chat_url
        else None
    )
    template = load_prompt_template(cfg.prompt_file) if backend else ""

    def run(sub: Submission) -> Tuple[List[LineErrorLabel], LabelerReport]:
        lines = lines_by_sub[sub.id]
        report = LabelerReport(sub.id)
        if backend is None or sub.passed:
            return label_divergence(sub, lines, model, passed_variants), report
        try:
            labels = label_llm(
                sub,
                lines,
                backend,
                template,
                problem=corpus.prompt_text,
                input_example=input_example,
                output_example=output_example,
                report=report,
            )
            return labels, report
        except (RemoteUnavailable, UnparseableResponse) as exc:
            report.parse_status = "fallback"
            report.warnings.append(str(exc))
            return label_divergence(sub, lines, model, passed_variants), report

    results: Dict[str, Tuple[List[LineErrorLabel], LabelerReport]] = {}
    if backend is None:
        for sub in corpus.submissions:
            results[sub.id] = run(sub)
    else:
        with ThreadPoolExecutor(max_workers=cfg.max_concurrency) as pool:
            futures = {sub.id: pool.submit(run, sub) for sub in corpus.submissions}
            for sub_id, future in futures.items():
                results[sub_id] = future.result()

    labels_by_ref: Dict[LineRef, LineErrorLabel] = {}
    reports: List[LabelerReport] = []
    for sub in corpus.submissions:
        labels, report = results[sub.id]
        for label in labels:
            if sub.passed and label.cls != CLASS_CORRECT:
                report.warnings.append(
                    f"line {label.index}: non-Correct label on a passing "
                    "submission overridden"
                )
                label = LineErrorLabel(
                    sub.id, label.index, CLASS_CORRECT, source="override"
                )
            labels_by_ref[(sub.id, label.index)] = label
        reports.append(report)
    return labels_by_ref, reports
