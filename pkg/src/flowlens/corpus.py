"""Corpus ingestion, validation, and anonymization.

The input is UTF-8 line-delimited JSON, one object per submission:
`{"id": str, "source": str, "passed": bool, "meta": {...}?}`. Correctness
verdicts arrive precomputed; this engine never executes student code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, Mapping, Tuple

from . import lexer
from .errors import DuplicateId, EmptyCorpus, MalformedRecord

REDACTED = "⟨redacted⟩"

_REQUIRED_KEYS = {"id": str, "source": str, "passed": bool}
_ALLOWED_KEYS = set(_REQUIRED_KEYS) | {"meta"}


@dataclass(frozen=True)
class Submission:
    id: str
    source: str
    passed: bool
    meta: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Corpus:
    exercise_id: str
    prompt_text: str
    submissions: Tuple[Submission, ...]

    def __len__(self) -> int:
        return len(self.submissions)


def _parse_record(line_no: int, raw: str) -> Submission:
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(line_no, f"invalid JSON ({exc.msg})") from exc
    if not isinstance(data, dict):
        raise MalformedRecord(line_no, "record must be a JSON object")
    unknown = sorted(set(data) - _ALLOWED_KEYS)
    if unknown:
        raise MalformedRecord(line_no, f"unknown key(s): {', '.join(unknown)}")
    for key, typ in _REQUIRED_KEYS.items():
        if key not in data:
            raise MalformedRecord(line_no, f"missing required key {key!r}")
        if not isinstance(data[key], typ):
            raise MalformedRecord(line_no, f"key {key!r} must be {typ.__name__}")
        if typ is not bool and isinstance(data[key], bool):
            raise MalformedRecord(line_no, f"key {key!r} must be {typ.__name__}")
    if not data["source"].strip():
        raise MalformedRecord(line_no, "source is empty after trimming")
    meta = data.get("meta", {})
    if not isinstance(meta, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in meta.items()
    ):
        raise MalformedRecord(line_no, "meta must map strings to strings")
    return Submission(data["id"], data["source"], data["passed"], dict(meta))


def ingest(
    stream: Iterable[str], exercise_id: str = "", prompt_text: str = ""
) -> Corpus:
    """Read submissions in stream order. Blank lines are skipped.

    Raises MalformedRecord, DuplicateId, or EmptyCorpus.
    """
    submissions = []
    seen: Dict[str, int] = {}
    for line_no, raw in enumerate(stream, start=1):
        if not raw.strip():
            continue
        sub = _parse_record(line_no, raw)
        if sub.id in seen:
            raise DuplicateId(sub.id)
        seen[sub.id] = line_no
        submissions.append(sub)
    if not submissions:
        raise EmptyCorpus("input stream contained no submissions")
    return Corpus(exercise_id, prompt_text, tuple(submissions))


def ingest_path(path: str, exercise_id: str = "", prompt_text: str = "") -> Corpus:
    with open(path, "r", encoding="utf-8") as fh:
        return ingest(fh, exercise_id, prompt_text)


# --------------------------------------------------------------------------
# anonymization
# --------------------------------------------------------------------------

def scrub_source(source: str, max_len: int = 8) -> str:
    """Redact comment and string contents longer than max_len characters.

    Line count is preserved (newlines inside triple-quoted strings are kept),
    so raw_span references into the original stay valid against the scrubbed
    copy.
    """
    pieces = []
    pos = 0
    for tok in lexer.scan(source).tokens:
        if tok.kind == "comment":
            content = tok.text[1:]
            if len(content) > max_len:
                pieces.append(source[pos : tok.start])
                pieces.append("#" + REDACTED)
                pos = tok.end
        elif tok.kind == "string":
            prefix, delim, inner, closed = lexer.split_string_lexeme(tok.text)
            if len(inner) > max_len:
                pieces.append(source[pos : tok.start])
                kept_newlines = "\n" * inner.count("\n")
                pieces.append(
                    prefix + delim + REDACTED + kept_newlines + (delim if closed else "")
                )
                pos = tok.end
    pieces.append(source[pos:])
    return "".join(pieces)


def scrub(corpus: Corpus, max_len: int = 8) -> Corpus:
    """Scrubbed copy for export; analysis keeps the originals."""
    return replace(
        corpus,
        submissions=tuple(
            replace(sub, source=scrub_source(sub.source, max_len))
            for sub in corpus.submissions
        ),
    )


def export_jsonl(corpus: Corpus) -> str:
    """Mirror of the input format (callers scrub first for sharing)."""
    lines = []
    for sub in corpus.submissions:
        record: Dict[str, object] = {
            "id": sub.id,
            "source": sub.source,
            "passed": sub.passed,
        }
        if sub.meta:
            record["meta"] = dict(sub.meta)
        lines.append(json.dumps(record, sort_keys=True, ensure_ascii=False))
    return "\n".join(lines) + "\n"
