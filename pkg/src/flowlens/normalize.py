"""Line normalization: comments out, spacing canonicalized, identifiers
renamed positionally, output-only statements dropped, logical statements
split one per line.

The output is what every later stage sees; two submissions that differ only
by formatting, comments, prints, or a consistent renaming of user
identifiers normalize to identical line sequences.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

from . import lexer
from .lexer import BUILTINS, Token

INDENT_UNIT = "    "

_OPENERS = frozenset("([{")
_CLOSERS = frozenset(")]}")
_NO_SPACE_BEFORE = frozenset((")", "]", "}", ",", ";"))
_UNARY_CANDIDATES = frozenset(("+", "-", "~", "*", "**"))
_VALUE_KEYWORDS = frozenset(("True", "False", "None"))
_COMPOUND_KEYWORDS = frozenset(
    (
        "if", "elif", "else", "for", "while", "def", "class", "with",
        "try", "except", "finally",
    )
)
_AUG_OPS = frozenset(
    ("+=", "-=", "*=", "/=", "//=", "%=", "**=", ">>=", "<<=", "&=", "|=", "^=", "@=")
)
_KEYWORD_KINDS = frozenset(("for", "while", "if", "elif", "else", "return", "def"))

STATEMENT_KINDS = (
    "assign", "for", "while", "if", "elif", "else", "return", "call",
    "def", "augassign", "other",
)


@dataclass(frozen=True)
class NormalizedLine:
    submission_id: str
    index: int
    text: str
    raw_span: Tuple[int, int]  # (first, last) 0-based physical source lines
    kind: str


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------

def _is_unary_context(prev: Optional[Token]) -> bool:
    if prev is None:
        return True
    if prev.kind == "operator":
        return True
    if prev.text in ("(", "[", "{", ",", ":", ";"):
        return True
    return prev.kind == "keyword" and prev.text not in _VALUE_KEYWORDS


def render(tokens: Sequence[Token]) -> str:
    """Join tokens with canonical single spacing."""
    pieces: List[str] = []
    stack: List[str] = []
    prev: Optional[Token] = None
    glue = True  # no space before the first token
    for tok in tokens:
        text = tok.text
        tight = (
            glue
            or text in _NO_SPACE_BEFORE
            or text in (":", ".")
            or (
                text in ("(", "[")
                and prev is not None
                and (
                    prev.kind in ("identifier", "number", "string")
                    or prev.text in (")", "]", "}")
                )
            )
            or (text == "=" and bool(stack) and stack[-1] == "(")
        )
        if pieces and not tight:
            pieces.append(" ")
        pieces.append(text)
        if text in _OPENERS and tok.kind == "punct":
            stack.append(text)
        elif text in _CLOSERS and tok.kind == "punct" and stack:
            stack.pop()
        glue = (
            text in ("(", "[", "{", ".")
            or (text == ":" and bool(stack) and stack[-1] == "[")
            or (text == "=" and bool(stack) and stack[-1] == "(")
            or (text in _UNARY_CANDIDATES and _is_unary_context(prev))
        )
        prev = tok
    return "".join(pieces)


def _canonical_string(text: str) -> str:
    """Lowercase the prefix, prefer double quotes, escape real newlines."""
    prefix, delim, inner, closed = lexer.split_string_lexeme(text)
    if not delim:
        return text
    if delim[0] == "'" and not any(ch in inner for ch in "'\"\\"):
        delim = '"' * len(delim)
    out = prefix.lower() + delim + inner + (delim if closed else "")
    return out.replace("\r", "").replace("\n", "\\n")


# --------------------------------------------------------------------------
# statement splitting and classification
# --------------------------------------------------------------------------

def _split_statement(tokens: List[Token], depth: int) -> List[Tuple[int, List[Token]]]:
    if not tokens:
        return []
    first = tokens[0]
    if first.kind == "keyword" and first.text in _COMPOUND_KEYWORDS:
        bracket = 0
        for i, tok in enumerate(tokens):
            if tok.text in _OPENERS and tok.kind == "punct":
                bracket += 1
            elif tok.text in _CLOSERS and tok.kind == "punct":
                bracket = max(bracket - 1, 0)
            elif tok.text == ":" and tok.kind == "punct" and bracket == 0:
                tail = tokens[i + 1 :]
                head = [(depth, tokens[: i + 1])]
                return head + _split_statement(tail, depth + 1) if tail else head
    parts: List[List[Token]] = []
    cur: List[Token] = []
    bracket = 0
    for tok in tokens:
        if tok.text in _OPENERS and tok.kind == "punct":
            bracket += 1
        elif tok.text in _CLOSERS and tok.kind == "punct":
            bracket = max(bracket - 1, 0)
        if tok.text == ";" and tok.kind == "punct" and bracket == 0:
            if cur:
                parts.append(cur)
            cur = []
        else:
            cur.append(tok)
    if cur:
        parts.append(cur)
    if not parts:
        return []
    if len(parts) == 1 and len(parts[0]) == len(tokens):
        return [(depth, tokens)]
    out: List[Tuple[int, List[Token]]] = []
    for part in parts:
        out.extend(_split_statement(part, depth))
    return out


def _dotted_callee(tokens: List[Token]) -> Optional[Tuple[str, int]]:
    """Leading name chain + '(' index, when the statement starts with one."""
    if not tokens or tokens[0].kind != "identifier":
        return None
    name = [tokens[0].text]
    i = 1
    while (
        i + 1 < len(tokens)
        and tokens[i].text == "."
        and tokens[i + 1].kind == "identifier"
    ):
        name.append(tokens[i + 1].text)
        i += 2
    if i >= len(tokens) or tokens[i].text != "(":
        return None
    return ".".join(name), i


def _is_whole_call(tokens: List[Token]) -> Optional[str]:
    """Callee name when the entire statement is one call expression."""
    callee = _dotted_callee(tokens)
    if callee is None:
        return None
    name, open_idx = callee
    depth = 0
    for j in range(open_idx, len(tokens)):
        text = tokens[j].text
        if text == "(":
            depth += 1
        elif text == ")":
            depth -= 1
            if depth == 0:
                return name if j == len(tokens) - 1 else None
    return None


def statement_kind_tokens(tokens: List[Token]) -> str:
    if not tokens:
        return "other"
    first = tokens[0]
    if first.kind == "keyword" and first.text in _KEYWORD_KINDS:
        return first.text
    bracket = 0
    for tok in tokens:
        if tok.text in _OPENERS and tok.kind == "punct":
            bracket += 1
        elif tok.text in _CLOSERS and tok.kind == "punct":
            bracket = max(bracket - 1, 0)
        elif bracket == 0 and tok.kind == "operator":
            if tok.text in _AUG_OPS:
                return "augassign"
            if tok.text == "=":
                return "assign"
    if _is_whole_call(tokens):
        return "call"
    return "other"


def statement_kind(line_text: str) -> str:
    """Classify one canonical line (convenience over the token variant)."""
    body = [
        t
        for t in lexer.scan(line_text).tokens
        if t.kind not in ("indent", "ws", "comment", "newline")
    ]
    return statement_kind_tokens(body)


# --------------------------------------------------------------------------
# identifier renaming
# --------------------------------------------------------------------------

def _rename_tokens(
    statements: List[Tuple[int, List[Token], Tuple[int, int]]],
    allowlist: Sequence[str],
) -> List[Tuple[int, List[Token], Tuple[int, int]]]:
    exempt = BUILTINS | set(allowlist)
    mapping: Dict[str, str] = {}
    out = []
    for depth, tokens, span in statements:
        new_tokens: List[Token] = []
        for k, tok in enumerate(tokens):
            if (
                tok.kind == "identifier"
                and tok.text not in exempt
                and not (k > 0 and tokens[k - 1].text == ".")
            ):
                if tok.text not in mapping:
                    mapping[tok.text] = f"v{len(mapping)}"
                new_tokens.append(replace(tok, text=mapping[tok.text]))
            else:
                new_tokens.append(tok)
        out.append((depth, new_tokens, span))
    return out


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def normalize(
    sub,
    allowlist: Sequence[str] = (),
    output_functions: Sequence[str] = ("print",),
) -> List[NormalizedLine]:
    """Apply the full rule chain to one submission.

    `sub` needs `.id` and `.source` (a corpus Submission or anything
    shaped like one). Total: broken sources still come back as best-effort
    normalized lines, never an exception.
    """
    statements: List[Tuple[int, List[Token], Tuple[int, int]]] = []
    for line in lexer.logical_lines(sub.source):
        span = (line.raw_start, line.raw_end)
        for depth, tokens in _split_statement(line.tokens, line.depth):
            statements.append((depth, tokens, span))

    output_names = frozenset(output_functions)
    statements = [
        s for s in statements if _is_whole_call(s[1]) not in output_names
    ]
    statements = _rename_tokens(statements, allowlist)

    out: List[NormalizedLine] = []
    for idx, (depth, tokens, span) in enumerate(statements):
        tokens = [
            replace(t, text=_canonical_string(t.text)) if t.kind == "string" else t
            for t in tokens
        ]
        text = INDENT_UNIT * depth + render(tokens)
        out.append(
            NormalizedLine(sub.id, idx, text, span, statement_kind_tokens(tokens))
        )
    return out
