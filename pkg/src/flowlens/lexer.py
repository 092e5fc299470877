"""Error-tolerant lexer for submission sources.

The corpus is Python, but the lexer never fails: unterminated strings run to
the end of line (or file, for triple quotes), unknown characters become punct
tokens, and broken bracket nesting is recovered at the next statement keyword.
Downstream stages only need token streams and logical-line structure, not an
AST.

Keyword and builtin vocabularies are frozen tuples rather than introspected
from the interpreter so that normalization output does not drift across
Python versions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

# --------------------------------------------------------------------------
# vocabulary
# --------------------------------------------------------------------------

KEYWORDS = frozenset(
    (
        "False", "None", "True", "and", "as", "assert", "async", "await",
        "break", "class", "continue", "def", "del", "elif", "else", "except",
        "finally", "for", "from", "global", "if", "import", "in", "is",
        "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try",
        "while", "with", "yield",
    )
)

BUILTINS = frozenset(
    (
        "abs", "all", "any", "ascii", "bin", "bool", "bytearray", "bytes",
        "callable", "chr", "classmethod", "complex", "delattr", "dict",
        "dir", "divmod", "enumerate", "eval", "exec", "filter", "float",
        "format", "frozenset", "getattr", "globals", "hasattr", "hash",
        "help", "hex", "id", "input", "int", "isinstance", "issubclass",
        "iter", "len", "list", "locals", "map", "max", "memoryview", "min",
        "next", "object", "oct", "open", "ord", "pow", "print", "property",
        "range", "repr", "reversed", "round", "set", "setattr", "slice",
        "sorted", "staticmethod", "str", "sum", "super", "tuple", "type",
        "vars", "zip",
        # exception names students reference in except clauses
        "ArithmeticError", "AssertionError", "AttributeError",
        "BaseException", "Exception", "FileNotFoundError", "FloatingPointError",
        "ImportError", "IndentationError", "IndexError", "KeyError",
        "KeyboardInterrupt", "LookupError", "MemoryError", "NameError",
        "NotImplementedError", "OSError", "OverflowError", "RecursionError",
        "ReferenceError", "RuntimeError", "StopIteration", "SyntaxError",
        "SystemError", "SystemExit", "TabError", "TypeError",
        "UnboundLocalError", "UnicodeDecodeError", "UnicodeEncodeError",
        "UnicodeError", "ValueError", "ZeroDivisionError",
    )
)

# Keywords that can only begin a statement, never continue a bracketed
# expression. Seeing one at the start of a physical line while brackets are
# still open means the brackets are broken; we recover by force-closing the
# logical line. (for/if/else are excluded: comprehensions and ternaries put
# them inside brackets legitimately.)
_RECOVERY_KEYWORDS = frozenset(
    (
        "assert", "break", "class", "continue", "def", "del", "elif",
        "except", "finally", "from", "global", "import", "nonlocal", "pass",
        "raise", "return", "try", "while", "with",
    )
)

_STRING_PREFIXES = frozenset(
    ("r", "b", "u", "f", "rb", "br", "fr", "rf", "bb", "rr")
)

_OPS3 = ("**=", "//=", ">>=", "<<=")
_OPS2 = (
    "->", ":=", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=",
    "@=", "&=", "|=", "^=", "**", "//", "<<", ">>",
)
_OPS1 = "+-*/%@<>&|^~="

_OPENERS = "([{"
_CLOSERS = ")]}"
_MATCHING = {")": "(", "]": "[", "}": "{"}

TAB_WIDTH = 4


# --------------------------------------------------------------------------
# token stream
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # identifier|keyword|number|string|operator|punct|indent|newline
    text: str
    start: int = 0  # offset into the source
    end: int = 0
    line: int = 0  # 0-based physical line where the token starts

    # comment/ws kinds exist only in the raw scan; they never survive into
    # normalized lines.


@dataclass
class ScanResult:
    tokens: List[Token]
    unterminated_string: bool = False


def _is_ident_start(ch: str) -> bool:
    return ch == "_" or ch.isalpha()


def _is_ident_part(ch: str) -> bool:
    return ch == "_" or ch.isalnum()


def scan(source: str) -> ScanResult:
    """Tokenize the full source, preserving comments and whitespace runs."""
    tokens: List[Token] = []
    unterminated = False
    i = 0
    n = len(source)
    line = 0
    at_line_start = True

    def emit(kind: str, start: int, end: int, tok_line: int) -> None:
        tokens.append(Token(kind, source[start:end], start, end, tok_line))

    while i < n:
        ch = source[i]

        if ch == "\r":
            i += 1
            continue

        if ch == "\n":
            emit("newline", i, i + 1, line)
            line += 1
            i += 1
            at_line_start = True
            continue

        if ch in " \t":
            start = i
            while i < n and source[i] in " \t":
                i += 1
            emit("indent" if at_line_start else "ws", start, i, line)
            at_line_start = False
            continue

        at_line_start = False

        if ch == "#":
            start = i
            while i < n and source[i] != "\n":
                i += 1
            emit("comment", start, i, line)
            continue

        if ch == "\\":
            if i + 1 < n and source[i + 1] == "\n":
                # explicit continuation: swallow both, keep joining
                line += 1
                i += 2
                continue
            if i + 1 == n:
                i += 1
                continue
            emit("punct", i, i + 1, line)
            i += 1
            continue

        if _is_ident_start(ch):
            start = i
            while i < n and _is_ident_part(source[i]):
                i += 1
            text = source[start:i]
            if (
                i < n
                and source[i] in "'\""
                and text.lower() in _STRING_PREFIXES
            ):
                i, nl_count, ok = _scan_string(source, i)
                emit("string", start, i, line)
                line += nl_count
                unterminated = unterminated or not ok
            else:
                kind = "keyword" if text in KEYWORDS else "identifier"
                emit(kind, start, i, line)
            continue

        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            start = i
            i += 1
            while i < n:
                c = source[i]
                if _is_ident_part(c) or c == ".":
                    i += 1
                elif c in "+-" and source[i - 1] in "eE" and not source[
                    start:i
                ].lower().startswith("0x"):
                    i += 1
                else:
                    break
            emit("number", start, i, line)
            continue

        if ch in "'\"":
            start = i
            i, nl_count, ok = _scan_string(source, i)
            emit("string", start, i, line)
            line += nl_count
            unterminated = unterminated or not ok
            continue

        if source[i : i + 3] in _OPS3:
            emit("operator", i, i + 3, line)
            i += 3
            continue
        if source[i : i + 2] in _OPS2:
            emit("operator", i, i + 2, line)
            i += 2
            continue
        if ch in _OPS1:
            emit("operator", i, i + 1, line)
            i += 1
            continue

        # listed punctuation and anything unrecognized both land here
        emit("punct", i, i + 1, line)
        i += 1

    return ScanResult(tokens, unterminated)


def split_string_lexeme(text: str) -> Tuple[str, str, str, bool]:
    """Decompose a string token into (prefix, delim, inner, closed)."""
    i = 0
    while i < len(text) and text[i] not in "'\"":
        i += 1
    prefix, rest = text[:i], text[i:]
    if not rest:
        return text, "", "", False
    delim_len = 3 if rest[:3] in ("'''", '"""') else 1
    delim = rest[:delim_len]
    closed = len(rest) >= 2 * delim_len and rest.endswith(delim)
    inner = rest[delim_len:-delim_len] if closed else rest[delim_len:]
    return prefix, delim, inner, closed


def _scan_string(source: str, quote_pos: int) -> Tuple[int, int, bool]:
    """Consume a string starting at its quote. Returns (end, newlines, ok)."""
    n = len(source)
    quote = source[quote_pos]
    triple = source[quote_pos : quote_pos + 3] == quote * 3
    delim = quote * 3 if triple else quote
    i = quote_pos + len(delim)
    newlines = 0
    while i < n:
        ch = source[i]
        if ch == "\\" and i + 1 < n:
            if source[i + 1] == "\n":
                newlines += 1
            i += 2
            continue
        if ch == "\n":
            if not triple:
                return i, newlines, False  # unterminated: stop at line end
            newlines += 1
            i += 1
            continue
        if source[i : i + len(delim)] == delim:
            return i + len(delim), newlines, True
        i += 1
    return n, newlines, False


# --------------------------------------------------------------------------
# logical lines
# --------------------------------------------------------------------------

@dataclass
class LogicalLine:
    """One logical statement line: joined continuations, no comments."""

    depth: int
    tokens: List[Token] = field(default_factory=list)
    raw_start: int = 0
    raw_end: int = 0
    bracket_broken: bool = False  # mismatched/unclosed bracket or string
    indent_broken: bool = False  # dedent to a level never opened


def _indent_width(text: str) -> int:
    width = 0
    for ch in text:
        if ch == "\t":
            width += TAB_WIDTH - (width % TAB_WIDTH)
        else:
            width += 1
    return width


def logical_lines(source: str) -> List[LogicalLine]:
    lines, _consistent = _logical_lines_checked(source)
    return lines


def _logical_lines_checked(source: str) -> Tuple[List[LogicalLine], bool]:
    """Group the token stream into logical lines and resolve indent depths."""
    result = scan(source)
    tokens = result.tokens

    # (width, body, start, end, bracket_broken)
    raw: List[Tuple[int, List[Token], int, int, bool]] = []
    body: List[Token] = []
    openers: List[str] = []
    broken = False
    pending_width = 0
    line_width = 0
    raw_start: Optional[int] = None
    last_line = 0

    def finalize(end_line: int) -> None:
        nonlocal body, raw_start, openers, broken
        if body:
            raw.append(
                (line_width, body, raw_start or 0, end_line, broken or bool(openers))
            )
        body = []
        raw_start = None
        openers = []
        broken = False

    for pos, tok in enumerate(tokens):
        last_line = tok.line
        if tok.kind == "newline":
            if not openers or _recovery_ahead(tokens, pos):
                finalize(tok.line)
            pending_width = 0
            continue
        if tok.kind == "indent":
            if raw_start is None:
                pending_width = _indent_width(tok.text)
            continue
        if tok.kind in ("ws", "comment"):
            continue

        if raw_start is None:
            raw_start = tok.line
            line_width = pending_width
        body.append(tok)
        if tok.kind == "punct":
            if tok.text in _OPENERS:
                openers.append(tok.text)
            elif tok.text in _CLOSERS:
                if not openers or openers[-1] != _MATCHING[tok.text]:
                    broken = True
                    if openers:
                        openers.pop()
                else:
                    openers.pop()
        elif tok.kind == "string" and not split_string_lexeme(tok.text)[3]:
            broken = True
        last_line = max(last_line, tok.line + tok.text.count("\n"))

    finalize(last_line)

    # tolerant INDENT/DEDENT: widths map to depths through a stack
    out: List[LogicalLine] = []
    stack = [0]
    consistent = True
    for width, toks, start, end, bracket_broken in raw:
        indent_broken = False
        if width > stack[-1]:
            stack.append(width)
        else:
            while stack[-1] > width:
                stack.pop()
            if stack[-1] != width:
                consistent = False
                indent_broken = True
                stack.append(width)
        out.append(
            LogicalLine(
                len(stack) - 1, toks, start, end, bracket_broken, indent_broken
            )
        )
    return out, consistent


def _recovery_ahead(tokens: List[Token], newline_pos: int) -> bool:
    """True when the next physical line begins with a statement keyword."""
    for tok in tokens[newline_pos + 1 :]:
        if tok.kind in ("indent", "ws", "comment"):
            continue
        return tok.kind == "keyword" and tok.text in _RECOVERY_KEYWORDS
    return False


# --------------------------------------------------------------------------
# source health checks (used by the divergence labeler)
# --------------------------------------------------------------------------

def brackets_balanced(source: str) -> bool:
    """True when brackets nest properly and every string terminates."""
    result = scan(source)
    if result.unterminated_string:
        return False
    stack: List[str] = []
    for tok in result.tokens:
        if tok.kind != "punct":
            continue
        if tok.text in _OPENERS:
            stack.append(tok.text)
        elif tok.text in _CLOSERS:
            if not stack or stack.pop() != _MATCHING[tok.text]:
                return False
    return not stack


def indentation_consistent(source: str) -> bool:
    """True when every dedent returns to an indentation level seen before."""
    _lines, consistent = _logical_lines_checked(source)
    return consistent
