"""Minimal Java-aware lexer.

Produces a flat token stream good enough to (a) count token frequencies,
(b) find statement terminators that are safe trigger-injection points, and
(c) verify that injected code splices cleanly into the original stream.
No parsing is attempted: generics brackets are plain operators, and the
only structure tracked is parenthesis depth and literal/comment state.

Two deliberate deviations from strict Java lexing:
  * char literals may hold more than one character ('Error' is accepted),
    because dead-code trigger templates use that form;
  * true/false/null are classified as keywords.

Offsets are byte offsets into the UTF-8 encoding of the input, so that
splicing done on encoded bytes and on the decoded string agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator

from .errors import LexError


class TokenKind(Enum):
    IDENTIFIER = "identifier"
    KEYWORD = "keyword"
    NUMBER = "number"
    STRING_LITERAL = "string_literal"
    CHAR_LITERAL = "char_literal"
    OPERATOR = "operator"
    PUNCTUATION = "punctuation"
    COMMENT = "comment"


@dataclass(frozen=True)
class Token:
    text: str
    kind: TokenKind
    byte_offset: int
    line: int


@dataclass(frozen=True)
class InjectionPoint:
    """Position immediately after a top-level ``;`` in the raw bytes."""

    byte_offset: int
    line: int
    paren_depth: int = 0


KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while true false null
    var record yield""".split()
)

# Longest-match operator table; order within a length class does not matter.
_OPERATORS = sorted(
    [
        ">>>=", ">>>", ">>=", "<<=", "->", "::", "++", "--", "+=", "-=", "*=",
        "/=", "&=", "|=", "^=", "%=", "==", "!=", "<=", ">=", "&&", "||",
        "<<", ">>", "+", "-", "*", "/", "%", "=", "<", ">", "!", "~", "&",
        "|", "^", "?", ":",
    ],
    key=len,
    reverse=True,
)

_PUNCTUATION = frozenset("(){}[];,.@")
_WHITESPACE = frozenset(" \t\r\n\f\x0b")
_HEX_DIGITS = frozenset("0123456789abcdefABCDEF_")
_ID_START = frozenset("_$")
_NUMBER_SUFFIX = frozenset("lLfFdD")


def _byte_len(segment: str) -> int:
    return len(segment.encode("utf-8"))


def lex(code: str) -> list[Token]:
    """Tokenize Java source; raises LexError on unterminated literals/comments.

    Concatenating token texts with the skipped gaps reconstructs the input
    exactly, and every gap is pure whitespace.
    """
    tokens: list[Token] = []
    i = 0
    byte_off = 0
    line = 1
    n = len(code)
    ascii_only = code.isascii()

    def blen(segment: str) -> int:
        return len(segment) if ascii_only else _byte_len(segment)

    def emit(text: str, kind: TokenKind, start_byte: int, start_line: int) -> None:
        tokens.append(Token(text, kind, start_byte, start_line))

    while i < n:
        ch = code[i]

        if ch in _WHITESPACE:
            if ch == "\n":
                line += 1
            i += 1
            byte_off += 1  # all whitespace chars are 1 byte in UTF-8
            continue

        start, start_byte, start_line = i, byte_off, line

        if ch == "/" and i + 1 < n and code[i + 1] == "/":
            end = code.find("\n", i)
            if end == -1:
                end = n
            text = code[start:end]
            emit(text, TokenKind.COMMENT, start_byte, start_line)
            i = end
            byte_off += blen(text)
            continue

        if ch == "/" and i + 1 < n and code[i + 1] == "*":
            end = code.find("*/", i + 2)
            if end == -1:
                raise LexError("unterminated block comment", start_byte, start_line)
            text = code[start : end + 2]
            emit(text, TokenKind.COMMENT, start_byte, start_line)
            line += text.count("\n")
            i = end + 2
            byte_off += blen(text)
            continue

        if ch == '"' or ch == "'":
            quote = ch
            j = i + 1
            while j < n:
                cj = code[j]
                if cj == "\\":
                    j += 2
                    continue
                if cj == quote:
                    break
                if cj == "\n":
                    raise LexError(
                        f"unterminated {'string' if quote == chr(34) else 'char'} literal",
                        start_byte,
                        start_line,
                    )
                j += 1
            if j >= n:
                raise LexError(
                    f"unterminated {'string' if quote == chr(34) else 'char'} literal",
                    start_byte,
                    start_line,
                )
            text = code[start : j + 1]
            kind = TokenKind.STRING_LITERAL if quote == '"' else TokenKind.CHAR_LITERAL
            emit(text, kind, start_byte, start_line)
            i = j + 1
            byte_off += blen(text)
            continue

        if ch.isdigit() or (ch == "." and i + 1 < n and code[i + 1].isdigit()):
            i2 = _scan_number(code, i)
            text = code[start:i2]
            emit(text, TokenKind.NUMBER, start_byte, start_line)
            i = i2
            byte_off += blen(text)
            continue

        if ch.isalpha() or ch in _ID_START:
            j = i + 1
            while j < n and (code[j].isalnum() or code[j] in _ID_START):
                j += 1
            text = code[start:j]
            kind = TokenKind.KEYWORD if text in KEYWORDS else TokenKind.IDENTIFIER
            emit(text, kind, start_byte, start_line)
            i = j
            byte_off += blen(text)
            continue

        if ch in _PUNCTUATION:
            # '...' is one separator; plain '.' handled by the same branch
            if ch == "." and code.startswith("...", i):
                text = "..."
            else:
                text = ch
            emit(text, TokenKind.PUNCTUATION, start_byte, start_line)
            i += len(text)
            byte_off += len(text)
            continue

        for op in _OPERATORS:
            if code.startswith(op, i):
                emit(op, TokenKind.OPERATOR, start_byte, start_line)
                i += len(op)
                byte_off += len(op)
                break
        else:
            raise LexError(f"unexpected character {ch!r}", start_byte, start_line)

    return tokens


def _scan_number(code: str, i: int) -> int:
    """Return the end index of the numeric literal starting at i (lenient)."""
    n = len(code)
    j = i
    if code[j] == "0" and j + 1 < n and code[j + 1] in "xX":
        j += 2
        while j < n and code[j] in _HEX_DIGITS:
            j += 1
        if j < n and code[j] in "lL":
            j += 1
        return j
    if code[j] == "0" and j + 1 < n and code[j + 1] in "bB":
        j += 2
        while j < n and code[j] in "01_":
            j += 1
        if j < n and code[j] in "lL":
            j += 1
        return j

    def digits(k: int) -> int:
        while k < n and (code[k].isdigit() or code[k] == "_"):
            k += 1
        return k

    j = digits(j)
    if j < n and code[j] == "." and (j + 1 < n and code[j + 1].isdigit()):
        j = digits(j + 1)
    if j < n and code[j] in "eE":
        k = j + 1
        if k < n and code[k] in "+-":
            k += 1
        if k < n and code[k].isdigit():
            j = digits(k)
    if j < n and code[j] in _NUMBER_SUFFIX:
        j += 1
    return j


def iter_gaps(code: str, tokens: list[Token]) -> Iterator[bytes]:
    """Yield the raw byte gaps between consecutive tokens (and the ends)."""
    raw = code.encode("utf-8")
    prev_end = 0
    for tok in tokens:
        yield raw[prev_end : tok.byte_offset]
        prev_end = tok.byte_offset + len(tok.text.encode("utf-8"))
    yield raw[prev_end:]


def reconstruct(code: str, tokens: list[Token]) -> bytes:
    """Token texts re-joined with their original whitespace gaps."""
    raw = code.encode("utf-8")
    out = bytearray()
    prev_end = 0
    for tok in tokens:
        out += raw[prev_end : tok.byte_offset]
        tok_bytes = tok.text.encode("utf-8")
        out += tok_bytes
        prev_end = tok.byte_offset + len(tok_bytes)
    out += raw[prev_end:]
    return bytes(out)


def injection_points(code: str) -> list[InjectionPoint]:
    """All positions immediately after a top-level ``;``, in source order.

    Top-level means parenthesis depth zero, so the two terminators inside a
    ``for (...)`` header are never offered: injecting a statement there would
    break the header. Literal and comment interiors are excluded by lexing.
    """
    points: list[InjectionPoint] = []
    depth = 0
    for tok in lex(code):
        if tok.kind is TokenKind.PUNCTUATION:
            if tok.text == "(":
                depth += 1
            elif tok.text == ")":
                depth = max(0, depth - 1)
            elif tok.text == ";" and depth == 0:
                points.append(InjectionPoint(tok.byte_offset + 1, tok.line))
    return points
