"""Tokenizer for ``.qaut`` sources."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .diagnostics import Diagnostic, Pos


class Tok(Enum):
    IDENT = "identifier"
    NUMBER = "number"
    IMAG = "imaginary number"
    STRING = "string"
    PUNCT = "punctuation"
    EOF = "end of input"


KEYWORDS = frozenset(
    {"automaton", "machine", "dim", "node", "arc", "op", "K", "initial", "terminal", "init", "snapshots", "prob", "map"}
)

_NUMBER = r"(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?"
_TOKEN_RE = re.compile(
    rf"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<imag>{_NUMBER}i(?![A-Za-z0-9_]))
  | (?P<number>{_NUMBER})
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<punct>->|[{{}}\[\](),:=+\-*/])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: Tok
    text: str
    pos: Pos

    @property
    def value(self) -> str:
        if self.kind is Tok.STRING:
            return re.sub(r"\\(.)", r"\1", self.text[1:-1])
        return self.text

    def is_(self, text: str) -> bool:
        return self.kind in (Tok.PUNCT, Tok.IDENT) and self.text == text

    def describe(self) -> str:
        return "end of input" if self.kind is Tok.EOF else repr(self.text)


def tokenize(text: str) -> tuple[list[Token], list[Diagnostic]]:
    """Split ``text`` into tokens; unknown characters become diagnostics."""
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    line, line_start, i = 1, 0, 0
    n = len(text)
    while i < n:
        m = _TOKEN_RE.match(text, i)
        pos = Pos(line, i - line_start + 1)
        if m is None:
            j = i + 1
            if text[i] == '"':
                j = text.find("\n", i)
                j = n if j < 0 else j
                diags.append(Diagnostic(pos, "unterminated string literal", text[i:j]))
            else:
                diags.append(Diagnostic(pos, f"unexpected character {text[i]!r}", text[i]))
            i = j
            continue
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "imag":
            tokens.append(Token(Tok.IMAG, m.group(), pos))
        elif kind == "number":
            tokens.append(Token(Tok.NUMBER, m.group(), pos))
        elif kind == "ident":
            tokens.append(Token(Tok.IDENT, m.group(), pos))
        elif kind == "string":
            tokens.append(Token(Tok.STRING, m.group(), pos))
        elif kind == "punct":
            tokens.append(Token(Tok.PUNCT, m.group(), pos))
        i = m.end()
    tokens.append(Token(Tok.EOF, "", Pos(line, n - line_start + 1)))
    return tokens, diags
