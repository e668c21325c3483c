"""Lexer for the supported Java subset.

Produces a flat token stream; entity bodies are turned into token multisets
by dropping comments, whitespace and structural punctuation.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, NamedTuple

IDENT = "ident"
KEYWORD = "keyword"
LITERAL = "literal"
OPERATOR = "op"
PUNCT = "punct"

KEYWORDS = frozenset(
    """
    abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while
    """.split()
)
LITERAL_WORDS = frozenset({"true", "false", "null"})
# var, yield, record, sealed and permits are contextual: they lex as identifiers.
PRIMITIVES = frozenset({"boolean", "byte", "char", "double", "float", "int", "long", "short"})

# Excluded from multisets; still needed by the parser to find structure.
STRUCTURAL = frozenset("{}();,.")

_OPERATORS = [
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||",
    "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "<<", ">>",
]
_SINGLE = "{}()[];,.@=<>!~?:+-*/&|^%"

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*|/\*.*?(?:\*/|\Z))
  | (?P<text>\"\"\".*?(?:\"\"\"|\Z))
  | (?P<string>"(?:\\.|[^"\\\n])*")
  | (?P<char>'(?:\\.|[^'\\\n])+')
  | (?P<number>
        0[xX][0-9a-fA-F_]+[lL]?
      | 0[bB][01_]+[lL]?
      | (?:\d[\d_]*(?:\.[\d_]*)?|\.\d[\d_]*)(?:[eE][+-]?\d+)?[fFdDlL]?
    )
  | (?P<word>(?:[^\W\d]|\$)[\w$]*)
  | (?P<op>"""
    + "|".join(re.escape(op) for op in _OPERATORS)
    + "|"
    + "|".join(re.escape(c) for c in _SINGLE)
    + r""")
    """,
    re.VERBOSE | re.DOTALL,
)


class Token(NamedTuple):
    text: str
    kind: str
    line: int


@dataclass
class LexResult:
    tokens: list[Token]
    skipped: int = 0


def lex(text: str) -> LexResult:
    """Split source text into tokens, skipping comments and whitespace.

    Characters that match no token class are dropped and counted in
    ``skipped``.
    """
    tokens: list[Token] = []
    skipped = 0
    pos = 0
    line = 1
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos] == "\n":
                line += 1
            skipped += 1
            pos += 1
            continue
        kind = m.lastgroup
        value = m.group()
        if kind in ("ws", "comment"):
            pass
        elif kind == "word":
            if value in LITERAL_WORDS:
                tokens.append(Token(value, LITERAL, line))
            elif value in KEYWORDS:
                tokens.append(Token(value, KEYWORD, line))
            else:
                tokens.append(Token(value, IDENT, line))
        elif kind in ("text", "string", "char", "number"):
            tokens.append(Token(value, LITERAL, line))
        else:
            tokens.append(Token(value, PUNCT if value in STRUCTURAL else OPERATOR, line))
        line += value.count("\n")
        pos = m.end()
    return LexResult(tokens, skipped)


class TokenMultiset(Counter):
    """Bag of token strings; absent tokens have multiplicity 0."""

    @property
    def size(self) -> int:
        return sum(self.values())

    def __add__(self, other):
        out = TokenMultiset(self)
        out.update(other)
        return out

    def __repr__(self):
        items = ", ".join(f"{k!r}: {v}" for k, v in sorted(self.items()))
        return f"TokenMultiset({{{items}}})"


def multiset_of(tokens: Iterable[Token]) -> TokenMultiset:
    return TokenMultiset(t.text for t in tokens if t.kind != PUNCT)


def tokenize_body(body_text: str, diagnostics: Counter | None = None) -> TokenMultiset:
    """Return the token multiset of an entity body.

    Identifiers, keywords, literals and operators are kept; comments,
    whitespace and ``{ } ( ) ; , .`` are not.
    """
    result = lex(body_text)
    if diagnostics is not None and result.skipped:
        diagnostics["unlexable"] += result.skipped
    return multiset_of(result.tokens)
