"""Tokenizer shared by the .gcl, .csp and .par parsers."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError

KEYWORDS = frozenset({
    "var", "int", "bool", "true", "false",
    "skip", "abort", "fail", "if", "fi", "do", "od",
    "div", "mod", "and", "or", "not", "choice",
    "process", "end", "component", "init", "epilogue",
    "while", "then", "else", "await",
})

# Longest-match first. '[]' is always the box separator: an index or
# initializer list is never empty.
SYMBOLS = (
    ":=", "->", "..", "[]", "<=", ">=", "!=",
    "+", "-", "*", "=", "<", ">", "(", ")", "[", "]",
    ",", ";", ":", "?", "!",
)


@dataclass(frozen=True, slots=True)
class Token:
    kind: str   # 'ident', 'int', 'eof', a keyword, or a symbol
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = word if word in KEYWORDS else "ident"
            toks.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        for sym in SYMBOLS:
            if text.startswith(sym, i):
                toks.append(Token(sym, sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks
