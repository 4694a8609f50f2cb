"""Tokenizer for the contract subset."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import LexError

KEYWORDS = {
    "contract", "function", "require", "if", "else", "while", "for",
    "return", "returns", "true", "false",
    "public", "private", "internal", "external", "view", "pure", "payable",
}

# longest first so that "<=" wins over "<"
PUNCT = [
    ("&&", "AndAnd"), ("||", "OrOr"), ("==", "EqEq"), ("!=", "Ne"),
    ("<=", "Le"), (">=", "Ge"), ("++", "PlusPlus"), ("--", "MinusMinus"),
    ("+=", "PlusAssign"), ("-=", "MinusAssign"), ("*=", "StarAssign"),
    ("/=", "SlashAssign"), ("%=", "PercentAssign"),
    ("(", "LParen"), (")", "RParen"), ("{", "LBrace"), ("}", "RBrace"),
    (";", "Semi"), (",", "Comma"), ("+", "Plus"), ("-", "Minus"),
    ("*", "Star"), ("/", "Slash"), ("%", "Percent"), ("<", "Lt"),
    (">", "Gt"), ("!", "Bang"), ("=", "Assign"),
]

_TYPE_RE = re.compile(r"(u?int)(\d*)\Z")


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    line: int
    col: int

    def __repr__(self) -> str:
        if self.kind in ("Kw", "Ident", "Lit"):
            return f"{self.kind}({self.value})"
        return self.kind


def type_keyword_width(word: str, narrow_widths: bool = False) -> int | None:
    """Width in bits if `word` names an integer type, else None.

    Bare ``uint``/``int`` alias the 256-bit types. With ``narrow_widths`` any
    width in 1..256 is accepted (used for exhaustively enumerable variants).
    """
    m = _TYPE_RE.match(word)
    if not m:
        return None
    if not m.group(2):
        return 256
    if m.group(2).startswith("0"):
        return None
    width = int(m.group(2))
    if not 1 <= width <= 256:
        return None
    if not narrow_widths and width % 8:
        return None
    return width


def tokenize(source: str, narrow_widths: bool = False) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)

    def advance(count: int) -> None:
        nonlocal i, line, col
        for ch in source[i:i + count]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        i += count

    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            advance(1)
        elif source.startswith("//", i):
            end = source.find("\n", i)
            advance((n if end < 0 else end) - i)
        elif source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end < 0:
                raise LexError("unterminated block comment", line, col)
            advance(end + 2 - i)
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            if word == "pragma":
                # version pragmas are ignored wholesale
                end = source.find(";", j)
                if end < 0:
                    raise LexError("unterminated pragma", line, col)
                advance(end + 1 - i)
                continue
            if word in KEYWORDS or type_keyword_width(word, narrow_widths):
                tokens.append(Token("Kw", word, line, col))
            else:
                tokens.append(Token("Ident", word, line, col))
            advance(j - i)
        elif ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and (source[j].isalpha() or source[j] == "_"):
                raise LexError(f"malformed number literal {source[i:j + 1]!r}", line, col)
            tokens.append(Token("Lit", source[i:j], line, col))
            advance(j - i)
        else:
            for text, kind in PUNCT:
                if source.startswith(text, i):
                    tokens.append(Token(kind, text, line, col))
                    advance(len(text))
                    break
            else:
                raise LexError(f"illegal character {ch!r}", line, col)
    tokens.append(Token("EOF", "", line, col))
    return tokens
