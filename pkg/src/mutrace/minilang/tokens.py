"""Tokenizer for MiniLang source text.

Comments (``//`` line and ``/* */`` block, non-nesting) are dropped here;
everything downstream sees only real tokens with 1-based positions.
"""

from dataclasses import dataclass

from ..errors import ParseError

KEYWORDS = frozenset(
    ["fn", "let", "if", "else", "while", "return", "true", "false",
     "int", "bool", "unit"]
)

# Longest operators first so the scanner is greedy.
OPERATORS = [
    "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "->",
    "<", ">", "+", "-", "*", "/", "%", "!", "=",
    "(", ")", "{", "}", ",", ":", ";",
]


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "int", "kw", "op", "eof"
    text: str
    line: int
    col: int

    @property
    def end_col(self):
        """Column just past the last character (1-based, exclusive)."""
        return self.col + len(self.text)


def _is_ident_start(c):
    return c.isalpha() or c == "_"


def _is_ident_part(c):
    return c.isalnum() or c == "_"


def tokenize(text):
    """Return the token list for ``text``, ending with a single eof token.

    Raises ParseError on characters outside the language or an unterminated
    block comment; never raises anything else, whatever the input bytes.
    """
    tokens = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def advance(k):
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = text[i]
        if c in " \t\r\n":
            advance(1)
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                advance(1)
            continue
        if text.startswith("/*", i):
            start_line, start_col = line, col
            advance(2)
            while i < n and not text.startswith("*/", i):
                advance(1)
            if i >= n:
                raise ParseError("unterminated block comment", start_line, start_col)
            advance(2)
            continue
        if _is_ident_start(c):
            start = i
            start_line, start_col = line, col
            while i < n and _is_ident_part(text[i]):
                advance(1)
            word = text[start:i]
            kind = "kw" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, start_line, start_col))
            continue
        if c.isdigit():
            start = i
            start_line, start_col = line, col
            while i < n and text[i].isdigit():
                advance(1)
            lit = text[start:i]
            if int(lit) > 2**63 - 1:
                raise ParseError("integer literal out of range", start_line, start_col)
            tokens.append(Token("int", lit, start_line, start_col))
            continue
        for op in OPERATORS:
            if text.startswith(op, i):
                tokens.append(Token("op", op, line, col))
                advance(len(op))
                break
        else:
            raise ParseError("unexpected character %r" % c, line, col)

    tokens.append(Token("eof", "", line, col))
    return tokens
