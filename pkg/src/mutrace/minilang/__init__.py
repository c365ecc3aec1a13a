"""MiniLang: the small imperative language the pipeline operates on.

Functions with typed parameters (int/bool/unit), let/assign/compound
assignment, if/else, while, return; int and bool expressions with calls,
comparisons, arithmetic, and short-circuit logic. Files use UTF-8 text
with the ``.ml`` extension inside history bundles.
"""

from .ast import (
    KINDS,
    STATEMENT_KINDS,
    AstNode,
    FnInfo,
    Program,
    span_text,
    structurally_equal,
    subtree_ids,
)
from .normalize import normalize, normalize_text
from .parser import SourceFile, parse, parse_text
from .printer import print_program
from .tokens import Token, tokenize

__all__ = [
    "KINDS",
    "STATEMENT_KINDS",
    "AstNode",
    "FnInfo",
    "Program",
    "SourceFile",
    "Token",
    "normalize",
    "normalize_text",
    "parse",
    "parse_text",
    "print_program",
    "span_text",
    "structurally_equal",
    "subtree_ids",
    "tokenize",
]
