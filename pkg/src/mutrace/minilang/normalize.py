"""Style normalizer: the style-change detector's core primitive.

Two files are style-equivalent (differ only in comments and whitespace)
exactly when their normalized forms are byte-equal, so normalization
strips comments and re-renders the token stream with single spaces.
"""

from .parser import parse
from .tokens import tokenize


def normalize(file) -> str:
    """Single-space-joined token stream of a parseable file.

    Parsing is required (not just tokenization) so that only well-formed
    files are compared; ParseError propagates.
    """
    parse(file)
    tokens = tokenize(file.text)
    return " ".join(t.text for t in tokens if t.kind != "eof")


def normalize_text(text) -> str:
    from .parser import SourceFile

    return normalize(SourceFile("<memory>", text))
