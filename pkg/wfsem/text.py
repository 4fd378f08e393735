"""
Text helpers shared by the relevance filter and the annotator.

A token is a maximal run of letters and digits; everything else, underscore
included, separates tokens. Tokens are case-folded.
"""

import re
from typing import List, Tuple

_TOKEN = re.compile(r"[^\W_]+")


def tokenize(text: str) -> List[str]:
    """Split text into case-folded alphanumeric tokens."""
    if not text:
        return []
    return _TOKEN.findall(text.casefold())


def term_tokens(term: str) -> Tuple[str, ...]:
    """Tokenize a dictionary/filter term into a hashable token sequence."""
    return tuple(tokenize(term))


def normalize_whitespace(text: str) -> str:
    """Trim and collapse internal whitespace to single spaces."""
    if not text:
        return ""
    return " ".join(text.split())


def find_token_sequence(tokens: List[str], needle: Tuple[str, ...]) -> bool:
    """Return True when needle occurs as consecutive tokens."""
    n = len(needle)
    if n == 0 or n > len(tokens):
        return False
    first = needle[0]
    for i in range(len(tokens) - n + 1):
        if tokens[i] == first and tuple(tokens[i:i + n]) == needle:
            return True
    return False
