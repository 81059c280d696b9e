from __future__ import annotations

import unicodedata

NORMALIZER_NAME = "basic"


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def basic_normalize(text: str) -> str:
    """Lowercase, drop punctuation (keeping apostrophes inside words), collapse spaces."""
    text = text.lower()
    out = []
    for i, ch in enumerate(text):
        if ch == "'" and 0 < i < len(text) - 1 and text[i - 1].isalnum() and text[i + 1].isalnum():
            out.append(ch)
        elif _is_punct(ch):
            out.append(" ")
        else:
            out.append(ch)
    return " ".join("".join(out).split())
