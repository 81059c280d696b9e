"""Transcript preprocessing applied while preparing training data."""

from __future__ import annotations

from typing import NamedTuple

from .vocab import MERGED_LANGUAGE_CODES

LOWERCASED_SOURCES = frozenset({"ami", "voxforge"})
EXCLUDED_SOURCES = frozenset({"wsj"})


class _Excluded:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "EXCLUDED"

    def __bool__(self) -> bool:
        return False


EXCLUDED = _Excluded()


class NormalizedText(NamedTuple):
    text: str
    lang: str


def normalize_text(text: str, source_tag: str, lang: str):
    """Apply the corpus-specific transcript rules.

    Returns ``EXCLUDED`` for corpora dropped from training, otherwise a
    ``NormalizedText``. Only the uppercase-transcript corpora are lowercased
    and only merged language codes are rewritten; everything else passes
    through untouched.
    """
    tag = source_tag.lower()
    if tag in EXCLUDED_SOURCES:
        return EXCLUDED
    if tag in LOWERCASED_SOURCES:
        text = text.lower()
    return NormalizedText(text, MERGED_LANGUAGE_CODES.get(lang, lang))
