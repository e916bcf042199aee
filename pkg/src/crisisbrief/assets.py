"""Loaders for packaged data assets: stop words, prompts, lexicons."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources


def _data_root():
    return resources.files("crisisbrief") / "data"


@lru_cache(maxsize=1)
def load_stopwords() -> frozenset[str]:
    text = (_data_root() / "stopwords_en.txt").read_text(encoding="utf-8")
    return frozenset(word.strip() for word in text.splitlines() if word.strip())


@lru_cache(maxsize=None)
def load_prompt(name: str) -> str:
    """Versioned prompt template by file stem, e.g. ``topics_basic``."""
    return (_data_root() / "prompts" / f"{name}.txt").read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def load_lexicon(name: str) -> dict[str, list[str]]:
    return json.loads((_data_root() / "lexicons" / f"{name}.json").read_text(encoding="utf-8"))
