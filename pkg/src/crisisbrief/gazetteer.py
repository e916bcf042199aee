"""Place-name matching and hierarchical location resolution.

The gazetteer is a local JSON-lines file, one place per line:
``{"name": ..., "kind": venue|street|district|city|region|country,
"parents": [name, ...]}`` with parents ordered specific to general.
Resolution never speculates: a parent name without its own entry is
omitted, yielding a partial chain instead of an invented full one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .corpus import Post
from .errors import SchemaError
from .schemas import LocationMention

PLACE_KINDS = ("venue", "street", "district", "city", "region", "country")
_KIND_ORDER = {kind: i for i, kind in enumerate(PLACE_KINDS)}


@dataclass(frozen=True)
class Place:
    name: str
    kind: str
    parents: tuple[str, ...] = ()


def _span_tokens(text: str) -> list[tuple[str, int, int]]:
    """Lowercased tokens with original spans; camel-case runs are split so
    hashtag compounds like ItalyEarthquake expose their place words."""
    tokens = []
    start = None
    prev = ""
    for i, ch in enumerate(text):
        if ch.isalnum():
            if start is None:
                start = i
            elif prev.islower() and ch.isupper():
                tokens.append((text[start:i].lower(), start, i))
                start = i
        elif start is not None:
            tokens.append((text[start:i].lower(), start, i))
            start = None
        prev = ch
    if start is not None:
        tokens.append((text[start:].lower(), start, len(text)))
    return tokens


class Gazetteer:
    """Index of places searchable by surface form."""

    def __init__(self, places: Iterable[Place]):
        self.places = list(places)
        self._by_name: dict[str, list[Place]] = {}
        self._by_first_token: dict[str, list[tuple[tuple[str, ...], Place]]] = {}
        for place in self.places:
            name_tokens = tuple(tok for tok, _, _ in _span_tokens(place.name))
            if not name_tokens:
                raise SchemaError(f"gazetteer place {place.name!r} has no matchable tokens")
            self._by_name.setdefault(place.name.lower(), []).append(place)
            self._by_first_token.setdefault(name_tokens[0], []).append((name_tokens, place))
        for candidates in self._by_first_token.values():
            candidates.sort(key=lambda item: -len(item[0]))

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "Gazetteer":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def from_text(cls, text: str) -> "Gazetteer":
        places = []
        for line_no, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"gazetteer line {line_no}: malformed JSON ({exc.msg})") from exc
            try:
                places.append(Place(record["name"], record["kind"], tuple(record.get("parents", ()))))
            except KeyError as exc:
                raise SchemaError(f"gazetteer line {line_no}: missing field {exc}") from exc
        return cls(places)

    def lookup(self, name: str) -> Optional[Place]:
        entries = self._by_name.get(name.lower())
        return entries[0] if entries else None

    def candidates_for(self, token: str) -> list[tuple[tuple[str, ...], Place]]:
        return self._by_first_token.get(token, [])

    def resolve_chain(self, place: Place) -> tuple[tuple[str, str], ...]:
        """Components (kind, name) ordered most-specific to least-specific."""
        components: list[tuple[str, str]] = []
        seen = set()

        def add(p: Place) -> None:
            key = (p.kind, p.name.lower())
            if key in seen or p.kind not in _KIND_ORDER:
                return
            seen.add(key)
            components.append((p.kind, p.name))

        add(place)
        frontier = list(place.parents)
        while frontier:
            parent = self.lookup(frontier.pop(0))
            if parent is None or (parent.kind, parent.name.lower()) in seen:
                continue
            add(parent)
            frontier.extend(parent.parents)
        components.sort(key=lambda comp: _KIND_ORDER[comp[0]])
        return tuple(components)


def _completeness(resolved: Sequence[tuple[str, str]]) -> str:
    kinds = {kind for kind, _ in resolved}
    if {"city", "country"} <= kinds:
        return "full"
    if resolved:
        return "partial"
    return "surface_only"


def _chain_mentions_hint(chain: Sequence[tuple[str, str]], hint: str) -> bool:
    hint_l = hint.lower()
    return any(hint_l == name.lower() or hint_l in name.lower() for _, name in chain)


def extract_locations(
    post: Post,
    gazetteer: Gazetteer,
    area_hint: Optional[str] = None,
) -> list[LocationMention]:
    """Match gazetteer places in the post text and resolve their chains.

    Ambiguous names prefer entries whose chain mentions the area hint,
    then the most completely resolvable entry, then file order. One
    mention is returned per distinct place, in first-occurrence order.
    """
    tokens = _span_tokens(post.text)
    mentions: list[LocationMention] = []
    seen_places: set[tuple[str, str]] = set()
    i = 0
    while i < len(tokens):
        candidates = gazetteer.candidates_for(tokens[i][0])
        matched = None
        for name_tokens, _ in candidates:
            if i + len(name_tokens) > len(tokens):
                continue
            if tuple(t for t, _, _ in tokens[i : i + len(name_tokens)]) == name_tokens:
                matched = name_tokens
                break
        if matched is None:
            i += 1
            continue

        span_start = tokens[i][1]
        span_end = tokens[i + len(matched) - 1][2]
        surface = post.text[span_start:span_end]

        best_place, best_chain, best_rank = None, (), None
        for name_tokens, place in candidates:
            if name_tokens != matched:
                continue
            chain = gazetteer.resolve_chain(place)
            hint_hit = bool(area_hint) and _chain_mentions_hint(chain, area_hint)
            rank = (not hint_hit, -len(chain))
            if best_rank is None or rank < best_rank:
                best_place, best_chain, best_rank = place, chain, rank

        key = (best_place.kind, best_place.name.lower())
        if key not in seen_places:
            seen_places.add(key)
            mentions.append(
                LocationMention(surface=surface, resolved=best_chain, completeness=_completeness(best_chain))
            )
        i += len(matched)
    return mentions
