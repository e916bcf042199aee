"""Disaster post datasets: ingestion, filtering, derived labelings.

A :class:`Corpus` is an immutable, ordered collection of :class:`Post`
values. All operations here are pure: they return new values and never
mutate their inputs, so corpora can be shared freely across threads.
"""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import IO, Iterable, Mapping, Optional

from .errors import SchemaError, ValidationError

CANONICAL_POST_KEYS = ("id", "text", "created_at", "author_id", "engagement", "source_labels")

HUMAID_CLASSES = (
    "caution_and_advice",
    "sympathy_and_support",
    "requests_or_urgent_needs",
    "infrastructure_and_utility_damage",
    "rescue_volunteering_or_donation_effort",
    "not_humanitarian",
    "displaced_people_and_evacuations",
    "injured_or_dead_people",
    "missing_or_found_people",
)

HUMAID_EXCLUDED = ("dont_know_cant_judge", "other_relevant_information")

HUMAID_SUBEVENT_CLASSES = (
    "infrastructure_and_utility_damage",
    "displaced_people_and_evacuations",
    "injured_or_dead_people",
    "missing_or_found_people",
)

SUBEVENT_POST = "subevent_post"
NON_SUBEVENT_POST = "non_subevent_post"


@dataclass(frozen=True)
class Post:
    """One social message with optional metadata and ground-truth labels."""

    id: str
    text: str
    created_at: Optional[datetime] = None
    author_id: Optional[str] = None
    engagement: Mapping[str, int] = field(default_factory=dict)
    source_labels: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.id:
            raise SchemaError("post id must be non-empty")
        if not self.text.strip():
            raise SchemaError(f"post {self.id!r}: text is empty after trimming")
        for name, count in self.engagement.items():
            if not isinstance(count, int) or count < 0:
                raise SchemaError(f"post {self.id!r}: engagement counter {name!r} must be a non-negative integer")
        if self.created_at is not None and self.created_at.tzinfo is None:
            # naive timestamps are pinned to UTC for cross-machine determinism
            object.__setattr__(self, "created_at", self.created_at.replace(tzinfo=timezone.utc))

    def total_engagement(self) -> int:
        return sum(self.engagement.values())

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "created_at": self.created_at.isoformat() if self.created_at else None,
            "author_id": self.author_id,
            "engagement": dict(self.engagement),
            "source_labels": dict(self.source_labels),
        }

    @classmethod
    def from_dict(cls, record: Mapping) -> "Post":
        created = record.get("created_at")
        return cls(
            id=str(record["id"]),
            text=record["text"],
            created_at=parse_timestamp(created) if created else None,
            author_id=record.get("author_id"),
            engagement={k: int(v) for k, v in (record.get("engagement") or {}).items()},
            source_labels=dict(record.get("source_labels") or {}),
        )


@dataclass(frozen=True)
class Corpus:
    """Ordered, duplicate-free collection of posts for one monitored event."""

    corpus_id: str = ""
    event_name: str = ""
    area: str = ""
    date_range: tuple[Optional[datetime], Optional[datetime]] = (None, None)
    posts: tuple[Post, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "posts", tuple(self.posts))
        seen = set()
        for post in self.posts:
            if post.id in seen:
                raise SchemaError(f"duplicate post id {post.id!r}")
            seen.add(post.id)
        start, end = self.date_range
        if start is not None and end is not None and start > end:
            raise ValidationError("date_range start is after end")

    def __len__(self) -> int:
        return len(self.posts)

    def __iter__(self):
        return iter(self.posts)

    def with_posts(self, posts: Iterable[Post]) -> "Corpus":
        return replace(self, posts=tuple(posts))


@dataclass(frozen=True)
class DisasterTaxonomy:
    """HumAID-style class inventory with excluded and sub-event subsets."""

    classes: tuple[str, ...] = HUMAID_CLASSES
    excluded: tuple[str, ...] = HUMAID_EXCLUDED
    subevent_classes: tuple[str, ...] = HUMAID_SUBEVENT_CLASSES

    def __post_init__(self):
        unknown = set(self.subevent_classes) - set(self.classes)
        if unknown:
            raise ValidationError(f"subevent classes not in taxonomy: {sorted(unknown)}")


@dataclass(frozen=True)
class IngestResult:
    corpus: Corpus
    dropped: int
    dropped_labels: Mapping[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class PostFilter:
    """Conjunction of filter criteria; empty criteria match everything.

    keywords matches a post when at least one keyword appears as a
    whole, case-insensitive token of the text.
    """

    keywords: tuple[str, ...] = ()
    date_range: Optional[tuple[Optional[datetime], Optional[datetime]]] = None
    min_engagement: Optional[int] = None


def parse_timestamp(value: str) -> datetime:
    ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def tokenize(text: str) -> list[str]:
    """Lowercase tokens split on non-alphanumeric runs."""
    tokens, current = [], []
    for ch in text.lower():
        if ch.isalnum():
            current.append(ch)
        elif current:
            tokens.append("".join(current))
            current = []
    if current:
        tokens.append("".join(current))
    return tokens


def _mapped_record(raw: Mapping, field_map: Mapping[str, str], line_no: int) -> dict:
    """Apply a source-column -> post-field mapping to one raw record."""
    out: dict = {"engagement": {}, "source_labels": {}}
    for column, target in field_map.items():
        if column not in raw:
            continue
        value = raw[column]
        if value is None or value == "":
            continue
        if target.startswith("engagement."):
            try:
                out["engagement"][target.split(".", 1)[1]] = int(value)
            except (TypeError, ValueError):
                raise SchemaError(f"line {line_no}: engagement counter {column!r} is not an integer")
        elif target.startswith("source_labels."):
            out["source_labels"][target.split(".", 1)[1]] = str(value)
        elif target in ("engagement", "source_labels"):
            if not isinstance(value, Mapping):
                raise SchemaError(f"line {line_no}: field {column!r} must be a flat object")
            out[target].update(value)
        elif target in CANONICAL_POST_KEYS:
            if isinstance(value, (Mapping, list)):
                raise SchemaError(f"line {line_no}: nested value for field {column!r}; flatten the input first")
            out[target] = value
        else:
            raise SchemaError(f"field map targets unknown post field {target!r}")
    return out


IDENTITY_FIELD_MAP = {key: key for key in CANONICAL_POST_KEYS}


def ingest_posts(
    source: IO[bytes] | IO[str] | bytes | str,
    format: str,
    field_map: Optional[Mapping[str, str]] = None,
    *,
    taxonomy: DisasterTaxonomy = DisasterTaxonomy(),
    corpus_id: str = "",
    event_name: str = "",
    area: str = "",
    date_range: tuple[Optional[datetime], Optional[datetime]] = (None, None),
) -> IngestResult:
    """Read a delimited table or JSON-lines stream into a Corpus.

    Records whose source labels carry an excluded taxonomy class are
    dropped and counted instead of ingested. The canonical JSON-lines
    form round-trips: ``ingest(serialize(c)) == c``.
    """
    if format not in ("csv", "tsv", "jsonl"):
        raise ValidationError(f"unsupported ingestion format {format!r}; use csv, tsv, or jsonl")
    field_map = dict(field_map) if field_map else dict(IDENTITY_FIELD_MAP)
    mapped_targets = set(field_map.values())
    for required in ("id", "text"):
        if required not in mapped_targets:
            raise SchemaError(f"field map does not map required field {required!r}")

    if isinstance(source, bytes):
        text_stream: IO[str] = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, str):
        text_stream = io.StringIO(source)
    elif isinstance(source.read(0), bytes):  # type: ignore[union-attr]
        text_stream = io.TextIOWrapper(source, encoding="utf-8")  # type: ignore[arg-type]
    else:
        text_stream = source  # type: ignore[assignment]

    posts: list[Post] = []
    seen_ids: set[str] = set()
    dropped = 0
    dropped_labels: dict[str, int] = {}
    excluded = set(taxonomy.excluded)

    def add_record(raw: Mapping, line_no: int) -> None:
        nonlocal dropped
        mapped = _mapped_record(raw, field_map, line_no)
        if "id" not in mapped or "text" not in mapped:
            raise SchemaError(f"line {line_no}: record is missing a mapped id or text value")
        labels = mapped["source_labels"]
        hit = next((v for v in labels.values() if v in excluded), None)
        if hit is not None:
            dropped += 1
            dropped_labels[hit] = dropped_labels.get(hit, 0) + 1
            return
        post_id = str(mapped["id"])
        if post_id in seen_ids:
            raise SchemaError(f"duplicate post id {post_id!r}")
        seen_ids.add(post_id)
        try:
            posts.append(Post.from_dict(mapped))
        except (SchemaError, ValueError, KeyError, TypeError) as exc:
            raise SchemaError(f"line {line_no}: {exc}") from exc

    if format == "jsonl":
        for line_no, line in enumerate(text_stream, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"line {line_no}: malformed JSON record ({exc.msg})") from exc
            if not isinstance(raw, Mapping):
                raise SchemaError(f"line {line_no}: record is not a JSON object")
            add_record(raw, line_no)
    else:
        delimiter = "," if format == "csv" else "\t"
        reader = csv.DictReader(text_stream, delimiter=delimiter)
        if reader.fieldnames is None:
            return IngestResult(
                Corpus(corpus_id, event_name, area, date_range, ()), 0, {}
            )
        for line_no, raw in enumerate(reader, start=2):
            if raw.get(None) is not None:
                raise SchemaError(f"line {line_no}: row has more columns than the header")
            add_record(raw, line_no)

    corpus = Corpus(corpus_id, event_name, area, date_range, tuple(posts))
    return IngestResult(corpus, dropped, dropped_labels)


def serialize_corpus(corpus: Corpus) -> str:
    """Canonical persisted form: JSON-lines, one post object per line."""
    return "".join(json.dumps(post.to_dict(), ensure_ascii=False) + "\n" for post in corpus.posts)


def filter_posts(corpus: Corpus, post_filter: PostFilter) -> Corpus:
    """Keep exactly the posts matching all supplied criteria, in order."""
    if post_filter.date_range is not None:
        start, end = post_filter.date_range
        if start is not None and end is not None and start > end:
            raise ValidationError("filter date_range start is after end")

    keywords = {kw.lower() for kw in post_filter.keywords}

    def matches(post: Post) -> bool:
        if keywords and not keywords.intersection(tokenize(post.text)):
            return False
        if post_filter.date_range is not None:
            if post.created_at is None:
                return False
            start, end = post_filter.date_range
            if start is not None and post.created_at < start:
                return False
            if end is not None and post.created_at > end:
                return False
        if post_filter.min_engagement is not None and post.total_engagement() < post_filter.min_engagement:
            return False
        return True

    return corpus.with_posts(p for p in corpus.posts if matches(p))


def relabel_subevents(corpus: Corpus, taxonomy: DisasterTaxonomy = DisasterTaxonomy()) -> Corpus:
    """Derive the binary sub_event label from each post's disaster_event class."""
    missing = [p.id for p in corpus.posts if "disaster_event" not in p.source_labels]
    if missing:
        raise SchemaError(f"posts lacking a disaster_event label: {missing}")
    subevent = set(taxonomy.subevent_classes)
    relabeled = []
    for post in corpus.posts:
        label = SUBEVENT_POST if post.source_labels["disaster_event"] in subevent else NON_SUBEVENT_POST
        relabeled.append(replace(post, source_labels={**post.source_labels, "sub_event": label}))
    return corpus.with_posts(relabeled)


def balance_by_undersampling(corpus: Corpus, dimension: str, per_class: int, seed: int) -> Corpus:
    """Undersample to exactly per_class posts per class, seeded and stable.

    Selected posts keep their original corpus order, so a corpus that is
    already exactly balanced passes through unchanged.
    """
    if per_class <= 0:
        raise ValidationError("per_class must be positive")
    by_class: dict[str, list[int]] = {}
    for idx, post in enumerate(corpus.posts):
        label = post.source_labels.get(dimension)
        if label is None:
            raise SchemaError(f"post {post.id!r} lacks a {dimension!r} label")
        by_class.setdefault(label, []).append(idx)

    for cls in sorted(by_class):
        if len(by_class[cls]) < per_class:
            raise ValidationError(
                f"class {cls!r} has {len(by_class[cls])} posts, fewer than per_class={per_class}"
            )

    rng = random.Random(seed)
    keep: set[int] = set()
    for cls in sorted(by_class):
        indices = by_class[cls]
        if len(indices) == per_class:
            keep.update(indices)
        else:
            keep.update(rng.sample(indices, per_class))
    return corpus.with_posts(corpus.posts[i] for i in sorted(keep))
