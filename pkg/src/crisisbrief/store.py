"""File-backed JSON store with atomic writes and content-hash ids."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .corpus import Corpus, IngestResult, Post, parse_timestamp
from .errors import ValidationError

KINDS = ("corpora", "enrichments", "topics", "samples", "reports", "chats", "evals", "jobs")


def content_id(record: dict) -> str:
    canonical = json.dumps(record, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


class Store:
    """Per-kind subdirectories of JSON documents keyed by id.

    Writes go to a temp file in the target directory and are renamed
    into place, so a record is either fully persisted or absent.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        for kind in KINDS:
            (self.root / kind).mkdir(parents=True, exist_ok=True)

    def _path(self, kind: str, record_id: str) -> Path:
        if kind not in KINDS:
            raise ValidationError(f"unknown store kind {kind!r}")
        return self.root / kind / f"{record_id}.json"

    def write(self, kind: str, record: dict, record_id: Optional[str] = None) -> str:
        record_id = record_id or content_id(record)
        path = self._path(kind, record_id)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                json.dump(record, handle, ensure_ascii=False)
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        return record_id

    def read(self, kind: str, record_id: str) -> Optional[dict]:
        path = self._path(kind, record_id)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def exists(self, kind: str, record_id: str) -> bool:
        return self._path(kind, record_id).exists()

    def list_ids(self, kind: str) -> list[str]:
        return sorted(p.stem for p in (self.root / kind).glob("*.json"))


def corpus_to_record(corpus: Corpus, ingest: Optional[IngestResult] = None) -> dict:
    start, end = corpus.date_range
    return {
        "corpus_id": corpus.corpus_id,
        "event_name": corpus.event_name,
        "area": corpus.area,
        "date_range": [start.isoformat() if start else None, end.isoformat() if end else None],
        "posts": [post.to_dict() for post in corpus.posts],
        "ingest": {
            "dropped": ingest.dropped if ingest else 0,
            "dropped_labels": dict(ingest.dropped_labels) if ingest else {},
        },
    }


def corpus_from_record(record: dict) -> Corpus:
    start, end = record.get("date_range") or (None, None)
    return Corpus(
        corpus_id=record["corpus_id"],
        event_name=record.get("event_name", ""),
        area=record.get("area", ""),
        date_range=(
            parse_timestamp(start) if start else None,
            parse_timestamp(end) if end else None,
        ),
        posts=tuple(Post.from_dict(p) for p in record["posts"]),
    )


def utcnow_iso() -> str:
    return datetime.now(timezone.utc).isoformat()
