"""Asynchronous pipeline jobs over a bounded worker pool.

Jobs are deduplicated by a hash of their canonical request payload:
re-submitting an identical request returns the existing job instead of
spawning a second one. Status only moves forward
(queued -> running -> done | failed) and every transition is persisted.
"""

from __future__ import annotations

import hashlib
import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

from .errors import ValidationError
from .store import Store, utcnow_iso

STATUSES = ("queued", "running", "done", "failed")
JOB_KINDS = ("enrich", "topics", "sample", "report", "eval")
_STATUS_RANK = {status: i for i, status in enumerate(STATUSES)}


@dataclass
class JobRecord:
    job_id: str
    kind: str
    status: str = "queued"
    request_hash: str = ""
    input_refs: dict = field(default_factory=dict)
    output_ref: Optional[str] = None
    created_at: str = ""
    started_at: Optional[str] = None
    finished_at: Optional[str] = None
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "JobRecord":
        return cls(**data)


def request_hash(kind: str, payload: dict) -> str:
    canonical = json.dumps({"kind": kind, "payload": payload}, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


class JobRunner:
    """FIFO execution of jobs on a bounded thread pool."""

    def __init__(self, store: Store, workers: int = 4):
        self.store = store
        self._pool = ThreadPoolExecutor(max_workers=workers)
        self._lock = threading.Lock()
        self._by_hash: dict[str, str] = {}
        newest: dict[str, str] = {}
        for job_id in store.list_ids("jobs"):
            record = store.read("jobs", job_id)
            if not record or not record.get("request_hash"):
                continue
            digest = record["request_hash"]
            if digest not in newest or record.get("created_at", "") >= newest[digest]:
                newest[digest] = record.get("created_at", "")
                self._by_hash[digest] = job_id

    def _persist(self, record: JobRecord) -> None:
        self.store.write("jobs", record.to_dict(), record.job_id)

    def _transition(self, record: JobRecord, status: str) -> None:
        if _STATUS_RANK[status] < _STATUS_RANK[record.status]:
            raise ValidationError(f"job {record.job_id}: cannot move {record.status} -> {status}")
        record.status = status
        if status == "running":
            record.started_at = utcnow_iso()
        elif status in ("done", "failed"):
            record.finished_at = utcnow_iso()
        self._persist(record)

    def get(self, job_id: str) -> Optional[JobRecord]:
        record = self.store.read("jobs", job_id)
        return JobRecord.from_dict(record) if record else None

    def submit(
        self,
        kind: str,
        payload: dict,
        task: Callable[[], str],
        input_refs: Optional[dict] = None,
    ) -> tuple[JobRecord, bool]:
        """Queue a job; returns (record, existing) where existing means an
        identical request was already submitted."""
        if kind not in JOB_KINDS:
            raise ValidationError(f"unknown job kind {kind!r}")
        digest = request_hash(kind, payload)
        with self._lock:
            job_id = digest
            if digest in self._by_hash:
                existing = self.get(self._by_hash[digest])
                # failed jobs are retried on resubmission under a fresh id;
                # everything else is returned as-is so identical requests
                # stay idempotent
                if existing is not None and existing.status != "failed":
                    return existing, True
                if existing is not None:
                    attempt = 2
                    while self.store.exists("jobs", f"{digest}r{attempt}"):
                        attempt += 1
                    job_id = f"{digest}r{attempt}"
            record = JobRecord(
                job_id=job_id,
                kind=kind,
                request_hash=digest,
                input_refs=input_refs or {},
                created_at=utcnow_iso(),
            )
            self._by_hash[digest] = record.job_id
            self._persist(record)

        def run() -> None:
            live = self.get(record.job_id) or record
            try:
                self._transition(live, "running")
                output_ref = task()
                live.output_ref = output_ref
                self._transition(live, "done")
            except Exception as exc:  # noqa: BLE001 - failures land on the record
                live.error = f"{type(exc).__name__}: {exc}"
                self._transition(live, "failed")

        self._pool.submit(run)
        return record, False

    def shutdown(self, wait: bool = True) -> None:
        self._pool.shutdown(wait=wait)
