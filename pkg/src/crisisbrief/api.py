"""HTTP/JSON API over the pipeline with file-backed persistence.

Ingestion and report/chat/eval endpoints are synchronous; enrichment,
topic discovery, and sampling run as jobs on a bounded worker pool and
are polled via /jobs/{id}. Identical pipeline requests are deduplicated
by request hash.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.exceptions import HTTPException
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import config as configmod
from .assets import load_lexicon
from .classify import (
    ClassifierBackend,
    EnrichmentConfig,
    GroundTruthBackend,
    LexiconBackend,
    enrich_corpus,
    ensure_sub_event_labels,
)
from .corpus import ingest_posts
from .errors import (
    BudgetError,
    ComparisonError,
    ConfigurationError,
    CrisisBriefError,
    EmptySampleError,
    GenerationError,
    MetricError,
    SchemaError,
    ValidationError,
)
from .gateways import ChatGateway, EmbeddingGateway, HashingEmbedder, MockChatGateway
from .gazetteer import Gazetteer
from .jobs import JobRunner
from .judging import compare_modes
from .reportgen import (
    ChatSession,
    Report,
    ReportRequest,
    TokenBudget,
    chat_turn,
    create_chat_session,
    generate_report,
)
from .sampling import Sample, SamplingSpec, build_sample
from .schemas import EnrichedPost
from .store import Store, content_id, corpus_from_record, corpus_to_record, utcnow_iso
from .topics import export_topic_clusters, select_topic_count


class EnrichBody(BaseModel):
    dimensions: list[str]


class TopicsBody(BaseModel):
    k_grid: list[int] = [2, 3, 4, 5, 6, 7, 8, 9, 10]
    seed: int = 0


class SamplesBody(BaseModel):
    dimensions: list[dict]
    target_size: int
    filters: Optional[dict] = None
    cap_to_target: bool = True


class ReportBody(BaseModel):
    corpus_id: str
    request: dict
    sample_id: Optional[str] = None
    sampling: Optional[dict] = None


class ChatCreateBody(BaseModel):
    report_id: str


class ChatMessageBody(BaseModel):
    question: str


class EvalBody(BaseModel):
    basic_report_id: str
    advanced_report_id: str
    items: Optional[list[str]] = None
    repetitions: int = 10


def _error(status: int, code: str, message: str, detail=None) -> HTTPException:
    return HTTPException(status, {"code": code, "message": message, "detail": detail})


def create_app(
    store_root: str | Path,
    *,
    chat_gateway: Optional[ChatGateway] = None,
    embedding_gateway: Optional[EmbeddingGateway] = None,
    registry: Optional[dict[str, ClassifierBackend]] = None,
    gazetteer: Optional[Gazetteer] = None,
    budget: Optional[TokenBudget] = None,
    workers: int = 4,
    judge_repetitions: int = 10,
) -> FastAPI:
    store = Store(store_root)
    runner = JobRunner(store, workers=workers)
    chat_gateway = chat_gateway or MockChatGateway()
    embedding_gateway = embedding_gateway or HashingEmbedder()
    if registry is None:
        registry = {
            "disaster_event": GroundTruthBackend(),
            "sub_event": GroundTruthBackend(),
            "sentiment": LexiconBackend(load_lexicon("sentiment")),
            "emotion": LexiconBackend(load_lexicon("emotion")),
            "content_type": LexiconBackend(load_lexicon("content_type")),
            "stakeholder": LexiconBackend(load_lexicon("stakeholder")),
        }
    budget = budget or TokenBudget()

    app = FastAPI(title="crisisbrief", version="0.1.0")

    @app.exception_handler(HTTPException)
    async def handle_http_error(request: Request, exc: HTTPException):
        detail = exc.detail
        if not isinstance(detail, dict) or "code" not in detail:
            detail = {"code": "error", "message": str(detail), "detail": None}
        return JSONResponse(status_code=exc.status_code, content=detail)

    @app.exception_handler(CrisisBriefError)
    async def handle_domain_error(request: Request, exc: CrisisBriefError):
        status = 400
        if isinstance(exc, (ValidationError, ConfigurationError, EmptySampleError, BudgetError)):
            status = 422
        elif isinstance(exc, (GenerationError, MetricError)):
            status = 502
        return JSONResponse(
            status_code=status,
            content={"code": type(exc).__name__, "message": str(exc), "detail": None},
        )

    def read_or_404(kind: str, record_id: str, label: str) -> dict:
        record = store.read(kind, record_id)
        if record is None:
            raise _error(404, "not_found", f"unknown {label} {record_id!r}")
        return record

    def latest_enrichment(corpus_id: str, needed: Optional[set[str]] = None) -> Optional[dict]:
        best = None
        for enrichment_id in store.list_ids("enrichments"):
            record = store.read("enrichments", enrichment_id)
            if not record or record.get("corpus_id") != corpus_id:
                continue
            if needed and not needed <= set(record.get("dimensions", [])):
                continue
            if best is None or record.get("created_at", "") > best.get("created_at", ""):
                record["id"] = enrichment_id
                best = record
        return best

    def records_for_corpus(kind: str, corpus_id: str) -> list[dict]:
        out = []
        for record_id in store.list_ids(kind):
            record = store.read(kind, record_id)
            if record and record.get("corpus_id") == corpus_id:
                record["id"] = record_id
                out.append(record)
        return out

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/datasets", status_code=201)
    async def create_dataset(
        file: UploadFile = File(...),
        format: str = Form("jsonl"),
        field_map: Optional[str] = Form(None),
        event_name: str = Form(""),
        area: str = Form(""),
    ) -> dict:
        raw = await file.read()
        mapping = json.loads(field_map) if field_map else None
        try:
            result = ingest_posts(raw, format, mapping, event_name=event_name, area=area)
        except SchemaError as exc:
            raise _error(400, "schema_error", str(exc))
        except ValidationError as exc:
            raise _error(400, "validation_error", str(exc))
        record = corpus_to_record(result.corpus, result)
        corpus_id = content_id(record)
        record["corpus_id"] = corpus_id
        record["created_at"] = utcnow_iso()
        store.write("corpora", record, corpus_id)
        return {"id": corpus_id, "posts": len(result.corpus.posts), "dropped": result.dropped}

    @app.get("/datasets")
    def list_datasets() -> dict:
        datasets = []
        for corpus_id in store.list_ids("corpora"):
            record = store.read("corpora", corpus_id)
            if not record:
                continue
            enrichments = records_for_corpus("enrichments", corpus_id)
            topic_records = records_for_corpus("topics", corpus_id)
            datasets.append(
                {
                    "id": corpus_id,
                    "event_name": record.get("event_name", ""),
                    "area": record.get("area", ""),
                    "posts": len(record.get("posts", [])),
                    "dropped": record.get("ingest", {}).get("dropped", 0),
                    "enrichments": [
                        {"id": e["id"], "dimensions": e.get("dimensions", [])} for e in enrichments
                    ],
                    "topics": [
                        {"id": t["id"], "selected_k": t.get("curve", {}).get("selected_k")}
                        for t in topic_records
                    ],
                    "samples": [s["id"] for s in records_for_corpus("samples", corpus_id)],
                    "reports": [r["id"] for r in records_for_corpus("reports", corpus_id)],
                }
            )
        return {"datasets": datasets}

    @app.get("/datasets/{corpus_id}")
    def get_dataset(corpus_id: str) -> dict:
        return read_or_404("corpora", corpus_id, "corpus")

    def submit_job(kind: str, payload: dict, task, input_refs: dict) -> JSONResponse:
        record, existing = runner.submit(kind, payload, task, input_refs)
        if existing and record.status in ("queued", "running"):
            raise _error(
                409,
                "duplicate_request",
                f"identical {kind} request is already {record.status}",
                {"job_id": record.job_id},
            )
        status = 200 if existing else 202
        return JSONResponse(status_code=status, content={"job_id": record.job_id, "existing": existing})

    @app.post("/corpora/{corpus_id}/enrich")
    def start_enrich(corpus_id: str, body: EnrichBody):
        record = read_or_404("corpora", corpus_id, "corpus")

        def task() -> str:
            corpus = corpus_from_record(record)
            corpus = ensure_sub_event_labels(corpus, body.dimensions, registry)
            enriched = enrich_corpus(
                corpus,
                body.dimensions,
                registry,
                gazetteer=gazetteer,
                config=EnrichmentConfig(area_hint=corpus.area or None),
            )
            enrichment = {
                "corpus_id": corpus_id,
                "dimensions": list(body.dimensions),
                "posts": [e.to_dict() for e in enriched],
                "created_at": utcnow_iso(),
            }
            return "enrichments/" + store.write("enrichments", enrichment)

        payload = {"corpus_id": corpus_id, "dimensions": sorted(body.dimensions)}
        return submit_job("enrich", payload, task, {"corpus_id": corpus_id})

    @app.post("/corpora/{corpus_id}/topics")
    def start_topics(corpus_id: str, body: TopicsBody):
        record = read_or_404("corpora", corpus_id, "corpus")

        def task() -> str:
            corpus = corpus_from_record(record)
            curve, model = select_topic_count(list(corpus.posts), body.k_grid, body.seed, gateway=embedding_gateway)
            topic_record = {
                "corpus_id": corpus_id,
                "seed": body.seed,
                "k_grid": list(body.k_grid),
                "curve": {"points": [[k, cv] for k, cv in curve.points], "selected_k": curve.selected_k},
                "export": export_topic_clusters(model),
                "created_at": utcnow_iso(),
            }
            return "topics/" + store.write("topics", topic_record)

        payload = {"corpus_id": corpus_id, "k_grid": list(body.k_grid), "seed": body.seed}
        return submit_job("topics", payload, task, {"corpus_id": corpus_id})

    @app.post("/corpora/{corpus_id}/samples")
    def start_sample(corpus_id: str, body: SamplesBody):
        read_or_404("corpora", corpus_id, "corpus")
        spec_dict = {
            "dimensions": body.dimensions,
            "target_size": body.target_size,
            "filters": body.filters,
            "cap_to_target": body.cap_to_target,
        }

        def task() -> str:
            spec = SamplingSpec.from_dict(spec_dict)
            needed = {dim for dim, _ in spec.dimensions}
            enrichment = latest_enrichment(corpus_id, needed)
            if enrichment is None:
                raise ValidationError(
                    f"corpus {corpus_id!r} has no enrichment covering dimensions {sorted(needed)}"
                )
            enriched = [EnrichedPost.from_dict(e) for e in enrichment["posts"]]
            sample = build_sample(enriched, spec)
            sample_record = {
                "corpus_id": corpus_id,
                "enrichment_id": enrichment["id"],
                "sample": sample.to_dict(),
                "created_at": utcnow_iso(),
            }
            return "samples/" + store.write("samples", sample_record)

        return submit_job("sample", spec_dict | {"corpus_id": corpus_id}, task, {"corpus_id": corpus_id})

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str) -> dict:
        record = runner.get(job_id)
        if record is None:
            raise _error(404, "not_found", f"unknown job {job_id!r}")
        return record.to_dict()

    @app.get("/artifacts/{kind}/{record_id}")
    def get_artifact(kind: str, record_id: str) -> dict:
        if kind not in ("enrichments", "topics", "samples"):
            raise _error(404, "not_found", f"unknown artifact kind {kind!r}")
        return read_or_404(kind, record_id, kind[:-1])

    def _resolve_advanced_inputs(body: ReportBody, corpus_record: dict) -> tuple[Sample, list[EnrichedPost]]:
        if body.sample_id:
            sample_record = read_or_404("samples", body.sample_id, "sample")
            enrichment = read_or_404("enrichments", sample_record["enrichment_id"], "enrichment")
            sample = Sample.from_dict(sample_record["sample"])
            return sample, [EnrichedPost.from_dict(e) for e in enrichment["posts"]]
        if body.sampling is None:
            raise _error(
                422,
                "missing_sampling",
                "advanced mode needs a sample_id or a sampling spec",
            )
        spec = SamplingSpec.from_dict(body.sampling)
        needed = {dim for dim, _ in spec.dimensions}
        enrichment = latest_enrichment(body.corpus_id, needed)
        if enrichment is None:
            raise _error(
                422,
                "not_enriched",
                f"corpus {body.corpus_id!r} is not enriched for dimensions {sorted(needed)}",
            )
        enriched = [EnrichedPost.from_dict(e) for e in enrichment["posts"]]
        return build_sample(enriched, spec), enriched

    @app.post("/reports", status_code=201)
    def create_report(body: ReportBody) -> dict:
        corpus_record = read_or_404("corpora", body.corpus_id, "corpus")
        corpus = corpus_from_record(corpus_record)

        request_dict = dict(body.request)
        request_dict.setdefault("event", corpus.event_name or "unknown event")
        request_dict.setdefault("area", corpus.area or "unknown area")
        if not request_dict.get("date_range"):
            start, end = corpus.date_range
            request_dict["date_range"] = (
                f"{start.date()} to {end.date()}" if start and end else "the monitored period"
            )
        request = ReportRequest.from_dict(
            {"mode": "basic", "word_limit": 400, "stakeholders": [], "city": None} | request_dict
        )

        if request.mode == "advanced":
            sample, enriched = _resolve_advanced_inputs(body, corpus_record)
            report = generate_report(
                request, (sample, enriched), chat_gateway, budget, corpus_id=body.corpus_id
            )
        else:
            report = generate_report(request, corpus, chat_gateway, budget, corpus_id=body.corpus_id)

        record = report.to_dict()
        record["corpus_id"] = body.corpus_id
        store.write("reports", record, report.id)
        return {"id": report.id, "report": record}

    @app.get("/reports/{report_id}")
    def get_report(report_id: str) -> dict:
        return read_or_404("reports", report_id, "report")

    @app.get("/reports")
    def list_reports(corpus_id: Optional[str] = None) -> dict:
        reports = []
        for report_id in store.list_ids("reports"):
            record = store.read("reports", report_id)
            if record and (corpus_id is None or record.get("corpus_id") == corpus_id):
                reports.append(
                    {
                        "id": report_id,
                        "corpus_id": record.get("corpus_id"),
                        "mode": record["request"]["mode"],
                        "report_kind": record["request"]["report_kind"],
                        "created_at": record.get("created_at"),
                    }
                )
        return {"reports": reports}

    def _grounding_posts(report_record: dict) -> list:
        corpus_record = read_or_404("corpora", report_record["corpus_id"], "corpus")
        corpus = corpus_from_record(corpus_record)
        manifest = report_record.get("input_manifest", {})
        if manifest.get("mode") == "advanced":
            by_id = {p.id: p for p in corpus.posts}
            return [by_id[pid] for pid in manifest.get("post_ids", []) if pid in by_id]
        return list(corpus.posts[: manifest.get("included", len(corpus.posts))])

    @app.post("/chats", status_code=201)
    def create_chat(body: ChatCreateBody) -> dict:
        report_record = read_or_404("reports", body.report_id, "report")
        report = Report.from_dict(report_record)
        session = create_chat_session(report, _grounding_posts(report_record))
        record = session.to_dict()
        record["corpus_id"] = report_record.get("corpus_id")
        store.write("chats", record, session.id)
        return {"id": session.id, "report_id": body.report_id}

    @app.get("/chats/{chat_id}")
    def get_chat(chat_id: str) -> dict:
        return read_or_404("chats", chat_id, "chat")

    @app.post("/chats/{chat_id}/messages")
    def post_chat_message(chat_id: str, body: ChatMessageBody) -> dict:
        record = read_or_404("chats", chat_id, "chat")
        session = ChatSession.from_dict(record)
        answer = chat_turn(session, body.question, chat_gateway, budget)
        updated = session.to_dict()
        updated["corpus_id"] = record.get("corpus_id")
        store.write("chats", updated, chat_id)
        return {"answer": answer, "turns": len(session.turns)}

    def _items_for_corpus(corpus_id: str) -> Optional[list[str]]:
        topic_records = records_for_corpus("topics", corpus_id)
        if not topic_records:
            return None
        latest = max(topic_records, key=lambda t: t.get("created_at", ""))
        items = []
        for topic in latest["export"]["topics"]:
            terms = [t["term"] for t in topic["terms"][:3]]
            if terms:
                items.append(" ".join(terms))
        return items or None

    @app.post("/evals", status_code=201)
    def create_eval(body: EvalBody) -> dict:
        basic_record = read_or_404("reports", body.basic_report_id, "report")
        advanced_record = read_or_404("reports", body.advanced_report_id, "report")
        corpus_record = read_or_404("corpora", basic_record["corpus_id"], "corpus")
        corpus = corpus_from_record(corpus_record)
        items = body.items or _items_for_corpus(basic_record["corpus_id"])
        if not items:
            raise _error(422, "missing_items", "no items supplied and no topic model to derive them from")
        try:
            table = compare_modes(
                Report.from_dict(basic_record),
                Report.from_dict(advanced_record),
                corpus,
                items,
                chat_gateway,
                embedding_gateway=embedding_gateway,
                repetitions=body.repetitions,
            )
        except ComparisonError as exc:
            raise _error(409, "corpus_mismatch", str(exc))
        record = table.to_dict()
        record["basic_report_id"] = body.basic_report_id
        record["advanced_report_id"] = body.advanced_report_id
        record["items"] = items
        record["created_at"] = utcnow_iso()
        eval_id = store.write("evals", record)
        return {"id": eval_id, "comparison": record}

    @app.get("/evals/{eval_id}")
    def get_eval(eval_id: str) -> dict:
        return read_or_404("evals", eval_id, "eval")

    app.state.store = store
    app.state.runner = runner
    return app


def create_default_app() -> FastAPI:
    """App factory for `uvicorn crisisbrief.api:create_default_app --factory`.

    CRISISBRIEF_STORE sets the store root; CRISISBRIEF_CONFIG optionally
    points at a pipeline config whose gateways and backends are used
    (mock gateways otherwise).
    """
    store_root = os.environ.get("CRISISBRIEF_STORE", "./store")
    config_path = os.environ.get("CRISISBRIEF_CONFIG")
    if not config_path:
        return create_app(store_root)
    config = configmod.load_config(config_path)
    base_dir = Path(config_path).resolve().parent
    return create_app(
        store_root,
        chat_gateway=configmod.build_chat_gateway(config),
        embedding_gateway=configmod.build_embedding_gateway(config),
        registry=configmod.build_backend_registry(config, base_dir),
        gazetteer=configmod.build_gazetteer(config, base_dir),
        budget=configmod.build_budget(config),
    )
