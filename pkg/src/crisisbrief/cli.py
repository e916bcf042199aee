"""End-to-end pipeline command.

Runs ingest -> enrich -> topics -> sample -> report(s) -> eval from one
declarative config file and persists every artifact in the store. With
--dry-run all gateways are replaced by the deterministic local mocks, so
the whole pipeline works offline.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import config as configmod
from .classify import EnrichmentConfig, enrich_corpus, ensure_sub_event_labels
from .errors import ConfigurationError, CrisisBriefError
from .judging import compare_modes, coverage_judge
from .metrics import embedding_cosine, reference_text, rouge_l, rouge_n, tfidf_cosine
from .reportgen import ReportRequest, generate_report
from .sampling import build_sample
from .store import Store, content_id, corpus_to_record, utcnow_iso
from .topics import export_topic_clusters, select_topic_count


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crisisbrief",
        description="Run the disaster reporting pipeline end to end.",
    )
    parser.add_argument("--config", required=True, help="pipeline config JSON")
    parser.add_argument("--mode", choices=("basic", "advanced", "both"), default="both")
    parser.add_argument("--report-kind", choices=("topics", "opinions", "city_subevents"), default=None)
    parser.add_argument("--city", default=None, help="city for city_subevents reports")
    parser.add_argument("--word-limit", type=int, default=None)
    parser.add_argument("--dry-run", action="store_true", help="use deterministic mock gateways")
    parser.add_argument("--store-root", default=None, help="artifact store root (overrides config)")
    return parser


def _fail(code: str, message: str, exit_code: int = 1) -> int:
    message = " ".join(str(message).split())
    print(f"error: {code}: {message}", file=sys.stderr)
    return exit_code


def _derived_items(export: dict) -> list[str]:
    items = []
    for topic in export["topics"]:
        terms = [t["term"] for t in topic["terms"][:3]]
        if terms:
            items.append(" ".join(terms))
    return items


def run_pipeline(args: argparse.Namespace) -> int:
    config_path = Path(args.config)
    try:
        config = configmod.load_config(config_path)
    except ConfigurationError as exc:
        return _fail("config", str(exc), exit_code=2)
    base_dir = config_path.resolve().parent

    store_root = args.store_root or config.get("store_root") or "store"
    store = Store(Path(store_root) if Path(store_root).is_absolute() else base_dir / store_root)

    chat_gateway = configmod.build_chat_gateway(config, dry_run=args.dry_run)
    embedding_gateway = configmod.build_embedding_gateway(config, dry_run=args.dry_run)
    registry = configmod.build_backend_registry(config, base_dir)
    gazetteer = configmod.build_gazetteer(config, base_dir)
    budget = configmod.build_budget(config)

    dataset = config.get("dataset") or {}
    if "path" not in dataset:
        return _fail("config", "dataset.path missing from config", exit_code=2)
    corpus_meta = config.get("corpus") or {}

    # ingest
    from .corpus import ingest_posts, parse_timestamp

    data_path = base_dir / dataset["path"]
    if not data_path.exists():
        return _fail("config", f"dataset file not found: {data_path}", exit_code=2)
    date_range = (
        parse_timestamp(corpus_meta["date_start"]) if corpus_meta.get("date_start") else None,
        parse_timestamp(corpus_meta["date_end"]) if corpus_meta.get("date_end") else None,
    )
    result = ingest_posts(
        data_path.read_bytes(),
        dataset.get("format", "jsonl"),
        dataset.get("field_map"),
        event_name=corpus_meta.get("event_name", ""),
        area=corpus_meta.get("area", ""),
        date_range=date_range,
    )
    corpus = result.corpus

    dimensions = configmod.dimension_names(config)
    corpus = ensure_sub_event_labels(corpus, dimensions, registry)

    corpus_record = corpus_to_record(corpus, result)
    corpus_id = content_id(corpus_record)
    corpus_record["corpus_id"] = corpus_id
    corpus_record["created_at"] = utcnow_iso()
    store.write("corpora", corpus_record, corpus_id)
    print(f"corpus: {store.root / 'corpora' / (corpus_id + '.json')} ({len(corpus.posts)} posts, {result.dropped} dropped)")

    # enrich
    enriched = enrich_corpus(
        corpus,
        dimensions,
        registry,
        gazetteer=gazetteer,
        config=EnrichmentConfig(area_hint=corpus.area or None),
    )
    enrichment_record = {
        "corpus_id": corpus_id,
        "dimensions": dimensions,
        "posts": [e.to_dict() for e in enriched],
        "created_at": utcnow_iso(),
    }
    enrichment_id = store.write("enrichments", enrichment_record)
    print(f"enrichment: {store.root / 'enrichments' / (enrichment_id + '.json')} ({len(dimensions)} dimensions)")

    # topics
    topics_config = config.get("topics") or {}
    k_grid = topics_config.get("k_grid", [2, 3, 4, 5, 6, 7, 8, 9, 10])
    seed = int(topics_config.get("seed", 0))
    curve, model = select_topic_count(enriched, k_grid, seed, gateway=embedding_gateway)
    export = export_topic_clusters(model)
    topics_record = {
        "corpus_id": corpus_id,
        "seed": seed,
        "k_grid": list(k_grid),
        "curve": {"points": [[k, cv] for k, cv in curve.points], "selected_k": curve.selected_k},
        "export": export,
        "created_at": utcnow_iso(),
    }
    topics_id = store.write("topics", topics_record)
    print(f"topics: {store.root / 'topics' / (topics_id + '.json')} (k={curve.selected_k})")

    # sample
    city = args.city or corpus_meta.get("city")
    spec = configmod.build_sampling_spec(config, city=city)
    sample = build_sample(enriched, spec)
    sample_record = {
        "corpus_id": corpus_id,
        "enrichment_id": enrichment_id,
        "sample": sample.to_dict(),
        "created_at": utcnow_iso(),
    }
    sample_id = store.write("samples", sample_record)
    print(f"sample: {store.root / 'samples' / (sample_id + '.json')} ({len(sample.members)} posts)")

    # reports
    report_config = config.get("report") or {}
    kind = args.report_kind or report_config.get("kind", "topics")
    word_limit = args.word_limit or int(report_config.get("word_limit", 400))
    start, end = corpus.date_range
    date_range_text = f"{start.date()} to {end.date()}" if start and end else "the monitored period"

    modes = ("basic", "advanced") if args.mode == "both" else (args.mode,)
    reports = {}
    for mode in modes:
        request = ReportRequest(
            mode=mode,
            report_kind=kind,
            event=corpus.event_name or "unknown event",
            area=corpus.area or "unknown area",
            date_range=date_range_text,
            word_limit=word_limit,
            city=city if kind == "city_subevents" else None,
        )
        inputs = corpus if mode == "basic" else (sample, enriched)
        report = generate_report(request, inputs, chat_gateway, budget, corpus_id=corpus_id)
        record = report.to_dict()
        record["corpus_id"] = corpus_id
        store.write("reports", record, report.id)
        reports[mode] = report
        print(f"report[{mode}]: {store.root / 'reports' / (report.id + '.json')}")

    # eval
    eval_config = config.get("eval") or {}
    items = eval_config.get("items") or _derived_items(export)
    repetitions = int(eval_config.get("repetitions", 10))
    if set(modes) == {"basic", "advanced"}:
        table = compare_modes(
            reports["basic"],
            reports["advanced"],
            corpus,
            items,
            chat_gateway,
            embedding_gateway=embedding_gateway,
            repetitions=repetitions,
        )
        eval_record = table.to_dict()
        eval_record["kind"] = "comparison"
        eval_record["rendered"] = table.render_text()
    else:
        report = reports[modes[0]]
        reference = reference_text(corpus)
        eval_record = {
            "kind": "single",
            "corpus_id": corpus_id,
            "mode": modes[0],
            "report_id": report.id,
            "metrics": {
                "rouge1": rouge_n(report.body, reference, 1).f1,
                "rouge2": rouge_n(report.body, reference, 2).f1,
                "rougeL": rouge_l(report.body, reference).f1,
                "tfidf_cosine": tfidf_cosine(report.body, reference).score,
                "embedding_cosine": embedding_cosine(report.body, reference, embedding_gateway),
                "coverage": coverage_judge(report.body, items, chat_gateway, repetitions).value,
            },
        }
    eval_record["items"] = items
    eval_record["created_at"] = utcnow_iso()
    eval_id = store.write("evals", eval_record)
    print(f"eval: {store.root / 'evals' / (eval_id + '.json')}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run_pipeline(args)
    except ConfigurationError as exc:
        return _fail("config", str(exc), exit_code=2)
    except CrisisBriefError as exc:
        return _fail(type(exc).__name__, str(exc))
    except OSError as exc:
        return _fail("io", str(exc))


if __name__ == "__main__":
    sys.exit(main())
