"""LLM-judge protocols and the basic-versus-advanced comparison table.

The coverage judge runs repeated stateless calls, each a fresh request
with no session state, and is never told which generation mode produced
the report. Judge replies must be strict JSON; anything else is retried
once and then excluded from the average with a warning.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

from .assets import load_prompt
from .corpus import Corpus
from .errors import ComparisonError, GatewayError, MetricError, ProtocolError, ValidationError
from .gateways import ChatGateway, EmbeddingGateway, HashingEmbedder
from .metrics import (
    MetricScore,
    embedding_cosine,
    reference_text,
    rouge_l,
    rouge_n,
    tfidf_cosine,
)
from .reportgen import Report

logger = logging.getLogger(__name__)

QUALITY_CRITERIA = ("informative", "quality", "coherence", "attributable", "overall")


def _render_coverage_prompt(report_body: str, items: Sequence[str]) -> str:
    numbered = "\n".join(f"{i}. {item}" for i, item in enumerate(items, start=1))
    template = load_prompt("judge_coverage").rstrip("\n")
    return (
        template.replace("$REPORT", report_body)
        .replace("$ITEMS", numbered)
        .replace("$N", str(len(items)))
    )


def _parse_boolean_array(raw: str, expected: int) -> list[bool]:
    parsed = json.loads(raw.strip())
    if not isinstance(parsed, list) or len(parsed) != expected:
        raise ValueError(f"expected a JSON array of {expected} booleans")
    if not all(isinstance(v, bool) for v in parsed):
        raise ValueError("array entries must be booleans")
    return parsed


def coverage_judge(
    report_body: str,
    items: Sequence[str],
    gateway: ChatGateway,
    repetitions: int = 10,
    *,
    max_workers: int = 4,
) -> MetricScore:
    """Fraction of reference items the report covers, averaged over
    repeated isolated judge calls."""
    if not items:
        raise ValidationError("coverage_judge needs at least one reference item")
    if repetitions <= 0:
        raise ValidationError("repetitions must be positive")
    prompt = _render_coverage_prompt(report_body, items)

    def one_repetition(run_index: int) -> dict:
        for attempt in range(2):
            try:
                raw = gateway.complete([{"role": "user", "content": prompt}], max_tokens=512)
                verdicts = _parse_boolean_array(raw, len(items))
            except (GatewayError, ProtocolError, ValueError) as exc:
                if attempt == 0:
                    continue
                logger.warning("coverage judge run %d invalid after retry: %s", run_index, exc)
                return {"run": run_index, "valid": False, "error": str(exc)}
            return {
                "run": run_index,
                "valid": True,
                "verdicts": verdicts,
                "covered": sum(verdicts),
                "total": len(items),
            }
        return {"run": run_index, "valid": False, "error": "unreachable"}

    if max_workers > 1 and repetitions > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            runs = list(pool.map(one_repetition, range(1, repetitions + 1)))
    else:
        runs = [one_repetition(i) for i in range(1, repetitions + 1)]

    valid = [r for r in runs if r["valid"]]
    if not valid:
        raise MetricError("every coverage-judge repetition returned unparsable output")
    coverage = sum(r["covered"] / r["total"] for r in valid) / len(valid)
    return MetricScore(
        metric="coverage",
        value=coverage,
        preprocessing=f"{repetitions} isolated judge repetitions, {len(valid)} valid",
        runs=tuple(runs),
    )


def judge_quality(
    report_body: str,
    source_text: str,
    gateway: ChatGateway,
) -> MetricScore:
    """Single judge call scoring the five rubric criteria from 1 to 5."""
    prompt = (
        load_prompt("judge_quality")
        .rstrip("\n")
        .replace("$SOURCE", source_text)
        .replace("$REPORT", report_body)
    )
    raw = gateway.complete([{"role": "user", "content": prompt}], max_tokens=256)
    try:
        parsed = json.loads(raw.strip())
    except json.JSONDecodeError as exc:
        raise MetricError(f"quality judge returned non-JSON output: {raw[:120]!r}") from exc
    if not isinstance(parsed, dict) or set(parsed) != set(QUALITY_CRITERIA):
        raise ValidationError(f"quality judge must score exactly {QUALITY_CRITERIA}")
    scores = {}
    for criterion in QUALITY_CRITERIA:
        value = parsed[criterion]
        if not isinstance(value, (int, float)) or not 1 <= value <= 5:
            raise ValidationError(f"criterion {criterion!r} score {value!r} outside [1, 5]")
        scores[criterion] = float(value)
    return MetricScore(metric="judge_criteria", value=scores, preprocessing="single judge call")


@dataclass(frozen=True)
class ComparisonTable:
    """Side-by-side metric rows for a basic and an advanced report."""

    corpus_id: str
    rows: tuple[tuple[str, float, float], ...]

    def to_dict(self) -> dict:
        return {
            "corpus_id": self.corpus_id,
            "rows": [{"metric": m, "basic": b, "advanced": a} for m, b, a in self.rows],
        }

    def render_text(self) -> str:
        width = max([len("Metric")] + [len(m) for m, _, _ in self.rows])
        lines = [f"{'Metric'.ljust(width)}  Basic   Adv"]
        for metric, basic, advanced in self.rows:
            lines.append(f"{metric.ljust(width)}  {basic:5.2f}  {advanced:5.2f}")
        return "\n".join(lines)

    def value(self, metric: str, mode: str) -> float:
        for m, basic, advanced in self.rows:
            if m == metric:
                return basic if mode == "basic" else advanced
        raise KeyError(metric)


def compare_modes(
    basic_report: Report,
    advanced_report: Report,
    corpus: Corpus,
    items: Sequence[str],
    gateway: ChatGateway,
    *,
    embedding_gateway: Optional[EmbeddingGateway] = None,
    repetitions: int = 10,
    include_quality: bool = True,
) -> ComparisonTable:
    """Score both reports against the same corpus and tabulate the rows."""
    basic_corpus = basic_report.input_manifest.get("corpus_id", "")
    advanced_corpus = advanced_report.input_manifest.get("corpus_id", "")
    if basic_corpus != advanced_corpus or (corpus.corpus_id and basic_corpus != corpus.corpus_id):
        raise ComparisonError(
            f"reports come from different corpora: {basic_corpus!r} vs {advanced_corpus!r} "
            f"(expected {corpus.corpus_id!r})"
        )

    reference = reference_text(corpus)
    embedder = embedding_gateway or HashingEmbedder()

    def metric_rows(report: Report) -> dict[str, float]:
        rows = {
            "rouge1": rouge_n(report.body, reference, 1).f1,
            "rouge2": rouge_n(report.body, reference, 2).f1,
            "rougeL": rouge_l(report.body, reference).f1,
            "tfidf_cosine": tfidf_cosine(report.body, reference).score,
            "embedding_cosine": embedding_cosine(report.body, reference, embedder),
            "coverage": coverage_judge(report.body, items, gateway, repetitions).value,
        }
        if include_quality:
            quality = judge_quality(report.body, reference, gateway).value
            rows.update({f"judge_{criterion}": quality[criterion] for criterion in QUALITY_CRITERIA})
        return rows

    basic_rows = metric_rows(basic_report)
    advanced_rows = metric_rows(advanced_report)
    return ComparisonTable(
        corpus_id=basic_corpus,
        rows=tuple((metric, basic_rows[metric], advanced_rows[metric]) for metric in basic_rows),
    )
