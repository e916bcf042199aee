"""Report quality metrics: n-gram overlap, lexical and embedding cosine.

All text metrics share one tokenization (lowercase, split on
non-alphanumeric runs) and are pure functions safe to call from any
thread.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .assets import load_stopwords
from .corpus import Corpus, tokenize
from .errors import GatewayError, MetricError, ProtocolError, ValidationError
from .gateways import EmbeddingGateway
from .stemming import porter_stem

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


@dataclass(frozen=True)
class TfidfResult:
    score: float
    degenerate: bool = False


@dataclass(frozen=True)
class MetricScore:
    """One evaluation outcome with its preprocessing provenance."""

    metric: str
    value: float | Mapping[str, float]
    components: Optional[Mapping[str, float]] = None
    preprocessing: str = ""
    runs: tuple = ()

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "value": dict(self.value) if isinstance(self.value, Mapping) else self.value,
            "components": dict(self.components) if self.components else None,
            "preprocessing": self.preprocessing,
            "runs": list(self.runs),
        }


def reference_text(corpus: Corpus) -> str:
    """The concatenated text of all posts, in corpus order."""
    return "\n".join(post.text for post in corpus.posts)


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: str, reference: str, n: int) -> RougeScore:
    """Clipped n-gram overlap; empty candidate or reference scores zero."""
    if n not in (1, 2):
        raise ValidationError(f"rouge_n supports n in {{1, 2}}, got {n}")
    cand = _ngrams(tokenize(candidate), n)
    ref = _ngrams(tokenize(reference), n)
    cand_total, ref_total = sum(cand.values()), sum(ref.values())
    if cand_total == 0 or ref_total == 0:
        return RougeScore(0.0, 0.0, 0.0)
    overlap = sum((cand & ref).values())
    precision = overlap / cand_total
    recall = overlap / ref_total
    return RougeScore(precision, recall, _f1(precision, recall))


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        current = [0] * (len(b) + 1)
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                current[j] = previous[j - 1] + 1
            else:
                current[j] = max(previous[j], current[j - 1])
        previous = current
    return previous[len(b)]


def rouge_l(candidate: str, reference: str) -> RougeScore:
    """Longest common subsequence over token sequences."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return RougeScore(0.0, 0.0, 0.0)
    lcs = _lcs_length(cand, ref)
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return RougeScore(precision, recall, _f1(precision, recall))


TFIDF_PREPROCESSING = "lowercase, stop-word removal, suffix-stripping stemmer"


def _tfidf_terms(text: str, stopwords: frozenset[str]) -> Counter:
    return Counter(porter_stem(tok) for tok in tokenize(text) if tok not in stopwords)


def tfidf_cosine(candidate: str, reference: str) -> TfidfResult:
    """Cosine of TF-IDF vectors over the two-document collection.

    IDF is smoothed: ln((1 + N) / (1 + df)) + 1 with N = 2. A text left
    empty by preprocessing yields score 0 with the degenerate flag set.
    """
    stopwords = load_stopwords()
    cand = _tfidf_terms(candidate, stopwords)
    ref = _tfidf_terms(reference, stopwords)
    if not cand or not ref:
        logger.warning("tfidf_cosine: degenerate input (empty after preprocessing)")
        return TfidfResult(0.0, degenerate=True)

    vocabulary = set(cand) | set(ref)
    idf = {
        term: math.log(3.0 / (1.0 + ((term in cand) + (term in ref)))) + 1.0
        for term in vocabulary
    }
    vec_c = {t: cand.get(t, 0) * idf[t] for t in vocabulary}
    vec_r = {t: ref.get(t, 0) * idf[t] for t in vocabulary}
    dot = sum(vec_c[t] * vec_r[t] for t in vocabulary)
    norm_c = math.sqrt(sum(v * v for v in vec_c.values()))
    norm_r = math.sqrt(sum(v * v for v in vec_r.values()))
    if norm_c == 0 or norm_r == 0:
        return TfidfResult(0.0, degenerate=True)
    return TfidfResult(min(1.0, max(0.0, dot / (norm_c * norm_r))))


def embedding_cosine(candidate: str, reference: str, gateway: EmbeddingGateway) -> float:
    """Cosine of the two document embeddings, clamped to [0, 1]."""
    try:
        vec_c, vec_r = gateway.embed([candidate, reference])
    except (GatewayError, ProtocolError) as exc:
        raise MetricError(f"embedding gateway failed: {exc}") from exc
    dot = sum(a * b for a, b in zip(vec_c, vec_r))
    norm_c = math.sqrt(sum(a * a for a in vec_c))
    norm_r = math.sqrt(sum(b * b for b in vec_r))
    if norm_c == 0 or norm_r == 0:
        return 0.0
    return min(1.0, max(0.0, dot / (norm_c * norm_r)))
