"""Topic discovery over enriched corpora.

Embeds documents, clusters them with seeded spherical k-means, ranks
per-topic terms by class-based TF-IDF, and scores topic quality with a
windowed NPMI coherence value. The topic count is chosen by sweeping a
grid of k values and keeping the argmax coherence (ties to smallest k).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Optional, Sequence

import numpy as np

from .assets import load_stopwords
from .corpus import Post, tokenize
from .errors import ProtocolError, ValidationError
from .gateways import EmbeddingGateway, HashingEmbedder
from .schemas import EnrichedPost

logger = logging.getLogger(__name__)

_EPS = 1e-12


@dataclass(frozen=True)
class TopicModel:
    k: int
    assignments: Mapping[str, int]
    terms: tuple[tuple[tuple[str, float], ...], ...]
    coherence: float

    def __post_init__(self):
        object.__setattr__(self, "assignments", dict(self.assignments))
        for topic_id, term_list in enumerate(self.terms):
            names = [t for t, _ in term_list]
            if len(set(names)) != len(names):
                raise ValidationError(f"topic {topic_id} has duplicate terms")
        bad = {t for t in self.assignments.values() if not 0 <= t < self.k}
        if bad:
            raise ValidationError(f"assignments reference topics outside [0, {self.k}): {sorted(bad)}")


@dataclass(frozen=True)
class CoherenceCurve:
    points: tuple[tuple[int, float], ...]
    selected_k: int

    def __post_init__(self):
        if not self.points:
            raise ValidationError("coherence curve needs at least one point")
        best = min(self.points, key=lambda p: (-p[1], p[0]))
        if best[0] != self.selected_k:
            raise ValidationError(f"selected_k {self.selected_k} does not attain the maximum coherence")


def _text_of(doc: EnrichedPost | Post) -> str:
    return doc.post.text if isinstance(doc, EnrichedPost) else doc.text


def embed_documents(
    docs: Sequence[EnrichedPost | Post],
    gateway: Optional[EmbeddingGateway] = None,
    *,
    batch_size: int = 128,
) -> np.ndarray:
    """Embed document texts into unit-normalized rows.

    Defaults to the local hashing embedder; a text with no tokens maps
    to the first basis vector so every row has norm 1.
    """
    gateway = gateway or HashingEmbedder()
    texts = [_text_of(d) for d in docs]
    rows: list[list[float]] = []
    width = None
    for start in range(0, len(texts), batch_size):
        batch = gateway.embed(texts[start : start + batch_size])
        for vec in batch:
            if width is None:
                width = len(vec)
            elif len(vec) != width:
                raise ProtocolError(f"embedding width changed across batches: {width} then {len(vec)}")
            rows.append(list(vec))
    if not rows:
        return np.zeros((0, 0))
    matrix = np.asarray(rows, dtype=np.float64)
    norms = np.linalg.norm(matrix, axis=1)
    for i in np.nonzero(norms == 0)[0]:
        matrix[i, 0] = 1.0
        norms[i] = 1.0
    return matrix / norms[:, None]


def cluster_topics(embeddings: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Seeded spherical k-means; returns one cluster id per row.

    Fixed iteration cap 100, convergence tolerance 1e-6; empty clusters
    are re-seeded from the point farthest from its assigned centroid.
    """
    n = embeddings.shape[0]
    if k <= 0:
        raise ValidationError(f"k must be positive, got {k}")
    if k > n:
        raise ValidationError(f"k={k} exceeds the number of documents ({n})")

    norms = np.linalg.norm(embeddings, axis=1)
    unit = embeddings / np.where(norms == 0, 1.0, norms)[:, None]
    rng = np.random.default_rng(seed)

    # k-means++ style seeding on cosine distance
    centroid_idx = [int(rng.integers(n))]
    for _ in range(1, k):
        sims = unit @ unit[centroid_idx].T
        dist = 1.0 - sims.max(axis=1)
        dist[centroid_idx] = 0.0
        weights = dist**2
        total = weights.sum()
        if total <= 0:
            remaining = np.setdiff1d(np.arange(n), centroid_idx)
            centroid_idx.append(int(remaining[0]))
        else:
            centroid_idx.append(int(rng.choice(n, p=weights / total)))
    centroids = unit[centroid_idx].copy()

    def fill_empty_clusters(assignments: np.ndarray, sims: np.ndarray) -> bool:
        """Re-seed each empty cluster from the point farthest from its own
        centroid, never stealing a cluster's last member."""
        reseeded = False
        for cluster in range(k):
            if (assignments == cluster).any():
                continue
            own_sim = sims[np.arange(n), assignments].copy()
            counts = np.bincount(assignments, minlength=k)
            own_sim[counts[assignments] <= 1] = np.inf
            farthest = int(own_sim.argmin())
            assignments[farthest] = cluster
            centroids[cluster] = unit[farthest]
            reseeded = True
        return reseeded

    assignments = np.zeros(n, dtype=int)
    for _ in range(100):
        sims = unit @ centroids.T
        assignments = sims.argmax(axis=1)
        reseeded = fill_empty_clusters(assignments, sims)

        shift = 0.0
        for cluster in range(k):
            members = unit[assignments == cluster]
            mean = members.mean(axis=0)
            norm = np.linalg.norm(mean)
            if norm > 0:
                mean = mean / norm
                shift = max(shift, float(np.linalg.norm(mean - centroids[cluster])))
                centroids[cluster] = mean
        if shift < 1e-6 and not reseeded:
            break
    return assignments


def _topic_token_counts(
    docs: Sequence[EnrichedPost | Post],
    assignments: Sequence[int],
    k: int,
    stopwords: frozenset[str],
) -> tuple[list[dict[str, int]], dict[str, int], float]:
    per_topic: list[dict[str, int]] = [{} for _ in range(k)]
    overall: dict[str, int] = {}
    total_tokens = 0
    for doc, cluster in zip(docs, assignments):
        for token in tokenize(_text_of(doc)):
            if token in stopwords:
                continue
            counts = per_topic[int(cluster)]
            counts[token] = counts.get(token, 0) + 1
            overall[token] = overall.get(token, 0) + 1
            total_tokens += 1
    avg_tokens = total_tokens / k if k else 0.0
    return per_topic, overall, avg_tokens


def topic_terms(
    docs: Sequence[EnrichedPost | Post],
    assignments: Sequence[int],
    top_n: int = 10,
    *,
    k: Optional[int] = None,
    stopwords: Optional[frozenset[str]] = None,
) -> list[list[tuple[str, float]]]:
    """Rank each topic's terms by within-topic frequency discounted by
    cross-topic frequency: weight = tf(t, c) * ln(1 + A / f(t)) with A
    the average token count per topic. Stop words are removed first."""
    if len(docs) != len(assignments):
        raise ValidationError("assignments do not cover all documents")
    if k is None:
        k = max((int(a) for a in assignments), default=-1) + 1
    stops = stopwords if stopwords is not None else load_stopwords()
    per_topic, overall, avg_tokens = _topic_token_counts(docs, assignments, k, stops)

    ranked: list[list[tuple[str, float]]] = []
    for counts in per_topic:
        weighted = [
            (term, count * math.log(1.0 + avg_tokens / overall[term]))
            for term, count in counts.items()
        ]
        weighted.sort(key=lambda tw: (-tw[1], tw[0]))
        ranked.append(weighted[:top_n])
    return ranked


def _pair_npmi(p_a: float, p_b: float, p_ab: float, joint_count: int) -> float:
    if joint_count == 0:
        return -1.0
    if p_ab >= 1.0:
        return 1.0
    p_a, p_b, p_ab = max(p_a, _EPS), max(p_b, _EPS), max(p_ab, _EPS)
    value = math.log(p_ab / (p_a * p_b)) / -math.log(p_ab)
    return max(-1.0, min(1.0, value))


def coherence_cv(
    term_lists: Sequence[Sequence[str] | Sequence[tuple[str, float]]],
    docs: Sequence[EnrichedPost | Post],
    window: int = 10,
    *,
    top_terms: int = 10,
    stopwords: Optional[frozenset[str]] = None,
) -> float:
    """Mean over topics of mean pairwise NPMI of the top terms.

    Co-occurrence is counted in sliding token windows (a document shorter
    than the window is one window). A pair that never co-occurs scores
    the limit value -1; a topic with fewer than two terms contributes 0
    and is flagged in the log.
    """
    if not term_lists:
        raise ValidationError("coherence needs at least one term list")
    stops = stopwords if stopwords is not None else load_stopwords()

    topics: list[list[str]] = []
    for entry in term_lists:
        terms = [t[0] if isinstance(t, tuple) else t for t in entry]
        topics.append(terms[:top_terms])

    relevant = {t for terms in topics for t in terms}
    needed_pairs = {
        frozenset(pair)
        for terms in topics
        for pair in combinations(sorted(set(terms)), 2)
    }

    total_windows = 0
    term_windows: dict[str, int] = {t: 0 for t in relevant}
    pair_windows: dict[frozenset, int] = {p: 0 for p in needed_pairs}

    for doc in docs:
        tokens = [t for t in tokenize(_text_of(doc)) if t not in stops]
        if not tokens:
            continue
        positions: dict[str, list[int]] = {}
        for pos, tok in enumerate(tokens):
            if tok in relevant:
                positions.setdefault(tok, []).append(pos)
        n_windows = max(1, len(tokens) - window + 1)
        total_windows += n_windows
        if not positions:
            continue
        for start in range(n_windows):
            end = start + window
            present = sorted(t for t, pos in positions.items() if any(start <= p < end for p in pos))
            for t in present:
                term_windows[t] += 1
            for pair in combinations(present, 2):
                key = frozenset(pair)
                if key in pair_windows:
                    pair_windows[key] += 1

    if total_windows == 0:
        return 0.0

    topic_scores: list[float] = []
    for topic_id, terms in enumerate(topics):
        distinct = sorted(set(terms))
        if len(distinct) < 2:
            logger.warning("topic %d has fewer than 2 terms; coherence contribution forced to 0", topic_id)
            topic_scores.append(0.0)
            continue
        pair_values = []
        for a, b in combinations(distinct, 2):
            joint = pair_windows[frozenset((a, b))]
            pair_values.append(
                _pair_npmi(
                    term_windows[a] / total_windows,
                    term_windows[b] / total_windows,
                    joint / total_windows,
                    joint,
                )
            )
        # fsum keeps the mean identical under any pair ordering, so equal
        # term sets produce exactly equal scores
        topic_scores.append(math.fsum(pair_values) / len(pair_values))
    # quantized at the numerical noise floor so structurally identical
    # models tie exactly and the sweep can resolve ties to the smallest k
    return round(math.fsum(topic_scores) / len(topic_scores), 12)


def select_topic_count(
    docs: Sequence[EnrichedPost | Post],
    k_grid: Sequence[int],
    seed: int,
    *,
    gateway: Optional[EmbeddingGateway] = None,
    window: int = 10,
    top_n: int = 10,
) -> tuple[CoherenceCurve, TopicModel]:
    """Fit one model per k and keep the argmax-coherence model."""
    if not k_grid:
        raise ValidationError("k grid is empty")
    n = len(docs)
    for k in k_grid:
        if k <= 0 or k > n:
            raise ValidationError(f"grid value k={k} invalid for {n} documents")

    embeddings = embed_documents(docs, gateway)
    post_ids = [(_d.post.id if isinstance(_d, EnrichedPost) else _d.id) for _d in docs]

    points: list[tuple[int, float]] = []
    fitted: dict[int, TopicModel] = {}
    for k in k_grid:
        assignments = cluster_topics(embeddings, k, seed)
        terms = topic_terms(docs, assignments, top_n, k=k)
        cv = coherence_cv(terms, docs, window, top_terms=top_n)
        points.append((k, cv))
        fitted[k] = TopicModel(
            k=k,
            assignments={pid: int(a) for pid, a in zip(post_ids, assignments)},
            terms=tuple(tuple(term_list) for term_list in terms),
            coherence=cv,
        )

    selected_k = min(points, key=lambda p: (-p[1], p[0]))[0]
    return CoherenceCurve(tuple(points), selected_k), fitted[selected_k]


DEFAULT_K_GRID = tuple(range(5, 51, 5))


def export_topic_clusters(model: TopicModel) -> dict:
    """JSON-ready view of a fitted model: terms, members, sizes per topic."""
    members: dict[int, list[str]] = {t: [] for t in range(model.k)}
    for post_id, topic_id in model.assignments.items():
        members[topic_id].append(post_id)
    return {
        "k": model.k,
        "coherence": model.coherence,
        "topics": [
            {
                "id": topic_id,
                "label": f"T_{topic_id}",
                "terms": [{"term": t, "weight": w} for t, w in model.terms[topic_id]],
                "post_ids": members[topic_id],
                "size": len(members[topic_id]),
            }
            for topic_id in range(model.k)
        ],
    }
