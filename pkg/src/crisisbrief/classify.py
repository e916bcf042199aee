"""Pluggable classification backends and corpus enrichment.

Three backends ship: a ground-truth adopter that turns existing labels
into one-hot distributions, a deterministic lexicon scorer (hit counts
through a softmax), and a client for a remote inference endpoint. All
of them satisfy the same batch contract, so the pipeline runs fully
offline under the first two and scales out under the third.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Protocol, Sequence

import httpx

from .corpus import Corpus, Post, tokenize
from .errors import ClassificationError, ConfigurationError, GatewayError, ProtocolError, ValidationError
from .gazetteer import Gazetteer, extract_locations
from .schemas import ClassDistribution, DimensionSchema, EnrichedPost, get_schema


class ClassifierBackend(Protocol):
    def classify_batch(self, posts: Sequence[Post], schema: DimensionSchema) -> list[ClassDistribution]:
        ...


class GroundTruthBackend:
    """Adopt a post's source label for the dimension as a one-hot distribution."""

    def classify_batch(self, posts: Sequence[Post], schema: DimensionSchema) -> list[ClassDistribution]:
        out = []
        for post in posts:
            label = post.source_labels.get(schema.name)
            if label is None:
                raise ClassificationError(
                    f"post {post.id!r} has no ground-truth label for {schema.name!r}",
                    post_id=post.id,
                    dimension=schema.name,
                )
            if label not in schema.classes:
                raise ClassificationError(
                    f"post {post.id!r}: label {label!r} is not a {schema.name!r} class",
                    post_id=post.id,
                    dimension=schema.name,
                )
            out.append(ClassDistribution.one_hot(schema.name, label, schema.classes))
        return out


class LexiconBackend:
    """Score classes by lexicon hit counts, softmaxed at temperature 1.

    An empty lexicon (or a post hitting nothing) yields the uniform
    distribution, so every output is a valid probability vector.
    """

    def __init__(self, lexicon: Mapping[str, Iterable[str]]):
        self.lexicon = {cls: {w.lower() for w in words} for cls, words in lexicon.items()}

    def classify_batch(self, posts: Sequence[Post], schema: DimensionSchema) -> list[ClassDistribution]:
        unknown = set(self.lexicon) - set(schema.classes)
        if unknown:
            raise ConfigurationError(f"lexicon classes {sorted(unknown)} not in schema {schema.name!r}")
        out = []
        for post in posts:
            tokens = tokenize(post.text)
            counts = {
                cls: sum(1 for tok in tokens if tok in self.lexicon.get(cls, ()))
                for cls in schema.classes
            }
            out.append(_softmax_distribution(schema.name, counts))
        return out


def _softmax_distribution(dimension: str, counts: Mapping[str, float]) -> ClassDistribution:
    peak = max(counts.values())
    weights = {cls: math.exp(v - peak) for cls, v in counts.items()}
    total = sum(weights.values())
    return ClassDistribution(dimension, {cls: w / total for cls, w in weights.items()})


@dataclass(frozen=True)
class InferenceEndpoint:
    """Descriptor for a remote classifier endpoint."""

    url: str
    timeout: float = 30.0
    max_retries: int = 3
    backoff_base: float = 0.5
    headers: Mapping[str, str] = field(default_factory=dict)


def remote_classify(
    batch: Sequence[Post],
    schema: DimensionSchema,
    endpoint: InferenceEndpoint,
    *,
    client: Optional[httpx.Client] = None,
) -> list[ClassDistribution]:
    """Classify a batch over the wire: POST {dimension, classes, texts}.

    Responses must come back in request order; per-row sums within
    [0.99, 1.01] are renormalized, anything else is rejected.
    """
    if not batch:
        raise ValidationError("remote_classify requires a non-empty batch")
    payload = {
        "dimension": schema.name,
        "classes": list(schema.classes),
        "texts": [post.text for post in batch],
    }
    body = _post_with_retries(endpoint, payload, client)
    rows = body.get("distributions") if isinstance(body, dict) else None
    if not isinstance(rows, list) or len(rows) != len(batch):
        raise ProtocolError(
            f"{schema.name}: expected {len(batch)} distributions, got "
            f"{len(rows) if isinstance(rows, list) else type(rows).__name__}"
        )
    out = []
    for post, row in zip(batch, rows):
        if not isinstance(row, list) or len(row) != len(schema.classes):
            raise ProtocolError(f"{schema.name}: row for post {post.id!r} does not cover the class set")
        try:
            values = [float(v) for v in row]
        except (TypeError, ValueError) as exc:
            raise ProtocolError(f"{schema.name}: non-numeric probability for post {post.id!r}") from exc
        if any(v < 0 for v in values):
            raise ProtocolError(f"{schema.name}: negative probability for post {post.id!r}")
        total = sum(values)
        if not 0.99 <= total <= 1.01:
            raise ValidationError(
                f"{schema.name}: response for post {post.id!r} sums to {total:.4f}, outside [0.99, 1.01]"
            )
        out.append(ClassDistribution(schema.name, {cls: v / total for cls, v in zip(schema.classes, values)}))
    return out


def _post_with_retries(endpoint: InferenceEndpoint, payload: dict, client: Optional[httpx.Client]) -> dict:
    owned = client is None
    client = client or httpx.Client(timeout=endpoint.timeout)
    try:
        last_error: Exception | None = None
        for attempt in range(endpoint.max_retries + 1):
            try:
                response = client.post(endpoint.url, json=payload, headers=dict(endpoint.headers))
                if response.status_code >= 500:
                    raise GatewayError(f"endpoint returned {response.status_code}")
                if response.status_code != 200:
                    raise ProtocolError(f"endpoint returned {response.status_code}: {response.text[:200]}")
                try:
                    return response.json()
                except ValueError as exc:
                    raise ProtocolError("endpoint response is not JSON") from exc
            except (httpx.TransportError, GatewayError) as exc:
                last_error = exc
                if attempt < endpoint.max_retries:
                    time.sleep(endpoint.backoff_base * (2**attempt))
        raise GatewayError(f"endpoint {endpoint.url} failing after {endpoint.max_retries + 1} attempts: {last_error}")
    finally:
        if owned:
            client.close()


class RemoteClassifierBackend:
    def __init__(self, endpoint: InferenceEndpoint, client: Optional[httpx.Client] = None):
        self.endpoint = endpoint
        self._client = client

    def classify_batch(self, posts: Sequence[Post], schema: DimensionSchema) -> list[ClassDistribution]:
        return remote_classify(posts, schema, self.endpoint, client=self._client)


def classify_post(post: Post, schema: DimensionSchema, backend: ClassifierBackend) -> ClassDistribution:
    try:
        dist = backend.classify_batch([post], schema)[0]
    except (GatewayError, ProtocolError) as exc:
        raise ClassificationError(
            f"backend failed for post {post.id!r} on {schema.name!r}: {exc}",
            post_id=post.id,
            dimension=schema.name,
        ) from exc
    dist.validate_against(schema)
    return dist


@dataclass
class EnrichmentConfig:
    batch_size: int = 64
    workers: int = 1
    area_hint: Optional[str] = None


def ensure_sub_event_labels(
    corpus: Corpus,
    dimensions: Sequence[str],
    registry: Mapping[str, "ClassifierBackend"],
) -> Corpus:
    """Derive sub_event ground-truth labels from disaster_event ones when the
    registry adopts them and the corpus does not carry them yet."""
    from .corpus import relabel_subevents

    needs = (
        "sub_event" in dimensions
        and isinstance(registry.get("sub_event"), GroundTruthBackend)
        and bool(corpus.posts)
        and "sub_event" not in corpus.posts[0].source_labels
    )
    return relabel_subevents(corpus) if needs else corpus


def enrich_corpus(
    corpus: Corpus,
    dimensions: Sequence[str],
    registry: Mapping[str, ClassifierBackend],
    *,
    gazetteer: Optional[Gazetteer] = None,
    schemas: Optional[Mapping[str, DimensionSchema]] = None,
    config: EnrichmentConfig = EnrichmentConfig(),
) -> list[EnrichedPost]:
    """Attach one distribution per requested dimension to every post.

    Order is preserved and re-running with deterministic backends gives
    identical output. The entity dimension ("location") resolves against
    the gazetteer instead of a classifier backend.
    """
    categorical: list[DimensionSchema] = []
    wants_locations = False
    for name in dimensions:
        schema = get_schema(name, schemas)
        if schema.kind == "entity":
            wants_locations = True
            if gazetteer is None:
                raise ConfigurationError("location dimension requested without a gazetteer")
            continue
        if name not in registry:
            raise ConfigurationError(f"no backend registered for dimension {name!r}")
        categorical.append(schema)

    posts = list(corpus.posts)
    per_dimension: dict[str, list[ClassDistribution]] = {}
    for schema in categorical:
        backend = registry[schema.name]
        batches = [posts[i : i + config.batch_size] for i in range(0, len(posts), config.batch_size)]
        if config.workers > 1 and len(batches) > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                results = list(pool.map(lambda b: backend.classify_batch(b, schema), batches))
        else:
            results = [backend.classify_batch(b, schema) for b in batches]
        dists = [dist for chunk in results for dist in chunk]
        if len(dists) != len(posts):
            raise ClassificationError(f"backend for {schema.name!r} returned {len(dists)} of {len(posts)} results")
        for dist in dists:
            dist.validate_against(schema)
        per_dimension[schema.name] = dists

    enriched = []
    for idx, post in enumerate(posts):
        locations = ()
        if wants_locations:
            locations = tuple(extract_locations(post, gazetteer, config.area_hint))
        enriched.append(
            EnrichedPost(
                post=post,
                distributions={schema.name: per_dimension[schema.name][idx] for schema in categorical},
                locations=locations,
            )
        )
    return enriched
