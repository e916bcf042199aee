"""Walkthrough: build a representative sample from a skewed corpus.

Reproduces the selection pipeline step by step on a sentiment-skewed corpus
(75% negative, 5% positive, rest neutral): class frequencies over the
selected classes, largest-remainder quotas, confidence ranking, and the
final sample whose histogram mirrors the corpus proportions.
"""

import random

from crisisbrief import (
    ClassDistribution,
    EnrichedPost,
    Post,
    SamplingSpec,
    allocate,
    build_sample,
    class_frequencies,
)


def make_post(pid: str, cls: str, confidence: float) -> EnrichedPost:
    rest = (1 - confidence) / 2
    probs = {"positive": rest, "negative": rest, "neutral": rest, cls: confidence}
    return EnrichedPost(
        post=Post(pid, f"{cls} tinted post {pid}"),
        distributions={"sentiment": ClassDistribution("sentiment", probs)},
    )


def main() -> None:
    rng = random.Random(0)
    posts = (
        [make_post(f"n{i:03d}", "negative", rng.uniform(0.5, 0.99)) for i in range(150)]
        + [make_post(f"p{i:03d}", "positive", rng.uniform(0.5, 0.99)) for i in range(10)]
        + [make_post(f"u{i:03d}", "neutral", rng.uniform(0.5, 0.99)) for i in range(40)]
    )
    rng.shuffle(posts)
    print(f"corpus: {len(posts)} posts (150 negative, 10 positive, 40 neutral by argmax)")

    freqs = class_frequencies(posts, "sentiment", ["positive", "negative"])
    print(f"frequencies over selected classes: {({k: round(v, 4) for k, v in freqs.items()})}")

    quotas = allocate(freqs, 100, "sentiment")
    print(f"quotas for a 100-post sample: {dict(quotas.quotas)}")

    spec = SamplingSpec(dimensions=(("sentiment", ("positive", "negative")),), target_size=100)
    sample = build_sample(posts, spec)
    histogram: dict[str, int] = {}
    by_id = {p.post.id: p for p in posts}
    for pid in sample.members:
        cls = by_id[pid].argmax("sentiment")
        histogram[cls] = histogram.get(cls, 0) + 1
    print(f"sample histogram: {histogram} (size {len(sample.members)})")

    top = sample.members[0]
    print(f"highest-ranked member {top}: provenance {sample.provenance[top]}")
    if sample.deficits:
        print(f"unfilled quotas: {sample.deficits}")
    else:
        print("no deficits: every quota was filled from its ranking")


if __name__ == "__main__":
    main()
