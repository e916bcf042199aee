from __future__ import annotations

from pathlib import Path

import pytest

from crisisbrief import Gazetteer, ingest_posts
from crisisbrief.schemas import ClassDistribution, EnrichedPost
from crisisbrief.corpus import Post

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def campfire_ingest():
    raw = (FIXTURES / "campfire_203.jsonl").read_bytes()
    return ingest_posts(raw, "jsonl", event_name="Camp Fire", area="Northern California")


@pytest.fixture(scope="session")
def campfire_corpus(campfire_ingest):
    return campfire_ingest.corpus


@pytest.fixture(scope="session")
def gazetteer() -> Gazetteer:
    return Gazetteer.from_jsonl(FIXTURES / "gazetteer.jsonl")


def make_enriched(
    post_id: str,
    text: str = "placeholder text",
    locations=(),
    **dimensions,
) -> EnrichedPost:
    """Build an EnrichedPost from keyword dims: sentiment={"positive": 0.9, ...}."""
    return EnrichedPost(
        post=Post(id=post_id, text=text),
        distributions={dim: ClassDistribution(dim, probs) for dim, probs in dimensions.items()},
        locations=locations,
    )
