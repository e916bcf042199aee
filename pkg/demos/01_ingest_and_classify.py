"""Walkthrough: ingest raw posts, filter them, and enrich across dimensions.

Builds a tiny disaster corpus inline, runs it through ingestion (watch the
excluded classes get dropped), keyword filtering, sub-event relabeling, and
classification with the shipped lexicon backends plus gazetteer-based
location resolution.
"""

import json

from crisisbrief import (
    Gazetteer,
    GroundTruthBackend,
    LexiconBackend,
    Place,
    PostFilter,
    enrich_corpus,
    filter_posts,
    ingest_posts,
    relabel_subevents,
)
from crisisbrief.assets import load_lexicon
from crisisbrief.classify import EnrichmentConfig

RAW_POSTS = [
    {"id": "t1", "text": "My heart goes out to everyone who lost homes in Paradise, stay safe",
     "source_labels": {"disaster_event": "sympathy_and_support"}},
    {"id": "t2", "text": "Power lines down and roads blocked across Paradise, crews assessing damage",
     "source_labels": {"disaster_event": "infrastructure_and_utility_damage"}},
    {"id": "t3", "text": "Volunteers organizing wildfire donation drives in Chico tonight",
     "source_labels": {"disaster_event": "rescue_volunteering_or_donation_effort"}},
    {"id": "t4", "text": "no idea what is going on out there honestly",
     "source_labels": {"disaster_event": "dont_know_cant_judge"}},
    {"id": "t5", "text": "Death toll rises as crews search the ruins of Paradise",
     "source_labels": {"disaster_event": "injured_or_dead_people"}},
]

GAZETTEER = Gazetteer(
    [
        Place("United States", "country"),
        Place("California", "region", ("United States",)),
        Place("Paradise", "city", ("California", "United States")),
        Place("Chico", "city", ("California", "United States")),
    ]
)


def main() -> None:
    source = "".join(json.dumps(r) + "\n" for r in RAW_POSTS)
    result = ingest_posts(source, "jsonl", event_name="Camp Fire", area="Northern California")
    print(f"ingested {len(result.corpus)} posts, dropped {result.dropped} excluded-class records")

    wildfire_only = filter_posts(result.corpus, PostFilter(keywords=("wildfire",)))
    print(f"keyword filter 'wildfire' keeps: {[p.id for p in wildfire_only]}")

    corpus = relabel_subevents(result.corpus)
    print("sub-event labels:", {p.id: p.source_labels["sub_event"] for p in corpus})

    registry = {
        "disaster_event": GroundTruthBackend(),
        "sub_event": GroundTruthBackend(),
        "sentiment": LexiconBackend(load_lexicon("sentiment")),
        "emotion": LexiconBackend(load_lexicon("emotion")),
        "stakeholder": LexiconBackend(load_lexicon("stakeholder")),
    }
    enriched = enrich_corpus(
        corpus,
        ["disaster_event", "sub_event", "sentiment", "emotion", "stakeholder", "location"],
        registry,
        gazetteer=GAZETTEER,
        config=EnrichmentConfig(area_hint="California"),
    )

    print("\npost classifications across the analyzed dimensions:")
    for e in enriched:
        location = e.locations[0].surface if e.locations else "-"
        completeness = e.locations[0].completeness if e.locations else ""
        print(
            f"  {e.post.id}: sentiment={e.argmax('sentiment')}"
            f" emotion={e.argmax('emotion')}"
            f" event={e.argmax('disaster_event')}"
            f" sub_event={e.argmax('sub_event')}"
            f" location={location} {completeness}"
        )


if __name__ == "__main__":
    main()
