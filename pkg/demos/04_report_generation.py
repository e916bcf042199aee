"""Walkthrough: generate basic and advanced reports, then chat over one.

Uses the deterministic mock gateway so everything runs offline. The basic
mode attaches serialized posts under a token budget; the advanced mode
inlines a representative sample and resolves bibliographic [n] markers
back to source posts. A grounded chat session answers from the report only.
"""

from crisisbrief import (
    ClassDistribution,
    Corpus,
    EnrichedPost,
    MockChatGateway,
    Post,
    ReportRequest,
    SamplingSpec,
    TokenBudget,
    build_sample,
    chat_turn,
    create_chat_session,
    generate_report,
)

TEXTS = [
    "evacuation routes jammed leaving paradise, cars stuck for hours",
    "roads blocked by downed lines, crews rerouting traffic near paradise",
    "shelter at the fairgrounds over capacity, more cots needed",
    "looting fears rising in evacuated neighborhoods of paradise",
    "search teams still looking for missing residents in paradise",
    "donations pouring in for displaced families across the county",
]


def enriched_posts() -> list[EnrichedPost]:
    out = []
    for i, text in enumerate(TEXTS):
        confidence = 0.95 - i * 0.05
        probs = {"subevent_post": confidence, "non_subevent_post": 1 - confidence}
        out.append(
            EnrichedPost(
                post=Post(f"p{i}", text),
                distributions={"sub_event": ClassDistribution("sub_event", probs)},
            )
        )
    return out


def main() -> None:
    posts = enriched_posts()
    corpus = Corpus(
        corpus_id="demo",
        event_name="Camp Fire",
        area="Northern California",
        posts=[p.post for p in posts],
    )
    gateway = MockChatGateway()
    budget = TokenBudget(context_cap=4096, output_reserve=512)

    basic_request = ReportRequest(
        mode="basic", report_kind="city_subevents", event="Camp Fire",
        area="Northern California", date_range="2018-11-08 to 2018-11-25",
        word_limit=300, city="Paradise",
    )
    basic = generate_report(basic_request, corpus, gateway, budget, corpus_id="demo")
    manifest = basic.input_manifest
    print(f"basic report: {manifest['included']} posts attached, {manifest['truncated']} truncated")

    sample = build_sample(
        posts, SamplingSpec(dimensions=(("sub_event", ("subevent_post",)),), target_size=4)
    )
    advanced_request = ReportRequest(
        mode="advanced", report_kind="city_subevents", event="Camp Fire",
        area="Northern California", date_range="2018-11-08 to 2018-11-25",
        word_limit=300, city="Paradise",
    )
    advanced = generate_report(advanced_request, (sample, posts), gateway, budget, corpus_id="demo")
    print(f"advanced report: inlined sample {list(advanced.input_manifest['post_ids'])}")
    print("references resolved from [n] markers:")
    for ref in advanced.references:
        print(f"  [{ref.marker}] {ref.post_id}: {ref.excerpt[:60]}...")

    session = create_chat_session(advanced, [p.post for p in posts])
    answer = chat_turn(session, "what happened with the evacuation routes?", gateway, budget)
    print(f"\nchat turn 1 answer: {answer}")
    print(f"session now holds {len(session.turns)} turn(s); grounding is fixed")


if __name__ == "__main__":
    main()
