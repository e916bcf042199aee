"""Walkthrough: score reports with text metrics and the judge protocols.

Shows the n-gram and lexical metrics on small pairs, runs the repeated
coverage-judge protocol with the deterministic containment judge, and
renders a basic-versus-advanced comparison table.
"""

from crisisbrief import (
    Corpus,
    MockChatGateway,
    Post,
    Report,
    ReportRequest,
    compare_modes,
    coverage_judge,
    rouge_l,
    rouge_n,
    tfidf_cosine,
)

ITEMS = ["evacuation routes", "shelter capacity", "water supplies", "missing residents"]


def stub_report(body: str, mode: str) -> Report:
    request = ReportRequest(
        mode=mode, report_kind="topics", event="Camp Fire", area="NC",
        date_range="2018-11", word_limit=200,
    )
    return Report(
        id=f"{mode}-demo", request=request, body=body,
        input_manifest={"mode": mode, "corpus_id": "demo", "prompt_hash": "demo"},
        created_at="2026-01-01T00:00:00+00:00",
    )


def main() -> None:
    print("n-gram overlap on a close pair:")
    candidate, reference = "the cat sat on the mat", "the cat ran to the mat"
    for label, score in (
        ("rouge-1", rouge_n(candidate, reference, 1)),
        ("rouge-2", rouge_n(candidate, reference, 2)),
        ("rouge-L", rouge_l(candidate, reference)),
    ):
        print(f"  {label}: P={score.precision:.3f} R={score.recall:.3f} F1={score.f1:.3f}")

    lexical = tfidf_cosine("evacuations ordered near the ridge", "evacuation order issued for ridge residents")
    print(f"tf-idf cosine after stop words and stemming: {lexical.score:.3f}")

    body = "The report covers evacuation routes and shelter capacity around Paradise."
    coverage = coverage_judge(body, ITEMS, MockChatGateway(), repetitions=10)
    print(f"\ncoverage over {len(ITEMS)} items, 10 isolated judge runs: {coverage.value:.2f}")
    print(f"  ({coverage.preprocessing})")

    corpus = Corpus(
        corpus_id="demo",
        posts=[
            Post("1", "evacuation routes jammed near paradise"),
            Post("2", "shelter capacity exceeded at the fairgrounds"),
            Post("3", "water supplies running low for evacuees"),
            Post("4", "families searching for missing residents"),
        ],
    )
    basic = stub_report("Citizens discussed evacuation routes during the fire.", "basic")
    advanced = stub_report(
        "Reports covered evacuation routes, shelter capacity, water supplies, and missing residents.",
        "advanced",
    )
    table = compare_modes(basic, advanced, corpus, ITEMS, MockChatGateway(), repetitions=10)
    print("\nbasic vs advanced:")
    print(table.render_text())


if __name__ == "__main__":
    main()
