from __future__ import annotations

import json

import pytest

from crisisbrief import (
    Corpus,
    MockChatGateway,
    Post,
    Report,
    ReportRequest,
    ScriptedChatGateway,
    compare_modes,
    coverage_judge,
    judge_quality,
)
from crisisbrief.errors import ComparisonError, MetricError, ValidationError
from crisisbrief.judging import QUALITY_CRITERIA


def make_report(body: str, mode: str = "basic", corpus_id: str = "corp") -> Report:
    request = ReportRequest(
        mode=mode,
        report_kind="topics",
        event="Camp Fire",
        area="NC",
        date_range="2018-11-08 to 2018-11-25",
        word_limit=400,
    )
    return Report(
        id=f"{mode}-r",
        request=request,
        body=body,
        input_manifest={"mode": mode, "corpus_id": corpus_id, "prompt_hash": "x"},
        created_at="2026-01-01T00:00:00+00:00",
    )


class TestCoverageJudge:
    items = ["evacuation routes", "shelter capacity", "water supplies", "power outage"]

    def test_all_true_coverage_one(self):
        gateway = ScriptedChatGateway([json.dumps([True] * 4)] * 10)
        score = coverage_judge("report body", self.items, gateway, repetitions=10, max_workers=1)
        assert score.value == 1.0
        assert len(score.runs) == 10

    def test_alternating_half_coverage(self):
        gateway = ScriptedChatGateway([json.dumps([True, False, True, False])] * 10)
        score = coverage_judge("report body", self.items, gateway, repetitions=10, max_workers=1)
        # analytic mean: each run covers 2 of 4
        assert score.value == 0.5

    def test_repetitions_are_isolated_stateless_calls(self):
        gateway = ScriptedChatGateway([json.dumps([True] * 4)] * 10)
        coverage_judge("report body", self.items, gateway, repetitions=10, max_workers=1)
        assert len(gateway.calls) == 10
        for call in gateway.calls:
            # single user message, no accumulated history, no mode hints
            assert [m["role"] for m in call] == ["user"]
            lowered = call[0]["content"].lower()
            assert "basic" not in lowered and "advanced" not in lowered

    def test_unparsable_run_retried_then_excluded(self):
        responses = ["not json", "still not json"] + [json.dumps([True] * 4)] * 9
        gateway = ScriptedChatGateway(responses)
        score = coverage_judge("report", self.items, gateway, repetitions=10, max_workers=1)
        invalid = [r for r in score.runs if not r["valid"]]
        assert len(invalid) == 1
        assert score.value == 1.0  # mean over the 9 valid runs

    def test_wrong_length_array_is_invalid(self):
        gateway = ScriptedChatGateway([json.dumps([True, False])] * 20)
        with pytest.raises(MetricError):
            coverage_judge("report", self.items, gateway, repetitions=10, max_workers=1)

    def test_all_invalid_is_metric_error(self):
        gateway = ScriptedChatGateway(["nope"] * 20)
        with pytest.raises(MetricError):
            coverage_judge("report", self.items, gateway, repetitions=10, max_workers=1)

    def test_no_items_rejected(self):
        with pytest.raises(ValidationError):
            coverage_judge("report", [], ScriptedChatGateway([]), repetitions=10)

    def test_containment_mock_judges_by_string_presence(self):
        gateway = MockChatGateway()
        body = "The report discusses evacuation routes and water supplies in detail."
        score = coverage_judge(body, self.items, gateway, repetitions=10, max_workers=1)
        assert score.value == 0.5  # 2 of 4 items appear verbatim

    def test_concurrent_workers_match_serial(self):
        body = "evacuation routes and shelter capacity"
        serial = coverage_judge(body, self.items, MockChatGateway(), repetitions=10, max_workers=1)
        parallel = coverage_judge(body, self.items, MockChatGateway(), repetitions=10, max_workers=4)
        assert serial.value == parallel.value


class TestJudgeQuality:
    def test_all_fives(self):
        gateway = ScriptedChatGateway([json.dumps({c: 5 for c in QUALITY_CRITERIA})])
        score = judge_quality("report", "source", gateway)
        assert score.value == {c: 5.0 for c in QUALITY_CRITERIA}

    def test_out_of_range_rejected(self):
        payload = {c: 4 for c in QUALITY_CRITERIA} | {"quality": 6}
        gateway = ScriptedChatGateway([json.dumps(payload)])
        with pytest.raises(ValidationError):
            judge_quality("report", "source", gateway)

    def test_passthrough_fixture(self):
        payload = dict(zip(QUALITY_CRITERIA, (4, 3, 5, 4, 4)))
        gateway = ScriptedChatGateway([json.dumps(payload)])
        score = judge_quality("report", "source", gateway)
        assert score.value == {k: float(v) for k, v in payload.items()}

    def test_missing_criterion_rejected(self):
        gateway = ScriptedChatGateway([json.dumps({"informative": 4})])
        with pytest.raises(ValidationError):
            judge_quality("report", "source", gateway)


class TestCompareModes:
    def corpus(self) -> Corpus:
        return Corpus(
            corpus_id="corp",
            posts=[
                Post("1", "evacuation routes blocked by fire"),
                Post("2", "shelter capacity exceeded in chico"),
                Post("3", "water supplies running low"),
            ],
        )

    items = ["evacuation routes", "shelter capacity", "water supplies"]

    def test_identical_reports_identical_rows(self):
        body = "evacuation routes and shelter capacity and water supplies"
        table = compare_modes(
            make_report(body, "basic"),
            make_report(body, "advanced"),
            self.corpus(),
            self.items,
            MockChatGateway(),
            repetitions=4,
        )
        for _, basic, advanced in table.rows:
            assert basic == advanced

    def test_corpus_mismatch_rejected(self):
        with pytest.raises(ComparisonError):
            compare_modes(
                make_report("a", "basic", corpus_id="corp"),
                make_report("b", "advanced", corpus_id="other"),
                self.corpus(),
                self.items,
                MockChatGateway(),
                repetitions=2,
            )

    def test_advanced_with_wider_coverage_scores_higher(self):
        basic = make_report("only evacuation routes discussed")
        advanced = make_report(
            "evacuation routes and shelter capacity and water supplies", "advanced"
        )
        table = compare_modes(
            basic, advanced, self.corpus(), self.items, MockChatGateway(), repetitions=10
        )
        assert table.value("coverage", "advanced") > table.value("coverage", "basic")

    def test_layout_and_rendering(self):
        body = "evacuation routes"
        table = compare_modes(
            make_report(body, "basic"),
            make_report(body, "advanced"),
            self.corpus(),
            self.items,
            MockChatGateway(),
            repetitions=2,
        )
        data = table.to_dict()
        metrics = [row["metric"] for row in data["rows"]]
        for expected in ("rouge1", "rouge2", "rougeL", "tfidf_cosine", "embedding_cosine", "coverage"):
            assert expected in metrics
        text = table.render_text()
        assert text.splitlines()[0].startswith("Metric")
        assert len(text.splitlines()) == len(metrics) + 1
