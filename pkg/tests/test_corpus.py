from __future__ import annotations

import json
from datetime import datetime, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crisisbrief import (
    Corpus,
    DisasterTaxonomy,
    Post,
    PostFilter,
    balance_by_undersampling,
    filter_posts,
    ingest_posts,
    relabel_subevents,
    serialize_corpus,
)
from crisisbrief.corpus import HUMAID_CLASSES, NON_SUBEVENT_POST, SUBEVENT_POST, tokenize
from crisisbrief.errors import SchemaError, ValidationError


def jsonl(*records) -> str:
    return "".join(json.dumps(r) + "\n" for r in records)


class TestIngest:
    def test_empty_stream(self):
        result = ingest_posts("", "jsonl")
        assert len(result.corpus) == 0
        assert result.dropped == 0

    def test_excluded_label_dropped(self):
        source = jsonl(
            {"id": "a", "text": "fine post", "source_labels": {"disaster_event": "caution_and_advice"}},
            {"id": "b", "text": "unsure", "source_labels": {"disaster_event": "dont_know_cant_judge"}},
        )
        result = ingest_posts(source, "jsonl")
        assert [p.id for p in result.corpus] == ["a"]
        assert result.dropped == 1
        assert result.dropped_labels == {"dont_know_cant_judge": 1}

    def test_duplicate_id_names_offender(self):
        source = jsonl(
            {"id": "a", "text": "one"},
            {"id": "b", "text": "two"},
            {"id": "a", "text": "three"},
        )
        with pytest.raises(SchemaError, match="'a'"):
            ingest_posts(source, "jsonl")

    def test_unmapped_required_field(self):
        with pytest.raises(SchemaError, match="text"):
            ingest_posts("id\n1\n", "csv", {"id": "id"})

    def test_malformed_record_names_line(self):
        source = '{"id": "a", "text": "ok"}\nnot json\n'
        with pytest.raises(SchemaError, match="line 2"):
            ingest_posts(source, "jsonl")

    def test_nested_value_rejected(self):
        source = jsonl({"id": "a", "text": {"nested": "object"}})
        with pytest.raises(SchemaError, match="line 1"):
            ingest_posts(source, "jsonl")

    def test_csv_with_field_map(self):
        source = "tweet_id,content,likes,label\n1,hello world,3,caution_and_advice\n"
        result = ingest_posts(
            source,
            "csv",
            {
                "tweet_id": "id",
                "content": "text",
                "likes": "engagement.likes",
                "label": "source_labels.disaster_event",
            },
        )
        post = result.corpus.posts[0]
        assert post.id == "1"
        assert post.engagement == {"likes": 3}
        assert post.source_labels == {"disaster_event": "caution_and_advice"}

    def test_tsv(self):
        source = "id\ttext\nx\tsome text\n"
        result = ingest_posts(source, "tsv")
        assert result.corpus.posts[0].text == "some text"

    def test_ingestion_order_preserved(self, campfire_corpus):
        assert len(campfire_corpus) == 200
        raw_ids = []
        for line in (serialize_corpus(campfire_corpus)).splitlines():
            raw_ids.append(json.loads(line)["id"])
        assert raw_ids == [p.id for p in campfire_corpus]

    def test_round_trip(self, campfire_corpus):
        text = serialize_corpus(campfire_corpus)
        again = ingest_posts(
            text, "jsonl", event_name=campfire_corpus.event_name, area=campfire_corpus.area
        )
        assert again.corpus.posts == campfire_corpus.posts
        assert again.dropped == 0


class TestFilter:
    @pytest.fixture()
    def small_corpus(self) -> Corpus:
        ts = lambda d: datetime(2018, 11, d, tzinfo=timezone.utc)
        posts = [
            Post("1", "Wildfire spreading fast", created_at=ts(8), engagement={"likes": 5}),
            Post("2", "Stay safe everyone", created_at=ts(9), engagement={"likes": 0}),
            Post("3", "the wildfire reached the ridge", created_at=ts(10)),
            Post("4", "wildfires everywhere", created_at=ts(11)),
            Post("5", "donations needed", created_at=ts(12), engagement={"likes": 2}),
        ]
        return Corpus(corpus_id="c", posts=posts)

    def test_empty_filter_is_identity(self, small_corpus):
        assert filter_posts(small_corpus, PostFilter()).posts == small_corpus.posts

    def test_keyword_whole_token(self, small_corpus):
        # linear-scan oracle: posts whose token set contains "wildfire"
        expected = [p.id for p in small_corpus if "wildfire" in tokenize(p.text)]
        assert expected == ["1", "3"]
        got = filter_posts(small_corpus, PostFilter(keywords=("wildfire",)))
        assert [p.id for p in got] == expected

    def test_date_range_excluding_all(self, small_corpus):
        window = (
            datetime(2017, 1, 1, tzinfo=timezone.utc),
            datetime(2017, 1, 2, tzinfo=timezone.utc),
        )
        assert len(filter_posts(small_corpus, PostFilter(date_range=window))) == 0

    def test_inverted_range_rejected(self, small_corpus):
        window = (
            datetime(2018, 11, 12, tzinfo=timezone.utc),
            datetime(2018, 11, 8, tzinfo=timezone.utc),
        )
        with pytest.raises(ValidationError):
            filter_posts(small_corpus, PostFilter(date_range=window))

    def test_min_engagement(self, small_corpus):
        got = filter_posts(small_corpus, PostFilter(min_engagement=2))
        assert [p.id for p in got] == ["1", "5"]

    def test_conjunction(self, small_corpus):
        got = filter_posts(
            small_corpus, PostFilter(keywords=("wildfire",), min_engagement=1)
        )
        assert [p.id for p in got] == ["1"]

    @given(keywords=st.lists(st.sampled_from(["wildfire", "safe", "donations", "zzz"]), max_size=3))
    @settings(max_examples=25, deadline=None)
    def test_idempotent(self, keywords):
        posts = [
            Post("1", "Wildfire spreading fast"),
            Post("2", "Stay safe everyone"),
            Post("3", "donations needed now"),
        ]
        corpus = Corpus(corpus_id="c", posts=posts)
        f = PostFilter(keywords=tuple(keywords))
        once = filter_posts(corpus, f)
        twice = filter_posts(once, f)
        assert once.posts == twice.posts


class TestRelabel:
    def make(self, labels):
        posts = [
            Post(f"p{i}", "text here", source_labels={"disaster_event": label})
            for i, label in enumerate(labels)
        ]
        return Corpus(corpus_id="c", posts=posts)

    def test_subevent_classes_map_to_subevent_post(self):
        corpus = self.make(["infrastructure_and_utility_damage"])
        out = relabel_subevents(corpus)
        assert out.posts[0].source_labels["sub_event"] == SUBEVENT_POST

    def test_other_classes_map_to_non_subevent(self):
        corpus = self.make(["sympathy_and_support"])
        out = relabel_subevents(corpus)
        assert out.posts[0].source_labels["sub_event"] == NON_SUBEVENT_POST

    def test_empty_corpus(self):
        out = relabel_subevents(Corpus(corpus_id="c"))
        assert len(out) == 0

    def test_missing_label_lists_ids(self):
        corpus = Corpus(corpus_id="c", posts=[Post("naked", "no label")])
        with pytest.raises(SchemaError, match="naked"):
            relabel_subevents(corpus)

    def test_partition(self, campfire_corpus):
        out = relabel_subevents(campfire_corpus)
        labels = [p.source_labels["sub_event"] for p in out]
        assert labels.count(SUBEVENT_POST) + labels.count(NON_SUBEVENT_POST) == len(campfire_corpus)
        assert len(out) == len(campfire_corpus)

    def test_exactly_four_classes_are_subevents(self):
        taxonomy = DisasterTaxonomy()
        corpus = self.make(list(HUMAID_CLASSES))
        out = relabel_subevents(corpus, taxonomy)
        subevent_sources = {
            p.source_labels["disaster_event"]
            for p in out
            if p.source_labels["sub_event"] == SUBEVENT_POST
        }
        assert subevent_sources == set(taxonomy.subevent_classes)
        assert len(subevent_sources) == 4


class TestBalance:
    def make_corpus(self, counts: dict[str, int]) -> Corpus:
        posts = []
        serial = 0
        for cls, count in counts.items():
            for _ in range(count):
                serial += 1
                posts.append(Post(f"p{serial}", "w", source_labels={"k": cls}))
        return Corpus(corpus_id="c", posts=posts)

    def test_nine_classes_at_1200(self):
        corpus = self.make_corpus({cls: 1250 for cls in HUMAID_CLASSES})
        out = balance_by_undersampling(corpus, "k", 1200, seed=1)
        assert len(out) == 10_800
        histogram = {}
        for post in out:
            histogram[post.source_labels["k"]] = histogram.get(post.source_labels["k"], 0) + 1
        assert set(histogram.values()) == {1200}

    def test_already_balanced_identity(self):
        corpus = self.make_corpus({"a": 3, "b": 3})
        out = balance_by_undersampling(corpus, "k", 3, seed=9)
        assert out.posts == corpus.posts

    def test_underfull_class_named(self):
        corpus = self.make_corpus({"a": 1199, "b": 1300})
        with pytest.raises(ValidationError, match="'a'.*1199"):
            balance_by_undersampling(corpus, "k", 1200, seed=0)

    def test_same_seed_deterministic(self):
        corpus = self.make_corpus({"a": 10, "b": 20, "c": 7})
        one = balance_by_undersampling(corpus, "k", 5, seed=13)
        two = balance_by_undersampling(corpus, "k", 5, seed=13)
        assert one.posts == two.posts
        other = balance_by_undersampling(corpus, "k", 5, seed=14)
        assert {p.id for p in other} != {p.id for p in one}
