from __future__ import annotations

from crisisbrief import Gazetteer, Place, Post, extract_locations
from crisisbrief.gazetteer import _span_tokens

COMPLETENESS_RANK = {"surface_only": 0, "partial": 1, "full": 2}


class TestTokenSpans:
    def test_hashtag_camel_case_split(self):
        tokens = [t for t, _, _ in _span_tokens("rubble. #ItalyEarthquake")]
        assert tokens == ["rubble", "italy", "earthquake"]

    def test_diacritics_kept(self):
        tokens = [t for t, _, _ in _span_tokens("at Caffè Strada now")]
        assert tokens == ["at", "caffè", "strada", "now"]


class TestExtractLocations:
    def test_italy_partial(self, gazetteer):
        post = Post("1", "#BREAKING: an 8 y/o girl was pulled out alive from the rubble. #ItalyEarthquake")
        mentions = extract_locations(post, gazetteer)
        assert len(mentions) == 1
        mention = mentions[0]
        assert mention.surface == "Italy"
        assert mention.component("country") == "Italy"
        assert mention.completeness == "partial"

    def test_full_venue_chain(self, gazetteer):
        post = Post("1", "at Caffè Strada now, power is out")
        mentions = extract_locations(post, gazetteer)
        assert len(mentions) == 1
        mention = mentions[0]
        assert mention.surface == "Caffè Strada"
        assert mention.component("venue") == "Caffè Strada"
        assert mention.component("city") == "Berkeley"
        assert mention.component("country") == "United States"
        assert mention.completeness == "full"
        kinds = [kind for kind, _ in mention.resolved]
        order = ["venue", "street", "district", "city", "region", "country"]
        assert kinds == sorted(kinds, key=order.index)

    def test_no_place_tokens(self, gazetteer):
        post = Post("1", "thoughts and hugs to everyone tonight")
        assert extract_locations(post, gazetteer) == []

    def test_longest_match_wins(self, gazetteer):
        post = Post("1", "fires burning across Northern California tonight")
        mentions = extract_locations(post, gazetteer)
        assert mentions[0].surface == "Northern California"

    def test_one_mention_per_distinct_place(self, gazetteer):
        post = Post("1", "Paradise is gone. Paradise will rebuild.")
        mentions = extract_locations(post, gazetteer)
        assert len(mentions) == 1

    def test_monotonic_completeness_when_entries_added(self):
        base = Gazetteer([Place("Paradise", "city", ())])
        post = Post("1", "evacuations underway in Paradise")
        before = extract_locations(post, base)[0]

        richer = Gazetteer(
            [
                Place("Paradise", "city", ("California", "United States")),
                Place("California", "region", ("United States",)),
                Place("United States", "country", ()),
            ]
        )
        after = extract_locations(post, richer)[0]
        assert COMPLETENESS_RANK[after.completeness] >= COMPLETENESS_RANK[before.completeness]
        assert after.completeness == "full"

    def test_ambiguity_prefers_hinted_chain(self):
        gaz = Gazetteer(
            [
                Place("Springfield", "city", ("Illinois", "United States")),
                Place("Springfield", "city", ("Massachusetts", "United States")),
                Place("Illinois", "region", ("United States",)),
                Place("Massachusetts", "region", ("United States",)),
                Place("United States", "country", ()),
            ]
        )
        post = Post("1", "flooding reported in Springfield")
        hinted = extract_locations(post, gaz, area_hint="Massachusetts")
        assert hinted[0].component("region") == "Massachusetts"
        unhinted = extract_locations(post, gaz)
        assert unhinted[0].component("region") == "Illinois"

    def test_ambiguity_prefers_more_complete_chain(self):
        gaz = Gazetteer(
            [
                Place("Paradise", "city", ()),
                Place("Paradise", "city", ("California", "United States")),
                Place("California", "region", ("United States",)),
                Place("United States", "country", ()),
            ]
        )
        post = Post("1", "Paradise under evacuation")
        assert extract_locations(post, gaz)[0].completeness == "full"

    def test_unresolvable_parent_omitted(self):
        gaz = Gazetteer([Place("Riverton", "city", ("Atlantis",))])
        post = Post("1", "Riverton bridge closed")
        mention = extract_locations(post, gaz)[0]
        assert mention.completeness == "partial"
        assert mention.resolved == (("city", "Riverton"),)
