from __future__ import annotations

import itertools
import math
from collections import Counter
from functools import lru_cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crisisbrief import (
    Corpus,
    HashingEmbedder,
    Post,
    ScriptedEmbeddingGateway,
    embedding_cosine,
    reference_text,
    rouge_l,
    rouge_n,
    tfidf_cosine,
)
from crisisbrief.corpus import tokenize
from crisisbrief.errors import GatewayError, MetricError, ValidationError
from crisisbrief.stemming import porter_stem


# ---------------------------------------------------------------------------
# independent oracles
# ---------------------------------------------------------------------------

def rouge_n_oracle(cand: tuple[str, ...], ref: tuple[str, ...], n: int):
    """Clipped overlap computed with explicit lists, no Counter arithmetic."""
    cand_grams = [cand[i : i + n] for i in range(len(cand) - n + 1)]
    ref_grams = [ref[i : i + n] for i in range(len(ref) - n + 1)]
    if not cand_grams or not ref_grams:
        return (0.0, 0.0, 0.0)
    overlap = 0
    for gram in set(cand_grams):
        overlap += min(cand_grams.count(gram), ref_grams.count(gram))
    p = overlap / len(cand_grams)
    r = overlap / len(ref_grams)
    f = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return (p, r, f)


def lcs_by_enumeration(cand: tuple[str, ...], ref: tuple[str, ...]) -> int:
    """Brute force: longest subsequence of cand that embeds in ref."""
    best = 0
    for mask in range(1 << len(cand)):
        sub = [cand[i] for i in range(len(cand)) if mask >> i & 1]
        it = iter(ref)
        if all(tok in it for tok in sub):
            best = max(best, len(sub))
    return best


@lru_cache(maxsize=None)
def lcs_recursive(cand: tuple[str, ...], ref: tuple[str, ...]) -> int:
    if not cand or not ref:
        return 0
    if cand[-1] == ref[-1]:
        return 1 + lcs_recursive(cand[:-1], ref[:-1])
    return max(lcs_recursive(cand[:-1], ref), lcs_recursive(cand, ref[:-1]))


def rouge_l_oracle(cand, ref, lcs_fn):
    if not cand or not ref:
        return (0.0, 0.0, 0.0)
    lcs = lcs_fn(cand, ref)
    p, r = lcs / len(cand), lcs / len(ref)
    f = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return (p, r, f)


def all_sequences(alphabet, max_len):
    for length in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=length)


class TestRougeExamples:
    def test_rouge1_spec_pair(self):
        got = rouge_n("the cat sat", "the cat ran", 1)
        assert (got.precision, got.recall, got.f1) == pytest.approx((2 / 3, 2 / 3, 2 / 3))

    def test_rouge2_spec_pair(self):
        got = rouge_n("the cat sat", "the cat ran", 2)
        assert (got.precision, got.recall, got.f1) == pytest.approx((0.5, 0.5, 0.5))

    def test_rouge_l_spec_pair(self):
        got = rouge_l("a b c d", "a c b d")
        assert (got.precision, got.recall) == pytest.approx((0.75, 0.75))

    def test_identity(self):
        for fn in (lambda: rouge_n("same text here", "same text here", 1),
                   lambda: rouge_n("same text here", "same text here", 2),
                   lambda: rouge_l("same text here", "same text here")):
            got = fn()
            assert got.precision == got.recall == got.f1 == 1.0

    def test_empty_candidate(self):
        assert rouge_l("", "anything").f1 == 0.0
        assert rouge_n("", "anything", 1).f1 == 0.0

    def test_invalid_n(self):
        with pytest.raises(ValidationError):
            rouge_n("a", "b", 3)

    def test_tokenization_case_and_punct(self):
        got = rouge_n("The CAT, sat!", "the cat sat", 1)
        assert got.f1 == 1.0


class TestRougeOracles:
    def test_exhaustive_all_pairs_short(self):
        # every pair of sequences up to length 4 on a 3-symbol alphabet,
        # LCS checked against full subsequence enumeration
        alphabet = ("a", "b", "c")
        space = list(all_sequences(alphabet, 4))
        for cand in space:
            cand_text = " ".join(cand)
            for ref in space:
                ref_text = " ".join(ref)
                for n in (1, 2):
                    got = rouge_n(cand_text, ref_text, n)
                    expect = rouge_n_oracle(cand, ref, n)
                    assert (got.precision, got.recall, got.f1) == pytest.approx(expect, abs=1e-12)
                got = rouge_l(cand_text, ref_text)
                expect = rouge_l_oracle(cand, ref, lcs_by_enumeration)
                assert (got.precision, got.recall, got.f1) == pytest.approx(expect, abs=1e-12)

    @given(
        cand=st.lists(st.sampled_from(["a", "b", "c"]), max_size=8),
        ref=st.lists(st.sampled_from(["a", "b", "c"]), max_size=8),
    )
    @settings(max_examples=300, deadline=None)
    def test_longer_sequences_against_memo_oracle(self, cand, ref):
        cand, ref = tuple(cand), tuple(ref)
        got = rouge_l(" ".join(cand), " ".join(ref))
        expect = rouge_l_oracle(cand, ref, lcs_recursive)
        assert (got.precision, got.recall, got.f1) == pytest.approx(expect, abs=1e-12)

    @given(
        cand=st.lists(st.sampled_from(["a", "b", "c"]), max_size=8),
        extra=st.lists(st.sampled_from(["a", "b", "c"]), min_size=1, max_size=4),
        ref=st.lists(st.sampled_from(["a", "b", "c"]), min_size=1, max_size=8),
    )
    @settings(max_examples=150, deadline=None)
    def test_recall_monotone_in_reference_matching_appends(self, cand, extra, ref):
        # appending reference tokens to the candidate never decreases recall
        base = rouge_n(" ".join(cand), " ".join(ref), 1)
        grown = rouge_n(" ".join(cand + [ref[0]] * len(extra)), " ".join(ref), 1)
        assert grown.recall >= base.recall


class TestTfidfCosine:
    def test_identity(self):
        got = tfidf_cosine("fires burned through the ridge", "fires burned through the ridge")
        assert got.score == pytest.approx(1.0)
        assert not got.degenerate

    def test_disjoint(self):
        got = tfidf_cosine("alpha bravo charlie", "delta echo foxtrot")
        assert got.score == 0.0

    def test_degenerate_input_flagged(self):
        got = tfidf_cosine("the and of", "real words here")
        assert got.score == 0.0
        assert got.degenerate

    def test_matches_hand_rolled_oracle(self):
        candidate = "firefighters rescued residents from burning homes"
        reference = "residents evacuated homes while firefighters battled flames"

        def vector(text):
            stops = {"the", "and", "of", "from", "while"}
            return Counter(porter_stem(t) for t in tokenize(text) if t not in stops)

        a, b = vector(candidate), vector(reference)
        vocab = set(a) | set(b)
        idf = {t: math.log(3 / (1 + (t in a) + (t in b))) + 1 for t in vocab}
        va = {t: a.get(t, 0) * idf[t] for t in vocab}
        vb = {t: b.get(t, 0) * idf[t] for t in vocab}
        dot = sum(va[t] * vb[t] for t in vocab)
        expected = dot / (
            math.sqrt(sum(v * v for v in va.values())) * math.sqrt(sum(v * v for v in vb.values()))
        )
        got = tfidf_cosine(candidate, reference)
        assert got.score == pytest.approx(expected, abs=1e-9)

    def test_stemming_conflates_suffix_variants(self):
        got = tfidf_cosine("evacuations ordered", "evacuation order")
        assert got.score == pytest.approx(1.0)


class TestEmbeddingCosine:
    def test_identity_under_hashing_embedder(self):
        text = "smoke over the valley"
        assert embedding_cosine(text, text, HashingEmbedder()) == pytest.approx(1.0)

    def test_orthogonal_scripted_vectors(self):
        gateway = ScriptedEmbeddingGateway({"a": [1.0, 0.0], "b": [0.0, 1.0]})
        assert embedding_cosine("a", "b", gateway) == 0.0

    def test_known_cosine_scripted(self):
        # dot-product oracle: cos = 0.6 for these unit vectors
        gateway = ScriptedEmbeddingGateway({"a": [0.6, 0.8], "b": [1.0, 0.0]})
        assert embedding_cosine("a", "b", gateway) == pytest.approx(0.6)

    def test_negative_cosine_clamped_to_zero(self):
        gateway = ScriptedEmbeddingGateway({"a": [1.0, 0.0], "b": [-1.0, 0.0]})
        assert embedding_cosine("a", "b", gateway) == 0.0

    def test_gateway_failure_is_metric_error(self):
        class Down:
            def embed(self, texts):
                raise GatewayError("no embeddings today")

        with pytest.raises(MetricError):
            embedding_cosine("a", "b", Down())


class TestPorterStemmer:
    @pytest.mark.parametrize(
        ("word", "stem"),
        [
            ("caresses", "caress"),
            ("ponies", "poni"),
            ("ties", "ti"),
            ("caress", "caress"),
            ("cats", "cat"),
            ("feed", "feed"),
            ("agreed", "agre"),
            ("plastered", "plaster"),
            ("motoring", "motor"),
            ("sing", "sing"),
            ("sized", "size"),
            ("hopping", "hop"),
            ("tanned", "tan"),
            ("falling", "fall"),
            ("hissing", "hiss"),
            ("failing", "fail"),
            ("filing", "file"),
            ("happy", "happi"),
            ("sky", "sky"),
            ("generalizations", "gener"),
            ("oscillators", "oscil"),
            ("hopefulness", "hope"),
            ("rate", "rate"),
            ("roll", "roll"),
            ("evacuations", "evacu"),
            ("firefighters", "firefight"),
        ],
    )
    def test_known_pairs(self, word, stem):
        assert porter_stem(word) == stem

    def test_related_words_conflate(self):
        groups = [
            ("connect", "connected", "connecting", "connection", "connections"),
            ("relate", "related", "relating"),
        ]
        for group in groups:
            stems = {porter_stem(w) for w in group}
            assert len(stems) == 1


class TestRangesFuzz:
    @given(candidate=st.text(max_size=300), reference=st.text(max_size=300))
    @settings(max_examples=120, deadline=None)
    def test_all_metrics_respect_ranges(self, candidate, reference):
        for n in (1, 2):
            got = rouge_n(candidate, reference, n)
            for v in (got.precision, got.recall, got.f1):
                assert 0.0 <= v <= 1.0
        got = rouge_l(candidate, reference)
        assert 0.0 <= got.f1 <= 1.0
        score = tfidf_cosine(candidate, reference).score
        assert 0.0 <= score <= 1.0
        cos = embedding_cosine(candidate, reference, HashingEmbedder(dim=32))
        assert 0.0 <= cos <= 1.0


class TestReferenceText:
    def test_corpus_order_concatenation(self):
        corpus = Corpus(corpus_id="c", posts=[Post("1", "first text"), Post("2", "second text")])
        assert reference_text(corpus) == "first text\nsecond text"

    def test_deterministic(self, campfire_corpus):
        assert reference_text(campfire_corpus) == reference_text(campfire_corpus)
