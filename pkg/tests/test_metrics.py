import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pelab.metrics import (
    BleuConfig,
    ChrfConfig,
    LengthMismatch,
    MissingSegment,
    OutOfRangeScore,
    QualityScores,
    bleu_corpus,
    chrf_corpus,
    hter_document,
    ingest_external_scores,
    mean_score,
    ter_segments,
)

segments = st.lists(st.lists(st.sampled_from("abcdef"), min_size=1, max_size=8), min_size=1, max_size=5)


class TestBleu:
    def test_identity(self):
        hyp = [["the", "cat", "sat"], ["on", "the", "mat", "."]]
        assert bleu_corpus(hyp, hyp) == 100.0

    def test_no_overlap(self):
        assert bleu_corpus([["x", "y"]], [["a", "b"]]) == 0.0

    def test_hand_computed_brevity_case(self):
        # p1 = 3/3, p2 = 2/2, p3 = 1/1, no 4-grams; BP = exp(1 - 4/3)
        expected = 100.0 * math.exp(1.0 - 4.0 / 3.0)
        assert expected == pytest.approx(71.653, abs=0.001)
        got = bleu_corpus([["the", "cat", "sat"]], [["the", "cat", "sat", "down"]])
        assert got == pytest.approx(expected, abs=1e-9)
        assert got == pytest.approx(71.65, abs=0.01)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            bleu_corpus([["a"]], [["a"], ["b"]])

    def test_zero_precision_without_smoothing(self):
        # unigrams overlap but no bigram does
        assert bleu_corpus([["a", "x", "b"]], [["a", "y", "b"]]) == 0.0

    def test_smoothing_rescues_zero_order(self):
        smoothed = bleu_corpus(
            [["a", "x", "b"]], [["a", "y", "b"]], BleuConfig(smoothing=True)
        )
        assert 0.0 < smoothed < 100.0

    def test_smoothed_identity_still_perfect(self):
        hyp = [["a", "b", "c", "d", "e"]]
        assert bleu_corpus(hyp, hyp, BleuConfig(smoothing=True)) == 100.0

    def test_empty_hypotheses(self):
        assert bleu_corpus([[]], [["a"]]) == 0.0

    @given(segments, st.randoms())
    @settings(max_examples=60)
    def test_permutation_equivariant(self, refs, rng):
        hyps = [list(reversed(r)) for r in refs]
        order = list(range(len(refs)))
        rng.shuffle(order)
        a = bleu_corpus(hyps, refs)
        b = bleu_corpus([hyps[i] for i in order], [refs[i] for i in order])
        assert a == pytest.approx(b, abs=1e-9)

    @given(st.lists(st.sampled_from("abc"), min_size=1, max_size=6), st.sampled_from("abc"))
    def test_monotone_identity(self, seq, extra):
        grown = [seq + [extra]]
        assert bleu_corpus(grown, grown) == 100.0


class TestChrf:
    def test_identity(self):
        texts = ["Ha le sue idee.", "Nirvana for halfwits."]
        assert chrf_corpus(texts, texts) == 100.0

    def test_disjoint(self):
        assert chrf_corpus(["aaa"], ["bbb"]) == 0.0

    def test_unigram_case(self):
        # character unigrams: P = R = 2/3, F2 = 2/3
        got = chrf_corpus(["abc"], ["abd"], ChrfConfig(char_n=1))
        assert got == pytest.approx(66.67, abs=0.01)
        assert got == pytest.approx(200.0 / 3.0, abs=1e-9)

    def test_whitespace_ignored_by_default(self):
        assert chrf_corpus(["ab cd"], ["abcd"]) == 100.0
        assert chrf_corpus(["ab cd"], ["abcd"], ChrfConfig(ignore_whitespace=False)) < 100.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            chrf_corpus(["a"], ["a", "b"])

    @given(st.lists(st.text(alphabet="abcdef", min_size=1, max_size=10), min_size=2, max_size=5))
    @settings(max_examples=60)
    def test_permutation_equivariant(self, refs):
        hyps = [r[::-1] for r in refs]
        a = chrf_corpus(hyps, refs)
        b = chrf_corpus(hyps[::-1], refs[::-1])
        assert a == pytest.approx(b, abs=1e-9)

    @given(st.text(alphabet="abc", min_size=1, max_size=8), st.sampled_from("abc"))
    def test_monotone_identity(self, text, extra):
        grown = [text + extra]
        assert chrf_corpus(grown, grown) == 100.0


class TestHter:
    def test_unedited_is_zero(self):
        segs = [["a", "b"], ["c", "d", "e"]]
        assert hter_document(segs, segs) == 0.0

    def test_ratio_of_sums_not_mean_of_ratios(self):
        # (1 edit / 4 tokens) and (1 edit / 6 tokens) -> 2/10 = 20.0
        mt = [["a", "b", "c", "X"], ["d", "e", "f", "g", "h", "Y"]]
        pe = [["a", "b", "c", "z"], ["d", "e", "f", "g", "h", "w"]]
        assert hter_document(mt, pe) == pytest.approx(20.0)
        mean_of_ratios = (1 / 4 + 1 / 6) / 2 * 100
        assert mean_of_ratios != pytest.approx(20.0)

    def test_mismatch(self):
        with pytest.raises(LengthMismatch):
            hter_document([["a"]], [])

    def test_emptied_segment_counts_deletions(self):
        mt = [["a", "b"], ["c"]]
        pe = [["a", "b"], []]
        # one deleted token over two reference tokens
        assert hter_document(mt, pe) == pytest.approx(50.0)

    @given(
        st.lists(
            st.tuples(
                st.lists(st.sampled_from("abcd"), max_size=5),
                st.lists(st.sampled_from("abcd"), min_size=1, max_size=5),
            ),
            min_size=1,
            max_size=6,
        )
    )
    @settings(max_examples=100)
    def test_document_equals_recomputed_ratio_of_sums(self, pairs):
        mt = [list(p[0]) for p in pairs]
        pe = [list(p[1]) for p in pairs]
        results = ter_segments(mt, pe)
        expected = 100.0 * sum(r.total_edits for r in results) / sum(r.ref_length for r in results)
        assert hter_document(mt, pe) == expected


class TestExternalScores:
    def test_uniform_mean(self):
        table = ingest_external_scores(
            [{"segment_id": f"s{i}", "score": 0.85} for i in range(4)],
            [f"s{i}" for i in range(4)],
        )
        assert mean_score(table) == pytest.approx(0.85)

    def test_missing_segment_named(self):
        with pytest.raises(MissingSegment, match="s1"):
            ingest_external_scores([{"segment_id": "s0", "score": 0.5}], ["s0", "s1"])

    def test_out_of_range(self):
        with pytest.raises(OutOfRangeScore):
            ingest_external_scores([{"segment_id": "s0", "score": 1.5}], ["s0"])

    def test_csv_parsing(self, tmp_path):
        path = tmp_path / "scores.csv"
        path.write_text("segment_id,score\ns0,0.25\ns1,0.75\n")
        table = ingest_external_scores(str(path), ["s0", "s1"])
        assert table == {"s0": 0.25, "s1": 0.75}

    def test_json_file(self, tmp_path):
        path = tmp_path / "scores.json"
        path.write_text('[{"segment_id": "s0", "score": 0.4}]')
        assert ingest_external_scores(str(path), ["s0"]) == {"s0": 0.4}

    def test_extra_rows_ignored(self):
        table = ingest_external_scores(
            [{"segment_id": "s0", "score": 0.5}, {"segment_id": "zz", "score": 0.1}], ["s0"]
        )
        assert table == {"s0": 0.5}


class TestQualityScores:
    def test_ranges_enforced(self):
        with pytest.raises(ValueError):
            QualityScores(bleu=120.0, chrf=10.0)
        with pytest.raises(ValueError):
            QualityScores(bleu=10.0, chrf=10.0, comet=1.2)
        QualityScores(bleu=0.0, chrf=100.0, comet=None)
