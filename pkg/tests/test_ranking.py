import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from clozeval import (
    DegenerateRankingError,
    EmbeddingModel,
    RankingError,
    RankingTable,
    ResponseSheet,
    aggregate_judges,
    collect_candidates,
    drop_top_ranked,
    filter_gaps,
    midranks,
    rank_by_similarity,
    restrict_table,
    spearman,
)
from clozeval.ranking import pearson

from helpers import sheet, tiny_test


def table(gap_id, ranker, pairs):
    return RankingTable(gap_id=gap_id, ranker_id=ranker, entries=tuple(pairs))


class TestMidranks:
    def test_plain(self):
        assert midranks([10, 30, 20]) == [1.0, 3.0, 2.0]

    def test_ties(self):
        assert midranks([1, 1, 2]) == [1.5, 1.5, 3.0]
        assert midranks([5, 5, 5]) == [2.0, 2.0, 2.0]

    def test_descending(self):
        assert midranks([0.9, 0.1, 0.5], descending=True) == [1.0, 3.0, 2.0]

    @given(st.lists(st.integers(min_value=0, max_value=5), min_size=1, max_size=30))
    def test_rank_sum_invariant(self, values):
        n = len(values)
        assert sum(midranks(values)) == pytest.approx(n * (n + 1) / 2)

    @given(st.lists(st.integers(min_value=0, max_value=5), min_size=1, max_size=20))
    def test_valid_midrank_sequence(self, values):
        t = table(1, "r", list(zip([f"c{i}" for i in range(len(values))], midranks(values))))
        t.validate()


class TestRankingTable:
    def test_validate_rejects_duplicates(self):
        t = table(1, "r", [("a", 1.0), ("a", 2.0)])
        with pytest.raises(RankingError, match="duplicate"):
            t.validate()

    def test_validate_rejects_bad_midranks(self):
        t = table(1, "r", [("a", 1.0), ("b", 1.0)])  # a valid tie would be 1.5/1.5
        with pytest.raises(RankingError, match="midrank"):
            t.validate()

    def test_dict_round_trip(self):
        t = table(3, "judge", [("a", 1.0), ("b", 2.5), ("c", 2.5)])
        back = RankingTable.from_dict(t.to_dict())
        assert back == t


class TestCollect:
    def test_normalization_and_blanks(self):
        test = tiny_test(["casa"])
        sheets = [
            sheet("s1", {1: "casa"}),
            sheet("s2", {1: "Casa."}),
            sheet("s3", {1: "lar"}),
            sheet("s4", {1: " "}),
        ]
        assert collect_candidates(test, sheets, 1) == ["casa", "lar"]

    def test_all_blank(self):
        test = tiny_test(["casa"])
        assert collect_candidates(test, [sheet("s1", {1: ""})], 1) == []

    def test_frequency_then_lex(self):
        test = tiny_test(["x"])
        sheets = [
            sheet("s1", {1: "b"}),
            sheet("s2", {1: "b"}),
            sheet("s3", {1: "a"}),
            sheet("s4", {1: "a"}),
            sheet("s5", {1: "c"}),
        ]
        assert collect_candidates(test, sheets, 1) == ["a", "b", "c"]


class TestFilter:
    def test_strictly_greater(self):
        test = tiny_test(["g1", "g2", "g3"])
        sheets = []
        # gap 1: 11 distinct, gap 2: 10 distinct, gap 3: 0 (all blank)
        for i in range(11):
            answers = {1: f"w{i}", 2: f"w{i}" if i < 10 else "w0", 3: ""}
            sheets.append(sheet(f"s{i}", answers))
        assert filter_gaps(test, sheets, 10) == [1]

    def test_fixture_selects_odd_gaps(self, fixture_test, fixture_sheets):
        selected = filter_gaps(fixture_test, fixture_sheets, 10)
        assert selected == [g for g in range(1, 38) if g % 2 == 1]
        assert len(selected) == 19


class TestRankBySimilarity:
    def test_toy_ordering(self, toy_model):
        test = tiny_test(["a"])
        t = rank_by_similarity(test.gaps[0], ["a", "b", "c"], toy_model)
        assert t.rank_map == {"a": 1.0, "c": 2.0, "b": 3.0}
        assert not t.degenerate

    def test_equal_cosine_midrank(self):
        model = EmbeddingModel.from_vectors(
            "m", {"e": (1, 0), "u": (0, 1), "v": (0, 1), "w": (1, 1)}
        )
        test = tiny_test(["e"])
        t = rank_by_similarity(test.gaps[0], ["u", "v", "w"], model)
        assert t.rank_map == {"w": 1.0, "u": 2.5, "v": 2.5}

    def test_single_candidate(self, toy_model):
        test = tiny_test(["a"])
        t = rank_by_similarity(test.gaps[0], ["b"], toy_model)
        assert t.rank_map == {"b": 1.0}

    def test_oov_candidates_tie_last(self, toy_model):
        test = tiny_test(["a"])
        t = rank_by_similarity(test.gaps[0], ["c", "zz", "qq", "b"], toy_model)
        assert t.rank_map["c"] == 1.0
        assert t.rank_map["b"] == 2.0
        assert t.rank_map["zz"] == 3.5 and t.rank_map["qq"] == 3.5

    def test_oov_expected_degenerate(self, toy_model):
        test = tiny_test(["missing"])
        t = rank_by_similarity(test.gaps[0], ["a", "b", "c"], toy_model)
        assert t.degenerate
        assert set(t.rank_map.values()) == {2.0}

    def test_multiword_candidate_uses_phrase(self, toy_model):
        test = tiny_test(["c"])
        t = rank_by_similarity(test.gaps[0], ["a b", "b"], toy_model)
        assert t.rank_map["a b"] == 1.0  # mean(a,b) points exactly at c

    def test_empty_candidates(self, toy_model):
        test = tiny_test(["a"])
        with pytest.raises(RankingError, match="no candidates"):
            rank_by_similarity(test.gaps[0], [], toy_model)


class TestAggregate:
    def test_single_judge_identity(self):
        j = table(1, "J1", [("a", 1.0), ("b", 2.0), ("c", 3.0)])
        consensus = aggregate_judges([j])
        assert consensus.ranker_id == "consensus"
        assert consensus.rank_map == j.rank_map

    def test_two_judges_symmetric_tie(self):
        j1 = table(1, "J1", [("a", 1.0), ("b", 2.0)])
        j2 = table(1, "J2", [("b", 1.0), ("a", 2.0)])
        consensus = aggregate_judges([j1, j2])
        assert consensus.rank_map == {"a": 1.5, "b": 1.5}

    def test_three_judges_mean_ranks(self):
        js = [
            table(1, "J1", [("a", 1.0), ("b", 2.0), ("c", 3.0)]),
            table(1, "J2", [("a", 1.0), ("b", 2.0), ("c", 3.0)]),
            table(1, "J3", [("b", 1.0), ("a", 2.0), ("c", 3.0)]),
        ]
        consensus = aggregate_judges(js)
        assert consensus.rank_map == {"a": 1.0, "b": 2.0, "c": 3.0}

    def test_candidate_mismatch(self):
        j1 = table(1, "J1", [("a", 1.0), ("b", 2.0)])
        j2 = table(1, "J2", [("a", 1.0), ("x", 2.0)])
        with pytest.raises(RankingError, match="differs"):
            aggregate_judges([j1, j2])

    def test_mixed_gap_ids(self):
        j1 = table(1, "J1", [("a", 1.0), ("b", 2.0)])
        j2 = table(2, "J2", [("a", 1.0), ("b", 2.0)])
        with pytest.raises(RankingError, match="mixed gaps"):
            aggregate_judges([j1, j2])


class TestDropTop:
    def test_basic(self):
        t = table(1, "consensus", [("a", 1.0), ("b", 2.0), ("c", 3.0)])
        reduced = drop_top_ranked(t)
        assert reduced.rank_map == {"b": 1.0, "c": 2.0}

    def test_tied_first_all_removed(self):
        t = table(1, "consensus", [("a", 1.5), ("b", 1.5), ("c", 3.0)])
        reduced = drop_top_ranked(t)
        assert reduced.rank_map == {"c": 1.0}

    def test_too_small(self):
        t = table(1, "consensus", [("a", 1.0)])
        with pytest.raises(RankingError, match="at least 2"):
            drop_top_ranked(t)

    def test_all_tied(self):
        t = table(1, "consensus", [("a", 1.5), ("b", 1.5)])
        with pytest.raises(RankingError, match="tied at first"):
            drop_top_ranked(t)

    def test_restrict_preserves_tie_structure(self):
        t = table(1, "m", [("a", 1.0), ("b", 2.5), ("c", 2.5), ("d", 4.0)])
        reduced = restrict_table(t, ["b", "c", "d"])
        assert reduced.rank_map == {"b": 1.5, "c": 1.5, "d": 3.0}

    def test_restrict_unknown_candidate(self):
        t = table(1, "m", [("a", 1.0), ("b", 2.0)])
        with pytest.raises(RankingError, match="lacks"):
            restrict_table(t, ["a", "zz"])


class TestSpearman:
    def test_identical(self):
        x = table(1, "x", [("a", 1.0), ("b", 2.0), ("c", 3.0)])
        y = table(1, "y", [("a", 1.0), ("b", 2.0), ("c", 3.0)])
        assert spearman(x, y) == 1.0

    def test_reversed(self):
        x = table(1, "x", [("a", 1.0), ("b", 2.0), ("c", 3.0)])
        y = table(1, "y", [("c", 1.0), ("b", 2.0), ("a", 3.0)])
        assert spearman(x, y) == -1.0

    def test_derived_example(self):
        cands = ["c1", "c2", "c3", "c4", "c5"]
        x = table(1, "x", list(zip(cands, [1.0, 2.0, 3.0, 4.0, 5.0])))
        y = table(1, "y", list(zip(cands, [2.0, 1.0, 4.0, 3.0, 5.0])))
        # 1 - 6*4/(5*24) = 0.8
        assert spearman(x, y) == pytest.approx(0.8, abs=1e-12)

    def test_symmetry_and_relabeling(self):
        rng = random.Random(43)
        for _ in range(50):
            n = rng.randint(2, 12)
            cands = [f"c{i}" for i in range(n)]
            rx = midranks([rng.randint(0, 4) for _ in range(n)])
            ry = midranks([rng.randint(0, 4) for _ in range(n)])
            if len(set(rx)) == 1 or len(set(ry)) == 1:
                continue
            x = table(1, "x", list(zip(cands, rx)))
            y = table(1, "y", list(zip(cands, ry)))
            assert spearman(x, y) == spearman(y, x)
            relabel = {c: f"z{i}" for i, c in enumerate(cands)}
            x2 = table(1, "x", [(relabel[c], r) for c, r in x.entries])
            y2 = table(1, "y", [(relabel[c], r) for c, r in y.entries])
            assert spearman(x2, y2) == pytest.approx(spearman(x, y), abs=1e-12)

    def test_tie_free_matches_d_squared_formula(self):
        rng = random.Random(47)
        for _ in range(100):
            n = rng.randint(2, 15)
            cands = [f"c{i}" for i in range(n)]
            perm_x = rng.sample(range(1, n + 1), n)
            perm_y = rng.sample(range(1, n + 1), n)
            x = table(1, "x", list(zip(cands, map(float, perm_x))))
            y = table(1, "y", list(zip(cands, map(float, perm_y))))
            d2 = sum((a - b) ** 2 for a, b in zip(perm_x, perm_y))
            formula = 1 - 6 * d2 / (n * (n * n - 1)) if n > 1 else 1.0
            assert spearman(x, y) == pytest.approx(formula, abs=1e-12)

    def test_candidate_set_mismatch(self):
        x = table(1, "x", [("a", 1.0), ("b", 2.0)])
        y = table(1, "y", [("a", 1.0), ("z", 2.0)])
        with pytest.raises(RankingError, match="candidate sets differ"):
            spearman(x, y)

    def test_zero_variance(self):
        x = table(1, "x", [("a", 1.5), ("b", 1.5)])
        y = table(1, "y", [("a", 1.0), ("b", 2.0)])
        with pytest.raises(DegenerateRankingError):
            spearman(x, y)

    def test_too_small(self):
        x = table(1, "x", [("a", 1.0)])
        with pytest.raises(RankingError, match="at least 2"):
            spearman(x, x)

    def test_pearson_oracle_on_random_midranks(self):
        # Against an independent numpy Pearson on independently ranked data.
        import numpy as np
        from scipy.stats import rankdata

        rng = random.Random(53)
        for _ in range(100):
            n = rng.randint(2, 20)
            xs = [rng.randint(0, 6) for _ in range(n)]
            ys = [rng.randint(0, 6) for _ in range(n)]
            rx, ry = rankdata(xs), rankdata(ys)
            if len(set(rx)) == 1 or len(set(ry)) == 1:
                continue
            oracle = float(np.corrcoef(rx, ry)[0, 1])
            assert pearson(midranks(xs), midranks(ys)) == pytest.approx(oracle, abs=1e-9)
