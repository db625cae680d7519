"""Tests for structures, the inverted index, pivot search, and grouping."""

import random
from itertools import permutations

from valstd.dsl import (
    ConstantStr,
    DIGITS,
    LOWER,
    MatchPos,
    Program,
    SPACE,
    SubStr,
    Term,
    UPPER,
    char_term,
    function_text,
    is_consistent,
)
from valstd.graph import build_graph
from valstd.grouping import (
    Bounds,
    GroupingConfig,
    GroupingState,
    InvertedIndex,
    find_pivot,
    init_upper_bounds,
    intersect,
    one_shot_grouping,
    search_pivot,
    structure_of,
    structure_partition,
)

from .corpora import oracle_corpus, patterned_corpus
from .oracles import contains_path, count_label_paths, enumerate_paths

F1 = SubStr(MatchPos(UPPER, 1, "B"), MatchPos(LOWER, 1, "E"))
F2 = SubStr(MatchPos(SPACE, 1, "E"), MatchPos(UPPER, -1, "E"))
F3 = ConstantStr(". ")

THREE_NAMES = [
    ("Lee, Mary", "M. Lee"),
    ("Smith, James", "J. Smith"),
    ("Lee, Mary", "Mary Lee"),
]
# sorted-key graph ids for the corpus above
ABBREV_1, PLAIN, ABBREV_2 = 0, 1, 2


def name_index():
    ordered = sorted(set(THREE_NAMES))
    graphs = {i: build_graph(s, t) for i, (s, t) in enumerate(ordered)}
    return ordered, InvertedIndex(graphs)


class TestStructures:
    def test_digit_and_ordinal(self):
        assert structure_of("9") == (DIGITS,)
        assert structure_of("9th") == (DIGITS, LOWER)

    def test_empty(self):
        assert structure_of("") == ()

    def test_mixed_with_single_char(self):
        assert structure_of("A-1") == (UPPER, char_term("-"), DIGITS)

    def test_runs_collapse_but_single_chars_do_not(self):
        assert structure_of("aa  bb") == (LOWER, SPACE, LOWER)
        assert structure_of("--") == (char_term("-"), char_term("-"))

    def test_partition_by_both_sides(self):
        buckets = structure_partition(
            [("9", "9th"), ("3", "3rd"), ("9", "nine"), ("09", "9th")]
        )
        key = (structure_of("9"), structure_of("9th"))
        assert sorted(buckets[key]) == [("09", "9th"), ("3", "3rd"), ("9", "9th")]
        assert len(buckets) == 2


class TestInvertedIndex:
    def test_posting_lists_for_shared_functions(self):
        _, index = name_index()
        assert index.entries(function_text(F1)) == [
            (ABBREV_1, 4, 7),
            (PLAIN, 6, 9),
            (ABBREV_2, 4, 9),
        ]
        assert index.entries(function_text(F2)) == [
            (ABBREV_1, 1, 2),
            (PLAIN, 1, 2),
            (ABBREV_2, 1, 2),
        ]
        assert index.entries(function_text(F3)) == [
            (ABBREV_1, 2, 4),
            (ABBREV_2, 2, 4),
        ]

    def test_chained_intersection(self):
        _, index = name_index()
        out = intersect(
            intersect(
                index.entries(function_text(F2)), index.entries(function_text(F3))
            ),
            index.entries(function_text(F1)),
        )
        assert out == [(ABBREV_1, 1, 7), (ABBREV_2, 1, 9)]

    def test_intersection_with_empty(self):
        _, index = name_index()
        assert intersect(index.entries(function_text(F2)), []) == []

    def test_entries_of_different_graphs_never_join(self):
        assert intersect([(0, 1, 2)], [(1, 2, 5)]) == []


class TestSearchPivot:
    def test_shared_pivot_found(self):
        _, index = name_index()
        bounds = Bounds(lo={g: 1 for g in index.gids})
        res = search_pivot(ABBREV_1, index, bounds=bounds)
        assert res.support == 2
        assert res.containers == (ABBREV_1, ABBREV_2)

    def test_global_lower_bound_propagates(self):
        _, index = name_index()
        bounds = Bounds(lo={g: 1 for g in index.gids})
        search_pivot(ABBREV_1, index, bounds=bounds)
        assert bounds.lo[ABBREV_2] == 2

    def test_threshold_excludes_unshared_graphs(self):
        _, index = name_index()
        assert search_pivot(PLAIN, index, local_threshold=1) is None

    def test_reference_program_consistent_with_both_members(self):
        ordered, index = name_index()
        program = Program((F2, F3, F1))
        for gid in (ABBREV_1, ABBREV_2):
            assert is_consistent(program, *ordered[gid])

    def test_canonical_tie_break_is_graph_independent(self):
        _, index = name_index()
        a = find_pivot(ABBREV_1, index)
        b = find_pivot(ABBREV_2, index)
        assert a.support == b.support == 2
        assert a.text == b.text

    def test_max_len_caps_path_length(self):
        _, index = name_index()
        res = find_pivot(ABBREV_1, index, max_len=1)
        assert len(res.program) == 1


class TestUpperBounds:
    def test_paper_bounds(self):
        _, index = name_index()
        bounds = init_upper_bounds(index)
        assert bounds.up == {ABBREV_1: 2, PLAIN: 1, ABBREV_2: 2}
        assert bounds.lo == {ABBREV_1: 1, PLAIN: 1, ABBREV_2: 1}

    def test_singleton_bucket(self):
        graphs = {0: build_graph("abc", "c")}
        bounds = init_upper_bounds(InvertedIndex(graphs))
        assert bounds.up[0] == 1


class TestOneShot:
    def test_three_name_corpus(self):
        cfg = GroupingConfig(structure_refine=False, use_constant_terms=False)
        groups = one_shot_grouping(THREE_NAMES, cfg)
        assert [g.size for g in groups] == [2, 1]
        assert groups[0].members == (
            ("Lee, Mary", "M. Lee"),
            ("Smith, James", "J. Smith"),
        )
        assert groups[1].members == (("Lee, Mary", "Mary Lee"),)

    def test_refinement_gives_same_partition_here(self):
        groups = one_shot_grouping(THREE_NAMES, GroupingConfig(use_constant_terms=False))
        assert [g.size for g in groups] == [2, 1]

    def test_single_replacement(self):
        groups = one_shot_grouping([("a1", "1a")])
        assert len(groups) == 1 and groups[0].size == 1

    def test_twelve_name_replacements_form_six_groups(self):
        c1 = ["Lee, Mary", "Lee,Mary", "Mary Lee"]
        c2 = ["Smith, James", "Smith,James", "James Smith"]
        reps = [(x, y) for c in (c1, c2) for x, y in permutations(c, 2)]
        assert len(reps) == 12
        groups = one_shot_grouping(reps, GroupingConfig())
        assert [g.size for g in groups] == [2] * 6
        for g in groups:
            # analogous replacements from the two clusters pair up
            assert {m[0].split(",")[0].strip().split()[0] for m in g.members} <= {
                "Lee",
                "Mary",
                "Smith",
                "James",
            }
            assert len({m[0] for m in g.members}) == 2

    def test_members_are_consistent_with_pivot(self):
        rng = random.Random(5)
        pairs = patterned_corpus(rng, 40)
        for group in one_shot_grouping(pairs, GroupingConfig()):
            for lhs, rhs in group.members:
                assert is_consistent(group.pivot, lhs, rhs)

    def test_groups_partition_the_input(self):
        rng = random.Random(6)
        pairs = patterned_corpus(rng, 50)
        groups = one_shot_grouping(pairs, GroupingConfig())
        seen = [m for g in groups for m in g.members]
        assert sorted(seen) == sorted(set(pairs))


class TestIncremental:
    def test_first_group_with_early_stop(self):
        cfg = GroupingConfig(structure_refine=False, use_constant_terms=False)
        state = GroupingState(THREE_NAMES, cfg)
        group = state.next_largest_group()
        assert group.size == 2
        assert state.last_visit_trace == [ABBREV_1]

    def test_exhaustion(self):
        cfg = GroupingConfig(structure_refine=False, use_constant_terms=False)
        state = GroupingState(THREE_NAMES, cfg)
        sizes = []
        while True:
            g = state.next_largest_group()
            if g is None:
                break
            sizes.append(g.size)
        assert sizes == [2, 1]

    def test_single_graph(self):
        state = GroupingState([("ab", "ba")], GroupingConfig())
        assert state.next_largest_group().size == 1
        assert state.next_largest_group() is None

    def test_lazy_upper_bound_is_bucket_size(self):
        pairs = [("9", "9th"), ("3", "3rd"), ("7", "7th")]
        state = GroupingState(pairs, GroupingConfig())
        assert all(state.up[g] == 3 for g in range(3))

    def test_invalidation_drops_dead_replacements(self):
        pairs = [("9", "9th"), ("3", "3rd"), ("ab", "ba")]
        state = GroupingState(pairs, GroupingConfig())
        first = state.next_largest_group()
        assert first.size == 2
        state.invalidate([("ab", "ba")])
        assert state.next_largest_group() is None

    def test_matches_one_shot_on_patterned_corpora(self):
        for seed in range(6):
            rng = random.Random(100 + seed)
            pairs = patterned_corpus(rng, 60)
            cfg = GroupingConfig()
            expected = {
                (g.size, g.pivot_text, g.members)
                for g in one_shot_grouping(pairs, cfg)
            }
            state = GroupingState(pairs, cfg)
            got = set()
            sizes = []
            while True:
                g = state.next_largest_group()
                if g is None:
                    break
                got.add((g.size, g.pivot_text, g.members))
                sizes.append(g.size)
            assert got == expected
            assert sizes == sorted(sizes, reverse=True)

    def test_sampling_mode_produces_consistent_groups(self):
        rng = random.Random(77)
        pairs = patterned_corpus(rng, 80)
        cfg = GroupingConfig(sample_threshold=10, sample_size=8)
        state = GroupingState(pairs, cfg)
        seen = set()
        while True:
            g = state.next_largest_group()
            if g is None:
                break
            for lhs, rhs in g.members:
                assert is_consistent(g.pivot, lhs, rhs)
                assert (lhs, rhs) not in seen
                seen.add((lhs, rhs))
        assert seen == set(pairs)


class TestEarlyTerminationSafety:
    def test_partitions_identical_with_and_without(self):
        for seed in range(8):
            rng = random.Random(200 + seed)
            pairs = patterned_corpus(rng, 25)
            on = one_shot_grouping(pairs, GroupingConfig(early_termination=True))
            off = one_shot_grouping(pairs, GroupingConfig(early_termination=False))
            assert [(g.size, g.pivot_text, g.members) for g in on] == [
                (g.size, g.pivot_text, g.members) for g in off
            ]


class TestOracleEquivalence:
    def test_search_support_matches_enumeration(self):
        rng = random.Random(321)
        pairs = []
        while len(pairs) < 30:
            (candidate,) = oracle_corpus(rng, 1)
            g = build_graph(*candidate)
            if count_label_paths(g) <= 3000 and candidate not in pairs:
                pairs.append(candidate)
        graphs = {i: build_graph(s, t) for i, (s, t) in enumerate(sorted(pairs))}
        index = InvertedIndex(graphs)
        bounds = init_upper_bounds(index)
        for gid in index.gids:
            res = search_pivot(gid, index, bounds=bounds, max_len=10**9)
            best = 0
            seen = set()
            for path in enumerate_paths(graphs[gid]):
                if path in seen:
                    continue
                seen.add(path)
                n = sum(1 for h in graphs.values() if contains_path(h, path))
                best = max(best, n)
            assert res.support == best
