"""Grouping replacements that share a transformation program.

Finding the optimal partition is intractable, so each replacement is keyed
by its pivot: the root-to-sink path of its graph contained in the most
graphs of its structure group.  Replacements with equal pivots form a group.

Two entry points produce identical partitions:

* :func:`one_shot_grouping` computes every pivot upfront.
* :class:`GroupingState` yields groups largest-first on demand, using
  per-graph support bounds to search as few graphs as possible and building
  each structure group's graphs and index only when first touched.

Supports are counted against an epoch: the set of replacements present when
a structure group was last (re)built.  Emitting a group does not shrink the
index, which keeps pivots stable across calls; mutations from applying a
group invalidate the touched structure groups wholesale.

The pivot search walks a graph depth first, maintaining the inverted-index
intersection of the labels chosen so far.  The local threshold skips any
extension that cannot beat the best support seen; the global threshold
reuses supports discovered while searching other graphs.  Ties between
equal-support paths resolve by a fixed enumeration order (edges by ascending
span, labels by kind then text), which is what makes the one-shot and
incremental partitions agree exactly.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .dsl import Program, Term, char_class, char_term, function_text
from .graph import (
    ConstantScorer,
    DEFAULT_CONSTANT_TERM_MAX_LEN,
    DEFAULT_MAX_VALUE_LEN,
    TransformationGraph,
    build_graph,
)

DEFAULT_MAX_PATH_LEN = 6

Entry = tuple[int, int, int]  # (graph id, edge start, edge end)
Pair = tuple[str, str]


# ---------------------------------------------------------------------------
# Structures


def structure_of(s: str) -> tuple[Term, ...]:
    """Maximal-run encoding of a string into character-class terms.

    Runs of one regex class collapse to a single term; characters outside
    every class become single-char terms and never collapse.
    """
    out: list[Term] = []
    prev_kind: Optional[str] = None
    for ch in s:
        kind = char_class(ch)
        if kind is None:
            out.append(char_term(ch))
            prev_kind = None
        elif kind != prev_kind:
            out.append(Term(kind))
            prev_kind = kind
    return tuple(out)


def structure_key(pair: Pair) -> tuple[tuple[Term, ...], tuple[Term, ...]]:
    return (structure_of(pair[0]), structure_of(pair[1]))


def structure_partition(pairs: Iterable[Pair]) -> dict:
    """Partition replacements by the structures of both sides."""
    buckets: dict = {}
    for pair in pairs:
        buckets.setdefault(structure_key(pair), []).append(pair)
    return buckets


# ---------------------------------------------------------------------------
# Inverted index


def intersect(left: list[Entry], right: list[Entry]) -> list[Entry]:
    """Join adjacent edges of two sorted entry lists.

    Entries of the same graph combine when the left edge ends where the
    right edge starts, producing the spanning entry.  The result is sorted
    and deduplicated.
    """
    starts: dict[tuple[int, int], list[int]] = {}
    for g, i, j in right:
        starts.setdefault((g, i), []).append(j)
    out = {
        (g, i, j2)
        for g, i, j in left
        for j2 in starts.get((g, j), ())
    }
    return sorted(out)


def support_of(entries: list[Entry]) -> int:
    return len({g for g, _, _ in entries})


def graphs_of(entries: list[Entry]) -> tuple[int, ...]:
    return tuple(sorted({g for g, _, _ in entries}))


class InvertedIndex:
    """Posting lists from string-function labels to the edges carrying them."""

    def __init__(self, graphs: dict[int, TransformationGraph]) -> None:
        self.graphs = graphs
        self.gids = sorted(graphs)
        lists: dict[str, list[Entry]] = {}
        label_of: dict[str, object] = {}
        for gid in self.gids:
            for (i, j), labels in graphs[gid].edges.items():
                for f in labels:
                    text = function_text(f)
                    lists.setdefault(text, []).append((gid, i, j))
                    label_of.setdefault(text, f)
        self.lists = {text: sorted(entries) for text, entries in lists.items()}
        self.label_of = label_of
        self.sinks = {gid: graphs[gid].sink for gid in self.gids}
        self._distinct: dict[str, int] = {}
        self._adjacency: dict[str, dict] = {}

    def completed(self, entries) -> tuple[int, ...]:
        """Graphs whose chain spans root to their own sink: the true
        containers of a finished path."""
        return tuple(
            sorted({g for g, i, j in entries if i == 1 and j == self.sinks[g]})
        )

    def entries(self, text: str) -> list[Entry]:
        return self.lists.get(text, [])

    def distinct_count(self, text: str) -> int:
        cached = self._distinct.get(text)
        if cached is None:
            cached = support_of(self.entries(text))
            self._distinct[text] = cached
        return cached

    def adjacency(self, text: str) -> dict:
        """(graph, start) -> edge ends for one list; cached per label."""
        cached = self._adjacency.get(text)
        if cached is None:
            cached = {}
            for g, i, j in self.entries(text):
                cached.setdefault((g, i), []).append(j)
            self._adjacency[text] = cached
        return cached

    def seed_entries(self) -> list[Entry]:
        """The empty path sits at the root of every graph."""
        return [(g, 1, 1) for g in self.gids]


# ---------------------------------------------------------------------------
# Bounds and pivot search


@dataclass
class Bounds:
    """Per-graph lower and upper bounds on pivot-path support."""

    lo: dict[int, int] = field(default_factory=dict)
    up: dict[int, int] = field(default_factory=dict)

    def raise_lo(self, gid: int, value: int) -> None:
        if value > self.lo.get(gid, 0):
            self.lo[gid] = value


def init_upper_bounds(index: InvertedIndex) -> Bounds:
    """Position-cover bounds: some edge over each target position must be on
    the pivot path, so the widest posting list covering the weakest position
    bounds the support from above."""
    bounds = Bounds()
    for gid in index.gids:
        graph = index.graphs[gid]
        n = graph.sink - 1
        ub = [0] * (n + 1)  # positions 1..n
        for (i, j), labels in graph.edges.items():
            best = 0
            for f in labels:
                c = index.distinct_count(function_text(f))
                if c > best:
                    best = c
            for k in range(i, j):
                if best > ub[k]:
                    ub[k] = best
        bounds.lo[gid] = 1
        bounds.up[gid] = min(ub[1:]) if n >= 1 else 1
    return bounds


@dataclass(frozen=True)
class SearchResult:
    program: Program
    text: str
    entries: tuple[Entry, ...]
    support: int
    containers: tuple[int, ...]


def search_pivot(
    gid: int,
    index: InvertedIndex,
    local_threshold: int = 0,
    bounds: Optional[Bounds] = None,
    max_len: int = DEFAULT_MAX_PATH_LEN,
    early_termination: bool = True,
) -> Optional[SearchResult]:
    """Depth-first pivot search over one graph.

    Returns the first path found (in canonical enumeration order) whose
    support is maximal, or None when no path is supported by strictly more
    than ``local_threshold`` graphs.  On every completed path the supports
    propagate into the lower bounds of all graphs containing it.
    """
    graph = index.graphs[gid]
    sink = graph.sink
    track_bounds = bounds is not None and early_termination
    state = {"best": local_threshold, "path": None, "entries": None, "members": None}

    def walk(node: int, length: int, path: tuple, entries: list[Entry]) -> None:
        if node == sink:
            # only graphs whose chain reached their own sink contain the path
            members = index.completed(entries)
            sup = len(members)
            if track_bounds:
                for g in members:
                    bounds.raise_lo(g, sup)
            if sup > state["best"]:
                state["best"] = sup
                state["path"] = path
                state["entries"] = tuple(entries)
                state["members"] = members
            return
        if length >= max_len:
            return
        own_lo = bounds.lo.get(gid, 0) if track_bounds else 0
        for j, labels in graph.out_edges(node):
            for f in labels:
                text = function_text(f)
                adj = index.adjacency(text)
                nxt = sorted(
                    {
                        (g, i, j2)
                        for g, i, j in entries
                        for j2 in adj.get((g, j), ())
                    }
                )
                if not nxt:
                    continue
                if early_termination:
                    # graphs with any partial chain bound the completable support
                    sup = support_of(nxt)
                    if sup <= state["best"] or sup < own_lo:
                        continue
                walk(j, length + 1, path + (f,), nxt)

    walk(1, 0, (), index.seed_entries())
    if state["path"] is None:
        return None
    program = Program(state["path"])
    return SearchResult(
        program,
        "⊕".join(function_text(f) for f in state["path"]),
        state["entries"],
        state["best"],
        state["members"],
    )


def canonical_pivot(
    gid: int,
    index: InvertedIndex,
    support: int,
    max_len: int = DEFAULT_MAX_PATH_LEN,
) -> SearchResult:
    """The canonical representative among a graph's maximal-support paths.

    Distinct graphs can find different first paths at the same support, so
    group keys need a tie-break that does not depend on any one graph's edge
    layout.  This pass enumerates only paths whose every prefix keeps the
    target support and returns the minimum by (length, text), a key all
    graphs sharing those paths agree on.
    """
    graph = index.graphs[gid]
    sink = graph.sink
    best: dict = {"key": None, "path": None, "entries": None, "members": None}

    def walk(node: int, length: int, path: tuple, entries: list[Entry]) -> None:
        if node == sink:
            members = index.completed(entries)
            if len(members) != support:
                return
            key = (length, "⊕".join(function_text(f) for f in path))
            if best["key"] is None or key < best["key"]:
                best["key"] = key
                best["path"] = path
                best["entries"] = tuple(entries)
                best["members"] = members
            return
        if length >= max_len:
            return
        if best["key"] is not None and length + 1 > best["key"][0]:
            return
        for j, labels in graph.out_edges(node):
            for f in labels:
                adj = index.adjacency(function_text(f))
                nxt = sorted(
                    {
                        (g, i, j2)
                        for g, i, j in entries
                        for j2 in adj.get((g, j), ())
                    }
                )
                if support_of(nxt) < support:
                    continue
                walk(j, length + 1, path + (f,), nxt)

    walk(1, 0, (), index.seed_entries())
    assert best["path"] is not None, "a maximal-support path must exist"
    return SearchResult(
        Program(best["path"]),
        best["key"][1],
        best["entries"],
        support,
        best["members"],
    )


def find_pivot(
    gid: int,
    index: InvertedIndex,
    local_threshold: int = 0,
    bounds: Optional[Bounds] = None,
    max_len: int = DEFAULT_MAX_PATH_LEN,
    early_termination: bool = True,
) -> Optional[SearchResult]:
    """Pivot of a graph: maximal support, canonical tie representative.

    Returns None when no path beats the threshold.  Supports of one are
    exempt from canonicalization: such a path lives in no other graph, so
    any representative yields the same singleton group.
    """
    res = search_pivot(
        gid,
        index,
        local_threshold=local_threshold,
        bounds=bounds,
        max_len=max_len,
        early_termination=early_termination,
    )
    if res is None or res.support < 2:
        return res
    return canonical_pivot(gid, index, res.support, max_len=max_len)


def graph_contains_path(graph: TransformationGraph, functions: tuple) -> bool:
    """Trace a label sequence through a graph, root to sink."""
    texts = [function_text(f) for f in functions]
    nodes = {1}
    for text in texts:
        nxt = set()
        for i in nodes:
            for j, labels in graph.out_edges(i):
                if any(function_text(f) == text for f in labels):
                    nxt.add(j)
        if not nxt:
            return False
        nodes = nxt
    return graph.sink in nodes


# ---------------------------------------------------------------------------
# Grouping


@dataclass
class GroupingConfig:
    max_path_len: int = DEFAULT_MAX_PATH_LEN
    structure_refine: bool = True
    early_termination: bool = True
    use_constant_terms: bool = True
    constant_score_exponent: float = 0.5
    constant_term_max_len: int = DEFAULT_CONSTANT_TERM_MAX_LEN
    max_value_len: int = DEFAULT_MAX_VALUE_LEN
    min_group_size: int = 1
    token_level: bool = True  # consumed by the pipeline when generating
    sample_threshold: Optional[int] = None
    sample_size: int = 200
    seed: int = 0


@dataclass(frozen=True)
class Group:
    """Replacements sharing a pivot program; the unit of human review."""

    pivot: Program
    pivot_text: str
    members: tuple[Pair, ...]

    @property
    def size(self) -> int:
        return len(self.members)


def _make_scorer(
    config: GroupingConfig, bucket_pairs: list[Pair], corpus_values: set[str]
) -> Optional[ConstantScorer]:
    if not config.use_constant_terms:
        return None
    group_values = {p[0] for p in bucket_pairs} | {p[1] for p in bucket_pairs}
    return ConstantScorer(
        group_values,
        corpus_values,
        exponent=config.constant_score_exponent,
        max_term_len=config.constant_term_max_len,
    )


def _build_graphs(
    pairs: dict[int, Pair], scorer: Optional[ConstantScorer], config: GroupingConfig
) -> dict[int, TransformationGraph]:
    return {
        gid: build_graph(lhs, rhs, scorer, max_value_len=config.max_value_len)
        for gid, (lhs, rhs) in pairs.items()
    }


def one_shot_grouping(
    pairs: Iterable[Pair], config: Optional[GroupingConfig] = None
) -> list[Group]:
    """Partition all replacements upfront.

    Each structure group is processed independently: build every graph,
    index the labels, find every graph's pivot, and key groups by the
    pivot's canonical text.  Output is sorted largest-first, ties by text.
    """
    config = config or GroupingConfig()
    ordered = sorted(set(pairs))
    if not ordered:
        return []
    corpus_values = {v for p in ordered for v in p}
    if config.structure_refine:
        buckets = structure_partition(ordered)
        bucket_lists = [buckets[k] for k in sorted(buckets, key=lambda k: buckets[k][0])]
    else:
        bucket_lists = [ordered]

    gid_of = {pair: i for i, pair in enumerate(ordered)}
    groups: list[Group] = []
    for bucket_pairs in bucket_lists:
        scorer = _make_scorer(config, bucket_pairs, corpus_values)
        graphs = _build_graphs(
            {gid_of[p]: p for p in bucket_pairs}, scorer, config
        )
        index = InvertedIndex(graphs)
        bounds = Bounds(lo={g: 1 for g in index.gids}) if config.early_termination else None
        fibers: dict[str, list] = {}
        pivot_program: dict[str, Program] = {}
        for gid in index.gids:
            res = find_pivot(
                gid,
                index,
                local_threshold=0,
                bounds=bounds,
                max_len=config.max_path_len,
                early_termination=config.early_termination,
            )
            assert res is not None, "every graph has at least its constant path"
            fibers.setdefault(res.text, []).append(ordered[gid])
            pivot_program.setdefault(res.text, res.program)
        for text, members in fibers.items():
            groups.append(Group(pivot_program[text], text, tuple(sorted(members))))

    groups.sort(key=lambda g: (-g.size, g.pivot_text))
    return [g for g in groups if g.size >= config.min_group_size]


# ---------------------------------------------------------------------------
# Incremental generation


@dataclass
class _PivotInfo:
    program: Program
    text: str
    support: int
    containers: tuple[int, ...]


class _Bucket:
    def __init__(self, key, gids: list[int]) -> None:
        self.key = key
        self.gids = list(gids)
        self.materialized = False
        self.index: Optional[InvertedIndex] = None
        self.bounds: Optional[Bounds] = None
        self.sampled: Optional[set[int]] = None
        self.all_graphs: dict[int, TransformationGraph] = {}


class GroupingState:
    """Largest-group-first generator over a mutable replacement pool.

    Structure groups materialize lazily: until first touched, every member's
    upper bound is simply the structure group size.  Pivots are memoized per
    epoch, so a graph is searched at most once between mutations.
    """

    def __init__(
        self, pairs: Iterable[Pair], config: Optional[GroupingConfig] = None
    ) -> None:
        self.config = config or GroupingConfig()
        self.keys: list[Pair] = sorted(set(pairs))
        self.gid_of: dict[Pair, int] = {p: i for i, p in enumerate(self.keys)}
        self.live: set[int] = set(range(len(self.keys)))
        self.corpus_values = {v for p in self.keys for v in p}
        if self.config.structure_refine:
            buckets = structure_partition(self.keys)
            ordered_keys = sorted(buckets, key=lambda k: buckets[k][0])
            self.buckets = [
                _Bucket(k, [self.gid_of[p] for p in buckets[k]]) for k in ordered_keys
            ]
        else:
            self.buckets = [_Bucket(None, list(range(len(self.keys))))]
        self.bucket_of: dict[int, int] = {}
        for b_idx, bucket in enumerate(self.buckets):
            for gid in bucket.gids:
                self.bucket_of[gid] = b_idx
        self.up: dict[int, int] = {}
        self.lo: dict[int, int] = {}
        for bucket in self.buckets:
            for gid in bucket.gids:
                self.up[gid] = len(bucket.gids)
                self.lo[gid] = 1
        self.pivots: dict[int, _PivotInfo] = {}
        self.last_visit_trace: list[int] = []

    # -- bucket lifecycle ---------------------------------------------------

    def _live_bucket_gids(self, bucket: _Bucket) -> list[int]:
        return [g for g in bucket.gids if g in self.live]

    def _materialize(self, bucket: _Bucket) -> None:
        gids = self._live_bucket_gids(bucket)
        bucket.gids = gids
        pairs = {g: self.keys[g] for g in gids}
        scorer = _make_scorer(self.config, list(pairs.values()), self.corpus_values)
        graphs = _build_graphs(pairs, scorer, self.config)
        indexed = graphs
        bucket.sampled = None
        threshold = self.config.sample_threshold
        if threshold is not None and len(gids) > threshold:
            rng = random.Random((self.config.seed, tuple(sorted(gids))))
            sample = sorted(rng.sample(sorted(gids), self.config.sample_size))
            bucket.sampled = set(sample)
            indexed = {g: graphs[g] for g in sample}
        bucket.all_graphs = graphs
        bucket.index = InvertedIndex(indexed)
        bucket.bounds = init_upper_bounds(bucket.index)
        bucket.materialized = True
        for gid in gids:
            self.lo[gid] = bucket.bounds.lo.get(gid, 1)
            self.up[gid] = bucket.bounds.up.get(gid, len(gids))

    def invalidate(self, dead_keys: Iterable[Pair]) -> None:
        """Drop replacements killed by an application; rebuild lazily.

        The touched structure groups fall back to lazy state with fresh
        bounds, and their memoized pivots are discarded.
        """
        touched = set()
        for key in dead_keys:
            gid = self.gid_of.get(key)
            if gid is None:
                continue
            self.live.discard(gid)
            touched.add(self.bucket_of[gid])
        for b_idx in touched:
            bucket = self.buckets[b_idx]
            bucket.materialized = False
            bucket.index = None
            bucket.bounds = None
            gids = self._live_bucket_gids(bucket)
            bucket.gids = gids
            for gid in gids:
                self.pivots.pop(gid, None)
                self.up[gid] = len(gids)
                self.lo[gid] = 1

    # -- pivot access -------------------------------------------------------

    def _search(self, gid: int, floor: int) -> Optional[SearchResult]:
        bucket = self.buckets[self.bucket_of[gid]]
        return find_pivot(
            gid,
            bucket.index,
            local_threshold=floor,
            bounds=bucket.bounds,
            max_len=self.config.max_path_len,
            early_termination=self.config.early_termination,
        )

    def _visit(self, gid: int, floor: int) -> Optional[_PivotInfo]:
        """Pivot of a graph, or None when its support cannot exceed floor."""
        info = self.pivots.get(gid)
        if info is not None:
            return info
        res = self._search(gid, floor)
        if res is None:
            self.up[gid] = min(self.up[gid], max(floor, 1))
            return None
        info = _PivotInfo(res.program, res.text, res.support, res.containers)
        self.pivots[gid] = info
        self.lo[gid] = self.up[gid] = res.support
        return info

    def _exact_pivot(self, gid: int, at_least: int) -> _PivotInfo:
        """Pivot of a graph known to contain a path of the given support."""
        info = self.pivots.get(gid)
        if info is None:
            res = self._search(gid, max(at_least - 1, 0))
            assert res is not None, "container must reach the shared support"
            info = _PivotInfo(res.program, res.text, res.support, res.containers)
            self.pivots[gid] = info
            self.lo[gid] = self.up[gid] = res.support
        return info

    def _fiber(self, info: _PivotInfo) -> list[int]:
        out = []
        for h in info.containers:
            if h not in self.live:
                continue
            if self._exact_pivot(h, info.support).text == info.text:
                out.append(h)
        return out

    # -- generation ---------------------------------------------------------

    def next_largest_group(self) -> Optional[Group]:
        """The largest remaining group, or None when the pool is exhausted.

        Graphs are visited in descending upper-bound order through a lazy
        heap, since bounds tighten while the scan runs (searching one graph
        pins exact supports for every container it verifies).  The scan
        stops once the best group found is at least every remaining bound.
        """
        while True:
            if not self.live:
                return None
            heap = [(-self.up[g], g) for g in self.live]
            heapq.heapify(heap)
            visited: set[int] = set()
            best_size = 0
            best: Optional[tuple] = None
            self.last_visit_trace = []
            restart = False
            while heap:
                negup, gid = heapq.heappop(heap)
                if gid not in self.live or gid in visited:
                    continue
                if -negup != self.up[gid]:
                    # bound tightened since this entry was pushed
                    heapq.heappush(heap, (-self.up[gid], gid))
                    continue
                if best is not None and best_size >= self.up[gid]:
                    break
                bucket = self.buckets[self.bucket_of[gid]]
                if not bucket.materialized:
                    self._materialize(bucket)
                    restart = True
                    break
                visited.add(gid)
                self.last_visit_trace.append(gid)
                info = self._visit(gid, best_size)
                if info is None or info.support <= best_size:
                    continue
                if bucket.sampled is not None:
                    members = self._exact_containers(bucket, info)
                else:
                    members = self._fiber(info)
                if len(members) > best_size:
                    best_size = len(members)
                    best = (info, members)
            if restart:
                continue
            if best is None:
                return None
            info, members = best
            if best_size < self.config.min_group_size:
                return None
            for gid in members:
                self.live.discard(gid)
            return Group(
                info.program,
                info.text,
                tuple(sorted(self.keys[g] for g in members)),
            )

    def _exact_containers(self, bucket: _Bucket, info: _PivotInfo) -> list[int]:
        """Sampling mode: recompute true membership for the winning path."""
        return [
            g
            for g in sorted(self._live_bucket_gids(bucket))
            if graph_contains_path(bucket.all_graphs[g], info.program.functions)
        ]
