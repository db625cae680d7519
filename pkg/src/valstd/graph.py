"""Transformation graphs: every way to rebuild a target string from a source.

The graph of a replacement s -> t has nodes 1 .. len(t)+1 and one edge per
substring t[i, j).  An edge's labels are string functions that can output
exactly that substring when applied to s.  Root-to-sink paths therefore
correspond to programs that rewrite s into t.

Construction first indexes every way to name a position of s (constant
indices, regex-match boundaries, boundaries of frequent literal substrings),
then labels each edge with the matching SubStr, affix, and constant
functions.  A corpus-frequency scorer optionally prunes constant labels and
picks one literal term per position, keeping graphs small on real data.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Optional

from .dsl import (
    ConstPos,
    ConstantStr,
    MatchPos,
    Prefix,
    REGEX_TERMS,
    StringFunction,
    SubStr,
    Suffix,
    Term,
    const_term,
    function_text,
    label_sort_key,
    term_matches,
)

DEFAULT_MAX_VALUE_LEN = 256
DEFAULT_CONSTANT_TERM_MAX_LEN = 8


def score_constant(
    term_text: str, freq_in_group: int, freq_global: int, exponent: float = 0.5
) -> float:
    """Rank a literal string by how group-specific it is.

    freq_in_group / freq_global**exponent, so strings frequent inside one
    structure group but ubiquitous elsewhere (single characters, mostly)
    rank low.  A string absent from the group scores zero.
    """
    if freq_in_group < 0 or freq_global < freq_in_group:
        raise ValueError("need freq_global >= freq_in_group >= 0")
    if freq_in_group == 0:
        return 0.0
    if freq_global == 0:
        raise ValueError("string with occurrences must have global frequency")
    return freq_in_group / freq_global**exponent


def _substring_counts(values: Iterable[str], max_len: int) -> Counter:
    counts: Counter = Counter()
    for v in values:
        n = len(v)
        for a in range(n):
            for b in range(a + 1, min(a + max_len, n) + 1):
                counts[v[a:b]] += 1
    return counts


class ConstantScorer:
    """Substring frequencies of a structure group against the whole corpus."""

    def __init__(
        self,
        group_values: Iterable[str],
        corpus_values: Iterable[str],
        exponent: float = 0.5,
        max_term_len: int = DEFAULT_CONSTANT_TERM_MAX_LEN,
    ) -> None:
        self.exponent = exponent
        self.max_term_len = max_term_len
        self.group_counts = _substring_counts(set(group_values), max_term_len)
        self.global_counts = _substring_counts(set(corpus_values), max_term_len)

    def score(self, text: str) -> float:
        freq_global = self.global_counts.get(text, 0)
        freq_group = min(self.group_counts.get(text, 0), freq_global)
        if freq_global == 0:
            return 0.0
        return score_constant(text, freq_group, freq_global, self.exponent)

    def realized_terms(self, s: str) -> list[Term]:
        """Literal terms usable in MatchPos for this source string."""
        seen = set()
        out = []
        n = len(s)
        for a in range(n):
            for b in range(a + 1, min(a + self.max_term_len, n) + 1):
                text = s[a:b]
                if text in seen:
                    continue
                seen.add(text)
                if self.global_counts.get(text, 0) > 0:
                    out.append(const_term(text))
        return out


class PositionIndex:
    """For each position of s, every position function that resolves to it."""

    def __init__(self, s: str) -> None:
        self.source = s
        self.at: list[set] = [set() for _ in range(len(s) + 2)]

    def add(self, pos: int, pf) -> None:
        self.at[pos].add(pf)

    def functions_at(self, pos: int) -> set:
        return self.at[pos]


def _add_term_positions(index: PositionIndex, term: Term, s: str) -> None:
    matches = term_matches(term, s)
    m = len(matches)
    for k, (x, y) in enumerate(matches, start=1):
        index.add(x, MatchPos(term, k, "B"))
        index.add(x, MatchPos(term, k - m - 1, "B"))
        index.add(y, MatchPos(term, k, "E"))
        index.add(y, MatchPos(term, k - m - 1, "E"))


def build_position_index(s: str, scorer: Optional[ConstantScorer] = None) -> PositionIndex:
    """Index every position of s by the functions that can locate it.

    Regex-term boundaries and constant indices are always present.  Literal
    terms are added per position only for the single best-scoring term whose
    match boundary lands there, which bounds index width on repetitive data.
    """
    index = PositionIndex(s)
    for term in REGEX_TERMS:
        _add_term_positions(index, term, s)
    for k in range(1, len(s) + 2):
        index.add(k, ConstPos(k))
        index.add(k, ConstPos(k - len(s) - 2))
    if scorer is not None:
        best: dict[int, tuple[tuple[float, str], Term]] = {}
        for term in scorer.realized_terms(s):
            rank = (-scorer.score(term.text), term.text)
            for x, y in term_matches(term, s):
                for pos in (x, y):
                    cur = best.get(pos)
                    if cur is None or rank < cur[0]:
                        best[pos] = (rank, term)
        for pos, (_, term) in best.items():
            matches = term_matches(term, s)
            m = len(matches)
            for k, (x, y) in enumerate(matches, start=1):
                if x == pos:
                    index.add(pos, MatchPos(term, k, "B"))
                    index.add(pos, MatchPos(term, k - m - 1, "B"))
                if y == pos:
                    index.add(pos, MatchPos(term, k, "E"))
                    index.add(pos, MatchPos(term, k - m - 1, "E"))
    return index


class TransformationGraph:
    """DAG over the positions of ``target``; edges carry function labels."""

    def __init__(self, source: str, target: str, edges: dict) -> None:
        self.source = source
        self.target = target
        # (i, j) -> list of labels, sorted in canonical enumeration order
        self.edges = edges
        self._out: dict[int, list] = {}
        for (i, j), labels in sorted(edges.items()):
            self._out.setdefault(i, []).append((j, labels))

    @property
    def sink(self) -> int:
        return len(self.target) + 1

    def out_edges(self, node: int) -> list:
        """Outgoing (j, labels) pairs in ascending j order."""
        return self._out.get(node, [])

    def labels(self, i: int, j: int) -> list:
        return self.edges.get((i, j), [])

    def dump(self) -> str:
        lines = []
        for (i, j), labels in sorted(self.edges.items()):
            lines.append(
                "{} {} {}".format(i, j, " | ".join(function_text(f) for f in labels))
            )
        return "\n".join(lines)


def _common_prefix_len(a: str, b: str) -> int:
    n = min(len(a), len(b))
    for i in range(n):
        if a[i] != b[i]:
            return i
    return n


def build_graph(
    s: str,
    t: str,
    scorer: Optional[ConstantScorer] = None,
    max_value_len: int = DEFAULT_MAX_VALUE_LEN,
) -> TransformationGraph:
    """Build the transformation graph of s -> t.

    Every edge (i, j) exists; each carries the constant for its substring
    (subject to scoring, though the full-span edge always keeps its constant
    so a path always exists), SubStr labels for every occurrence of the
    substring in s, and affix labels where the substring is the longest
    prefix or suffix of a regex match reachable from that endpoint.
    """
    if t == "":
        raise ValueError("target side of a replacement must be non-empty")
    if len(s) > max_value_len or len(t) > max_value_len:
        # oversized values get the trivial graph; they group as singletons
        return TransformationGraph(s, t, {(1, len(t) + 1): [ConstantStr(t)]})

    index = build_position_index(s, scorer)
    n, m = len(s), len(t)

    # lcp[x][i] = length of the longest common run of s[x:] and t[i:]
    lcp = [[0] * (m + 1) for _ in range(n + 1)]
    for x in range(n - 1, -1, -1):
        row = lcp[x]
        nxt = lcp[x + 1]
        sx = s[x]
        for i in range(m - 1, -1, -1):
            if sx == t[i]:
                row[i] = nxt[i + 1] + 1

    labels: dict[tuple[int, int], set] = {
        (i, j): set() for i in range(1, m + 1) for j in range(i + 1, m + 2)
    }

    # constant labels, with containment-based pruning when a scorer is given
    if scorer is None:
        for (i, j), bucket in labels.items():
            bucket.add(ConstantStr(t[i - 1 : j - 1]))
    else:
        score = {}
        for i in range(1, m + 1):
            for j in range(i + 1, m + 2):
                score[(i, j)] = scorer.score(t[i - 1 : j - 1])
        for (i, j), bucket in labels.items():
            if (i, j) == (1, m + 1):
                bucket.add(ConstantStr(t))
                continue
            own = score[(i, j)]
            # extensions sharing an endpoint: t[k, j) for k < i, t[i, l) for l > j
            left = max((score[(k, j)] for k in range(1, i)), default=0.0)
            right = max((score[(i, l)] for l in range(j + 1, m + 2)), default=0.0)
            if own >= left and own >= right:
                bucket.add(ConstantStr(t[i - 1 : j - 1]))

    # substring labels: one per occurrence and pair of position functions
    for x in range(n):
        for i in range(m):
            run = lcp[x][i]
            for length in range(1, run + 1):
                left_pfs = index.functions_at(x + 1)
                right_pfs = index.functions_at(x + 1 + length)
                bucket = labels[(i + 1, i + 1 + length)]
                for f in left_pfs:
                    for g in right_pfs:
                        bucket.add(SubStr(f, g))

    # affix labels: longest prefix per start, longest suffix per end
    for term in REGEX_TERMS:
        matches = term_matches(term, s)
        for k, (x, y) in enumerate(matches, start=1):
            match = s[x - 1 : y - 1]
            for i in range(m):
                run = _common_prefix_len(t[i:], match)
                if run >= 1:
                    labels[(i + 1, i + 1 + run)].add(Prefix(term, k))
            rmatch = match[::-1]
            rt = t[::-1]
            for rj in range(m):
                run = _common_prefix_len(rt[rj:], rmatch)
                if run >= 1:
                    j = m - rj + 1
                    labels[(j - run, j)].add(Suffix(term, k))

    edges = {
        span: sorted(bucket, key=label_sort_key) for span, bucket in labels.items()
    }
    return TransformationGraph(s, t, edges)
