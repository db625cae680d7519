"""Candidate replacements: value pairs observed inside duplicate clusters.

Two generators feed the pool.  The pairwise generator emits both directions
of every non-identical value pair within a cluster.  The token-level
generator aligns whitespace tokens of each pair by longest common
subsequence and emits the differing gaps, which catches local edits such as
"Wisconsin" -> "WI" inside longer addresses.

Every replacement tracks where it was observed, so approved replacements can
be applied back to exactly those cells and the bookkeeping updated in place.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Union


class ClusterTable:
    """Rows with a cluster key and string-valued columns; cells are mutable.

    Cells are addressed by (cluster id, member index) within a column, where
    members follow row order inside the cluster.  Addresses stay stable for
    the lifetime of the table.
    """

    def __init__(
        self,
        columns: list[str],
        rows: list[list[str]],
        cluster_of: list[int],
        cluster_keys: list[str],
    ) -> None:
        if len(rows) != len(cluster_of):
            raise ValueError("cluster assignment must cover every row")
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]
        self.cluster_of = list(cluster_of)
        self.cluster_keys = list(cluster_keys)
        self.members: list[list[int]] = [[] for _ in cluster_keys]
        for row_idx, cid in enumerate(cluster_of):
            self.members[cid].append(row_idx)
        self._col = {name: i for i, name in enumerate(self.columns)}

    @classmethod
    def from_rows(
        cls, columns: list[str], rows: list[list[str]], key_column: str
    ) -> "ClusterTable":
        """Group rows into clusters by exact key equality.

        Rows with an empty key each become their own singleton cluster.
        """
        if key_column not in columns:
            raise ValueError("cluster key column {!r} not present".format(key_column))
        key_idx = columns.index(key_column)
        ids: dict[str, int] = {}
        cluster_of = []
        cluster_keys: list[str] = []
        for row in rows:
            key = row[key_idx]
            if key == "":
                cluster_of.append(len(cluster_keys))
                cluster_keys.append("")
                continue
            if key not in ids:
                ids[key] = len(cluster_keys)
                cluster_keys.append(key)
            cluster_of.append(ids[key])
        return cls(columns, rows, cluster_of, cluster_keys)

    @property
    def cluster_count(self) -> int:
        return len(self.cluster_keys)

    def column_index(self, name: str) -> int:
        return self._col[name]

    def cell(self, cluster: int, member: int, column: str) -> str:
        return self.rows[self.members[cluster][member]][self._col[column]]

    def set_cell(self, cluster: int, member: int, column: str, value: str) -> None:
        self.rows[self.members[cluster][member]][self._col[column]] = value

    def cluster_values(self, cluster: int, column: str) -> list[str]:
        col = self._col[column]
        return [self.rows[r][col] for r in self.members[cluster]]

    def distinct_values(self, column: str) -> set[str]:
        col = self._col[column]
        return {row[col] for row in self.rows}


# ---------------------------------------------------------------------------
# Occurrences and the replacement store


@dataclass(frozen=True)
class ValueOcc:
    """Whole-cell observation: cell holds lhs, partner holds rhs."""

    cluster: int
    cell: int
    partner: int


@dataclass(frozen=True)
class TokenOcc:
    """Token-gap observation: lhs and rhs live inside longer cell values.

    Spans are character ranges into the cell text at generation time; a span
    is re-validated before use because cells mutate during a session.
    """

    cluster: int
    cell: int
    span: tuple[int, int]
    partner: int
    partner_span: tuple[int, int]


Occurrence = Union[ValueOcc, TokenOcc]


@dataclass
class Replacement:
    """A directed value pair and the cell observations that produced it."""

    lhs: str
    rhs: str
    occurrences: set = field(default_factory=set)

    @property
    def key(self) -> tuple[str, str]:
        return (self.lhs, self.rhs)


class ReplacementStore:
    """Pool of live replacements with per-cell reverse lookup.

    A replacement whose occurrence set empties out is removed; removals are
    reported so grouping state can drop the matching graphs.
    """

    def __init__(self) -> None:
        self.replacements: dict[tuple[str, str], Replacement] = {}
        self._by_cell: dict[tuple[int, int], set] = {}

    def __len__(self) -> int:
        return len(self.replacements)

    def __contains__(self, key: tuple[str, str]) -> bool:
        return key in self.replacements

    def get(self, key: tuple[str, str]) -> Optional[Replacement]:
        return self.replacements.get(key)

    def live(self) -> list[Replacement]:
        return [self.replacements[k] for k in sorted(self.replacements)]

    def _cells_of(self, occ: Occurrence) -> tuple[tuple[int, int], ...]:
        return ((occ.cluster, occ.cell), (occ.cluster, occ.partner))

    def add(self, lhs: str, rhs: str, occ: Occurrence) -> None:
        if lhs == rhs or not lhs or not rhs:
            raise ValueError("replacement sides must be non-empty and distinct")
        rep = self.replacements.get((lhs, rhs))
        if rep is None:
            rep = Replacement(lhs, rhs)
            self.replacements[(lhs, rhs)] = rep
        rep.occurrences.add(occ)
        for cell in self._cells_of(occ):
            self._by_cell.setdefault(cell, set()).add((rep.key, occ))

    def add_if_exists(self, lhs: str, rhs: str, occ: Occurrence) -> bool:
        """Attach an occurrence only when the value pair is already known."""
        if (lhs, rhs) not in self.replacements:
            return False
        self.add(lhs, rhs, occ)
        return True

    def discard(self, key: tuple[str, str], occ: Occurrence) -> Optional[tuple[str, str]]:
        """Drop one occurrence; returns the key if the replacement died."""
        rep = self.replacements.get(key)
        if rep is None or occ not in rep.occurrences:
            return None
        rep.occurrences.discard(occ)
        for cell in self._cells_of(occ):
            refs = self._by_cell.get(cell)
            if refs is not None:
                refs.discard((key, occ))
                if not refs:
                    del self._by_cell[cell]
        if not rep.occurrences:
            del self.replacements[key]
            return key
        return None

    def occurrences_touching(self, cluster: int, cell: int) -> list:
        """(key, occurrence) pairs referencing a cell, in a stable order."""
        refs = self._by_cell.get((cluster, cell), set())
        return sorted(refs, key=lambda ref: (ref[0], repr(ref[1])))


# ---------------------------------------------------------------------------
# Pairwise generation


def generate_pairwise(table: ClusterTable, column: str, store: ReplacementStore) -> None:
    """Both directions of every non-identical same-cluster value pair."""
    for cluster in range(table.cluster_count):
        values = table.cluster_values(cluster, column)
        for j, vj in enumerate(values):
            for k, vk in enumerate(values):
                if j == k or vj == vk or not vj or not vk:
                    continue
                store.add(vj, vk, ValueOcc(cluster, j, k))


# ---------------------------------------------------------------------------
# Token-level generation


def tokenize(s: str) -> list[tuple[str, int, int]]:
    """Whitespace-run tokens with their character spans."""
    out = []
    i = 0
    n = len(s)
    while i < n:
        if s[i].isspace():
            i += 1
            continue
        start = i
        while i < n and not s[i].isspace():
            i += 1
        out.append((s[start:i], start, i))
    return out


def _lcs_gap_indices(
    a: list[str], b: list[str]
) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Index ranges of maximal non-matching runs between LCS anchors.

    Ties in the dynamic program prefer matches at smaller a-indices, so the
    alignment is deterministic.
    """
    n, m = len(a), len(b)
    # table[i][j] = LCS length of a[i:], b[j:]
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            if a[i] == b[j]:
                table[i][j] = table[i + 1][j + 1] + 1
            else:
                table[i][j] = max(table[i + 1][j], table[i][j + 1])
    gaps = []
    i = j = 0
    ga, gb = 0, 0
    while i < n and j < m:
        if a[i] == b[j] and table[i][j] == table[i + 1][j + 1] + 1:
            if i > ga or j > gb:
                gaps.append(((ga, i), (gb, j)))
            i += 1
            j += 1
            ga, gb = i, j
        elif table[i][j + 1] >= table[i + 1][j]:
            j += 1
        else:
            i += 1
    if ga < n or gb < m:
        gaps.append(((ga, n), (gb, m)))
    return gaps


def lcs_align(a: list[str], b: list[str]) -> list[tuple[list[str], list[str]]]:
    """Gaps between longest-common-subsequence anchors of two token lists."""
    return [
        (a[a0:a1], b[b0:b1]) for (a0, a1), (b0, b1) in _lcs_gap_indices(a, b)
    ]


def _aligned_gap_spans(
    a: list[tuple[str, int, int]], b: list[tuple[str, int, int]]
) -> list[tuple[tuple[int, int], tuple[int, int], str, str]]:
    """Two-sided gaps as (char_span_a, char_span_b, text_a, text_b)."""
    gaps = _lcs_gap_indices([t for t, _, _ in a], [t for t, _, _ in b])
    out = []
    for (a0, a1), (b0, b1) in gaps:
        if a0 == a1 or b0 == b1:
            continue
        span_a = (a[a0][1], a[a1 - 1][2])
        span_b = (b[b0][1], b[b1 - 1][2])
        text_a = " ".join(tok for tok, _, _ in a[a0:a1])
        text_b = " ".join(tok for tok, _, _ in b[b0:b1])
        out.append((span_a, span_b, text_a, text_b))
    return out


def generate_token_level(
    table: ClusterTable, column: str, store: ReplacementStore
) -> None:
    """Differing token gaps of every non-identical same-cluster value pair.

    Gaps with an empty side are dropped; each surviving gap emits both
    directed replacements with character spans recorded for application.
    """
    for cluster in range(table.cluster_count):
        values = table.cluster_values(cluster, column)
        for j in range(len(values)):
            for k in range(j + 1, len(values)):
                if values[j] == values[k]:
                    continue
                toks_j = tokenize(values[j])
                toks_k = tokenize(values[k])
                for span_j, span_k, u, v in _aligned_gap_spans(toks_j, toks_k):
                    if u == v:
                        continue
                    store.add(u, v, TokenOcc(cluster, j, span_j, k, span_k))
                    store.add(v, u, TokenOcc(cluster, k, span_k, j, span_j))
