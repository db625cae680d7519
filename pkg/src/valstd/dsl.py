"""The string-transformation language: terms, positions, string functions, programs.

A program is a sequence of string functions.  Applied to an input string it
yields the concatenation of one output per function.  SubStr and ConstantStr
are single-valued; Prefix and Suffix yield a set of candidate outputs (every
non-empty prefix or suffix of a regex match), which is what lets one program
cover both "Street" -> "St" and "Avenue" -> "Ave".

Positions are 1-based: a string of length n has positions 1 .. n+1, where
position n+1 is the slot just past the last character.  All values here are
immutable and evaluation is pure.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Term:
    """A character-class or literal-string matcher.

    kind is one of:
      "d"   digits        [0-9]+
      "l"   lowercase     [a-z]+
      "C"   uppercase     [A-Z]+
      "b"   whitespace    \\s+        (ASCII whitespace)
      "str" literal       matches exactly ``text``
      "ch"  single char   used only in structure encodings, never in MatchPos
    """

    kind: str
    text: str = ""

    def is_regex(self) -> bool:
        return self.kind in ("d", "l", "C", "b")


DIGITS = Term("d")
LOWER = Term("l")
UPPER = Term("C")
SPACE = Term("b")


def const_term(text: str) -> Term:
    if not text:
        raise ValueError("constant term must be non-empty")
    return Term("str", text)


def char_term(ch: str) -> Term:
    if len(ch) != 1:
        raise ValueError("char term takes exactly one character")
    return Term("ch", ch)


_CLASS_RE = {
    "d": re.compile(r"[0-9]+"),
    "l": re.compile(r"[a-z]+"),
    "C": re.compile(r"[A-Z]+"),
    "b": re.compile(r"[ \t\n\r\f\v]+"),
}

REGEX_TERMS = (SPACE, DIGITS, LOWER, UPPER)


def char_class(ch: str) -> Optional[str]:
    """Regex-class kind of a single character, or None for everything else."""
    if "0" <= ch <= "9":
        return "d"
    if "a" <= ch <= "z":
        return "l"
    if "A" <= ch <= "Z":
        return "C"
    if ch in " \t\n\r\f\v":
        return "b"
    return None


@lru_cache(maxsize=65536)
def term_matches(term: Term, s: str) -> tuple[tuple[int, int], ...]:
    """All maximal matches of ``term`` in ``s`` as 1-based [start, end) pairs.

    Regex terms match maximal runs; literal terms match non-overlapping
    occurrences scanned left to right.  Char terms never match here.
    """
    if term.kind == "ch":
        return ()
    if term.kind == "str":
        out = []
        start = 0
        while True:
            at = s.find(term.text, start)
            if at < 0:
                break
            out.append((at + 1, at + 1 + len(term.text)))
            start = at + len(term.text)
        return tuple(out)
    return tuple(
        (m.start() + 1, m.end() + 1) for m in _CLASS_RE[term.kind].finditer(s)
    )


# ---------------------------------------------------------------------------
# Position functions


@dataclass(frozen=True)
class ConstPos:
    """Fixed position; negative k counts backward from the end."""

    k: int

    def __post_init__(self) -> None:
        if self.k == 0:
            raise ValueError("position index must be non-zero")


@dataclass(frozen=True)
class MatchPos:
    """Beginning (dir="B") or end (dir="E") of the k-th match of a term.

    Negative k counts matches from the last one backward.  The term must be
    regex-based or a literal; single-char terms are subsumed by literals.
    """

    term: Term
    k: int
    dir: str

    def __post_init__(self) -> None:
        if self.k == 0:
            raise ValueError("match index must be non-zero")
        if self.dir not in ("B", "E"):
            raise ValueError("dir must be 'B' or 'E'")
        if self.term.kind == "ch":
            raise ValueError("single-char terms are not allowed in MatchPos")


PositionFunction = Union[ConstPos, MatchPos]


def eval_position(pf: PositionFunction, s: str) -> Optional[int]:
    """Resolve a position function against ``s``; None when out of range."""
    n = len(s)
    if isinstance(pf, ConstPos):
        if 0 < pf.k <= n + 1:
            return pf.k
        if -(n + 1) <= pf.k < 0:
            return n + 2 + pf.k
        return None
    matches = term_matches(pf.term, s)
    m = len(matches)
    if 0 < pf.k <= m:
        idx = pf.k - 1
    elif -m <= pf.k < 0:
        idx = m + pf.k
    else:
        return None
    return matches[idx][0] if pf.dir == "B" else matches[idx][1]


# ---------------------------------------------------------------------------
# String functions


@dataclass(frozen=True)
class ConstantStr:
    text: str


@dataclass(frozen=True)
class SubStr:
    left: PositionFunction
    right: PositionFunction


@dataclass(frozen=True)
class Prefix:
    term: Term
    k: int

    def __post_init__(self) -> None:
        if self.k == 0:
            raise ValueError("match index must be non-zero")
        if not self.term.is_regex():
            raise ValueError("affix functions take regex-based terms only")


@dataclass(frozen=True)
class Suffix:
    term: Term
    k: int

    def __post_init__(self) -> None:
        if self.k == 0:
            raise ValueError("match index must be non-zero")
        if not self.term.is_regex():
            raise ValueError("affix functions take regex-based terms only")


StringFunction = Union[ConstantStr, SubStr, Prefix, Suffix]


def _affix_match(term: Term, k: int, s: str) -> Optional[str]:
    matches = term_matches(term, s)
    m = len(matches)
    if 0 < k <= m:
        x, y = matches[k - 1]
    elif -m <= k < 0:
        x, y = matches[m + k]
    else:
        return None
    return s[x - 1 : y - 1]


def eval_string_function(f: StringFunction, s: str) -> frozenset[str]:
    """All outputs of ``f`` on ``s``.  Undefined cases yield the empty set."""
    if isinstance(f, ConstantStr):
        return frozenset((f.text,))
    if isinstance(f, SubStr):
        left = eval_position(f.left, s)
        right = eval_position(f.right, s)
        if left is None or right is None or left >= right:
            return frozenset()
        return frozenset((s[left - 1 : right - 1],))
    match = _affix_match(f.term, f.k, s)
    if match is None:
        return frozenset()
    if isinstance(f, Prefix):
        return frozenset(match[:i] for i in range(1, len(match) + 1))
    return frozenset(match[-i:] for i in range(1, len(match) + 1))


def _advance(f: StringFunction, s: str, t: str, at: int) -> list[int]:
    """0-based offsets into ``t`` reachable by consuming one output of ``f``."""
    if isinstance(f, ConstantStr):
        return [at + len(f.text)] if t.startswith(f.text, at) else []
    if isinstance(f, SubStr):
        left = eval_position(f.left, s)
        right = eval_position(f.right, s)
        if left is None or right is None or left >= right:
            return []
        piece = s[left - 1 : right - 1]
        return [at + len(piece)] if t.startswith(piece, at) else []
    match = _affix_match(f.term, f.k, s)
    if not match:
        return []
    out = []
    if isinstance(f, Prefix):
        limit = min(len(match), len(t) - at)
        for i in range(1, limit + 1):
            if t[at + i - 1] != match[i - 1]:
                break
            out.append(at + i)
    else:
        for i in range(1, len(match) + 1):
            if at + i > len(t):
                break
            if t[at : at + i] == match[-i:]:
                out.append(at + i)
    return out


# ---------------------------------------------------------------------------
# Programs


@dataclass(frozen=True)
class Program:
    """An ordered sequence of string functions; empty means "no path yet"."""

    functions: tuple[StringFunction, ...] = ()

    def __bool__(self) -> bool:
        return bool(self.functions)

    def __len__(self) -> int:
        return len(self.functions)

    def extended(self, f: StringFunction) -> "Program":
        return Program(self.functions + (f,))

    def apply(self, s: str) -> frozenset[str]:
        """All strings the program can produce from ``s``."""
        outs = {""}
        for f in self.functions:
            pieces = eval_string_function(f, s)
            if not pieces:
                return frozenset()
            outs = {acc + piece for acc in outs for piece in pieces}
        return frozenset(outs)


def is_consistent(p: Program, s: str, t: str) -> bool:
    """True iff ``t`` splits into consecutive pieces, one output per function.

    Dynamic program over offsets of ``t``; each function advances the set of
    reachable offsets.  The empty program is consistent only with "".
    """
    if not p.functions:
        return t == ""
    reachable = {0}
    for f in p.functions:
        nxt: set[int] = set()
        for at in reachable:
            nxt.update(_advance(f, s, t, at))
        if not nxt:
            return False
        reachable = nxt
    return len(t) in reachable


# ---------------------------------------------------------------------------
# Canonical text

_ESCAPE = str.maketrans({"\\": "\\\\", '"': '\\"'})


def _quote(text: str) -> str:
    return '"{}"'.format(text.translate(_ESCAPE))


def term_text(term: Term) -> str:
    if term.kind == "str":
        return "Tstr({})".format(_quote(term.text))
    if term.kind == "ch":
        return "Tch('{}')".format(term.text.translate(_ESCAPE))
    return "T" + term.kind


def position_text(pf: PositionFunction) -> str:
    if isinstance(pf, ConstPos):
        return "ConstPos({})".format(pf.k)
    return "MatchPos({},{},{})".format(term_text(pf.term), pf.k, pf.dir)


@lru_cache(maxsize=None)
def function_text(f: StringFunction) -> str:
    if isinstance(f, ConstantStr):
        return "ConstantStr({})".format(_quote(f.text))
    if isinstance(f, SubStr):
        return "SubStr({},{})".format(position_text(f.left), position_text(f.right))
    if isinstance(f, Prefix):
        return "Prefix({},{})".format(term_text(f.term), f.k)
    return "Suffix({},{})".format(term_text(f.term), f.k)


def canonical_text(p: Program) -> str:
    """Deterministic, injective rendering; equal programs render equally."""
    return "⊕".join(function_text(f) for f in p.functions)


_KIND_RANK = {SubStr: 0, Prefix: 1, Suffix: 2, ConstantStr: 3}


def label_sort_key(f: StringFunction) -> tuple[int, str]:
    """Fixed enumeration order for edge labels: SubStr, Prefix, Suffix, then
    constants, each ordered by canonical text."""
    return (_KIND_RANK[type(f)], function_text(f))
