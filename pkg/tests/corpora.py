"""Random replacement corpora for equivalence and stress tests.

Corpora mix unrelated value pairs (which group as singletons) with pairs
drawn from shared transformation patterns (which should group together), so
the grouping algorithms see both regimes.
"""

import random

ORACLE_ALPHABET = "ab1A ."


def _rand_string(rng: random.Random, alphabet: str, lo: int, hi: int) -> str:
    return "".join(rng.choice(alphabet) for _ in range(rng.randint(lo, hi)))


def _word(rng: random.Random, lo: int = 2, hi: int = 4) -> str:
    return "".join(rng.choice("abcdefgh") for _ in range(rng.randint(lo, hi)))


def _cap_word(rng: random.Random, lo: int = 2, hi: int = 5) -> str:
    w = _word(rng, lo, hi)
    return w[0].upper() + w[1:]


# -- patterned pairs: the same transformation applied to fresh fragments ----


def _swap_around_comma(rng):
    a, b = _cap_word(rng), _cap_word(rng)
    return ("{}, {}".format(a, b), "{} {}".format(b, a))


def _initial_dot(rng):
    a, b = _cap_word(rng), _cap_word(rng)
    return ("{}, {}".format(a, b), "{}. {}".format(b[0], a))


def _truncate(rng):
    w = _cap_word(rng, 4, 6)
    return (w, w[: rng.randint(2, 3)])


def _ordinal(rng):
    n = str(rng.randint(1, 99))
    return (n, n + rng.choice(["th", "st", "nd"]))


def _parenthesize(rng):
    w = _word(rng, 2, 5)
    return ("{} ({})".format(w, rng.choice(["a", "b"])), w)


PATTERNS = [_swap_around_comma, _initial_dot, _truncate, _ordinal, _parenthesize]


def patterned_corpus(rng: random.Random, size: int, patterns=None) -> list:
    """Pairs drawn from shared patterns plus some unrelated noise."""
    patterns = patterns or PATTERNS
    pairs = set()
    while len(pairs) < size:
        if rng.random() < 0.75:
            s, t = rng.choice(patterns)(rng)
        else:
            s, t = _word(rng, 2, 5), _word(rng, 2, 5)
        if s and t and s != t:
            pairs.add((s, t))
            if rng.random() < 0.5 and len(pairs) < size:
                pairs.add((t, s))
    return sorted(pairs)


def oracle_corpus(rng: random.Random, size: int, max_len: int = 8) -> list:
    """Small random pairs over a six-character alphabet.

    Roughly half the pairs are correlated (target assembled from source
    fragments), the rest independent.
    """
    pairs = set()
    while len(pairs) < size:
        s = _rand_string(rng, ORACLE_ALPHABET, 1, max_len)
        if rng.random() < 0.5:
            t = _rand_string(rng, ORACLE_ALPHABET, 1, max_len)
        else:
            cut = rng.randint(1, len(s))
            t = (s[:cut] + _rand_string(rng, ORACLE_ALPHABET, 0, 2))[:max_len]
        if s and t and s != t:
            pairs.add((s, t))
    return sorted(pairs)
