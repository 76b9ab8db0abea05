"""Exhaustive ground truth for small instances.

Everything here enumerates candidates explicitly and scores them with its
own loop, so it shares no code path with the decoders it is used to check.
"""

from __future__ import annotations

import itertools
import math

from .errors import TooLarge
from .model import PotentialModel, Query, ScoredSequence, score_key, validate_query

MAX_CANDIDATES = 10**7


def _plain_score(unary, pairwise, seq):
    total = 0.0
    for p in seq:
        total += unary[p]
    for a, b in zip(seq, seq[1:]):
        total += pairwise[a][b]
    return total


def ranking_key(item: ScoredSequence):
    """Total order shared with the list Viterbi: score desc, then sequence asc."""
    return (-score_key(item.score), item.sequence)


def enumerate_ranked(model: PotentialModel, q: Query, paths_only: bool = False) -> list[ScoredSequence]:
    """Every length-``q.length`` sequence from ``q.start``, best first."""
    q = validate_query(model, q, require_path=paths_only)
    n, l = model.n, q.length
    count = math.perm(n - 1, l - 1) if paths_only else n ** (l - 1)
    if count > MAX_CANDIDATES:
        raise TooLarge(f"{count} candidates exceeds the oracle limit of {MAX_CANDIDATES}")

    unary = model.unary.tolist()
    pairwise = model.pairwise.tolist()
    if paths_only:
        others = [p for p in range(n) if p != q.start]
        tails = itertools.permutations(others, l - 1)
    else:
        tails = itertools.product(range(n), repeat=l - 1)
    items = []
    for tail in tails:
        seq = (q.start,) + tail
        items.append(ScoredSequence(seq, _plain_score(unary, pairwise, seq)))
    items.sort(key=ranking_key)
    return items


def best_sequence(model: PotentialModel, q: Query) -> ScoredSequence:
    return enumerate_ranked(model, q, paths_only=False)[0]


def best_path(model: PotentialModel, q: Query) -> ScoredSequence:
    return enumerate_ranked(model, q, paths_only=True)[0]
