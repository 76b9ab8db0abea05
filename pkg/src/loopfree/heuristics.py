"""Approximate path decoders: loop elimination and greedy path discovery."""

from __future__ import annotations

import numpy as np

from .model import PotentialModel, Query, ScoredSequence, first_argmax, first_repeat, scored, validate_query
from .viterbi import viterbi_decode


def loop_elim(model: PotentialModel, q: Query) -> ScoredSequence:
    """Viterbi output cut just before its first repeated POI.

    The result is repeat-free but may be shorter than requested. Its score is
    recomputed on the truncated path.
    """
    q = validate_query(model, q, require_path=True)
    seq = viterbi_decode(model, q).sequence
    cut = first_repeat(seq)
    return scored(model, seq if cut is None else seq[:cut])


def loop_elim_pp(model: PotentialModel, q: Query) -> ScoredSequence:
    """Loop elimination over requested lengths ``l..n``, keeping the closest length.

    Lengths are tried in ascending order, so ties go to the smallest
    requested length, and the search stops at the first exact-length hit.
    """
    q = validate_query(model, q, require_path=True)
    best = None
    best_gap = None
    for length in range(q.length, model.n + 1):
        cand = loop_elim(model, Query(q.start, length))
        gap = abs(len(cand.sequence) - q.length)
        if best is None or gap < best_gap:
            best, best_gap = cand, gap
            if gap == 0:
                break
    return best


def greedy_decode(model: PotentialModel, q: Query) -> ScoredSequence:
    """Extend the path one step at a time with the best unused POI."""
    q = validate_query(model, q, require_path=True)
    unary, pairwise = model.unary, model.pairwise
    unused = np.ones(model.n, dtype=bool)
    unused[q.start] = False
    path = [q.start]
    for _ in range(q.length - 1):
        nxt = first_argmax(unary + pairwise[path[-1]], allowed=unused)
        unused[nxt] = False
        path.append(nxt)
    return scored(model, path)
