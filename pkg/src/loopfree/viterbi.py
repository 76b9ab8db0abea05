"""Max-sum Viterbi decoding over fixed-length sequences with a fixed start.

Ties are resolved so that, among equally scored sequences, the decoder
returns the lexicographically smallest one. Preferring the smallest
predecessor index at every max is not enough for that (it yields the
smallest sequence read backwards), so the trellis also keeps, per position,
the lexicographic rank of each state's best prefix, and predecessors are
chosen by that rank.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SCORE_DECIMALS, PotentialModel, Query, ScoredSequence, scored, tied_mask, validate_query


def unreachable_score(model: PotentialModel, length: int) -> float:
    """Finite stand-in for minus infinity, below any reachable score."""
    bound = length * (np.abs(model.unary).max() + np.abs(model.pairwise).max()) + 1.0
    return -2.0 * float(bound)


@dataclass(frozen=True, eq=False)
class ViterbiTrellis:
    """Forward max-sum tables.

    Row ``t`` (0-based) describes position ``t + 1`` of the sequence:
    ``delta[t, j]`` is the best score of a prefix of length ``t + 1`` ending
    at ``j``, ``backptr[t, j]`` its predecessor, and ``rank[t, j]`` the
    lexicographic position of that best prefix among all states at row ``t``.
    States other than the start are unreachable in row 0 and carry
    ``unreachable``.
    """

    delta: np.ndarray
    backptr: np.ndarray
    rank: np.ndarray
    start: int
    unreachable: float

    @property
    def length(self) -> int:
        return self.delta.shape[0]

    def prefix(self, t: int, j: int) -> tuple[int, ...]:
        """Best prefix of length ``t + 1`` ending at state ``j``."""
        out = [j]
        for row in range(t, 0, -1):
            j = int(self.backptr[row, j])
            out.append(j)
        out.reverse()
        return tuple(out)

    def best_end(self, t: int | None = None, allowed: np.ndarray | None = None) -> int:
        """State ending the best (then lexicographically smallest) prefix at row ``t``."""
        t = self.length - 1 if t is None else t
        values = self.delta[t]
        if allowed is None:
            ties = tied_mask(values)
        else:
            keys = np.round(values, SCORE_DECIMALS)
            ties = allowed & (keys == keys[allowed].max())
        ranks = np.where(ties, self.rank[t], self.rank.shape[1])
        return int(ranks.argmin())


def build_trellis(model: PotentialModel, q: Query) -> ViterbiTrellis:
    q = validate_query(model, q, require_path=False)
    n, l = model.n, q.length
    unary, pairwise = model.unary, model.pairwise
    lowest = unreachable_score(model, l)

    delta = np.full((l, n), lowest)
    backptr = np.zeros((l, n), dtype=np.intp)
    rank = np.zeros((l, n), dtype=np.intp)
    delta[0, q.start] = unary[q.start]
    # One-element prefixes (j,) order by j.
    rank[0] = np.arange(n)

    cols = np.arange(n)
    for t in range(1, l):
        cand = delta[t - 1][:, None] + pairwise
        keys = np.round(cand, SCORE_DECIMALS)
        ties = keys == keys.max(axis=0)
        prev_rank = np.where(ties, rank[t - 1][:, None], n)
        best_prev = prev_rank.argmin(axis=0)
        backptr[t] = best_prev
        delta[t] = cand[best_prev, cols] + unary
        order = np.lexsort((cols, rank[t - 1][best_prev]))
        rank[t, order] = cols
    for arr in (delta, backptr, rank):
        arr.setflags(write=False)
    return ViterbiTrellis(delta, backptr, rank, q.start, lowest)


def viterbi_decode(model: PotentialModel, q: Query) -> ScoredSequence:
    """Best sequence of length ``q.length`` from ``q.start``; repeats allowed."""
    trellis = build_trellis(model, q)
    end = trellis.best_end()
    return scored(model, trellis.prefix(trellis.length - 1, end))
