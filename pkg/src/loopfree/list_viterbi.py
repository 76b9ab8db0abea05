"""Serial list Viterbi: the best, second best, ... sequences, one at a time.

Two variants are provided. Both keep a pool of disjoint *partitions* of the
not-yet-emitted sequences, each summarised by its best member, and pop the
overall best:

* ``SUFFIX_FIX`` - a partition fixes the tail ``y[t+1:]`` and forbids some
  states at position ``t``; the head is free and its best value is read from
  the forward trellis. This is the "next best sequence merging into the
  current list at time t" view.
* ``PREFIX_FIX`` - a partition fixes the head ``y[:t]`` and forbids some
  states at position ``t``; the tail is free and is read from a backward
  trellis. This is the "first deviates from the current list at time t" view.

Emitting a partition's best member splits the remainder of that partition
into at most ``l - 1`` new partitions, one per position, so both variants
enumerate exactly the same space. With scores compared by
:func:`~loopfree.model.score_key` and ties broken by the lexicographically
smaller sequence, they emit identical lists.

``second_best_by_merge`` and ``second_best_by_deviation`` evaluate the two
closed-form second-best values directly, for checking that the two views
compute the same quantity.
"""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass

import numpy as np

from .errors import CapExceeded, NoPathPossible
from .model import (
    SCORE_DECIMALS,
    PotentialModel,
    Query,
    ScoredSequence,
    is_path,
    score_key,
    sum_score,
    validate_query,
)
from .viterbi import ViterbiTrellis, build_trellis, unreachable_score

DEFAULT_K_CAP = 1_000_000


class Variant(str, enum.Enum):
    SUFFIX_FIX = "suffix"
    PREFIX_FIX = "prefix"


@dataclass(frozen=True, eq=False)
class BackwardTrellis:
    """Backward max-sum tables; row ``t`` is 0-based like the forward trellis.

    ``gamma[t, j]`` is the best score of positions ``t+1 .. l-1`` given
    ``y[t] = j`` (the unary of ``j`` itself excluded) and ``succ[t, j]`` the
    smallest successor attaining it, so following ``succ`` greedily yields the
    lexicographically smallest optimal tail.
    """

    gamma: np.ndarray
    succ: np.ndarray

    def suffix(self, t: int, j: int) -> tuple[int, ...]:
        out = []
        for row in range(t, self.gamma.shape[0] - 1):
            j = int(self.succ[row, j])
            out.append(j)
        return tuple(out)


def build_backward(model: PotentialModel, length: int) -> BackwardTrellis:
    n = model.n
    gamma = np.zeros((length, n))
    succ = np.zeros((length, n), dtype=np.intp)
    rows = np.arange(n)
    for t in range(length - 2, -1, -1):
        cand = model.pairwise + (model.unary + gamma[t + 1])[None, :]
        keys = np.round(cand, SCORE_DECIMALS)
        best = (keys == keys.max(axis=1, keepdims=True)).argmax(axis=1)
        succ[t] = best
        gamma[t] = cand[rows, best]
    gamma.setflags(write=False)
    succ.setflags(write=False)
    return BackwardTrellis(gamma, succ)


def eta(model: PotentialModel, forward: ViterbiTrellis, backward: BackwardTrellis, t: int) -> np.ndarray:
    """Best total score with ``y[t-1] = i`` and ``y[t] = j``, as an ``(i, j)`` matrix."""
    return (
        forward.delta[t - 1][:, None]
        + model.pairwise
        + (model.unary + backward.gamma[t])[None, :]
    )


def second_best_by_merge(model: PotentialModel, q: Query) -> float:
    """Second-best score via the merge recurrence on the forward trellis.

    ``merged[t]`` is the best score of a length ``t + 1`` prefix that differs
    from the best sequence but agrees with it at position ``t``.
    """
    fwd = build_trellis(model, q)
    best = fwd.prefix(fwd.length - 1, fwd.best_end())
    lowest = unreachable_score(model, q.length)
    unary, pairwise = model.unary, model.pairwise

    def others(t):
        mask = np.ones(model.n, dtype=bool)
        mask[best[t]] = False
        return mask

    merged = lowest
    for t in range(1, q.length):
        here = best[t]
        mask = others(t - 1)
        switch = (fwd.delta[t - 1][mask] + pairwise[mask, here]).max() + unary[here]
        stay = merged + pairwise[best[t - 1], here] + unary[here]
        merged = max(switch, stay)
    # Virtual end state: either end elsewhere or have merged before the end.
    return float(max(fwd.delta[-1][others(q.length - 1)].max(), merged))


def second_best_by_deviation(model: PotentialModel, q: Query) -> float:
    """Second-best score as the best first deviation from the best sequence."""
    fwd = build_trellis(model, q)
    bwd = build_backward(model, q.length)
    best = fwd.prefix(fwd.length - 1, fwd.best_end())
    value = -np.inf
    for t in range(1, q.length):
        row = eta(model, fwd, bwd, t)[best[t - 1]].copy()
        row[best[t]] = -np.inf
        value = max(value, float(row.max()))
    return value


class TopKIterator:
    """Lazy iterator over sequences in ranked order.

    Yields :class:`ScoredSequence` items by descending score, equal scores in
    ascending lexicographic order. Raises :class:`CapExceeded` when asked for
    more than ``cap`` items while unseen sequences remain.
    """

    def __init__(self, model: PotentialModel, q: Query, variant=Variant.SUFFIX_FIX, cap: int = DEFAULT_K_CAP):
        self.model = model
        self.query = validate_query(model, q, require_path=False)
        self.variant = Variant(variant)
        self.cap = cap
        self.emitted = 0
        self._unary = model.unary.tolist()
        self._pairwise = model.pairwise.tolist()
        self._pool: list = []
        l = self.query.length
        if self.variant is Variant.PREFIX_FIX:
            self.forward = None
            self.backward = build_backward(model, l)
            self._push(1, frozenset(), (self.query.start,), float(model.unary[self.query.start]))
        else:
            self.forward = build_trellis(model, self.query)
            self.backward = None
            self._push(l - 1, frozenset(), (), 0.0)

    def __iter__(self):
        return self

    def __next__(self) -> ScoredSequence:
        if not self._pool:
            raise StopIteration
        if self.emitted >= self.cap:
            raise CapExceeded(self.cap)
        _, seq, score, part = heapq.heappop(self._pool)
        self.emitted += 1
        self._split(part, seq)
        return ScoredSequence(seq, score)

    # -- partitions ----------------------------------------------------------

    def _allowed(self, excluded):
        mask = np.ones(self.model.n, dtype=bool)
        if excluded:
            mask[list(excluded)] = False
        return mask

    def _push(self, t, excluded, fixed, fixed_score):
        """Evaluate a partition and add it to the pool if non-empty.

        ``fixed`` is the suffix ``y[t+1:]`` (SUFFIX_FIX) or the prefix
        ``y[:t]`` (PREFIX_FIX); ``fixed_score`` is its standalone score.
        """
        allowed = self._allowed(excluded)
        if not allowed.any():
            return
        if self.variant is Variant.SUFFIX_FIX:
            fwd = self.forward
            values = fwd.delta[t]
            if fixed:
                values = values + self.model.pairwise[:, fixed[0]] + fixed_score
            keys = np.round(values, SCORE_DECIMALS)
            ties = allowed & (keys == keys[allowed].max())
            j = int(np.where(ties, fwd.rank[t], self.model.n).argmin())
            seq = fwd.prefix(t, j) + fixed
        else:
            values = fixed_score + self.model.pairwise[fixed[-1]] + self.model.unary + self.backward.gamma[t]
            keys = np.round(values, SCORE_DECIMALS)
            j = int(np.flatnonzero(allowed & (keys == keys[allowed].max()))[0])
            seq = fixed + (j,) + self.backward.suffix(t, j)
        score = sum_score(self._unary, self._pairwise, seq)
        heapq.heappush(self._pool, (-score_key(score), seq, score, (t, excluded, fixed)))

    def _split(self, part, seq):
        t, excluded, _ = part
        l = len(seq)
        unary, pairwise = self._unary, self._pairwise
        if self.variant is Variant.SUFFIX_FIX:
            # tail_score[u] = standalone score of seq[u:]
            tail_score = [0.0] * (l + 1)
            for u in range(l - 1, -1, -1):
                tail_score[u] = unary[seq[u]] + tail_score[u + 1]
                if u + 1 < l:
                    tail_score[u] += pairwise[seq[u]][seq[u + 1]]
            for u in range(t, 0, -1):
                excl = excluded | {seq[t]} if u == t else frozenset((seq[u],))
                self._push(u, excl, seq[u + 1 :], tail_score[u + 1])
        else:
            # head_score[u] = standalone score of seq[:u]
            head_score = [0.0] * (l + 1)
            head_score[1] = unary[seq[0]]
            for u in range(2, l + 1):
                head_score[u] = head_score[u - 1] + unary[seq[u - 1]] + pairwise[seq[u - 2]][seq[u - 1]]
            for u in range(t, l):
                excl = excluded | {seq[t]} if u == t else frozenset((seq[u],))
                self._push(u, excl, seq[:u], head_score[u])


def topk_next(it: TopKIterator) -> ScoredSequence | None:
    """Next ranked sequence, or ``None`` once every sequence has been emitted."""
    return next(it, None)


def topk(model: PotentialModel, q: Query, k: int, variant=Variant.SUFFIX_FIX) -> list[ScoredSequence]:
    it = TopKIterator(model, q, variant, cap=k)
    out = []
    for _ in range(k):
        item = next(it, None)
        if item is None:
            break
        out.append(item)
    return out


def decode_path_exact(
    model: PotentialModel, q: Query, variant=Variant.SUFFIX_FIX, cap: int = DEFAULT_K_CAP
) -> tuple[ScoredSequence, int]:
    """Best repeat-free sequence and the 1-based rank at which it appeared.

    Scans the ranked list until the first repeat-free sequence; raises
    :class:`CapExceeded` if it is not among the first ``cap``.
    """
    q = validate_query(model, q, require_path=True)
    it = TopKIterator(model, q, variant, cap=cap)
    for item in it:
        if is_path(item.sequence):
            return item, it.emitted
    raise NoPathPossible("ranked list exhausted without a repeat-free sequence")
