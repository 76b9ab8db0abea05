"""Core types and the additive unary + pairwise sequence score.

A sequence ``y = (y_1, ..., y_L)`` over POIs ``0..n-1`` scores

    f(y) = sum_k unary[y_k] + sum_k pairwise[y_k, y_{k+1}]

All decoders in the package maximise this quantity, either over every
sequence of the requested length (trajectories) or only over repeat-free
ones (paths).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidPoi, LengthTooShort, NoPathPossible, ParseError, ValidationError

#: Scores are compared after rounding to this many decimals, so that sums of
#: the same terms taken in a different order still compare as ties.
SCORE_DECIMALS = 9


def score_key(score):
    """Comparison key for scores; equal keys are ties."""
    return round(float(score), SCORE_DECIMALS)


def tied_mask(values):
    """Boolean mask of the entries of ``values`` tied with the maximum."""
    values = np.asarray(values, dtype=float)
    keys = np.round(values, SCORE_DECIMALS)
    return keys == keys.max()


def first_argmax(values, allowed=None):
    """Smallest index attaining the maximum of ``values`` (ties by key).

    ``allowed`` optionally restricts the candidates; returns -1 when no
    candidate is allowed.
    """
    values = np.asarray(values, dtype=float)
    if allowed is not None:
        if not allowed.any():
            return -1
        keys = np.round(values, SCORE_DECIMALS)
        best = keys[allowed].max()
        return int(np.flatnonzero(allowed & (keys == best))[0])
    return int(np.flatnonzero(tied_mask(values))[0])


class Query(NamedTuple):
    start: int
    length: int


class ScoredSequence(NamedTuple):
    sequence: tuple[int, ...]
    score: float

    def __str__(self):
        return f"{' '.join(map(str, self.sequence))} ({self.score:.10g})"


def is_path(seq: Sequence[int]) -> bool:
    return len(set(seq)) == len(seq)


def first_repeat(seq: Sequence[int]) -> int | None:
    """Index of the first element already seen earlier in ``seq``, if any."""
    seen = set()
    for i, p in enumerate(seq):
        if p in seen:
            return i
        seen.add(p)
    return None


@dataclass(frozen=True, eq=False)
class PotentialModel:
    """Unary scores over POIs and pairwise scores over ordered POI pairs.

    Both arrays are copied and made read-only on construction.
    ``pairwise[i, j]`` scores the transition ``i -> j``; the diagonal
    (self-transitions) is stored like any other entry.
    """

    unary: np.ndarray
    pairwise: np.ndarray

    def __post_init__(self):
        unary = np.array(self.unary, dtype=float)
        pairwise = np.array(self.pairwise, dtype=float)
        if unary.ndim != 1 or unary.size == 0:
            raise ValidationError("unary scores must be a non-empty vector")
        n = unary.size
        if pairwise.shape != (n, n):
            raise ValidationError(f"pairwise scores must have shape ({n}, {n}), got {pairwise.shape}")
        if not (np.isfinite(unary).all() and np.isfinite(pairwise).all()):
            raise ValidationError("all scores must be finite")
        unary.setflags(write=False)
        pairwise.setflags(write=False)
        object.__setattr__(self, "unary", unary)
        object.__setattr__(self, "pairwise", pairwise)

    @property
    def n(self) -> int:
        return self.unary.size

    @classmethod
    def zeros(cls, n: int) -> "PotentialModel":
        return cls(np.zeros(n), np.zeros((n, n)))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, low=-1.0, high=1.0) -> "PotentialModel":
        return cls(rng.uniform(low, high, size=n), rng.uniform(low, high, size=(n, n)))


def check_poi(model: PotentialModel, p) -> int:
    if isinstance(p, (bool, np.bool_)) or not isinstance(p, (int, np.integer)):
        raise InvalidPoi(f"POI id must be an integer, got {p!r}")
    if not 0 <= p < model.n:
        raise InvalidPoi(f"POI {p} out of range [0, {model.n})")
    return int(p)


def score_sequence(model: PotentialModel, seq: Sequence[int]) -> float:
    """Sum of ``len(seq)`` unary and ``len(seq) - 1`` pairwise terms."""
    if len(seq) == 0:
        raise ValidationError("cannot score an empty sequence")
    for p in seq:
        check_poi(model, p)
    return float(sum_score(model.unary, model.pairwise, seq))


def sum_score(unary, pairwise, seq) -> float:
    """Unchecked score: all unary terms left to right, then all pairwise terms.

    Works on arrays or nested lists; every scorer in the package uses this
    one summation order so equal inputs give bit-identical scores.
    """
    total = 0.0
    for p in seq:
        total += unary[p]
    for a, b in zip(seq[:-1], seq[1:]):
        total += pairwise[a][b]
    return total


def scored(model: PotentialModel, seq: Sequence[int]) -> ScoredSequence:
    seq = tuple(int(p) for p in seq)
    return ScoredSequence(seq, score_sequence(model, seq))


def validate_query(model: PotentialModel, q: Query, require_path: bool = False) -> Query:
    """Raise unless ``q`` is a well-formed query for ``model``.

    With ``require_path`` the length must also not exceed the POI count,
    since no repeat-free sequence longer than ``n`` exists.
    """
    check_poi(model, q.start)
    if not isinstance(q.length, (int, np.integer)) or q.length < 2:
        raise LengthTooShort(f"query length must be an integer >= 2, got {q.length!r}")
    if require_path and q.length > model.n:
        raise NoPathPossible(f"no repeat-free sequence of length {q.length} over {model.n} POIs")
    return Query(int(q.start), int(q.length))


# -- potentials files -------------------------------------------------------


def _read_rows(text: str, header: list[str], what: str):
    reader = csv.reader(io.StringIO(text))
    try:
        first = next(reader)
    except StopIteration:
        raise ParseError(f"{what}: empty file", line=1) from None
    if [c.strip() for c in first] != header:
        raise ParseError(f"{what}: expected header {','.join(header)}", line=1)
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"{what}: expected {len(header)} fields, got {len(row)}", line=lineno)
        yield lineno, [c.strip() for c in row]


def _parse_float(token: str, what: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"{what}: bad number {token!r}", line=lineno) from None
    if not math.isfinite(value):
        raise ParseError(f"{what}: non-finite score {token!r}", line=lineno)
    return value


def _parse_index(token: str, n: int | None, what: str, lineno: int) -> int:
    if not token.isdigit():
        raise ParseError(f"{what}: bad POI id {token!r}", line=lineno)
    idx = int(token)
    if n is not None and idx >= n:
        raise ParseError(f"{what}: POI id {idx} out of range [0, {n})", line=lineno)
    return idx


def parse_potentials(unary_text: str, pairwise_text: str) -> PotentialModel:
    """Parse ``unary.csv`` (``poi_id,alpha``) and ``pairwise.csv`` (``from,to,beta``)."""
    alphas: dict[int, float] = {}
    for lineno, (pid, alpha) in _read_rows(unary_text, ["poi_id", "alpha"], "unary"):
        idx = _parse_index(pid, None, "unary", lineno)
        if idx in alphas:
            raise ParseError(f"unary: duplicate poi_id {idx}", line=lineno)
        alphas[idx] = _parse_float(alpha, "unary", lineno)
    n = len(alphas)
    if n == 0:
        raise ParseError("unary: no POIs")
    if sorted(alphas) != list(range(n)):
        raise ParseError("unary: poi_id values must be dense 0..n-1")

    pairwise = np.zeros((n, n))
    seen = np.zeros((n, n), dtype=bool)
    for lineno, (a, b, beta) in _read_rows(pairwise_text, ["from", "to", "beta"], "pairwise"):
        i = _parse_index(a, n, "pairwise", lineno)
        j = _parse_index(b, n, "pairwise", lineno)
        if seen[i, j]:
            raise ParseError(f"pairwise: duplicate entry ({i}, {j})", line=lineno)
        seen[i, j] = True
        pairwise[i, j] = _parse_float(beta, "pairwise", lineno)
    if not seen.all():
        missing = np.argwhere(~seen)[0]
        raise ParseError(f"pairwise: missing entry ({missing[0]}, {missing[1]}); expected {n * n} rows")
    return PotentialModel(np.array([alphas[i] for i in range(n)]), pairwise)


def load_potentials(unary_path, pairwise_path) -> PotentialModel:
    return parse_potentials(
        Path(unary_path).read_text(encoding="utf-8"),
        Path(pairwise_path).read_text(encoding="utf-8"),
    )


def format_potentials(model: PotentialModel) -> tuple[str, str]:
    unary = ["poi_id,alpha"] + [f"{i},{float(a)!r}" for i, a in enumerate(model.unary)]
    pairwise = ["from,to,beta"] + [
        f"{i},{j},{float(model.pairwise[i, j])!r}" for i in range(model.n) for j in range(model.n)
    ]
    return "\n".join(unary) + "\n", "\n".join(pairwise) + "\n"


def save_potentials(model: PotentialModel, unary_path, pairwise_path) -> None:
    unary, pairwise = format_potentials(model)
    Path(unary_path).write_text(unary, encoding="utf-8", newline="\n")
    Path(pairwise_path).write_text(pairwise, encoding="utf-8", newline="\n")
