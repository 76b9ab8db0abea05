"""Trajectory datasets, count-based potentials and synthetic instances.

The trajectory CSV has header ``traj_id,user_id,poi_seq`` where ``poi_seq``
is a space-separated list of non-negative POI ids. Ids in files may be
sparse; internally POIs are re-indexed densely in ascending id order.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import CapExceeded, DuplicateTrajId, EmptyDataset, ParseError, ValidationError
from .ilp import build_ilp, solve_bb
from .list_viterbi import decode_path_exact
from .model import PotentialModel, Query

log = logging.getLogger(__name__)

HEADER = ["traj_id", "user_id", "poi_seq"]


@dataclass(frozen=True)
class Trajectory:
    traj_id: str
    user_id: str
    pois: tuple[int, ...]

    @property
    def query(self) -> Query:
        return Query(self.pois[0], len(self.pois))


@dataclass
class Dataset:
    n: int
    trajectories: list[Trajectory]
    poi_ids: list[int] = field(default_factory=list)  # dense index -> file id
    skipped: int = 0

    def __post_init__(self):
        if not self.poi_ids:
            self.poi_ids = list(range(self.n))
        for tr in self.trajectories:
            if len(tr.pois) < 2 or not all(0 <= p < self.n for p in tr.pois):
                raise ValidationError(f"trajectory {tr.traj_id} is not a valid sequence of length >= 2")

    @property
    def queries(self) -> list[Query]:
        return sorted({tr.query for tr in self.trajectories})

    def by_query(self) -> dict[Query, list[Trajectory]]:
        groups: dict[Query, list[Trajectory]] = {}
        for tr in self.trajectories:
            groups.setdefault(tr.query, []).append(tr)
        return dict(sorted(groups.items()))

    def subset(self, trajectories) -> "Dataset":
        return Dataset(self.n, list(trajectories), list(self.poi_ids))


def parse_trajectories(text: str) -> Dataset:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty file", line=1) from None
    if [c.strip() for c in header] != HEADER:
        raise ParseError(f"expected header {','.join(HEADER)}", line=1)

    raw = []
    seen = set()
    skipped = 0
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, got {len(row)}", line=lineno)
        traj_id, user_id, seq = (c.strip() for c in row)
        tokens = seq.split()
        if not all(tok.isdigit() for tok in tokens):
            raise ParseError(f"bad POI sequence {seq!r}", line=lineno)
        if traj_id in seen:
            raise DuplicateTrajId(f"duplicate traj_id {traj_id!r}", line=lineno)
        seen.add(traj_id)
        if len(tokens) < 2:
            skipped += 1
            continue
        raw.append((traj_id, user_id, [int(tok) for tok in tokens]))
    if skipped:
        log.warning("skipped %d trajectories shorter than 2 POIs", skipped)

    poi_ids = sorted({p for _, _, pois in raw for p in pois})
    index = {p: i for i, p in enumerate(poi_ids)}
    trajectories = [Trajectory(t, u, tuple(index[p] for p in pois)) for t, u, pois in raw]
    return Dataset(len(poi_ids), trajectories, poi_ids, skipped)


def format_trajectories(ds: Dataset) -> str:
    lines = [",".join(HEADER)]
    for tr in ds.trajectories:
        lines.append(f"{tr.traj_id},{tr.user_id},{' '.join(str(ds.poi_ids[p]) for p in tr.pois)}")
    return "\n".join(lines) + "\n"


def estimate_potentials(ds: Dataset, smoothing: float = 1.0) -> PotentialModel:
    """Smoothed log-frequencies of visits (unary) and transitions (pairwise).

    Stands in for a learned scorer: the decoders only need scores of the
    unary + pairwise shape, not how they were obtained.
    """
    if not ds.trajectories:
        raise EmptyDataset("cannot estimate potentials from an empty dataset")
    if not smoothing > 0:
        raise ValidationError("smoothing must be positive")
    n = ds.n
    visits = np.zeros(n)
    moves = np.zeros((n, n))
    for tr in ds.trajectories:
        np.add.at(visits, list(tr.pois), 1)
        np.add.at(moves, (list(tr.pois[:-1]), list(tr.pois[1:])), 1)
    unary = np.log((visits + smoothing) / (visits.sum() + n * smoothing))
    pairwise = np.log((moves + smoothing) / (moves.sum(axis=1, keepdims=True) + n * smoothing))
    return PotentialModel(unary, pairwise)


def generate_synthetic(n: int, l_range: tuple[int, int], num_queries: int, seed: int):
    """Random potentials and a dataset whose truths are their exact best paths.

    Potentials are uniform on [-1, 1]; each of ``num_queries`` distinct queries
    has lengths drawn from the inclusive ``l_range`` (capped at ``n``).
    """
    lo, hi = l_range
    if not 2 <= n <= 64:
        raise ValidationError("n must be in [2, 64]")
    if not 2 <= lo <= hi:
        raise ValidationError("length range must satisfy 2 <= lo <= hi")
    if lo > n:
        raise ValidationError(f"minimum length {lo} exceeds the POI count {n}")
    hi = min(hi, n)
    universe = [Query(s, l) for s in range(n) for l in range(lo, hi + 1)]
    if not 0 < num_queries <= len(universe):
        raise ValidationError(f"num_queries must be in [1, {len(universe)}]")

    rng = np.random.default_rng(seed)
    model = PotentialModel.random(n, rng)
    picked = rng.choice(len(universe), size=num_queries, replace=False)
    trajectories = []
    for i, idx in enumerate(sorted(picked.tolist())):
        q = universe[idx]
        try:
            best, _ = decode_path_exact(model, q, cap=100_000)
            path = best.sequence
        except CapExceeded:
            path = solve_bb(build_ilp(model, q)).path
        trajectories.append(Trajectory(f"t{i}", f"u{i % 7}", path))
    return model, Dataset(n, trajectories)
