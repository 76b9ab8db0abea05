"""Point/pair F1 metrics and leave-one-query-out evaluation of decoders."""

from __future__ import annotations

import logging
import math
import statistics
import time
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Mapping, Sequence

from .data import Dataset, estimate_potentials
from .decoders import Decoder, get_decoders
from .errors import CapExceeded, EmptySequence, TooShort, ValidationError
from .model import PotentialModel, Query, first_repeat
from .viterbi import viterbi_decode

log = logging.getLogger(__name__)


def _f1(pred: set, truth: set) -> float:
    hits = len(pred & truth)
    if hits == 0:
        return 0.0
    precision = hits / len(pred)
    recall = hits / len(truth)
    return 2 * precision * recall / (precision + recall)


def f1_points(pred: Sequence[int], truth: Sequence[int]) -> float:
    """F1 between the sets of visited POIs, ignoring order."""
    if not pred or not truth:
        raise EmptySequence("F1 on points needs non-empty sequences")
    return _f1(set(pred), set(truth))


def ordered_pairs(seq: Sequence[int]) -> set[tuple[int, int]]:
    """``(seq[i], seq[j])`` for ``i < j``; pairs of equal POIs are dropped."""
    return {(a, b) for a, b in combinations(seq, 2) if a != b}


def f1_pairs(pred: Sequence[int], truth: Sequence[int]) -> float:
    """F1 between the sets of ordered POI pairs."""
    if len(pred) < 2 or len(truth) < 2:
        raise TooShort("F1 on pairs needs sequences of length >= 2")
    pred_pairs, truth_pairs = ordered_pairs(pred), ordered_pairs(truth)
    if not pred_pairs or not truth_pairs:
        return 0.0
    return _f1(pred_pairs, truth_pairs)


@dataclass(frozen=True)
class QueryResult:
    decoder: str
    query: Query
    query_id: str
    prediction: tuple[int, ...]
    f1_point: float
    f1_pair: float
    wall_time_us: int
    viterbi_had_loop: bool
    fallback: bool = False


@dataclass(frozen=True)
class Aggregate:
    decoder: str
    subset: str
    num_queries: int
    f1_point_mean: float
    f1_point_se: float
    f1_pair_mean: float
    f1_pair_se: float
    wall_time_us_mean: float
    fallbacks: int


def _mean_se(values):
    if not values:
        return math.nan, math.nan
    mean = statistics.fmean(values)
    se = statistics.stdev(values) / math.sqrt(len(values)) if len(values) > 1 else 0.0
    return mean, se


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else format(x, ".10g")


SUBSETS = ("all", "loop", "noloop")


@dataclass
class MetricsReport:
    decoders: list[str]
    results: list[QueryResult]
    skipped_queries: list[Query]

    def cell(self, decoder: str, query: Query) -> QueryResult:
        for r in self.results:
            if r.decoder == decoder and r.query == query:
                return r
        raise KeyError((decoder, query))

    @property
    def queries(self) -> list[Query]:
        return sorted({r.query for r in self.results})

    @property
    def loop_queries(self) -> list[Query]:
        return sorted({r.query for r in self.results if r.viterbi_had_loop})

    @property
    def loop_fraction(self) -> float:
        return len(self.loop_queries) / len(self.queries) if self.queries else math.nan

    def rows(self, decoder: str, subset: str = "all") -> list[QueryResult]:
        if subset not in SUBSETS:
            raise ValueError(f"unknown subset {subset!r}")
        keep = {"all": lambda r: True, "loop": lambda r: r.viterbi_had_loop, "noloop": lambda r: not r.viterbi_had_loop}[subset]
        return sorted((r for r in self.results if r.decoder == decoder and keep(r)), key=lambda r: r.query)

    def aggregate(self, subset: str = "all") -> list[Aggregate]:
        out = []
        for name in self.decoders:
            rows = self.rows(name, subset)
            point = _mean_se([r.f1_point for r in rows])
            pair = _mean_se([r.f1_pair for r in rows])
            wall = statistics.fmean([r.wall_time_us for r in rows]) if rows else math.nan
            out.append(Aggregate(name, subset, len(rows), *point, *pair, wall, sum(r.fallback for r in rows)))
        return out

    def to_csv(self) -> str:
        lines = ["decoder,query_id,f1_point,f1_pair,wall_time_us,viterbi_had_loop"]
        for r in sorted(self.results, key=lambda r: (r.decoder, r.query)):
            lines.append(
                f"{r.decoder},{r.query_id},{_fmt(r.f1_point)},{_fmt(r.f1_pair)},{r.wall_time_us},{int(r.viterbi_had_loop)}"
            )
        return "\n".join(lines) + "\n"

    def aggregate_csv(self) -> str:
        lines = [
            "decoder,subset,num_queries,f1_point_mean,f1_point_se,f1_pair_mean,f1_pair_se,wall_time_us_mean,cap_fallbacks"
        ]
        for subset in SUBSETS:
            for a in sorted(self.aggregate(subset), key=lambda a: a.decoder):
                lines.append(
                    f"{a.decoder},{a.subset},{a.num_queries},{_fmt(a.f1_point_mean)},{_fmt(a.f1_point_se)},"
                    f"{_fmt(a.f1_pair_mean)},{_fmt(a.f1_pair_se)},{_fmt(a.wall_time_us_mean)},{a.fallbacks}"
                )
        return "\n".join(lines) + "\n"


def _pair_score(pred, truth) -> float:
    # Loop elimination can return a single POI, which has no pairs to score.
    return f1_pairs(pred, truth) if len(pred) >= 2 else 0.0


def loocv_evaluate(
    ds: Dataset,
    decoders: Mapping[str, Decoder] | None = None,
    model_fit: Callable[[Dataset], PotentialModel] | None = None,
    smoothing: float = 1.0,
    fallback: str | Decoder | None = "greedy",
    timing: bool = True,
) -> MetricsReport:
    """Hold out each distinct query in turn, fit on the rest, decode and score.

    A query's metric is the mean over its held-out trajectories. When a
    decoder raises :class:`CapExceeded` the ``fallback`` decoder's answer is
    scored instead and the cell is flagged; with ``fallback=None`` the error
    propagates. Queries longer than the POI count admit no path and are
    skipped.
    """
    decoders = dict(decoders or get_decoders())
    if isinstance(fallback, str):
        fallback = get_decoders()[fallback]
    if model_fit is None:
        model_fit = lambda train: estimate_potentials(train, smoothing)  # noqa: E731

    groups = ds.by_query()
    if len(groups) < 2:
        raise ValidationError("leave-one-query-out needs at least 2 distinct queries")
    skipped = [q for q in groups if q.length > ds.n]
    if skipped:
        log.warning("skipping %d queries longer than the POI count", len(skipped))

    results = []
    for q, held_out in groups.items():
        if q in skipped:
            continue
        train = [tr for tr in ds.trajectories if tr.query != q]
        model = model_fit(ds.subset(train))
        had_loop = first_repeat(viterbi_decode(model, q).sequence) is not None
        qid = f"{ds.poi_ids[q.start]}-{q.length}"
        for name, decode in decoders.items():
            used_fallback = False
            t0 = time.perf_counter_ns()
            try:
                pred = decode(model, q)
            except CapExceeded:
                if fallback is None:
                    raise
                log.info("%s hit the K cap on query %s; using fallback", name, qid)
                pred = fallback(model, q)
                used_fallback = True
            elapsed = (time.perf_counter_ns() - t0) // 1000 if timing else 0
            seq = pred.sequence
            points = statistics.fmean(f1_points(seq, tr.pois) for tr in held_out)
            pairs = statistics.fmean(_pair_score(seq, tr.pois) for tr in held_out)
            results.append(QueryResult(name, q, qid, seq, points, pairs, int(elapsed), had_loop, used_fallback))
    return MetricsReport(list(decoders), results, skipped)
