"""Wall-time of every decoder versus requested length on random instances."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import numpy as np

from .decoders import DECODER_NAMES, get_decoders
from .errors import CapExceeded, ValidationError
from .heuristics import greedy_decode
from .model import PotentialModel, Query


@dataclass(frozen=True)
class BenchRow:
    algo: str
    length: int
    trial: int
    wall_time_us: int
    score: float
    cap_fallback: bool


def bench_instance(n: int, length: int, trial: int, seed: int):
    rng = np.random.default_rng([seed, length, trial])
    model = PotentialModel.random(n, rng)
    return model, Query(int(rng.integers(n)), length)


def _timed(decode, model, q, repeats):
    best = None
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        result = decode(model, q)
        elapsed = time.perf_counter_ns() - t0
        best = elapsed if best is None or elapsed < best else best
    return result, best // 1000


def run_bench(
    n: int,
    lengths,
    trials: int,
    seed: int,
    kcap: int = 10_000,
    algos=DECODER_NAMES,
    repeats: int = 1,
    fallback: bool = True,
) -> list[BenchRow]:
    """Time each decoder on ``trials`` random instances per length.

    Each decoder is run once untimed before measurement starts. A timing is
    the minimum over ``repeats`` runs. A list Viterbi run that hits ``kcap``
    is finished by the greedy decoder (time included) and flagged, unless
    ``fallback`` is off, in which case :class:`CapExceeded` propagates.
    """
    lengths = list(lengths)
    if any(l < 2 or l > n for l in lengths):
        raise ValidationError(f"lengths must lie in [2, {n}]")
    decoders = get_decoders(kcap=kcap)
    unknown = set(algos) - set(decoders)
    if unknown:
        raise ValidationError(f"unknown algorithms: {sorted(unknown)}")

    warm_model, warm_q = bench_instance(n, lengths[0], 0, seed)
    for name in algos:
        try:
            decoders[name](warm_model, warm_q)
        except CapExceeded:
            pass

    def with_fallback(decode):
        def run(model, q):
            try:
                return decode(model, q), False
            except CapExceeded:
                if not fallback:
                    raise
                return greedy_decode(model, q), True

        return run

    rows = []
    for length in lengths:
        for trial in range(trials):
            model, q = bench_instance(n, length, trial, seed)
            for name in algos:
                (result, fell_back), us = _timed(with_fallback(decoders[name]), model, q, repeats)
                rows.append(BenchRow(name, length, trial, int(us), result.score, fell_back))
    return rows


def format_bench(rows) -> str:
    lines = ["algo,length,trial,wall_time_us,score,cap_fallback"]
    for r in rows:
        lines.append(f"{r.algo},{r.length},{r.trial},{r.wall_time_us},{r.score!r},{int(r.cap_fallback)}")
    return "\n".join(lines) + "\n"


def median_times(rows) -> dict[tuple[str, int], float]:
    groups: dict[tuple[str, int], list[int]] = {}
    for r in rows:
        groups.setdefault((r.algo, r.length), []).append(r.wall_time_us)
    return {key: statistics.median(v) for key, v in groups.items()}
