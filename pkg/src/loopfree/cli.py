"""Command-line entry point: ``loopfree {decode,eval,bench,emit-lp,gen}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .bench import format_bench, run_bench
from .data import estimate_potentials, format_trajectories, generate_synthetic, parse_trajectories
from .decoders import DECODER_NAMES, get_decoders
from .errors import CapExceeded, LoopfreeError
from .evaluation import loocv_evaluate
from .heuristics import greedy_decode
from .ilp import build_ilp, emit_lp
from .list_viterbi import DEFAULT_K_CAP, decode_path_exact
from .model import Query, load_potentials, save_potentials

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CAP = 3
EXIT_USAGE = 64

log = logging.getLogger("loopfree")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        bounds = (int(lo), int(hi)) if sep else (int(lo), int(lo))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}") from None
    if bounds[0] > bounds[1]:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return bounds


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="loopfree", description="Loop-free sequence decoding under unary + pairwise scores.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def potentials(p):
        p.add_argument("--unary", required=True, type=Path)
        p.add_argument("--pairwise", required=True, type=Path)
        p.add_argument("--start", required=True, type=int)
        p.add_argument("--length", required=True, type=int)

    p = sub.add_parser("decode", help="decode one query")
    potentials(p)
    p.add_argument("--algo", required=True, choices=DECODER_NAMES)
    p.add_argument("--variant", choices=("suffix", "prefix"), default="suffix")
    p.add_argument("--kcap", type=_positive, default=DEFAULT_K_CAP)
    p.add_argument("--fallback", choices=("greedy",), default=None)

    p = sub.add_parser("eval", help="leave-one-query-out evaluation of every decoder")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--smoothing", type=float, default=1.0)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--kcap", type=_positive, default=DEFAULT_K_CAP)
    p.add_argument("--variant", choices=("suffix", "prefix"), default="suffix")
    p.add_argument("--fallback", choices=("greedy", "none"), default="greedy")
    p.add_argument("--no-timing", action="store_true", help="write 0 wall times for byte-stable output")

    p = sub.add_parser("bench", help="time every decoder versus length")
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--lengths", required=True, type=_range)
    p.add_argument("--trials", type=_positive, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--kcap", type=_positive, default=10_000)
    p.add_argument("--repeats", type=_positive, default=1)
    p.add_argument("--algos", default=",".join(DECODER_NAMES))

    p = sub.add_parser("emit-lp", help="write the integer program in LP format")
    potentials(p)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--integer-order", action="store_true", help="declare order variables General")

    p = sub.add_parser("gen", help="write a synthetic instance and dataset")
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--queries", required=True, type=_positive)
    p.add_argument("--lengths", required=True, type=_range)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, type=Path)
    return parser


def _decode(args) -> int:
    model = load_potentials(args.unary, args.pairwise)
    q = Query(args.start, args.length)
    k_found = None
    if args.algo == "listviterbi":
        try:
            result, k_found = decode_path_exact(model, q, args.variant, args.kcap)
        except CapExceeded:
            if args.fallback != "greedy":
                raise
            log.warning("K cap of %d reached; falling back to greedy", args.kcap)
            result = greedy_decode(model, q)
    else:
        result = get_decoders()[args.algo](model, q)
    print(" ".join(map(str, result.sequence)))
    print(f"score {result.score:.10g}")
    if k_found is not None:
        print(f"k {k_found}")
    return EXIT_OK


def _eval(args) -> int:
    ds = parse_trajectories(args.data.read_text(encoding="utf-8"))
    decoders = get_decoders(args.variant, args.kcap)
    fallback = None if args.fallback == "none" else args.fallback
    report = loocv_evaluate(
        ds,
        decoders,
        model_fit=lambda train: estimate_potentials(train, args.smoothing),
        fallback=fallback,
        timing=not args.no_timing,
    )
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "per_query.csv").write_text(report.to_csv(), encoding="utf-8", newline="\n")
    (args.out / "aggregate.csv").write_text(report.aggregate_csv(), encoding="utf-8", newline="\n")
    print(f"{len(report.queries)} queries, {len(report.loop_queries)} with a Viterbi loop "
          f"({report.loop_fraction:.1%})")
    for a in report.aggregate("all"):
        print(f"{a.decoder:12s} F1 point {a.f1_point_mean:.3f}±{a.f1_point_se:.3f}  "
              f"F1 pair {a.f1_pair_mean:.3f}±{a.f1_pair_se:.3f}")
    return EXIT_OK


def _bench(args) -> int:
    lo, hi = args.lengths
    algos = tuple(a for a in args.algos.split(",") if a)
    rows = run_bench(args.n, range(lo, hi + 1), args.trials, args.seed, args.kcap, algos, args.repeats)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(format_bench(rows), encoding="utf-8", newline="\n")
    fallbacks = sum(r.cap_fallback for r in rows)
    print(f"{len(rows)} timings written to {args.out}; {fallbacks} K-cap fallbacks")
    return EXIT_OK


def _emit_lp(args) -> int:
    model = load_potentials(args.unary, args.pairwise)
    ilp = build_ilp(model, Query(args.start, args.length), integer_order_vars=args.integer_order)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(emit_lp(ilp), encoding="utf-8", newline="\n")
    return EXIT_OK


def _gen(args) -> int:
    model, ds = generate_synthetic(args.n, args.lengths, args.queries, args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    save_potentials(model, args.out / "unary.csv", args.out / "pairwise.csv")
    (args.out / "trajectories.csv").write_text(format_trajectories(ds), encoding="utf-8", newline="\n")
    return EXIT_OK


COMMANDS = {"decode": _decode, "eval": _eval, "bench": _bench, "emit-lp": _emit_lp, "gen": _gen}


def run_cli(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except CapExceeded as exc:
        print(f"error: {exc}; rerun with --fallback greedy to accept an approximate path", file=sys.stderr)
        return EXIT_CAP
    except (LoopfreeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
