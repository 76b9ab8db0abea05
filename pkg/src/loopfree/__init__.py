"""Decoders for the best loop-free sequence under unary + pairwise scores."""

from .errors import (
    CapExceeded,
    InvalidPoi,
    LengthTooShort,
    LoopfreeError,
    NoPathPossible,
    ValidationError,
)
from .heuristics import greedy_decode, loop_elim, loop_elim_pp
from .ilp import IlpModel, IlpSolution, build_ilp, emit_lp, solve_bb
from .list_viterbi import TopKIterator, Variant, decode_path_exact, topk, topk_next
from .model import PotentialModel, Query, ScoredSequence, score_sequence, validate_query
from .viterbi import ViterbiTrellis, build_trellis, viterbi_decode

__version__ = "0.1.0"

__all__ = [
    "CapExceeded",
    "IlpModel",
    "IlpSolution",
    "InvalidPoi",
    "LengthTooShort",
    "LoopfreeError",
    "NoPathPossible",
    "PotentialModel",
    "Query",
    "ScoredSequence",
    "TopKIterator",
    "ValidationError",
    "Variant",
    "ViterbiTrellis",
    "build_ilp",
    "build_trellis",
    "decode_path_exact",
    "emit_lp",
    "greedy_decode",
    "loop_elim",
    "loop_elim_pp",
    "score_sequence",
    "solve_bb",
    "topk",
    "topk_next",
    "validate_query",
    "viterbi_decode",
]
