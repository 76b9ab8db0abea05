"""Name -> decoder registry shared by the evaluation harness and the CLI."""

from __future__ import annotations

from functools import partial
from typing import Callable

from .heuristics import greedy_decode, loop_elim, loop_elim_pp
from .ilp import ilp_decode
from .list_viterbi import DEFAULT_K_CAP, Variant, decode_path_exact
from .model import PotentialModel, Query, ScoredSequence
from .viterbi import viterbi_decode

Decoder = Callable[[PotentialModel, Query], ScoredSequence]

DECODER_NAMES = ("viterbi", "loopelim", "loopelim++", "greedy", "ilp", "listviterbi")


def list_viterbi_decode(model, q, variant=Variant.SUFFIX_FIX, cap=DEFAULT_K_CAP) -> ScoredSequence:
    return decode_path_exact(model, q, variant, cap)[0]


def get_decoders(variant=Variant.SUFFIX_FIX, kcap: int = DEFAULT_K_CAP) -> dict[str, Decoder]:
    return {
        "viterbi": viterbi_decode,
        "loopelim": loop_elim,
        "loopelim++": loop_elim_pp,
        "greedy": greedy_decode,
        "ilp": ilp_decode,
        "listviterbi": partial(list_viterbi_decode, variant=Variant(variant), cap=kcap),
    }
