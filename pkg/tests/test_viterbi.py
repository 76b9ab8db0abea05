import numpy as np
import pytest

from loopfree.model import PotentialModel, Query, score_sequence
from loopfree.oracle import best_sequence, enumerate_ranked
from loopfree.viterbi import build_trellis, unreachable_score, viterbi_decode

from conftest import random_instance


def test_t3(t3):
    assert viterbi_decode(t3, Query(0, 3)) == ((0, 2, 2), pytest.approx(4.2))
    assert viterbi_decode(t3, Query(0, 2)) == ((0, 2), pytest.approx(2.2))


def test_zero_ties_pick_smallest(zeros3):
    assert viterbi_decode(zeros3, Query(0, 3)) == ((0, 0, 0), 0.0)


def test_trellis_rows(t3):
    tr = build_trellis(t3, Query(0, 3))
    assert tr.delta[0, 0] == 0.0
    assert (tr.delta[0, 1:] == tr.unreachable).all()
    assert tr.unreachable < -3 * (2.0 + 0.6)
    assert tr.delta[1, 2] == pytest.approx(2.2)
    assert tr.delta[2].max() == pytest.approx(4.2)


@pytest.mark.parametrize("seed", range(60))
def test_trellis_recurrence(seed):
    model, q = random_instance(seed)
    tr = build_trellis(model, q)
    for t in range(1, q.length):
        expect = (tr.delta[t - 1][:, None] + model.pairwise).max(axis=0) + model.unary
        np.testing.assert_allclose(tr.delta[t], expect, atol=1e-12)
    end = tr.best_end()
    assert viterbi_decode(model, q).sequence == tr.prefix(q.length - 1, end)


@pytest.mark.parametrize("seed", range(200))
def test_matches_oracle(seed):
    model, q = random_instance(seed, n_range=(2, 7), l_range=(2, 5))
    got = viterbi_decode(model, q)
    want = best_sequence(model, q)
    assert got.sequence == want.sequence
    assert got.score == pytest.approx(want.score, abs=1e-9)
    assert got.score == score_sequence(model, got.sequence)


def test_lexicographic_tie_break_is_not_backward():
    # Two optimal sequences (0,1,0) and (0,0,1); smallest-predecessor
    # backtracking from the end would report (0,1,0).
    model = PotentialModel([0.0, 0.0], [[0.0, 1.0], [0.0, 0.0]])
    ranked = enumerate_ranked(model, Query(0, 3))
    assert ranked[0].sequence == (0, 0, 1)
    assert viterbi_decode(model, Query(0, 3)).sequence == (0, 0, 1)


@pytest.mark.parametrize("seed", range(40))
def test_unary_shift(seed):
    model, q = random_instance(seed)
    shifted = PotentialModel(model.unary + 0.75, model.pairwise)
    base, moved = viterbi_decode(model, q), viterbi_decode(shifted, q)
    assert moved.sequence == base.sequence
    assert moved.score == pytest.approx(base.score + q.length * 0.75, abs=1e-9)


def test_unreachable_below_everything():
    model = PotentialModel.random(5, np.random.default_rng(3), -10, 10)
    ranked = enumerate_ranked(model, Query(0, 4))
    assert unreachable_score(model, 4) < ranked[-1].score
