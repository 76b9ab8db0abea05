import math

import numpy as np
import pytest

from loopfree.data import (
    Dataset,
    Trajectory,
    estimate_potentials,
    format_trajectories,
    generate_synthetic,
    parse_trajectories,
)
from loopfree.errors import DuplicateTrajId, EmptyDataset, ParseError, ValidationError
from loopfree.model import Query, is_path, score_sequence
from loopfree.oracle import best_path

HEADER = "traj_id,user_id,poi_seq\n"


def test_parse_reindexes_and_keeps_repeats():
    ds = parse_trajectories(HEADER + "t1,u1,3 7 7 9\n")
    assert ds.n == 3
    assert ds.poi_ids == [3, 7, 9]
    assert ds.trajectories == [Trajectory("t1", "u1", (0, 1, 1, 2))]
    assert ds.queries == [Query(0, 4)]


def test_parse_header_only():
    ds = parse_trajectories(HEADER)
    assert ds.trajectories == [] and ds.n == 0


def test_parse_skips_short(caplog):
    ds = parse_trajectories(HEADER + "a,u,5\nb,u,5 6\n")
    assert ds.skipped == 1
    assert [tr.traj_id for tr in ds.trajectories] == ["b"]
    assert "skipped 1" in caplog.text


@pytest.mark.parametrize(
    "body, line",
    [("t1,u1,3 x 9\n", 2), ("t1,u1,1 2\nt2,u1\n", 3), ("t1,u1,1 -2\n", 2)],
)
def test_parse_errors(body, line):
    with pytest.raises(ParseError) as err:
        parse_trajectories(HEADER + body)
    assert err.value.line == line


def test_parse_bad_header():
    with pytest.raises(ParseError) as err:
        parse_trajectories("id,user,seq\n")
    assert err.value.line == 1


def test_duplicate_traj_id():
    with pytest.raises(DuplicateTrajId) as err:
        parse_trajectories(HEADER + "t1,u1,1 2\nt1,u2,2 1\n")
    assert err.value.line == 3


def test_round_trip():
    text = HEADER + "a,u1,10 4 7\nb,u2,4 10\nc,u1,7 7 4 10\n"
    ds = parse_trajectories(text)
    assert format_trajectories(ds) == text
    again = parse_trajectories(format_trajectories(ds))
    assert again.trajectories == ds.trajectories and again.poi_ids == ds.poi_ids


def test_estimate_single_trajectory():
    model = estimate_potentials(Dataset(2, [Trajectory("t", "u", (0, 1))]), 1.0)
    assert model.unary[0] == pytest.approx(math.log(2 / 4))
    assert model.unary[1] == pytest.approx(math.log(2 / 4))
    assert model.pairwise[0, 1] == pytest.approx(math.log(2 / 3))
    # Unseen transitions sit on the smoothing floor.
    assert model.pairwise[0, 0] == pytest.approx(math.log(1 / 3))
    assert model.pairwise[1, 0] == pytest.approx(math.log(1 / 2))


def test_estimate_uniform_counts():
    trajs = [Trajectory(f"t{i}", "u", (a, b)) for i, (a, b) in enumerate([(0, 1), (1, 2), (2, 0)])]
    model = estimate_potentials(Dataset(3, trajs), 0.5)
    assert np.allclose(model.unary, model.unary[0])
    assert np.allclose(np.sort(model.pairwise, axis=1), np.sort(model.pairwise[0]))


def test_estimate_errors():
    with pytest.raises(EmptyDataset):
        estimate_potentials(Dataset(2, []), 1.0)
    with pytest.raises(ValidationError):
        estimate_potentials(Dataset(2, [Trajectory("t", "u", (0, 1))]), 0.0)


def test_estimate_is_finite_on_random_data():
    rng = np.random.default_rng(3)
    trajs = [Trajectory(str(i), "u", tuple(rng.integers(0, 6, rng.integers(2, 5)).tolist())) for i in range(40)]
    model = estimate_potentials(Dataset(6, trajs), 0.1)
    assert np.isfinite(model.unary).all() and np.isfinite(model.pairwise).all()


def test_synthetic_is_deterministic():
    a = generate_synthetic(8, (2, 5), 12, seed=5)
    b = generate_synthetic(8, (2, 5), 12, seed=5)
    np.testing.assert_array_equal(a[0].unary, b[0].unary)
    np.testing.assert_array_equal(a[0].pairwise, b[0].pairwise)
    assert a[1].trajectories == b[1].trajectories
    assert generate_synthetic(8, (2, 5), 12, seed=6)[1].trajectories != a[1].trajectories


def test_synthetic_truths_are_optimal_paths():
    model, ds = generate_synthetic(6, (4, 4), 6, seed=1)
    assert np.abs(model.unary).max() <= 1 and np.abs(model.pairwise).max() <= 1
    assert len(ds.queries) == 6
    for tr in ds.trajectories:
        assert is_path(tr.pois) and len(tr.pois) == 4
        assert score_sequence(model, tr.pois) == pytest.approx(best_path(model, tr.query).score, abs=1e-9)


def test_synthetic_lengths_in_range():
    _, ds = generate_synthetic(10, (3, 6), 20, seed=2)
    assert all(3 <= len(tr.pois) <= 6 and is_path(tr.pois) for tr in ds.trajectories)


@pytest.mark.parametrize("args", [(1, (2, 3), 1), (65, (2, 3), 1), (5, (1, 3), 1), (5, (4, 3), 1), (3, (4, 5), 1), (3, (2, 2), 4)])
def test_synthetic_rejects_bad_ranges(args):
    n, lengths, queries = args
    with pytest.raises(ValidationError):
        generate_synthetic(n, lengths, queries, seed=0)
