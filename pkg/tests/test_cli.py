import subprocess
import sys
from pathlib import Path

import pytest

from loopfree.cli import run_cli
from loopfree.model import save_potentials

from conftest import make_t3

GOLDEN = Path(__file__).parent / "fixtures" / "t3_start0_len3.lp"


@pytest.fixture
def t3_files(tmp_path):
    unary, pairwise = tmp_path / "unary.csv", tmp_path / "pairwise.csv"
    save_potentials(make_t3(), unary, pairwise)
    return ["--unary", str(unary), "--pairwise", str(pairwise), "--start", "0"]


def decode(capsys, files, *extra):
    code = run_cli(["decode", *files, *extra])
    return code, capsys.readouterr()


def test_decode_listviterbi(capsys, t3_files):
    code, out = decode(capsys, t3_files, "--length", "3", "--algo", "listviterbi")
    assert code == 0
    assert out.out == "0 1 2\nscore 3.9\nk 2\n"


def test_decode_prefix_variant(capsys, t3_files):
    _, out = decode(capsys, t3_files, "--length", "3", "--algo", "listviterbi", "--variant", "prefix")
    assert out.out == "0 1 2\nscore 3.9\nk 2\n"


@pytest.mark.parametrize(
    "algo, want",
    [("greedy", "0 2 1\nscore 3.8\n"), ("ilp", "0 1 2\nscore 3.9\n"), ("viterbi", "0 2 2\nscore 4.2\n"),
     ("loopelim", "0 2\nscore 2.2\n"), ("loopelim++", "0 2\nscore 2.2\n")],
)
def test_decode_other_algos(capsys, t3_files, algo, want):
    code, out = decode(capsys, t3_files, "--length", "3", "--algo", algo)
    assert code == 0 and out.out == want


def test_usage_errors(capsys, t3_files):
    assert decode(capsys, t3_files, "--length", "3", "--algo", "foo")[0] == 64
    assert run_cli([]) == 64
    assert run_cli(["bench", "--n", "5", "--lengths", "4..2", "--out", "x"]) == 64
    assert "usage" in capsys.readouterr().err


def test_validation_errors(capsys, t3_files, tmp_path):
    code, out = decode(capsys, t3_files, "--length", "4", "--algo", "greedy")
    assert code == 2 and "error" in out.err
    assert decode(capsys, t3_files[:1] + [str(tmp_path / "missing.csv")] + t3_files[2:], "--length", "2", "--algo", "greedy")[0] == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("traj_id,user_id,poi_seq\nt1,u1,3 x 9\n")
    assert run_cli(["eval", "--data", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "line 2" in capsys.readouterr().err


def test_cap_exit_code_and_fallback(capsys, t3_files):
    code, out = decode(capsys, t3_files, "--length", "3", "--algo", "listviterbi", "--kcap", "1")
    assert code == 3 and "--fallback greedy" in out.err
    code, out = decode(capsys, t3_files, "--length", "3", "--algo", "listviterbi", "--kcap", "1", "--fallback", "greedy")
    assert code == 0 and out.out == "0 2 1\nscore 3.8\n"


def test_emit_lp_matches_golden(t3_files, tmp_path):
    out = tmp_path / "m.lp"
    assert run_cli(["emit-lp", *t3_files, "--length", "3", "--out", str(out)]) == 0
    assert out.read_bytes() == GOLDEN.read_bytes()


def test_gen_eval_bench_are_deterministic(tmp_path, capsys):
    outputs = []
    for run in ("a", "b"):
        d = tmp_path / run
        assert run_cli(["gen", "--n", "8", "--queries", "10", "--lengths", "2..5", "--seed", "3", "--out", str(d / "data")]) == 0
        assert run_cli(["eval", "--data", str(d / "data" / "trajectories.csv"), "--out", str(d / "eval"), "--no-timing"]) == 0
        assert run_cli(["bench", "--n", "6", "--lengths", "2..4", "--trials", "2", "--out", str(d / "bench.csv")]) == 0
        files = sorted(p for p in d.rglob("*.csv"))
        outputs.append({p.relative_to(d): p.read_bytes() for p in files})
    a, b = outputs
    assert set(a) == {Path("data/unary.csv"), Path("data/pairwise.csv"), Path("data/trajectories.csv"),
                      Path("eval/per_query.csv"), Path("eval/aggregate.csv"), Path("bench.csv")}
    for name in a:
        if name != Path("bench.csv"):
            assert a[name] == b[name], name
    strip = lambda text: [line.split(",")[:3] + line.split(",")[4:] for line in text.decode().splitlines()]  # noqa: E731
    assert strip(a[Path("bench.csv")]) == strip(b[Path("bench.csv")])
    assert a[Path("bench.csv")].startswith(b"algo,length,trial,wall_time_us,score,cap_fallback\n")


def test_module_entry_point(t3_files):
    proc = subprocess.run(
        [sys.executable, "-m", "loopfree", "decode", *t3_files, "--length", "2", "--algo", "greedy"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and proc.stdout == "0 2\nscore 2.2\n"
