import subprocess
import sys

import numpy as np
import pytest

from localdkw import exceedance_probability
from localdkw.cli import main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def body(out):
    return [line for line in out.splitlines() if not line.startswith("#")]


def test_prob_example(capsys):
    code, out, _ = run(["prob", "--n", "1", "--eps", "0.3", "--lo", "0", "--hi", "1", "--tail", "above"], capsys)
    assert code == 0
    assert body(out) == ["n,eps,lo,hi,tail,probability", "1,0.3,0,1,above,0.7"]
    assert out.startswith("# localdkw ")
    assert "# argv: prob --eps 0.3 --hi 1 --lo 0 --n 1 --tail above" in out


def test_invert_example(capsys):
    code, out, _ = run(["invert", "--n", "1", "--delta", "0.3", "--lo", "0", "--hi", "1",
                        "--tail", "above", "--tol", "1e-7"], capsys)
    assert code == 0
    assert abs(float(body(out)[1].split(",")[-1]) - 0.7) <= 1e-7


@pytest.mark.parametrize("argv", [
    ["prob", "--n", "0", "--eps", "0.3"],
    ["prob", "--n", "2", "--eps", "0.3", "--bogus", "1"],
    ["prob", "--n", "2"],
    ["prob", "--n", "2", "--ep", "0.3"],
    ["invert", "--n", "5", "--delta", "1.5"],
    ["tabulate", "--n", "5"],
    ["cvar", "--samples", "x", "--delta", "0.1", "--alpha", "0.1", "--kappa", "0.9"],
    ["frobnicate"],
])
def test_usage_errors_exit_2(argv, capsys, tmp_path):
    code, out, err = run(argv, capsys)
    assert code == 2
    assert out == ""
    assert len(err.strip().splitlines()) == 1


def test_io_error_exit_1(capsys, tmp_path):
    code, _, err = run(["cvar", "--samples", str(tmp_path / "missing.txt"), "--alpha", "0.1",
                        "--delta", "0.1"], capsys)
    assert code == 1 and "I/O error" in err
    code, _, _ = run(["prob", "--n", "1", "--eps", "0.3", "-o", str(tmp_path / "no" / "dir.csv")], capsys)
    assert code == 1


@pytest.mark.parametrize("n,delta,lo,hi,tail", [(7, 0.1, 0.0, 0.3, "above"), (30, 0.05, 0.6, 1.0, "below")])
def test_round_trip(capsys, n, delta, lo, hi, tail):
    args = ["--n", str(n), "--lo", str(lo), "--hi", str(hi), "--tail", tail]
    _, out, _ = run(["invert", "--delta", str(delta)] + args, capsys)
    eps = float(body(out)[1].split(",")[-1])
    _, out, _ = run(["prob", "--eps", repr(eps)] + args, capsys)
    assert float(body(out)[1].split(",")[-1]) <= delta
    assert exceedance_probability(n, eps - 2e-7, (lo, hi), tail) > delta


def test_tabulate_table(capsys):
    code, out, _ = run(["tabulate", "--n", "5,10", "--delta", "0.05,0.1", "--hi", "0.2"], capsys)
    assert code == 0
    assert "# interval=0,0.2 tail=above tol=1e-07" in out
    assert len(body(out)) == 5


def test_figure_delta0(capsys):
    code, out, _ = run(["tabulate", "--figure", "delta0", "--n", "2"], capsys)
    assert code == 0
    rows = body(out)
    assert rows[0] == "eps,[0;0.05],[0;0.1],[0;0.2],[0;0.5],[0;0.9],[0;1]"
    data = np.array([[float(v) for v in r.split(",")] for r in rows[1:]])
    assert data.shape == (1000, 7)
    assert np.all(np.diff(data[:, 1:], axis=0) <= 1e-12)


def test_figure_delta1_family_one(capsys):
    code, out, _ = run(["tabulate", "--figure", "delta1", "--family", "one", "--n", "5"], capsys)
    assert code == 0
    assert body(out)[0] == "eps,[0;1],[0.1;1],[0.5;1],[0.8;1],[0.9;1],[0.95;1]"


def test_figure_epsilon0_below_dkw(capsys):
    code, out, _ = run(["tabulate", "--figure", "epsilon0", "--n", "100"], capsys)
    assert code == 0
    rows = body(out)
    assert rows[0].endswith(",[0;1],DKW")
    data = np.array([[float(v) for v in r.split(",")] for r in rows[1:]])
    small = data[:, 0] < 0.5
    assert np.all(data[small, 6] <= data[small, 7])


def test_figure_mcmc_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["tabulate", "--figure", "mcmc", "--n", "5", "--seed", "42", "-o", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert "# seed=42" in a.read_text()


def test_band_and_cvar(tmp_path, capsys):
    f = tmp_path / "s.txt"
    f.write_text("# support=0,1\n0.2\n0.4\n0.6\n0.8\n")
    code, out, _ = run(["cvar", "--samples", str(f), "--alpha", "0.5", "--delta", "0.1"], capsys)
    assert code == 0
    header, row = body(out)
    assert header == "level,delta,lower,point,upper,n"
    level, delta, lower, point, upper, n = row.split(",")
    assert float(point) == pytest.approx(0.3) and n == "4"
    assert float(lower) <= float(point) <= float(upper)
    code, out, _ = run(["cvar", "--samples", str(f), "--side", "loss", "--kappa", "0.5",
                        "--delta", "0.1"], capsys)
    assert float(body(out)[1].split(",")[3]) == pytest.approx(0.7)
    code, out, _ = run(["band", "--samples", str(f), "--delta", "0.1"], capsys)
    assert code == 0 and body(out)[0] == "x,lower,upper" and len(body(out)) == 7


def test_cvar_unbounded_support_is_usage_error(tmp_path, capsys):
    f = tmp_path / "s.txt"
    f.write_text("0.2\n0.4\n")
    code, _, err = run(["cvar", "--samples", str(f), "--alpha", "0.5", "--delta", "0.1"], capsys)
    assert code == 2 and "support" in err
    code, _, _ = run(["cvar", "--samples", str(f), "--alpha", "0.5", "--delta", "0.1",
                      "--support", "0,1"], capsys)
    assert code == 0


def test_mc(capsys):
    code, out, _ = run(["mc", "--n", "5", "--eps", "0.1,0.3", "--reps", "2000", "--seed", "1"], capsys)
    assert code == 0
    rows = body(out)
    assert rows[0] == "eps,frequency,stderr,exact,abs_diff" and len(rows) == 3
    assert "# seed=1" in out


def test_tu(capsys):
    code, out, _ = run(["tu", "--horizon", "10", "--delta", "0.1"], capsys)
    assert code == 0 and body(out)[0] == "t,radius" and len(body(out)) == 11
    code, out, _ = run(["tu", "--schedule", "SummableC", "--T", "5", "--g", "ThreeT32"], capsys)
    assert code == 0 and body(out)[0] == "t,eta_t,delta_t,K_t"
    code, _, _ = run(["tu", "--schedule", "KlUcbB", "--xi", "1.5"], capsys)
    assert code == 2


def test_header_replays(capsys):
    _, out, _ = run(["tabulate", "--n", "3", "--delta", "0.2", "--lo", "0.1"], capsys)
    argv = out.splitlines()[1][len("# argv: "):].split()
    _, out2, _ = run(argv, capsys)
    assert out2 == out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "localdkw", "prob", "--n", "1", "--eps", "0.3"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip().endswith("1,0.3,0,1,above,0.7")
