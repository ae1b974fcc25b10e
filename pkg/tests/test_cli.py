import json
import subprocess
import sys

import pytest

from paulitrunc.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def hx(tmp_path):
    f = tmp_path / "hx.circ"
    f.write_text("qubits 1\nh 0\nrp Z t0\n")
    return str(f)


class TestExpect:
    def test_pi_over_eight(self, capsys, hx):
        code, out, _ = run(capsys, "expect", "--circuit", hx, "--obs", "X", "--L", "4", "--theta", "0.39269908169872414")
        assert code == 0
        rows = out.splitlines()
        assert rows[0] == "point,value,paths,pruned"
        assert abs(float(rows[1].split(",")[1]) - 0.7071068) <= 1e-7

    def test_stats_file(self, capsys, hx, tmp_path):
        stats = tmp_path / "s.json"
        code, _, _ = run(capsys, "expect", "--circuit", hx, "--obs", "X", "--L", "2", "--theta", "0.1",
                         "--stats", str(stats))
        assert code == 0 and json.loads(stats.read_text())["L"] == 2

    def test_draws_need_seed(self, capsys, hx):
        code, _, err = run(capsys, "expect", "--circuit", hx, "--obs", "X", "--L", "2", "--draws", "3")
        assert code == 1 and "--seed" in err

    def test_draws_reproducible(self, capsys):
        argv = ["expect", "--gen", "brickwork:n=3,depth=2,kind=haar,seed=1", "--noise", "depol2:0.1",
                "--obs", "ZZI", "--L", "2", "--draws", "4", "--seed", "9"]
        a = run(capsys, *argv)
        b = run(capsys, *argv)
        assert a == b and a[0] == 0 and len(a[1].splitlines()) == 5


class TestDistribution:
    def test_probs(self, capsys):
        code, out, _ = run(capsys, "probs", "--gen", "brickwork:n=2,depth=1,kind=haar,seed=0",
                           "--haar-seed", "3", "--L", "1")
        assert code == 0
        rows = out.splitlines()
        assert rows[0] == "x,p" and len(rows) == 5
        assert abs(sum(float(r.split(",")[1]) for r in rows[1:]) - 1) <= 1e-12

    def test_marginals(self, capsys, tmp_path):
        f = tmp_path / "bell.circ"
        f.write_text("qubits 2\nh 0\ncx 0 1\n")
        code, out, _ = run(capsys, "probs", "--circuit", str(f), "--L", "0", "--marginal", "0", "--marginal", "01")
        assert code == 0
        assert out.splitlines() == ["prefix,marginal", "0,0.5", "01,0.0"]

    def test_sample_footer(self, capsys):
        argv = ["sample", "--gen", "brickwork:n=3,depth=2,kind=haar,seed=0", "--haar-seed", "1",
                "--L", "2", "--shots", "50", "--seed", "4"]
        code, out, _ = run(capsys, *argv)
        assert code == 0
        rows = out.splitlines()
        assert len(rows) == 51 and all(len(r) == 3 and set(r) <= {"0", "1"} for r in rows[:50])
        footer = json.loads(rows[-1])
        assert footer["shots"] == 50 and footer["marginal_calls"] == 300
        assert run(capsys, *argv)[1] == out

    def test_cap_exceeded(self, capsys):
        code, _, err = run(capsys, "probs", "--gen", "brickwork:n=6,depth=1,kind=haar,seed=0",
                           "--haar-seed", "0", "--L", "9", "--cap", "4")
        assert code == 2 and "cap" in err


class TestSweep:
    def test_rows(self, capsys):
        code, out, _ = run(capsys, "sweep-l", "--gen", "brickwork:n=3,depth=2,kind=rotation,seed=0",
                           "--noise", "depol1:0.25", "--obs", "IZI", "--L", "1..6", "--draws", "20",
                           "--seed", "1", "--gamma-from-noise")
        assert code == 0
        rows = out.splitlines()
        assert rows[0] == "L,rms,bound,stderr,draws,seed" and len(rows) == 7
        assert rows[1].split(",")[2] == "0.75"

    def test_gamma_choice_required(self, capsys):
        code, _, _ = run(capsys, "sweep-l", "--gen", "brickwork:n=3,depth=2,kind=rotation", "--obs", "IZI",
                         "--L", "1..2", "--seed", "1")
        assert code == 1


class TestMisc:
    def test_verify(self, capsys):
        code, out, _ = run(capsys, "verify", "--max-n", "3", "--seed", "0")
        assert code == 0 and "FAIL" not in out

    def test_anticoncentration_depth_zero(self, capsys):
        code, out, _ = run(capsys, "anticoncentration", "--n", "3", "--depth", "0", "--draws", "2", "--seed", "0")
        assert code == 0 and out.splitlines()[1].split(",")[3] == "8.0"

    def test_adjoint(self, capsys):
        code, out, _ = run(capsys, "adjoint", "--seed", "3")
        assert code == 0 and len(out.splitlines()) == 15
        assert run(capsys, "adjoint", "--seed", "3")[1] == out

    @pytest.mark.parametrize("argv", [
        ["expect", "--obs", "X", "--L", "1"],
        ["expect", "--gen", "nope:n=1", "--obs", "X", "--L", "1"],
        ["expect", "--gen", "brickwork:n=2,depth=1", "--obs", "XXX", "--L", "1", "--haar-seed", "0"],
        ["frobnicate"],
        ["expect", "--gen", "random:n=2,rotations=1,seed=0", "--obs", "ZZ", "--L", "1", "--theta", "0.1,0.2"],
    ])
    def test_usage_errors(self, capsys, argv):
        assert run(capsys, *argv)[0] == 1

    def test_parse_error(self, capsys, tmp_path):
        f = tmp_path / "bad.circ"
        f.write_text("qubits 2\nfoo 0\n")
        code, _, err = run(capsys, "expect", "--circuit", str(f), "--obs", "ZZ", "--L", "1")
        assert code == 1 and "2" in err

    def test_threads_do_not_change_output(self, capsys):
        argv = ["expect", "--gen", "brickwork:n=3,depth=2,kind=haar,seed=1", "--obs", "ZZI", "--L", "2",
                "--draws", "3", "--seed", "2"]
        assert run(capsys, *argv, "--threads", "1")[1] == run(capsys, *argv, "--threads", "4")[1]

    def test_module_entry_point(self, hx):
        r = subprocess.run([sys.executable, "-m", "paulitrunc", "expect", "--circuit", hx, "--obs", "X",
                            "--L", "1", "--theta", "0"], capture_output=True, text=True)
        assert r.returncode == 0 and r.stdout.splitlines()[1].startswith("0,1.0")
