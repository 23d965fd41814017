"""Command line front end: small graph files in, manifest plus CSV out."""

import subprocess
import sys

import pytest

from loopsoup.cli import main

TRIANGLE = """\
vertices 3
edge 0 1 1.0
edge 1 2 1.0
edge 0 2 1.0
kappa 0 1.0
kappa 1 1.0
kappa 2 1.0
"""

BOWTIE = """\
vertices 5
edge 0 1 1.0
edge 0 2 1.0
edge 1 2 1.0
edge 0 3 1.0
edge 0 4 1.0
edge 3 4 1.0
kappa 0 1.0
kappa 1 1.0
kappa 2 1.0
kappa 3 1.0
kappa 4 1.0
"""

K4 = """\
vertices 4
edge 0 1 1.0
edge 0 2 1.0
edge 0 3 1.0
edge 1 2 1.0
edge 1 3 1.0
edge 2 3 1.0
kappa 0 1.0
kappa 1 1.0
kappa 2 1.0
kappa 3 1.0
"""


@pytest.fixture
def tri_path(tmp_path):
    p = tmp_path / "tri.graph"
    p.write_text(TRIANGLE)
    return str(p)


@pytest.fixture
def bow_path(tmp_path):
    p = tmp_path / "bow.graph"
    p.write_text(BOWTIE)
    return str(p)


@pytest.fixture
def k4_path(tmp_path):
    p = tmp_path / "k4.graph"
    p.write_text(K4)
    return str(p)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


class TestValidate:
    def test_ok(self, capsys, tri_path):
        code, out = run_cli(capsys, "validate", tri_path)
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("# loopsoup validate version=")
        assert "vertices: 3" in out
        assert "rank: 1" in out
        assert "mass: 0.5232481437645478" in out

    def test_no_killing_reports_infinite(self, capsys, tmp_path):
        p = tmp_path / "free.graph"
        p.write_text("vertices 3\nedge 0 1 1.0\nedge 1 2 1.0\nedge 0 2 1.0\n")
        code, out = run_cli(capsys, "validate", str(p))
        assert code == 0
        assert "mass: infinite (kappa == 0)" in out

    def test_bad_graph_exits_2(self, capsys, tmp_path):
        p = tmp_path / "bad.graph"
        p.write_text("vertices 2\nedge 0 5 1.0\n")
        code, _ = run_cli(capsys, "validate", str(p))
        assert code == 2

    def test_missing_file_exits_4(self, capsys, tmp_path):
        code, _ = run_cli(capsys, "validate", str(tmp_path / "nope.graph"))
        assert code == 4


class TestSample:
    def test_deterministic(self, capsys, tri_path):
        args = ("sample", tri_path, "--seed", "7",
                "--n-max", "42", "--tail-tol", "1e-7")
        code1, out1 = run_cli(capsys, *args)
        code2, out2 = run_cli(capsys, *args)
        assert code1 == code2 == 0
        assert out1 == out2

    def test_seed_changes_output(self, capsys, tri_path):
        outs = set()
        for seed in range(6):
            _, out = run_cli(capsys, "sample", tri_path, "--seed", str(seed),
                             "--n-max", "42", "--tail-tol", "1e-7")
            outs.add(out)
        assert len(outs) > 1

    def test_occupation_csv(self, capsys, tri_path):
        code, out = run_cli(capsys, "sample", tri_path, "--seed", "7",
                            "--n-max", "42", "--tail-tol", "1e-7",
                            "--occupation")
        assert code == 0
        assert out.splitlines()[1] == "u,v,N,Ncheck"

    def test_tight_tail_exits_4(self, capsys, tri_path):
        code, _ = run_cli(capsys, "sample", tri_path, "--seed", "1",
                          "--n-max", "5", "--tail-tol", "1e-12")
        assert code == 4


class TestEnumerate:
    def test_header_and_trivial_row(self, capsys, tri_path):
        code, out = run_cli(capsys, "enumerate", tri_path, "--n-max", "10")
        assert code == 0
        lines = out.splitlines()
        assert lines[1] == "class,length,mult,intensity"
        assert any(l.startswith("e,0,1,") for l in lines)
        assert any(l.startswith("+1,1,1,") for l in lines)

    def test_manifest_records_tail(self, capsys, tri_path):
        _, out = run_cli(capsys, "enumerate", tri_path, "--n-max", "8")
        assert "tail=" in out.splitlines()[0]


class TestHomotopy:
    def test_rows(self, capsys, tri_path):
        code, out = run_cli(capsys, "homotopy", tri_path, "--max-len", "2")
        assert code == 0
        lines = out.splitlines()
        assert lines[1] == "class,length,mult,intensity"
        # trivial row, then +-1, then the squares with multiplicity 2
        assert lines[2].startswith("e,0,1,")
        body = "\n".join(lines)
        assert "+1 +1,2,2," in body

    def test_damped_skips_trivial_row(self, capsys, tri_path):
        _, out = run_cli(capsys, "homotopy", tri_path, "--max-len", "2",
                         "--s", "0.5")
        assert not any(l.startswith("e,") for l in out.splitlines())


class TestH1:
    def test_range_output(self, capsys, tri_path):
        code, out = run_cli(capsys, "h1", tri_path, "--h-range", "2",
                            "--M", "64")
        assert code == 0
        lines = out.splitlines()
        assert lines[1] == "h1,intensity"
        assert [l.split(",")[0] for l in lines[2:]] == \
            ["-2", "-1", "0", "1", "2"]

    def test_field_mode(self, capsys, tri_path):
        code, out = run_cli(capsys, "h1", tri_path, "--field", "--h", "0",
                            "--M", "64", "--alpha", "1.0")
        assert code == 0
        lines = out.splitlines()
        assert lines[1] == "h1,probability"
        val = float(lines[2].split(",")[1])
        assert val == pytest.approx(0.8944271909999157, abs=1e-8)

    def test_mod_output(self, capsys, tri_path):
        code, out = run_cli(capsys, "h1", tri_path, "--h", "0", "--mod", "3")
        assert code == 0
        assert out.splitlines()[1] == "h1,intensity"

    def test_rank2_rows(self, capsys, bow_path):
        code, out = run_cli(capsys, "h1", bow_path, "--h-range", "1",
                            "--M", "32")
        assert code == 0
        lines = out.splitlines()
        assert lines[1] == "h1,h2,intensity"
        assert len(lines) == 2 + 9

    def test_unkilled_graph_exits_3(self, capsys, tmp_path):
        p = tmp_path / "free.graph"
        p.write_text("vertices 3\nedge 0 1 1.0\nedge 1 2 1.0\nedge 0 2 1.0\n")
        code, _ = run_cli(capsys, "h1", str(p), "--h", "0")
        assert code == 3


class TestH2:
    def test_intensity_rows(self, capsys, bow_path):
        code, out = run_cli(capsys, "h2", bow_path, "--p", "5")
        assert code == 0
        lines = out.splitlines()
        assert lines[1] == "m,p,intensity"
        assert len(lines) == 2 + 5
        first = lines[2].split(",")
        assert first[0] == "0" and first[1] == "5"
        assert float(first[2]) == pytest.approx(0.5948035524932918, abs=1e-9)

    def test_field_rows_sum_to_one(self, capsys, bow_path):
        code, out = run_cli(capsys, "h2", bow_path, "--p", "5", "--field")
        assert code == 0
        lines = out.splitlines()
        assert lines[1] == "m,p,probability"
        tot = sum(float(l.split(",")[2]) for l in lines[2:])
        assert tot == pytest.approx(1.0, abs=1e-8)

    def test_composite_p_exits_2(self, capsys, bow_path):
        code, _ = run_cli(capsys, "h2", bow_path, "--p", "6")
        assert code == 2


class TestZeta:
    def test_k4(self, capsys, k4_path):
        code, out = run_cli(capsys, "zeta", k4_path, "--max-degree", "8")
        assert code == 0
        lines = out.splitlines()
        assert "agree=True" in lines[0]
        assert lines[1] == "degree,lhs,rhs,diff"
        assert lines[2 + 3] == "3,8,8,0"
        for l in lines[2:]:
            assert l.split(",")[3] == "0"

    def test_irregular_exits_2(self, capsys, bow_path):
        code, _ = run_cli(capsys, "zeta", bow_path, "--max-degree", "4")
        assert code == 2


class TestSignatureCmd:
    def test_commutator(self, capsys):
        code, out = run_cli(capsys, "signature", "--word", "+1 +2 -1 -2")
        assert code == 0
        lines = out.splitlines()
        assert lines[1] == "lyndon_word,coordinate"
        assert lines[2] == "1 2,1"

    def test_identity_word_exits_2(self, capsys):
        code, _ = run_cli(capsys, "signature", "--word", "+1 -1")
        assert code == 2

    def test_malformed_word_exits_2(self, capsys):
        code, _ = run_cli(capsys, "signature", "--word", "abc")
        assert code == 2


class TestArgHandling:
    def test_unknown_command_exits_4(self, capsys):
        assert main(["frobnicate"]) == 4

    def test_no_args_exits_4(self, capsys):
        assert main([]) == 4

    def test_out_flag_writes_file(self, tmp_path, capsys, tri_path):
        dest = tmp_path / "out.csv"
        code, out = run_cli(capsys, "h1", tri_path, "--h", "0", "--M", "32",
                            "--out", str(dest))
        assert code == 0
        assert out == ""
        assert dest.read_text().splitlines()[1] == "h1,intensity"


class TestConsoleScript:
    def test_installed_entry_point(self, tri_path):
        # byte-identical across runs through the real console script
        cmd = ["loopsoup", "sample", tri_path, "--seed", "3",
               "--n-max", "42", "--tail-tol", "1e-7"]
        r1 = subprocess.run(cmd, capture_output=True, text=True)
        r2 = subprocess.run(cmd, capture_output=True, text=True)
        assert r1.returncode == r2.returncode == 0
        assert r1.stdout == r2.stdout

    def test_module_invocation(self, tri_path):
        r = subprocess.run(
            [sys.executable, "-m", "loopsoup.cli", "validate", tri_path],
            capture_output=True, text=True)
        assert r.returncode == 0
        assert "vertices: 3" in r.stdout
