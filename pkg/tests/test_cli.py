"""Tests for the command line interface: output formats, determinism, exit codes."""

import json
import subprocess

import pytest

from bisteklov.cli import run


@pytest.fixture
def disk_file(tmp_path):
    p = tmp_path / "disk.json"
    p.write_text('{"a0": 1.0}\n')
    return str(p)


@pytest.fixture
def perturbed_file(tmp_path):
    p = tmp_path / "perturbed.json"
    p.write_text('{"a0": 1.0, "cos_coeffs": [0.0, 0.05]}\n')
    return str(p)


def run_cli(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestBallSpectrum:
    def test_csv_output(self, capsys):
        code, out, _ = run_cli(capsys, "ball-spectrum", "--tau", "1.0", "--count", "5")
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "index,eigenvalue,angular_order"
        assert len(lines) == 6
        j, lam, order = lines[2].split(",")
        assert (j, order) == ("2", "1")
        assert float(lam) == pytest.approx(1.0, rel=1e-12)

    def test_dimension_flag(self, capsys):
        code, out, _ = run_cli(capsys, "ball-spectrum", "--dim", "3", "--tau", "2.0", "--count", "4")
        assert code == 0
        rows = [line.split(",") for line in out.strip().split("\n")[1:]]
        # lambda = tau has multiplicity N = 3
        assert [r[2] for r in rows] == ["0", "1", "1", "1"]

    def test_output_file(self, capsys, tmp_path):
        target = tmp_path / "spec.csv"
        code, out, _ = run_cli(
            capsys, "ball-spectrum", "--tau", "1.0", "--count", "3", "--output", str(target)
        )
        assert code == 0
        assert out == ""
        assert target.read_text().startswith("index,eigenvalue")


class TestSolve:
    def test_json_document(self, capsys, disk_file):
        code, out, _ = run_cli(capsys, "solve", "--domain", disk_file, "--tau", "1.0")
        assert code == 0
        doc = json.loads(out)
        assert doc["tau"] == 1.0
        assert abs(doc["eigenvalues"][0]) < 1e-8
        assert doc["eigenvalues"][1] == pytest.approx(1.0, rel=1e-8)
        assert doc["clusters"][1] == [2, 3]
        assert doc["diagnostics"]["basis_size"] == 42

    def test_deterministic_bytes(self, capsys, perturbed_file):
        _, out1, _ = run_cli(capsys, "solve", "--domain", perturbed_file, "--tau", "1.0")
        _, out2, _ = run_cli(capsys, "solve", "--domain", perturbed_file, "--tau", "1.0")
        assert out1 == out2


class TestShapeDerivative:
    def test_disk_dilation(self, capsys, disk_file):
        code, out, _ = run_cli(
            capsys, "shape-derivative", "--domain", disk_file, "--tau", "1.0",
            "--field", "const",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["F"] == [2, 3]
        assert doc["hadamard"] == pytest.approx(-2.0, rel=1e-8)

    def test_fd_validation_branch(self, capsys, perturbed_file):
        code, out, _ = run_cli(
            capsys, "shape-derivative", "--domain", perturbed_file, "--tau", "1.0",
            "--F", "2", "--field", "cos2", "--validate-fd",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["fd_discrepancy"] < 1e-6
        assert len(doc["fd_estimates"]) == 2

    def test_tracking_failure_exit_code(self, capsys, perturbed_file):
        code, _, err = run_cli(
            capsys, "shape-derivative", "--domain", perturbed_file, "--tau", "1.0",
            "--F", "2", "--field", "cos2", "--validate-fd", "--steps", "0.4,0.2",
        )
        assert code == 1
        assert "numerical failure" in err


class TestCriticality:
    def test_disk_residual(self, capsys, disk_file):
        code, out, _ = run_cli(capsys, "criticality", "--domain", disk_file, "--tau", "1.0")
        assert code == 0
        doc = json.loads(out)
        assert doc["residual"] < 1e-7
        assert doc["lambda_F"] == pytest.approx(1.0, rel=1e-8)


class TestConcentration:
    def test_sweep_csv(self, capsys):
        code, out, _ = run_cli(
            capsys, "concentration", "--tau", "1.0", "--eps", "0.2,0.1", "--modes", "2"
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0] == "eps,j,lambda_eps,lambda_limit,abs_error"
        assert len(lines) == 5
        errs = {}
        for line in lines[1:]:
            eps, j, _, _, err = line.split(",")
            if j == "2":
                errs[float(eps)] = float(err)
        assert errs[0.1] < errs[0.2]


class TestIsoScan:
    def test_verdict_line(self, capsys):
        code, out, _ = run_cli(
            capsys, "iso-scan", "--family", "perturbed_disk", "--tau", "1.0",
            "--params", "0.0,0.08",
        )
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0].startswith("family,parameter")
        assert lines[-1] == "verdict,PASS"


class TestExitCodes:
    def test_unknown_domain_key(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"a0": 1.0, "radius": 2.0}\n')
        code, _, err = run_cli(capsys, "solve", "--domain", str(bad), "--tau", "1.0")
        assert code == 2
        assert "unknown domain fields" in err

    def test_missing_a0(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"cos_coeffs": [0.1]}\n')
        code, _, err = run_cli(capsys, "solve", "--domain", str(bad), "--tau", "1.0")
        assert code == 2
        assert "a0" in err

    def test_unreadable_domain(self, capsys, tmp_path):
        code, _, _ = run_cli(capsys, "solve", "--domain", str(tmp_path / "nope.json"), "--tau", "1.0")
        assert code == 2

    def test_bad_field_syntax(self, capsys, disk_file):
        code, _, err = run_cli(
            capsys, "shape-derivative", "--domain", disk_file, "--tau", "1.0",
            "--field", "cos0",
        )
        assert code == 2
        assert "field" in err

    def test_increasing_eps(self, capsys):
        code, _, _ = run_cli(capsys, "concentration", "--tau", "1.0", "--eps", "0.1,0.2")
        assert code == 2

    def test_missing_required_argument(self, capsys):
        code, _, _ = run_cli(capsys, "solve", "--domain", "x.json")
        assert code == 2

    def test_bad_index_set(self, capsys, disk_file):
        code, _, _ = run_cli(
            capsys, "shape-derivative", "--domain", disk_file, "--tau", "1.0",
            "--F", "2,x", "--field", "const",
        )
        assert code == 2

    def test_incomplete_cluster(self, capsys, disk_file):
        # index 2 alone is half of the disk's degenerate pair
        code, _, _ = run_cli(
            capsys, "shape-derivative", "--domain", disk_file, "--tau", "1.0",
            "--F", "2", "--field", "const",
        )
        assert code == 2


def test_installed_entry_point():
    proc = subprocess.run(
        ["bisteklov", "ball-spectrum", "--tau", "1.0", "--count", "3"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("index,eigenvalue,angular_order")
