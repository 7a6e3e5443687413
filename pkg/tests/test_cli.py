import json
import math

import pytest

from qmarkov.cli import main


def run(argv):
    try:
        return main(argv)
    except SystemExit as exc:  # argparse usage errors
        return exc.code


class TestVerify:
    def test_defaults_pass(self, tmp_path, capsys):
        code = run(["verify", "--out", str(tmp_path), "--grid", "40",
                    "--probes", "20"])
        out = capsys.readouterr().out
        assert code == 0
        assert "verification passed" in out
        assert out.count("[PASS]") == 5
        summary = json.loads((tmp_path / "verify_summary.json").read_text())
        assert summary["passed"] is True
        assert summary["failing"] == []
        assert (tmp_path / "verify_scan.csv").exists()

    def test_theta_below_window_fails_contractivity(self, tmp_path, capsys):
        code = run(["verify", "--theta", "1.2", "--out", str(tmp_path),
                    "--grid", "40", "--probes", "20"])
        out = capsys.readouterr().out
        assert code == 1
        assert "[FAIL] contractivity-closed-form" in out
        summary = json.loads((tmp_path / "verify_summary.json").read_text())
        assert "contractivity-closed-form" in summary["failing"]

    def test_right_angle_inconclusive_witness(self, tmp_path, capsys):
        code = run(["verify", "--theta", str(math.pi / 2), "--out",
                    str(tmp_path), "--grid", "40", "--probes", "20"])
        capsys.readouterr()
        assert code == 1
        summary = json.loads((tmp_path / "verify_summary.json").read_text())
        assert summary["checks"]["divisibility"]["status"] == "inconclusive"
        assert "divisibility" in summary["failing"]

    def test_smooth_variant_passes(self, tmp_path, capsys):
        code = run(["verify", "--theta", "1.55", "--delta", "1.05", "--out",
                    str(tmp_path), "--grid", "40", "--probes", "20"])
        capsys.readouterr()
        assert code == 0
        summary = json.loads((tmp_path / "verify_summary.json").read_text())
        assert "derivative-continuity" in summary["checks"]
        assert summary["checks"]["derivative-continuity"]["passed"] is True

    def test_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "params.cfg"
        cfg.write_text("theta = 1.45\n")
        code = run(["verify", "--config", str(cfg), "--out",
                    str(tmp_path / "out"), "--grid", "40", "--probes", "20"])
        capsys.readouterr()
        assert code == 0
        summary = json.loads(
            (tmp_path / "out" / "verify_summary.json").read_text())
        assert summary["theta"] == 1.45


class TestScan:
    def test_writes_outputs(self, tmp_path, capsys):
        code = run(["scan", "--out", str(tmp_path), "--grid", "30",
                    "--probes", "10"])
        capsys.readouterr()
        assert code == 0
        assert (tmp_path / "scan.csv").exists()
        summary = json.loads((tmp_path / "scan_summary.json").read_text())
        assert summary["passed"] is True
        assert "note" not in summary

    def test_csv_deterministic_across_runs(self, tmp_path, capsys):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            run(["scan", "--out", str(out), "--grid", "20", "--probes", "5",
                 "--seed", "7"])
        capsys.readouterr()
        assert (a / "scan.csv").read_bytes() == (b / "scan.csv").read_bytes()

    def test_ancilla_scan_labelled_exploratory(self, tmp_path, capsys):
        run(["scan", "--k", "2", "--out", str(tmp_path), "--grid", "20",
             "--probes", "5"])
        capsys.readouterr()
        summary = json.loads((tmp_path / "scan_summary.json").read_text())
        assert summary["k"] == 2
        assert "exploratory" in summary["note"]


class TestDivisibility:
    def test_counterexample_verdicts(self, tmp_path, capsys):
        code = run(["divisibility", "--out", str(tmp_path), "--grid", "9"])
        out = capsys.readouterr().out
        assert code == 0
        summary = json.loads(
            (tmp_path / "divisibility_summary.json").read_text())
        assert summary["verdicts"]["not-CP"] >= 1
        assert summary["forcing_witness"]["status"] == "not-P-divisible"
        assert summary["forcing_witness"]["discrepancy"] == pytest.approx(
            2 * abs(math.cos(1.5)), abs=1e-8)
        assert "not-P-divisible" in out
        csv_lines = (tmp_path / "divisibility.csv").read_text().splitlines()
        assert csv_lines[0] == "s,t,definedness,residual,choi_min_eig,verdict"
        assert len(csv_lines) == 9  # header + 8 intervals


class TestSweep:
    def test_window_partition(self, tmp_path, capsys):
        code = run(["sweep", "--out", str(tmp_path), "--theta-min", "1.3",
                    "--theta-max", "1.6", "--theta-step", "0.1"])
        capsys.readouterr()
        assert code == 0
        summary = json.loads((tmp_path / "sweep_summary.json").read_text())
        assert any(abs(v - 1.3) < 1e-9 for v in summary["violations"])
        assert any(abs(v - 1.5) < 1e-9 for v in summary["clean"])


class TestBounds:
    def test_pass_at_default(self, tmp_path, capsys):
        code = run(["bounds", "--out", str(tmp_path)])
        out = capsys.readouterr().out
        assert code == 0
        assert "pass" in out
        summary = json.loads((tmp_path / "bounds_summary.json").read_text())
        assert summary["chain_ok"] and summary["lambda_monotone"]

    def test_fail_below_window(self, tmp_path, capsys):
        code = run(["bounds", "--theta", "1.2", "--out", str(tmp_path)])
        capsys.readouterr()
        assert code == 1
        summary = json.loads((tmp_path / "bounds_summary.json").read_text())
        assert summary["polynomial_nonpositive"] is False


class TestUsage:
    def test_missing_subcommand(self, capsys):
        assert run([]) == 2
        capsys.readouterr()

    def test_unknown_flag(self, capsys):
        assert run(["verify", "--nope"]) == 2
        capsys.readouterr()

    def test_bad_rate_choice(self, capsys):
        assert run(["scan", "--rate", "exotic"]) == 2
        capsys.readouterr()
