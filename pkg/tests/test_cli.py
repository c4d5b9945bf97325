"""Subcommand behavior: exit codes, JSON/CSV shapes, determinism."""

import json
import subprocess
import sys

import numpy as np
import pytest

from pisier_lab import CubeFunction, build_truncated_witness, write_binary
from pisier_lab import cli
from pisier_lab.report import BoundViolationError


def run_main(args):
    return cli.main(args)


class TestProxyCheck:
    def test_ok_run(self, capsys, tmp_path):
        out = tmp_path / "proxy.json"
        assert run_main(["proxy-check", "--ell", "3", "--n", "16", "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert payload["proxy_l1"] <= 24.0
        assert payload["phi_l1"] <= 12.0
        assert payload["violations"] == []
        assert len(payload["level_coeffs"]) == 17

    def test_two_point_cube(self, capsys):
        assert run_main(["proxy-check", "--ell", "1", "--n", "1"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["level_coeffs"][1] == 1.0
        assert payload["proxy_l1"] == 1.0

    def test_even_ell_is_usage_error(self, capsys):
        assert run_main(["proxy-check", "--ell", "2", "--n", "8"]) == 2

    def test_out_of_range_n(self, capsys):
        assert run_main(["proxy-check", "--ell", "3", "--n", "25"]) == 2


class TestAudit:
    def test_basic_run(self, capsys):
        assert run_main(["audit", "--n", "8", "--m", "4", "--norm", "linf", "--seed", "7"]) == 0
        payload = json.loads(capsys.readouterr().out)
        audit = payload["audit"]
        assert audit["lhs"] <= audit["derived_constant"] * audit["rhs_raw"] + 1e-9
        assert audit["ell"] == 3

    def test_euclidean_ratio_contracts(self, capsys):
        assert run_main(["audit", "--n", "8", "--m", "4", "--norm", "l2", "--seed", "7"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["audit"]["ratio"] <= 1.0 + 1e-12

    def test_ell_auto_choice(self, capsys):
        assert run_main(["audit", "--n", "6", "--m", "64", "--norm", "l2", "--seed", "1"]) == 0
        assert json.loads(capsys.readouterr().out)["audit"]["ell"] == 5

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["audit", "--n", "8", "--m", "4", "--norm", "linf", "--seed", "3"]
        assert run_main(args + ["--out", str(a)]) == 0
        assert run_main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_csv_appends_single_header(self, capsys, tmp_path):
        csv_path = tmp_path / "audits.csv"
        for seed in ("1", "2"):
            assert run_main(["audit", "--n", "6", "--m", "4", "--seed", seed,
                             "--csv", str(csv_path), "--out", str(tmp_path / "j.json")]) == 0
        lines = csv_path.read_text().splitlines()
        assert lines[0] == "n,m,ell,lhs,rhs_raw,ratio,derived_constant,slack"
        assert len(lines) == 3

    def test_lp_requires_p(self, capsys):
        assert run_main(["audit", "--n", "6", "--m", "4", "--norm", "lp"]) == 2
        assert run_main(["audit", "--n", "6", "--m", "4", "--norm", "lp", "--p", "3"]) == 0

    def test_bound_violation_exit_code(self, capsys, monkeypatch):
        def boom(*args, **kwargs):
            raise BoundViolationError("synthetic violation")

        monkeypatch.setattr(cli.pisier_bench, "decomposition_audit", boom)
        assert run_main(["audit", "--n", "6", "--m", "4"]) == 1
        assert "synthetic violation" in capsys.readouterr().err


class TestLowerBound:
    def test_n9_truncated(self, capsys):
        assert run_main(["lower-bound", "--n", "9", "--variant", "truncated"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["singleton_coefficient"] == pytest.approx(1.0 / 3.0, abs=1e-15)
        assert payload["mode"] == "instance"
        assert payload["ratio"] >= 1.0

    def test_n4_chebyshev_bounded(self, capsys):
        assert run_main(["lower-bound", "--n", "4", "--variant", "chebyshev"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["witness_sup"] <= 1.0

    def test_csv_row_appended(self, capsys, tmp_path):
        out = tmp_path / "rows.csv"
        assert run_main(["lower-bound", "--n", "12", "--emit", "csv", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("n,variant,mode,witness_sup")
        assert len(lines) == 2
        assert lines[1].startswith("12,truncated,instance")

    def test_scalar_mode_above_instance_cap(self, capsys):
        assert run_main(["lower-bound", "--n", "16", "--variant", "truncated"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["mode"] == "scalar"
        assert "ratio" not in payload

    def test_dimension_cap(self, capsys):
        assert run_main(["lower-bound", "--n", "17"]) == 2


class TestSparsity:
    def test_witness_mode(self, capsys):
        assert run_main(["sparsity", "--n", "9", "--variant", "truncated"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["params"]["level1_sum_raw"] == 3.0
        assert payload["params"]["sparsity"] == 256

    def test_file_mode(self, capsys, tmp_path):
        path = tmp_path / "f.bin"
        write_binary(build_truncated_witness(4), path)
        assert run_main(["sparsity", "--input", str(path)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["params"]["sparsity"] == 8

    def test_requires_exactly_one_source(self, capsys):
        assert run_main(["sparsity"]) == 2
        assert run_main(["sparsity", "--n", "4", "--input", "x.bin"]) == 2

    def test_no_rescale_rejects_unbounded(self, capsys, tmp_path):
        path = tmp_path / "big.bin"
        write_binary(CubeFunction.constant(3, 5.0), path)
        assert run_main(["sparsity", "--input", str(path), "--no-rescale"]) == 2


class TestSweep:
    def test_proxy_grid(self, capsys):
        assert run_main(["sweep", "--kind", "proxy", "--ell", "1,3,5,7", "--n", "16"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == ",".join(cli.PROXY_SWEEP_FIELDS)
        assert len(lines) == 5
        assert all(line.split(",")[-2] == "ok" for line in lines[1:])

    def test_lower_bound_grid(self, capsys):
        assert run_main(["sweep", "--kind", "lower-bound", "--n", "4,9"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 3

    def test_empty_range_header_only(self, capsys):
        assert run_main(["sweep", "--kind", "proxy", "--ell", "", "--n", ""]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines == [",".join(cli.PROXY_SWEEP_FIELDS)]

    def test_audit_grid_with_seed_range(self, capsys):
        assert run_main(["sweep", "--kind", "audit", "--n", "6", "--m", "4,8",
                         "--seeds", "0:3", "--norm", "l2"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 7

    def test_row_errors_recorded_not_fatal(self, capsys):
        # even ell rows fail, the sweep still completes
        import csv as csv_mod
        import io

        assert run_main(["sweep", "--kind", "proxy", "--ell", "2,3", "--n", "4"]) == 0
        rows = list(csv_mod.reader(io.StringIO(capsys.readouterr().out)))
        assert len(rows) == 3
        status = rows[0].index("status")
        assert rows[1][status] == "error"
        assert rows[2][status] == "ok"


class TestFourier:
    def test_round_trip(self, capsys, tmp_path):
        path = tmp_path / "f.bin"
        rng = np.random.default_rng(0)
        f = CubeFunction.from_values(5, rng.standard_normal(32))
        write_binary(f, path)
        assert run_main(["fourier", "--input", str(path)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["n"] == 5
        rebuilt = np.zeros(32)
        for mask, coeff in payload["spectrum"].items():
            rebuilt[int(mask)] = coeff
        assert np.abs(rebuilt - f.spectrum).max() < 1e-15

    def test_threshold_drops_noise(self, capsys, tmp_path):
        path = tmp_path / "w.bin"
        write_binary(build_truncated_witness(4), path)
        assert run_main(["fourier", "--input", str(path), "--threshold", "1e-8"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert len(payload["spectrum"]) == 8


class TestConsoleScript:
    def test_installed_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "pisier_lab.cli", "proxy-check", "--ell", "1", "--n", "2"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["ell"] == 1

    def test_thread_cap_env_var(self):
        import os

        env = dict(os.environ, PISIER_LAB_THREADS="2")
        env.pop("OMP_NUM_THREADS", None)
        proc = subprocess.run(
            [sys.executable, "-c", "import pisier_lab, os; print(os.environ['OMP_NUM_THREADS'])"],
            capture_output=True,
            text=True,
            env=env,
        )
        assert proc.stdout.strip() == "2"

    def test_usage_error_exit_code(self):
        proc = subprocess.run(
            [sys.executable, "-m", "pisier_lab.cli", "audit", "--n", "99", "--m", "4"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 2
