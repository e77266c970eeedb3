"""Tests for the command-line interface."""

import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from hyperpack.cli import BOUNDS_HEADER, UsageError, main, parse_grid


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def strip_manifest(path):
    with open(path) as fh:
        data = json.load(fh)
    data.pop("manifest", None)
    return data


class TestGrid:

    def test_comma_list(self):
        assert parse_grid("0.1,1,10") == [0.1, 1.0, 10.0]

    def test_geometric_range(self):
        np.testing.assert_allclose(parse_grid("1e4:1e6:3"), [1e4, 1e5, 1e6])
        assert parse_grid("1e4:1e6:3", integer=True) == [10_000, 100_000, 1_000_000]

    @pytest.mark.parametrize("text", ["", "  ", "a,b", "1:2", "1:10:0", "0:10:3"])
    def test_bad(self, text):
        with pytest.raises(UsageError):
            parse_grid(text)


class TestBounds:

    def test_no_root_cell(self, capsys):
        code, out, _ = run(capsys, "bounds", "--m", "2", "--R", "1")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert out.splitlines()[0] == ",".join(BOUNDS_HEADER)
        assert rows[0]["tau"] == "" and rows[0]["notes"] == "no-root"
        np.testing.assert_allclose(float(rows[0]["log_L"]), math.log(0.19661193324148185), atol=1e-9)

    def test_formula_cell(self, capsys):
        code, out, _ = run(capsys, "bounds", "--m", "1e4", "--R", "1")
        row = next(csv.DictReader(io.StringIO(out)))
        assert code == 0 and float(row["tau"]) > 0
        np.testing.assert_allclose(float(row["log_main"]) - float(row["log_L"]),
                                   math.log(0.9 * 1e4 * 5.9302), atol=1e-3)

    def test_empty_grid(self, capsys):
        code, _, err = run(capsys, "bounds", "--m", "2", "--R", "")
        assert code == 2 and "empty grid" in err

    def test_row_order_and_format(self, capsys):
        code, out, _ = run(capsys, "bounds", "--m", "3,2", "--R", "0.1:10:3", "--workers", "2")
        assert code == 0
        assert "\r" not in out and out.endswith("\n")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert [(r["m"], r["R"]) for r in rows] == [
            ("3", "0.1"), ("3", "1.0"), ("3", "10.0"), ("2", "0.1"), ("2", "1.0"), ("2", "10.0")]

    def test_linear(self, capsys):
        code, out, _ = run(capsys, "bounds", "--m", "2", "--R", "1", "--linear")
        row = next(csv.DictReader(io.StringIO(out)))
        assert code == 0
        np.testing.assert_allclose(float(row["L"]), 0.19661193324148185, rtol=1e-9)

    def test_linear_overflow(self, capsys):
        code, _, err = run(capsys, "bounds", "--m", "1e6", "--R", "10", "--linear")
        assert code == 3 and "overflow" in err

    def test_json_and_manifest(self, capsys, tmp_path):
        out = tmp_path / "b.json"
        code, _, _ = run(capsys, "bounds", "--m", "1e4", "--R", "1", "--format", "json",
                         "--out", str(out))
        assert code == 0
        data = json.loads(out.read_text())
        assert data["rows"][0]["notes"] == "formula-value"
        side = json.loads((tmp_path / "b.json.manifest.json").read_text())
        assert side["command"] == "bounds" and side["outputs"] == [str(out)]
        assert side["params"]["epsilon"] == 0.1 and side["started"] <= side["finished"]


class TestTau:

    def test_grid(self, capsys):
        code, out, _ = run(capsys, "tau", "--m", "100,1e4", "--R", "1")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0
        assert rows[0]["notes"] == "no-root"
        np.testing.assert_allclose(float(rows[1]["tau"]), 0.43675585558, atol=1e-10)
        assert 1 / 20 <= float(rows[1]["q"]) <= 20


class TestSimulate:

    def test_reference(self, capsys, tmp_path):
        out, pts = tmp_path / "s.json", tmp_path / "p.csv"
        code, _, _ = run(capsys, "simulate", "--m", "2", "--R", "0.5", "--L", "4",
                         "--target-degree", "20", "--seed", "1", "--out", str(out),
                         "--points", str(pts))
        assert code == 0
        data = json.loads(out.read_text())
        assert data["n_kept"] == 151 and data["packing_valid"]
        assert data["manifest"]["outputs"] == [str(out), str(pts)]
        assert pts.read_text().splitlines()[0] == "idx,x1,x2,xm1,kept,pruned_reason"

    def test_zero_lambda(self, capsys):
        code, out, _ = run(capsys, "simulate", "--m", "2", "--R", "0.5", "--L", "4", "--lambda", "0")
        assert code == 0 and json.loads(out)["n_kept"] == 0

    def test_config_error(self, capsys):
        code, _, _ = run(capsys, "simulate", "--m", "2", "--R", "0.5", "--L", "1", "--lambda", "1")
        assert code == 2

    def test_resource_error(self, capsys):
        code, _, _ = run(capsys, "simulate", "--m", "2", "--R", "5", "--L", "30",
                         "--target-degree", "20")
        assert code == 3

    def test_missing_intensity(self, capsys):
        code, _, _ = run(capsys, "simulate", "--m", "2", "--R", "0.5", "--L", "4")
        assert code == 2

    def test_replay_bit_identical(self, capsys, tmp_path):
        out, again = tmp_path / "s.json", tmp_path / "r.json"
        run(capsys, "simulate", "--m", "3", "--R", "0.4", "--L", "2", "--target-degree", "12",
            "--seed", "5", "--mc-samples", "2000", "--out", str(out))
        code, _, _ = run(capsys, "replay", str(out) + ".manifest.json", "--out", str(again))
        assert code == 0
        assert strip_manifest(out) == strip_manifest(again)


class TestVerify:

    def test_geometry(self, capsys, tmp_path):
        out = tmp_path / "v.json"
        code, _, err = run(capsys, "verify", "geometry", "--out", str(out))
        report = json.loads(out.read_text())
        assert code == 0 and report["passed"]
        assert len(report["checks"]) >= 5
        assert all({"name", "margin", "tolerance", "passed"} <= set(c) for c in report["checks"])
        assert err.count("PASS") == len(report["checks"])

    def test_claims_covolume(self, capsys):
        code, out, _ = run(capsys, "verify", "claims")
        report = json.loads(out)
        cov = next(c for c in report["checks"] if c["name"] == "covolume_claim")
        assert code == 0 and len(cov["detail"]) == 6
        assert all(v > 0 for v in cov["detail"].values())

    def test_poisson_deterministic(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run(capsys, "verify", "poisson", "--seed", "7", "--out", str(a))
        run(capsys, "verify", "poisson", "--seed", "7", "--out", str(b), "--workers", "2")
        assert strip_manifest(a) == strip_manifest(b)

    def test_unknown_suite(self, capsys):
        code, _, _ = run(capsys, "verify", "nope")
        assert code == 2


class TestSphericalCodeBound:

    def test_table(self, capsys, tmp_path):
        p = tmp_path / "codes.csv"
        p.write_text(f"theta,log_A\n{math.pi / 3!r},{math.log(240)!r}\n{math.pi!r},{math.log(2)!r}\n")
        code, out, _ = run(capsys, "cohn-zhao", "--m", "8", "--codes", str(p))
        row = next(csv.DictReader(io.StringIO(out)))
        assert code == 0
        np.testing.assert_allclose(float(row["log_bound"]), math.log(240 / 128), rtol=1e-12)

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "cohn-zhao", "--m", "8", "--codes", str(tmp_path / "none.csv"))
        assert code == 2


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "hyperpack.cli", "bounds", "--m", "2", "--R", "1"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.startswith("m,R,epsilon,log_L,log_main,tau,log_delta,log_lambda,notes\n")
