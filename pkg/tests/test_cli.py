"""Tests for the command-line entry point."""

import hashlib
import json

import numpy as np
import pytest

from orientlam import cli
from orientlam.cli import EXIT_CHECK_FAILED, EXIT_ERROR, EXIT_OK, build_parser, main
from orientlam.enums import Command
from orientlam.laminate import dirac, laminate_to_dict, rank_one_split
from orientlam.utils.serialization import write_json

FLIP = "[[-1,0],[0,1]]"


def _run(capsys, tmp_path, *argv):
    code = main([*argv, "--emit-dir", str(tmp_path)])
    captured = capsys.readouterr()
    summary = json.loads(captured.out) if captured.out else None
    return code, summary, captured.err


def _digest(directory, *names):
    return {name: hashlib.sha256((directory / name).read_bytes()).hexdigest() for name in names}


class TestParser:
    """Tests for the argument parser."""

    def test_subcommands(self):
        """Test every pipeline has a subcommand."""
        args = build_parser().parse_args(["zero-det", "--matrix", FLIP])
        assert args.command == "zero-det"
        assert args.levels == 6

    def test_level_range(self):
        """Test a..b level ranges are inclusive."""
        args = build_parser().parse_args(
            ["rigidity-scan", "--matrix", FLIP, "--p", "1.5,2", "--levels", "2..4"]
        )
        assert args.p_grid == [1.5, 2.0]
        assert args.levels_grid == [2, 3, 4]

    def test_missing_command(self, capsys):
        """Test a missing subcommand exits with code 1."""
        assert main([]) == EXIT_ERROR
        assert "ConfigInvalidError" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        """Test an unknown flag exits with code 1."""
        assert main(["zero-det", "--matrix", FLIP, "--bogus"]) == EXIT_ERROR


class TestConstructions:
    """Tests for the zero-det and delta-shift commands."""

    def test_zero_det(self, capsys, tmp_path):
        """Test the laminate and its report are written."""
        code, summary, _ = _run(
            capsys, tmp_path, "zero-det", "--matrix", FLIP, "--levels", "3", "--verify", "1.5"
        )
        assert code == EXIT_OK
        assert summary["command"] == "zero-det"
        assert summary["passed"] is True
        assert summary["atoms"] == 3 * 2**3 - 2
        assert (tmp_path / "laminate.json").exists()
        assert (tmp_path / "report.csv").read_text().startswith("check,")

    def test_zero_det_positive(self, capsys, tmp_path):
        """Test det M0 > 0 exits with code 1."""
        code, summary, err = _run(capsys, tmp_path, "zero-det", "--matrix", "[[1,0],[0,1]]")
        assert code == EXIT_ERROR
        assert summary is None
        assert err.startswith("NotNegativeDetError")

    def test_bad_matrix(self, capsys, tmp_path):
        """Test a malformed matrix exits with code 1."""
        code, _, _ = _run(capsys, tmp_path, "zero-det", "--matrix", "[[1,2]]")
        assert code == EXIT_ERROR

    def test_delta_shift(self, capsys, tmp_path):
        """Test the delta-shift laminate passes its checks."""
        code, summary, _ = _run(
            capsys,
            tmp_path,
            "delta-shift",
            "--matrix",
            FLIP,
            "--delta",
            "0.1",
            "--verify",
            "1.5",
        )
        assert code == EXIT_OK
        assert summary["L"] == 2
        assert summary["failures"] == []

    def test_rigidity_scan(self, capsys, tmp_path):
        """Test the scan table."""
        code, summary, _ = _run(
            capsys,
            tmp_path,
            "rigidity-scan",
            "--matrix",
            FLIP,
            "--p",
            "1.5,2",
            "--levels",
            "1..3",
        )
        assert code == EXIT_OK
        assert summary["rows"] == 6
        lines = (tmp_path / "scan.csv").read_text().strip().splitlines()
        assert len(lines) == 7

    def test_zero_det_scan(self, capsys, tmp_path):
        """Test zero-det --scan writes the same table as rigidity-scan."""
        code, summary, _ = _run(
            capsys,
            tmp_path / "zero",
            "zero-det",
            "--matrix",
            FLIP,
            "--levels",
            "3",
            "--scan",
            "1.5,2",
            "--levels-grid",
            "1..3",
        )
        assert code == EXIT_OK
        assert summary["scan_rows"] == 6
        assert (tmp_path / "zero" / "laminate.json").exists()
        _run(
            capsys,
            tmp_path / "scan",
            "rigidity-scan",
            "--matrix",
            FLIP,
            "--p",
            "1.5,2",
            "--levels",
            "1..3",
        )
        zero_table = (tmp_path / "zero" / "scan.csv").read_text()
        assert zero_table == (tmp_path / "scan" / "scan.csv").read_text()

    def test_zero_det_scan_needs_levels(self, capsys, tmp_path):
        """Test --scan without --levels-grid exits with code 1."""
        code, _, err = _run(capsys, tmp_path, "zero-det", "--matrix", FLIP, "--scan", "1.5")
        assert code == EXIT_ERROR
        assert "[levels_grid]" in err


class TestRepairCommands:
    """Tests for the repair, strict-repair and energy commands."""

    def test_repair(self, capsys, tmp_path):
        """Test weak repair of the constant reflection."""
        code, summary, _ = _run(
            capsys, tmp_path, "repair", "--matrix", FLIP, "--n", "2", "--l-max", "1"
        )
        assert code == EXIT_OK
        assert summary["neg_mass"] == 0.0
        assert summary["deficiency_law"] is True
        assert (tmp_path / "field.json").exists()
        assert (tmp_path / "trace.csv").exists()

    def test_repair_needs_matrix(self, capsys, tmp_path):
        """Test the constant generator without a matrix exits with code 1."""
        code, _, err = _run(capsys, tmp_path, "repair", "--n", "2")
        assert code == EXIT_ERROR
        assert "ConfigInvalidError" in err

    def test_repair_from_file(self, capsys, tmp_path):
        """Test a written field can be loaded back."""
        _run(capsys, tmp_path, "repair", "--matrix", FLIP, "--n", "2", "--l-max", "1")
        out = tmp_path / "strict"
        code, summary, _ = _run(
            capsys,
            out,
            "strict-repair",
            "--field",
            str(tmp_path / "field.json"),
            "--l-max",
            "2",
        )
        assert code == EXIT_OK
        assert summary["min_det_positive"] is True

    def test_strict_repair(self, capsys, tmp_path):
        """Test strict repair of the zero field."""
        code, summary, _ = _run(
            capsys,
            tmp_path,
            "strict-repair",
            "--generator",
            "constant",
            "--matrix",
            "[[0,0],[0,0]]",
            "--n",
            "2",
            "--l-max",
            "4",
        )
        assert code == EXIT_OK
        assert summary["zero_mass"] == 0.0
        assert summary["envelope"] is True
        assert summary["drift"] <= 1.0

    def test_strict_repair_negative_field(self, capsys, tmp_path):
        """Test a field with det < 0 exits with code 1."""
        code, _, err = _run(capsys, tmp_path, "strict-repair", "--matrix", FLIP, "--n", "2")
        assert code == EXIT_ERROR
        assert err.startswith("NotWeaklyOrientedError")

    @pytest.mark.parametrize(
        "argv, outputs",
        [
            (["repair", "--matrix", FLIP, "--n", "2", "--l-max", "1"], ["field.json", "trace.csv"]),
            (
                ["strict-repair", "--matrix", "[[0,0],[0,0]]", "--n", "2", "--l-max", "3"],
                ["field.json", "trace.csv"],
            ),
            (
                ["realize", "--matrix", FLIP, "--emit", "map.json,grid.csv", "--grid-size", "8"],
                ["map.json", "grid.csv"],
            ),
        ],
    )
    def test_identical_runs(self, capsys, tmp_path, argv, outputs):
        """Test two runs with the same arguments write byte-identical artifacts."""
        first = _run(capsys, tmp_path / "first", *argv)
        second = _run(capsys, tmp_path / "second", *argv)
        assert first == second
        assert _digest(tmp_path / "first", *outputs) == _digest(tmp_path / "second", *outputs)

    def test_energy(self, capsys, tmp_path):
        """Test the energy table."""
        code, summary, _ = _run(
            capsys, tmp_path, "energy", "--matrix", FLIP, "--n", "2", "--l-max", "1"
        )
        assert code == EXIT_OK
        assert summary["integrand"] == "pnorm:2.0"
        assert (tmp_path / "energy.csv").exists()


class TestRealizeCommand:
    """Tests for the realize command."""

    def test_realize(self, capsys, tmp_path):
        """Test the map and the sample grid are written."""
        code, summary, _ = _run(
            capsys,
            tmp_path,
            "realize",
            "--matrix",
            FLIP,
            "--levels",
            "1",
            "--emit",
            "map.json,grid.csv",
            "--grid-size",
            "4",
        )
        assert code == EXIT_OK
        assert summary["tv"] <= summary["tv_bound"]
        data = json.loads((tmp_path / "map.json").read_text())
        assert data["depth"] == 2
        lines = (tmp_path / "grid.csv").read_text().strip().splitlines()
        assert lines[0] == "x,y,u1,u2,g11,g12,g21,g22"
        assert len(lines) == 17

    def test_realize_too_deep(self, capsys, tmp_path):
        """Test a laminate deeper than the cap exits with code 1."""
        code, _, err = _run(capsys, tmp_path, "realize", "--matrix", FLIP, "--levels", "2")
        assert code == EXIT_ERROR
        assert err.startswith("DepthExceededError")

    def test_realize_depth_three(self, capsys, tmp_path):
        """Test a depth-3 laminate is realized and its summary computed."""
        e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        lam = rank_one_split(dirac(np.diag([-1.0, 1.0])), 0, 0.5, (e1, e1), 1.0, -1.0)
        lam = rank_one_split(lam, 0, 0.5, (e2, np.array([0.6, 0.8])), 0.5, -0.5)
        lam = rank_one_split(lam, 0, 0.4, (e1, np.array([0.8, -0.6])), 0.3, -0.2)
        path = write_json(tmp_path / "deep.json", laminate_to_dict(lam))
        code, summary, _ = _run(
            capsys,
            tmp_path / "out",
            "realize",
            "--laminate",
            str(path),
            "--depth",
            "3",
            "--epsilon",
            "0.1",
            "--periods",
            "4",
        )
        assert code in (EXIT_OK, EXIT_CHECK_FAILED)
        assert summary is not None
        assert summary["overlap"] <= 1e-9
        assert summary["tv"] <= summary["tv_bound"]

    def test_invalid_epsilon(self, capsys, tmp_path):
        """Test epsilon outside (0, 1/4) exits with code 1."""
        code, _, err = _run(capsys, tmp_path, "realize", "--matrix", FLIP, "--epsilon", "0.3")
        assert code == EXIT_ERROR
        assert "[epsilon]" in err


@pytest.mark.slow
class TestVerifySuiteCommand:
    """Tests for the verify-suite command."""

    def test_reduced(self, capsys, tmp_path):
        """Test the reduced battery passes and writes its summary."""
        code, summary, _ = _run(capsys, tmp_path, "verify-suite")
        assert code == EXIT_OK
        assert summary["failed"] == []
        assert (tmp_path / "summary.csv").exists()



class TestErrorMapping:
    """Tests for errors outside the library's own exceptions."""

    def test_emit_dir_not_creatable(self, capsys, tmp_path):
        """Test an artifact directory below a file exits with code 1."""
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        code, summary, err = _run(capsys, blocker / "out", "zero-det", "--matrix", FLIP)
        assert code == EXIT_ERROR
        assert summary is None
        assert err.startswith("ConfigInvalidError [emit_dir]")

    def test_unexpected_error(self, capsys, tmp_path, monkeypatch):
        """Test an unexpected exception is reported with exit code 1."""

        def fail(config):
            raise RuntimeError("boom")

        monkeypatch.setitem(cli.HANDLERS, Command.ZERO_DET, fail)
        code, summary, err = _run(capsys, tmp_path, "zero-det", "--matrix", FLIP)
        assert code == EXIT_ERROR
        assert summary is None
        assert err.startswith("RuntimeError: boom")
