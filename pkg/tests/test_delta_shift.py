"""Tests for the delta-shift construction."""

import math

import numpy as np
import pytest

from orientlam.exceptions import MismatchedInputsError, NonpositiveDeltaError
from orientlam.lamination import build_delta_laminate, sign_balance, verify_delta
from orientlam.laminate import p_moment, statistics, validate_hm
from orientlam.utils.matrix import determinants
from orientlam.utils.rng import make_rng, random_matrices


class TestBuildDeltaLaminate:
    """Tests for build_delta_laminate."""

    def test_zero_matrix(self):
        """Test the zero matrix splits along every direction."""
        build = build_delta_laminate(np.zeros((2, 2)), 0.1)
        assert build.L == 0
        assert build.atom_count == 4
        assert len(build.laminate) == 4
        for atom in build.laminate.atoms.matrices:
            np.testing.assert_allclose(np.abs(atom), 0.2 * np.eye(2))
        assert sign_balance(build) == 2
        assert validate_hm(build.laminate).passed

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_zero_matrix_moment_equality(self, d):
        """Test the centered moment equals (2 sqrt(d) delta)^p at M0 = 0."""
        build = build_delta_laminate(np.zeros((d, d)), 0.1)
        stats = statistics(build.laminate, 1.5, 1.0)
        assert stats.centered_p_moment == pytest.approx((2.0 * math.sqrt(d) * 0.1) ** 1.5)
        assert sign_balance(build) == 2 ** (d - 1)

    def test_large_singular_values(self):
        """Test a matrix with every singular value above delta is kept as a Dirac."""
        build = build_delta_laminate(np.eye(2), 0.5)
        assert build.L == 2
        assert build.atom_count == 1
        assert build.laminate.depth() == 0

    def test_rank_one(self):
        """Test only the small direction is split."""
        build = build_delta_laminate(np.diag([1.0, 0.0]), 0.1)
        assert build.L == 1
        dets = sorted(determinants(build.laminate.atoms.matrices))
        np.testing.assert_allclose(dets, [-0.2, 0.2], atol=1e-15)

    @pytest.mark.parametrize("delta", [0.0, -1.0, float("nan"), float("inf")])
    def test_nonpositive_delta(self, delta):
        """Test delta must be positive and finite."""
        with pytest.raises(NonpositiveDeltaError):
            build_delta_laminate(np.eye(2), delta)


class TestVerifyDelta:
    """Tests for verify_delta."""

    def test_zero_matrix(self):
        """Test every check holds on the zero matrix."""
        zero = np.zeros((3, 3))
        report = verify_delta(build_delta_laminate(zero, 0.2), zero, 0.2, 1.5)
        assert report.passed
        assert [c.name for c in report.checks] == [
            "barycenter",
            "det_floor",
            "sign_balance",
            "raw_moment",
            "centered_moment",
            "det_ceiling",
        ]

    def test_dirac_exemptions(self):
        """Test the sign and ceiling checks are exempt without a split."""
        build = build_delta_laminate(2.0 * np.eye(2), 0.5)
        report = verify_delta(build, 2.0 * np.eye(2), 0.5, 2.0)
        assert report.passed
        assert "exempt" in report.get("sign_balance").note
        assert "not applicable" in report.get("det_ceiling").note

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_random(self, d):
        """Test random matrices and shifts."""
        rng = make_rng(21 + d)
        for m0 in random_matrices(rng, 15, d):
            delta = float(rng.uniform(0.05, 1.5))
            report = verify_delta(build_delta_laminate(m0, delta), m0, delta, 1.5)
            assert report.passed, [c.name for c in report.checks if not c.passed]

    def test_mismatched_delta(self):
        """Test verifying with another delta raises."""
        build = build_delta_laminate(np.zeros((2, 2)), 0.1)
        with pytest.raises(MismatchedInputsError):
            verify_delta(build, np.zeros((2, 2)), 0.2, 1.5)

    def test_mismatched_matrix(self):
        """Test verifying against another M0 raises."""
        build = build_delta_laminate(np.zeros((2, 2)), 0.1)
        with pytest.raises(MismatchedInputsError):
            verify_delta(build, np.eye(2), 0.1, 1.5)


class TestMomentRate:
    """Tests for the decay of the centered moment in delta."""

    @pytest.mark.parametrize(
        "m0",
        [
            np.zeros((2, 2)),
            np.diag([1.0, 0.0]),
            np.outer([1.0, 2.0, 0.0], [0.0, 1.0, 1.0]),
        ],
    )
    @pytest.mark.parametrize("p", [1.0, 1.5])
    def test_fitted_exponent(self, m0, p):
        """Test the centered p-moment decays like delta^p on a halving grid."""
        deltas = 0.2 * 0.5 ** np.arange(6)
        moments = [
            p_moment(build_delta_laminate(m0, delta).laminate, p, center=m0) for delta in deltas
        ]
        slope = np.polyfit(np.log(deltas), np.log(moments), 1)[0]
        assert abs(slope - p) <= 0.05 * p
