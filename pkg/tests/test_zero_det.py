"""Tests for the zero-determinant construction."""

import math

import numpy as np
import pytest

from orientlam.enums import AtomLabel
from orientlam.exceptions import (
    BadFormError,
    ConfigInvalidError,
    MismatchedInputsError,
    NotNegativeDetError,
)
from orientlam.lamination import (
    GeomParams,
    build_zero_det_laminate,
    decompose_step,
    naive_split,
    rigidity_scan,
    verify_geometry,
)
from orientlam.laminate import validate_hm
from orientlam.utils.matrix import determinants, rank_one_defect


class TestGeomParams:
    """Tests for GeomParams."""

    def test_ratio(self):
        """Test r = 2^(p/d - 1)."""
        assert GeomParams(p=1.5, d=2).r == pytest.approx(2.0**-0.25)

    def test_constant_infinite_at_critical_exponent(self):
        """Test the moment constant blows up at p = d."""
        assert math.isinf(GeomParams(p=2.0, d=2).c_geom(3))
        assert math.isfinite(GeomParams(p=1.5, d=2).c_geom(3))

    def test_det_moment_factor(self):
        """Test the partial geometric sum."""
        geom = GeomParams(p=1.0, d=2)
        assert geom.det_moment_factor(2) == pytest.approx(1.0 + 0.5**0.5 + 0.5)

    @pytest.mark.parametrize("p", [0.5, 2.5])
    def test_exponent_range(self, p):
        """Test p outside [1, d] raises."""
        with pytest.raises(ConfigInvalidError) as exc_info:
            GeomParams(p=p, d=2)
        assert exc_info.value.field == "p"


class TestDecomposeStep:
    """Tests for the four-atom step."""

    def test_atoms(self, flip):
        """Test good atoms have det 0 and bad atoms twice det D0."""
        atoms = decompose_step(flip)
        assert [a.name for a in atoms] == ["B1", "G1", "G2", "B2"]
        assert [a.label for a in atoms] == [
            AtomLabel.BAD,
            AtomLabel.GOOD,
            AtomLabel.GOOD,
            AtomLabel.BAD,
        ]
        dets = determinants(np.array([a.matrix for a in atoms]))
        np.testing.assert_allclose(dets, [-2.0, 0.0, 0.0, -2.0], atol=1e-15)
        mean = sum(a.weight * a.matrix for a in atoms)
        np.testing.assert_allclose(mean, flip, atol=1e-15)

    def test_rank_one_pairs(self, flip):
        """Test (B1, G1) and (G2, B2) are rank-one connected."""
        b1, g1, g2, b2 = (a.matrix for a in decompose_step(flip))
        assert rank_one_defect(b1 - g1) == pytest.approx(0.0, abs=1e-14)
        assert rank_one_defect(g2 - b2) == pytest.approx(0.0, abs=1e-14)

    def test_not_diagonal(self, generic_negative):
        """Test non-canonical input raises BadFormError."""
        with pytest.raises(BadFormError, match="diagonal"):
            decompose_step(generic_negative)

    def test_sigma1_not_smallest(self):
        """Test sigma_1 must be the smallest singular value."""
        with pytest.raises(BadFormError, match="smallest"):
            decompose_step(np.diag([-2.0, 1.0]))

    def test_positive_first_entry(self):
        """Test the first entry must be negative."""
        with pytest.raises(BadFormError, match="negative"):
            decompose_step(np.eye(2))


class TestNaiveSplit:
    """Tests for naive_split."""

    def test_zero_det_but_not_rank_one(self, flip):
        """Test the naive pair averages to M0 without a rank-one connection."""
        m1, m2 = naive_split(flip)
        np.testing.assert_array_equal(m1, np.diag([0.0, 2.0]))
        np.testing.assert_array_equal(m2, np.diag([-2.0, 0.0]))
        np.testing.assert_allclose(0.5 * (m1 + m2), flip)
        assert rank_one_defect(m1 - m2) == pytest.approx(2.0)


class TestBuild:
    """Tests for build_zero_det_laminate."""

    def test_atom_counts(self, zero_det_build):
        """Test 2^i good and 2^i bad atoms per level."""
        assert zero_det_build.j == 4
        assert not zero_det_build.truncated
        assert len(zero_det_build.laminate) == 3 * 2**4 - 2
        for record in zero_det_build.levels:
            assert record.good_count == 2**record.level
            assert record.bad_count == 2**record.level
            assert record.weight == 4.0**-record.level

    def test_bad_mass(self, zero_det_build):
        """Test the level-j bad mass is 2^-j."""
        for level in range(0, 5):
            weights, _, labels = zero_det_build.measure(level)
            bad = np.array([label == AtomLabel.BAD for label in labels])
            assert float(np.sum(weights[bad])) == 2.0**-level
            assert float(np.sum(weights)) == pytest.approx(1.0)

    def test_bad_det_growth(self, zero_det_build):
        """Test bad atoms at level i have |det| = 2^i."""
        for record in zero_det_build.levels:
            np.testing.assert_allclose(
                np.abs(determinants(record.bad)), 2.0**record.level, rtol=1e-12
            )

    def test_tree_is_witness(self, zero_det_build, flip):
        """Test the splitting tree passes validation."""
        report = validate_hm(zero_det_build.laminate)
        assert report.passed
        np.testing.assert_allclose(zero_det_build.laminate.root, flip)

    def test_laminate_at(self, zero_det_build):
        """Test pruning to a lower level."""
        lam = zero_det_build.laminate_at(2)
        assert len(lam) == 10
        assert lam.depth() == 4
        atoms = lam.atoms
        bad = np.array([label == AtomLabel.BAD for label in atoms.labels])
        assert float(np.sum(atoms.weights[bad])) == pytest.approx(0.25)
        assert validate_hm(lam).passed

    def test_level_not_built(self, zero_det_build):
        """Test asking for an unbuilt level raises."""
        with pytest.raises(MismatchedInputsError):
            zero_det_build.measure(5)
        with pytest.raises(MismatchedInputsError):
            zero_det_build.laminate_at(5)

    def test_positive_det(self):
        """Test det M0 >= 0 raises NotNegativeDetError."""
        with pytest.raises(NotNegativeDetError):
            build_zero_det_laminate(np.eye(2), 2)
        with pytest.raises(NotNegativeDetError):
            build_zero_det_laminate(np.zeros((2, 2)), 2)

    @pytest.mark.parametrize("j", [0, 21])
    def test_level_range(self, flip, j):
        """Test the level count must lie in 1..20."""
        with pytest.raises(ConfigInvalidError):
            build_zero_det_laminate(flip, j)


class TestVerifyGeometry:
    """Tests for verify_geometry."""

    def test_flip(self, zero_det_build, flip):
        """Test every estimate holds for diag(-1, 1)."""
        report = verify_geometry(zero_det_build, flip, 1.5)
        assert report.passed, [c.name for c in report.checks if not c.passed]
        assert [c.name for c in report.checks] == [
            "barycenter",
            "hm_witness",
            "good_det",
            "bad_mass",
            "bad_det_growth",
            "centered_moment",
            "raw_moment",
            "det_moment",
            "det_integral",
        ]

    def test_generic_matrix(self, generic_negative):
        """Test a non-diagonal M0 at an intermediate level."""
        build = build_zero_det_laminate(generic_negative, 5)
        report = verify_geometry(build, generic_negative, 1.2, j=3)
        assert report.passed, [c.name for c in report.checks if not c.passed]

    def test_three_dimensions(self, flip3):
        """Test the construction in d = 3."""
        build = build_zero_det_laminate(flip3, 3)
        report = verify_geometry(build, flip3, 2.0)
        assert report.passed, [c.name for c in report.checks if not c.passed]

    @pytest.mark.parametrize("p", [1.0, 1.5])
    def test_scaling(self, zero_det_build, flip, p):
        """Test doubling M0 scales the centered moment and its bound by 2^p."""
        base = verify_geometry(zero_det_build, flip, p).get("centered_moment")
        scaled = verify_geometry(build_zero_det_laminate(2.0 * flip, 4), 2.0 * flip, p)
        check = scaled.get("centered_moment")
        assert check.passed
        assert check.measured == pytest.approx(2.0**p * base.measured, rel=1e-9)
        assert check.bound == pytest.approx(2.0**p * base.bound, rel=1e-9)

    def test_rotation_invariance(self, zero_det_build, flip, rotation):
        """Test P diag(-1, 1) Q^T reports the same values as diag(-1, 1)."""
        cos, sin = np.cos(1.1), np.sin(1.1)
        q = np.array([[cos, -sin], [sin, cos]])
        m0 = rotation @ flip @ q.T
        base = verify_geometry(zero_det_build, flip, 1.5)
        rotated = verify_geometry(build_zero_det_laminate(m0, 4), m0, 1.5)
        assert rotated.passed, [c.name for c in rotated.checks if not c.passed]
        for check in base.checks:
            other = rotated.get(check.name)
            assert other.measured == pytest.approx(check.measured, abs=1e-9)
            assert other.bound == pytest.approx(check.bound, abs=1e-9)

    def test_critical_exponent(self, zero_det_build, flip):
        """Test p >= d raises."""
        with pytest.raises(ConfigInvalidError):
            verify_geometry(zero_det_build, flip, 2.0)

    def test_wrong_matrix(self, zero_det_build, generic_negative):
        """Test verifying against another M0 raises."""
        with pytest.raises(MismatchedInputsError):
            verify_geometry(zero_det_build, generic_negative, 1.5)


class TestRigidityScan:
    """Tests for rigidity_scan."""

    def test_rows(self, flip):
        """Test rows are ordered by p, then j, with bounds below the critical exponent."""
        rows = rigidity_scan(flip, [1.5, 2.0], [1, 2, 3])
        assert [(r.p, r.j) for r in rows] == [
            (1.5, 1),
            (1.5, 2),
            (1.5, 3),
            (2.0, 1),
            (2.0, 2),
            (2.0, 3),
        ]
        assert all(r.bound is not None for r in rows[:3])
        assert all(r.bound is None for r in rows[3:])
        assert all(r.passed for r in rows)
        for r in rows:
            assert r.det_integral == pytest.approx(-1.0)

    def test_moments_increase(self, flip):
        """Test centered moments grow with the level."""
        rows = rigidity_scan(flip, [2.0], [1, 2, 3, 4])
        moments = [r.moment_centered for r in rows]
        assert moments == sorted(moments)
        assert all(r.increment > 0.0 for r in rows)

    def test_empty_grid(self, flip):
        """Test an empty level grid raises."""
        with pytest.raises(ConfigInvalidError):
            rigidity_scan(flip, [1.5], [])
