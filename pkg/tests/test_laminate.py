"""Tests for the laminate tree."""

import numpy as np
import pytest

from orientlam.enums import AtomLabel
from orientlam.exceptions import (
    BarycenterViolationError,
    LaminateError,
    NotALeafError,
    NotRotationError,
    UnknownIntegrandError,
)
from orientlam.laminate import (
    Laminate,
    Leaf,
    Split,
    barycenter,
    dirac,
    energy,
    laminate_from_dict,
    laminate_to_dict,
    naive_tree,
    p_moment,
    pushforward_rotation,
    rank_one_split,
    split_matrix,
    statistics,
    validate_hm,
)

E1 = np.array([1.0, 0.0])
E2 = np.array([0.0, 1.0])


@pytest.fixture
def two_level(flip):
    """Fixture for a depth-2 laminate of diag(-1, 1)."""
    lam = rank_one_split(dirac(flip), 0, 0.5, (E1, E1), 1.0, -1.0)
    return rank_one_split(lam, 1, 0.25, (E2, E1), 3.0, -1.0)


class TestDirac:
    """Tests for dirac."""

    def test_single_atom(self, flip):
        """Test a Dirac has one atom of weight 1 and depth 0."""
        lam = dirac(flip)
        assert len(lam) == 1
        assert lam.depth() == 0
        assert lam.atoms.weights[0] == 1.0
        assert isinstance(lam.tree, Leaf)
        assert validate_hm(lam).passed


class TestSplitMatrix:
    """Tests for split_matrix."""

    def test_children(self):
        """Test children are N + amp a (x) b."""
        node = split_matrix(np.eye(2), 0.25, E1, E2, 3.0, -1.0)
        assert isinstance(node, Split)
        np.testing.assert_array_equal(node.left.matrix, np.array([[1.0, 3.0], [0.0, 1.0]]))
        np.testing.assert_array_equal(node.right.matrix, np.array([[1.0, -1.0], [0.0, 1.0]]))
        assert node.amplitudes == (3.0, -1.0)

    @pytest.mark.parametrize("t", [0.0, 1.0, -0.5, 1.5])
    def test_weight_outside_interval(self, t):
        """Test t must lie strictly inside (0, 1)."""
        with pytest.raises(BarycenterViolationError, match="Split weight"):
            split_matrix(np.eye(2), t, E1, E1, 1.0, -1.0)

    def test_barycenter_drift(self):
        """Test amplitudes that move the barycenter are rejected."""
        with pytest.raises(BarycenterViolationError, match="moves the barycenter"):
            split_matrix(np.eye(2), 0.5, E1, E1, 1.0, -0.5)


class TestRankOneSplit:
    """Tests for rank_one_split."""

    def test_two_level(self, two_level, flip):
        """Test leaves, weights and barycenter of a depth-2 tree."""
        assert two_level.depth() == 2
        np.testing.assert_allclose(two_level.atoms.weights, [0.5, 0.125, 0.375])
        np.testing.assert_allclose(barycenter(two_level), flip, atol=1e-15)
        assert validate_hm(two_level).passed

    def test_leaf_ids(self, two_level):
        """Test leaves are numbered depth first, left first."""
        leaves = two_level.leaves()
        np.testing.assert_array_equal(leaves[0].matrix, np.diag([0.0, 1.0]))
        np.testing.assert_array_equal(leaves[1].matrix, np.array([[-2.0, 0.0], [3.0, 1.0]]))

    def test_unknown_leaf(self, flip):
        """Test a missing leaf id raises NotALeafError."""
        lam = dirac(flip)
        with pytest.raises(NotALeafError):
            rank_one_split(lam, 1, 0.5, (E1, E1), 1.0, -1.0)
        with pytest.raises(NotALeafError):
            rank_one_split(lam, -1, 0.5, (E1, E1), 1.0, -1.0)

    def test_original_unchanged(self, flip):
        """Test splitting returns a new laminate."""
        lam = dirac(flip)
        rank_one_split(lam, 0, 0.5, (E1, E1), 1.0, -1.0)
        assert len(lam) == 1


class TestValidateHM:
    """Tests for validate_hm."""

    def test_not_rank_one(self):
        """Test children differing by a rank-two matrix fail at the root."""
        report = validate_hm(naive_tree(np.eye(2), -np.eye(2)))
        assert not report.passed
        assert [node.path for node in report.failures] == [""]
        assert report.max_rank_one_defect == pytest.approx(2.0)

    def test_wrong_node_matrix(self):
        """Test a recorded node matrix off the average fails."""
        report = validate_hm(naive_tree(np.eye(2), np.eye(2), matrix=2.0 * np.eye(2)))
        assert not report.passed
        assert report.root_residual > 0.1

    def test_rank_one_naive_tree(self):
        """Test a naive tree of rank-one connected atoms passes."""
        report = validate_hm(naive_tree(np.outer(E1, E1), -np.outer(E1, E1)))
        assert report.passed
        assert report.weight_sum_error == 0.0


class TestStatistics:
    """Tests for moments and sign masses."""

    def test_p_moment(self):
        """Test raw and centered moments of two atoms."""
        lam = naive_tree(np.outer(E1, E1), -np.outer(E1, E1))
        assert p_moment(lam, 2.0) == pytest.approx(1.0)
        assert p_moment(lam, 2.0, center=np.outer(E1, E1)) == pytest.approx(2.0)

    def test_sign_masses(self, two_level):
        """Test masses by determinant sign."""
        stats = statistics(two_level, 1.5, 1.0)
        assert stats.mass_det_zero == pytest.approx(0.5)
        assert stats.mass_det_neg == pytest.approx(0.5)
        assert stats.mass_det_pos == 0.0
        assert stats.det_integral == pytest.approx(-1.0)


class TestPushforward:
    """Tests for pushforward_rotation."""

    def test_rotated(self, two_level, rotation, flip):
        """Test the image keeps weights and stays a valid witness."""
        pushed = pushforward_rotation(two_level, rotation, rotation.T)
        np.testing.assert_allclose(pushed.atoms.weights, two_level.atoms.weights)
        np.testing.assert_allclose(barycenter(pushed), rotation @ flip @ rotation, atol=1e-14)
        assert validate_hm(pushed).passed

    def test_not_rotation(self, two_level, flip):
        """Test a reflection is rejected."""
        with pytest.raises(NotRotationError):
            pushforward_rotation(two_level, flip, np.eye(2))


class TestEnergy:
    """Tests for laminate energies."""

    def test_det_is_affine_on_laminates(self, two_level):
        """Test the det integral equals det of the barycenter."""
        assert energy(two_level, "det") == pytest.approx(-1.0)

    def test_unknown_integrand(self, two_level):
        """Test an unknown tag raises."""
        with pytest.raises(UnknownIntegrandError):
            energy(two_level, "entropy")


class TestLaminateDocument:
    """Tests for the laminate JSON document."""

    def test_round_trip(self, two_level):
        """Test atoms, directions and labels survive."""
        data = laminate_to_dict(two_level)
        assert data["d"] == 2
        restored = laminate_from_dict(data)
        np.testing.assert_array_equal(restored.atoms.matrices, two_level.atoms.matrices)
        np.testing.assert_array_equal(restored.atoms.weights, two_level.atoms.weights)
        assert restored.tree.amplitudes == (1.0, -1.0)
        assert validate_hm(restored).passed

    def test_labels(self, flip):
        """Test non-plain labels are written and read."""
        lam = Laminate(d=2, tree=Leaf(matrix=flip, label=AtomLabel.BAD))
        data = laminate_to_dict(lam)
        assert data["tree"]["label"] == "bad"
        assert laminate_from_dict(data).tree.label == AtomLabel.BAD

    def test_malformed(self):
        """Test a document without a tree raises LaminateError."""
        with pytest.raises(LaminateError):
            laminate_from_dict({"d": 2})
