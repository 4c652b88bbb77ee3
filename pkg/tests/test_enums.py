"""Tests for enums."""

import pytest

from orientlam.enums import (
    AtomLabel,
    Command,
    FieldGenerator,
    IntegrandKind,
    RepairStage,
    SVDOrdering,
)


class TestSVDOrdering:
    """Tests for SVDOrdering enum."""

    def test_values(self):
        """Test enum values."""
        assert SVDOrdering.NEG_FIRST_ASCENDING.value == "neg-first-ascending"
        assert SVDOrdering.ABS_DESCENDING.value == "abs-descending"

    def test_from_string_case_insensitive(self):
        """Test from_string ignores case and surrounding blanks."""
        assert SVDOrdering.from_string("ABS-DESCENDING") == SVDOrdering.ABS_DESCENDING
        assert SVDOrdering.from_string(" neg-first-ascending ") == SVDOrdering.NEG_FIRST_ASCENDING

    def test_from_string_invalid(self):
        """Test from_string with invalid value."""
        with pytest.raises(ValueError, match="Unsupported SVDOrdering"):
            SVDOrdering.from_string("descending")


class TestFieldGenerator:
    """Tests for FieldGenerator enum."""

    def test_from_string(self):
        """Test every generator tag parses."""
        assert FieldGenerator.from_string("constant") == FieldGenerator.CONSTANT
        assert FieldGenerator.from_string("Smooth-Vortex") == FieldGenerator.SMOOTH_VORTEX
        assert FieldGenerator.from_string("random-per-cell") == FieldGenerator.RANDOM_PER_CELL

    def test_error_lists_supported(self):
        """Test the error message lists supported tags."""
        with pytest.raises(ValueError, match="constant, smooth-vortex, random-per-cell"):
            FieldGenerator.from_string("noise")


class TestOtherEnums:
    """Tests for the remaining tag enums."""

    def test_str_enum(self):
        """Test members compare equal to their tags."""
        assert AtomLabel.GOOD == "good"
        assert RepairStage.CLOSE == "close"
        assert IntegrandKind.NEGDET_Q == "negdet_q"

    def test_commands(self):
        """Test command tags match the CLI subcommands."""
        assert [c.value for c in Command] == [
            "zero-det",
            "delta-shift",
            "repair",
            "strict-repair",
            "rigidity-scan",
            "realize",
            "energy",
            "verify-suite",
        ]
