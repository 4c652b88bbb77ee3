"""Pytest configuration and fixtures."""

import numpy as np
import pytest

from orientlam.fields import constant_field
from orientlam.lamination import build_zero_det_laminate


@pytest.fixture
def flip():
    """Fixture for the reflection diag(-1, 1)."""
    return np.diag([-1.0, 1.0])


@pytest.fixture
def flip3():
    """Fixture for the reflection diag(-1, 1, 1)."""
    return np.diag([-1.0, 1.0, 1.0])


@pytest.fixture
def rotation():
    """Fixture for a planar rotation by 0.3 rad."""
    c, s = np.cos(0.3), np.sin(0.3)
    return np.array([[c, -s], [s, c]])


@pytest.fixture
def generic_negative():
    """Fixture for a non-diagonal 2x2 matrix with det < 0."""
    return np.array([[0.4, 1.3], [0.9, -0.7]])


@pytest.fixture
def zero_det_build(flip):
    """Fixture for the level-4 zero-determinant build of diag(-1, 1)."""
    return build_zero_det_laminate(flip, 4)


@pytest.fixture
def flip_field(flip):
    """Fixture for the constant field diag(-1, 1) on a 4x4 grid."""
    return constant_field(flip, 4)


@pytest.fixture
def zero_field():
    """Fixture for the constant zero field on a 4x4 grid."""
    return constant_field(np.zeros((2, 2)), 4)


@pytest.fixture
def identity_field():
    """Fixture for the identity field on a 4x4 grid."""
    return constant_field(np.eye(2), 4)
