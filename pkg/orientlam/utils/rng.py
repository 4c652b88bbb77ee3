"""Seeded random number generation."""

import numpy as np

from orientlam.constants import DEFAULT_SEED
from orientlam.utils.matrix import determinants


def make_rng(seed: int = DEFAULT_SEED) -> np.random.Generator:
    """
    Create the PCG64 generator used for every random draw.

    Args:
        seed: Unsigned 64-bit seed

    Returns:
        Independent generator; never seeded from OS entropy
    """
    return np.random.Generator(np.random.PCG64(seed))


def random_matrices(rng: np.random.Generator, count: int, d: int) -> np.ndarray:
    """Draw a stack of matrices with standard normal entries."""
    return rng.standard_normal((count, d, d))


def random_negative_det_matrices(rng: np.random.Generator, count: int, d: int) -> np.ndarray:
    """Draw matrices with det < 0 by flipping the first row where needed."""
    stack = random_matrices(rng, count, d)
    flip = determinants(stack) > 0.0
    stack[flip, 0, :] = -stack[flip, 0, :]
    return stack
