"""Piecewise-constant gradient fields on a uniform grid over the unit box."""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from orientlam.constants import DEFAULT_SEED, MAX_GRID_2D, MAX_GRID_3D
from orientlam.enums import FieldGenerator
from orientlam.exceptions import (
    ConfigInvalidError,
    InvalidMatrixError,
    MismatchedInputsError,
    UnknownGeneratorError,
)
from orientlam.models.integrand import Integrand
from orientlam.models.reports import FieldStats
from orientlam.utils.matrix import (
    as_matrix,
    det_zero_tolerance,
    determinants,
    frobenius_norms,
)
from orientlam.utils.rng import make_rng
from orientlam.utils.serialization import matrix_to_list

logger = logging.getLogger(__name__)

VORTEX_CENTER: Tuple[float, float] = (0.5, 0.5)
VORTEX_WIDTH = 0.25
VORTEX_TWIST = 0.5 * math.pi
FOLD_STRENGTH = 1.5


@dataclass(frozen=True, eq=False)
class Slabs:
    """
    Content of one cell: consecutive slabs along x1 with relative widths.

    Widths sum to 1; slab k carries the constant matrix ``matrices[k]``.
    """

    weights: np.ndarray
    matrices: np.ndarray

    @classmethod
    def single(cls, matrix: np.ndarray) -> "Slabs":
        """Unrefined cell."""
        return cls(weights=np.ones(1), matrices=np.asarray(matrix, dtype=float)[None, :, :])

    def __len__(self) -> int:
        return int(self.weights.shape[0])


@dataclass(frozen=True, eq=False)
class GradientField:
    """
    Field on n^d cells of volume n^-d, in row-major cell order.

    Cells may share one Slabs object; shared content is processed once.
    """

    d: int
    n: int
    cells: Tuple[Slabs, ...]

    @property
    def cell_volume(self) -> float:
        return float(self.n) ** (-self.d)

    @property
    def cell_count(self) -> int:
        return len(self.cells)

    def piece_count(self) -> int:
        """Total number of pieces over all cells."""
        return sum(len(cell) for cell in self.cells)

    def unique_cells(self) -> Dict[int, Slabs]:
        """Distinct cell contents keyed by identity, in first-seen order."""
        unique: Dict[int, Slabs] = {}
        for cell in self.cells:
            unique.setdefault(id(cell), cell)
        return unique

    def cell_sums(self, values_fn: Any) -> np.ndarray:
        """
        Per-cell sums of w_k * values_fn(slabs)[k], in cell order.

        Shared cells are evaluated once; the result is a cell-ordered array
        for a fixed-order reduction.
        """
        memo: Dict[int, float] = {}
        sums = np.empty(self.cell_count)
        for i, cell in enumerate(self.cells):
            key = id(cell)
            if key not in memo:
                memo[key] = float(np.sum(cell.weights * values_fn(cell)))
            sums[i] = memo[key]
        return sums

    def integrate(self, values_fn: Any) -> float:
        """Volume integral of a piecewise-constant quantity."""
        return float(np.sum(self.cell_sums(values_fn))) * self.cell_volume


def _grid_limit(d: int, n: int) -> None:
    if d not in (2, 3):
        raise ConfigInvalidError(f"Fields support d = 2 or 3, got {d}", field="dimension")
    limit = MAX_GRID_2D if d == 2 else MAX_GRID_3D
    if not 1 <= n <= limit:
        raise ConfigInvalidError(f"n must be between 1 and {limit} for d={d}", field="n")


def constant_field(matrix: Any, n: int) -> GradientField:
    """Field with the same matrix in every cell (one shared Slabs)."""
    m = as_matrix(matrix)
    d = m.shape[0]
    _grid_limit(d, n)
    cell = Slabs.single(m)
    return GradientField(d=d, n=n, cells=tuple(cell for _ in range(n**d)))


def cell_centers(d: int, n: int) -> np.ndarray:
    """Cell centers in row-major order, shape (n^d, d)."""
    index = np.indices((n,) * d).reshape(d, -1).T
    return (index + 0.5) / n


def vortex_gradient(x: np.ndarray) -> np.ndarray:
    """
    Gradient of the smooth vortex map at points x of shape (k, 2).

    The map twists by theta(r) = (pi/2) exp(-r^2 / w^2) around the center and
    folds with -kappa/(2 pi) sin(2 pi x1) in the first component; the twist
    has unit Jacobian and the fold makes it negative near x1 = 0 and x1 = 1.
    """
    y = x - np.array(VORTEX_CENTER)
    r2 = np.sum(y * y, axis=1)
    theta = VORTEX_TWIST * np.exp(-r2 / VORTEX_WIDTH**2)
    c, s = np.cos(theta), np.sin(theta)
    rot = np.stack([np.stack([c, -s], axis=-1), np.stack([s, c], axis=-1)], axis=-2)
    drot = np.stack([np.stack([-s, -c], axis=-1), np.stack([c, -s], axis=-1)], axis=-2)
    grad_theta = (theta * (-2.0 / VORTEX_WIDTH**2))[:, None] * y
    twist = rot + np.einsum("kij,kj->ki", drot, y)[:, :, None] * grad_theta[:, None, :]
    twist[:, 0, 0] -= FOLD_STRENGTH * np.cos(2.0 * math.pi * x[:, 0])
    return twist


def make_field(
    generator: Union[str, FieldGenerator],
    n: int,
    d: int = 2,
    seed: int = DEFAULT_SEED,
    matrix: Optional[Any] = None,
    mix: float = 0.3,
) -> GradientField:
    """
    Build a deterministic synthetic field.

    Args:
        generator: ``constant``, ``smooth-vortex`` or ``random-per-cell``
        n: Cells per axis
        d: Dimension (2 or 3)
        seed: Seed of the random generator
        matrix: Matrix of the constant field
        mix: Fraction of negative-determinant cells (random field)

    Returns:
        GradientField

    Raises:
        UnknownGeneratorError: If the generator tag is not known
        ConfigInvalidError: If parameters are out of range
    """
    try:
        kind = (
            generator
            if isinstance(generator, FieldGenerator)
            else FieldGenerator.from_string(generator)
        )
    except ValueError as e:
        logger.error(f"Unknown field generator: {generator}")
        raise UnknownGeneratorError(str(e)) from e

    if kind == FieldGenerator.CONSTANT:
        if matrix is None:
            raise ConfigInvalidError("constant field needs a matrix", field="matrix")
        return constant_field(matrix, n)

    _grid_limit(d, n)
    count = n**d
    if kind == FieldGenerator.SMOOTH_VORTEX:
        centers = cell_centers(d, n)
        planar = vortex_gradient(centers[:, :2])
        grads = np.zeros((count, d, d))
        grads[:, :2, :2] = planar
        for k in range(2, d):
            grads[:, k, k] = 1.0
    else:
        if not 0.0 <= mix <= 1.0:
            raise ConfigInvalidError("mix must lie in [0, 1]", field="mix")
        rng = make_rng(seed)
        grads = rng.standard_normal((count, d, d))
        want_negative = rng.random(count) < mix
        flip = (determinants(grads) < 0.0) != want_negative
        grads[flip, 0, :] = -grads[flip, 0, :]
    logger.debug(f"Generated {kind.value} field with {count} cells")
    return GradientField(d=d, n=n, cells=tuple(Slabs.single(g) for g in grads))


def field_stats(field: GradientField, p: float) -> FieldStats:
    """
    Volume-weighted determinant statistics of a field.

    Args:
        field: GradientField
        p: Exponent; the deficiency integrates |det|^(p/d) over det < 0

    Returns:
        FieldStats (neg_mass, zero_mass, det_deficiency, p_norm, ...)
    """
    d = field.d

    def negative(cell: Slabs) -> np.ndarray:
        return determinants(cell.matrices) < -det_zero_tolerance(cell.matrices)

    def zero(cell: Slabs) -> np.ndarray:
        return np.abs(determinants(cell.matrices)) <= det_zero_tolerance(cell.matrices)

    def deficiency(cell: Slabs) -> np.ndarray:
        det = determinants(cell.matrices)
        return np.where(negative(cell), np.abs(det) ** (p / d), 0.0)

    def norm_p(cell: Slabs) -> np.ndarray:
        return frobenius_norms(cell.matrices) ** p

    min_det = min(float(np.min(determinants(c.matrices))) for c in field.unique_cells().values())
    return FieldStats(
        neg_mass=field.integrate(lambda c: negative(c).astype(float)),
        zero_mass=field.integrate(lambda c: zero(c).astype(float)),
        det_deficiency=field.integrate(deficiency),
        p_norm=field.integrate(norm_p) ** (1.0 / p),
        min_det=min_det,
        pieces=field.piece_count(),
    )


def field_energy(field: GradientField, integrand: Integrand) -> float:
    """Integral of f over the field."""
    return field.integrate(lambda cell: integrand.evaluate(cell.matrices))


def _cell_distance(coarse: Slabs, fine: Slabs, p: float) -> float:
    edges = np.cumsum(coarse.weights)
    mids = np.cumsum(fine.weights) - 0.5 * fine.weights
    parent = np.minimum(np.searchsorted(edges, mids, side="right"), len(coarse) - 1)
    diff = fine.matrices - coarse.matrices[parent]
    return float(np.sum(fine.weights * frobenius_norms(diff) ** p))


def lp_distance(coarse: GradientField, fine: GradientField, p: float) -> float:
    """
    L^p distance between a field and a refinement of it.

    Pieces of ``fine`` are matched to the piece of ``coarse`` whose slab
    interval contains them.

    Raises:
        MismatchedInputsError: If the grids differ
    """
    if (coarse.d, coarse.n) != (fine.d, fine.n):
        raise MismatchedInputsError("Fields live on different grids")
    memo: Dict[Tuple[int, int], float] = {}
    sums = np.empty(coarse.cell_count)
    for i, (a, b) in enumerate(zip(coarse.cells, fine.cells)):
        key = (id(a), id(b))
        if key not in memo:
            memo[key] = 0.0 if a is b else _cell_distance(a, b, p)
        sums[i] = memo[key]
    return (float(np.sum(sums)) * coarse.cell_volume) ** (1.0 / p)


def field_to_dict(field: GradientField) -> Dict[str, Any]:
    """
    JSON document of a field.

    Unrefined cells are matrices; refined cells are {"slabs": [{"w", "matrix"}]}.
    """
    cells: List[Any] = []
    for cell in field.cells:
        if len(cell) == 1:
            cells.append(matrix_to_list(cell.matrices[0]))
        else:
            cells.append(
                {
                    "slabs": [
                        {"w": float(w), "matrix": matrix_to_list(m)}
                        for w, m in zip(cell.weights, cell.matrices)
                    ]
                }
            )
    return {"d": field.d, "n": field.n, "cells": cells}


def field_from_dict(data: Dict[str, Any]) -> GradientField:
    """
    Parse a field JSON document.

    Raises:
        ConfigInvalidError: If the document is malformed
    """
    try:
        d = int(data["d"])
        n = int(data["n"])
        _grid_limit(d, n)
        cells: List[Slabs] = []
        for raw in data["cells"]:
            if isinstance(raw, dict):
                weights = np.array([float(s["w"]) for s in raw["slabs"]])
                mats = np.array([as_matrix(s["matrix"], d) for s in raw["slabs"]])
                cells.append(Slabs(weights=weights, matrices=mats))
            else:
                cells.append(Slabs.single(as_matrix(raw, d)))
    except (KeyError, TypeError, ValueError, InvalidMatrixError) as e:
        raise ConfigInvalidError(f"Malformed field document: {e}", field="field") from e
    if len(cells) != n**d:
        raise ConfigInvalidError(f"Expected {n**d} cells, got {len(cells)}", field="field")
    return GradientField(d=d, n=n, cells=tuple(cells))
