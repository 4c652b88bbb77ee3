"""Lamination of an arbitrary matrix onto {|det| >= delta^d}."""

import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from orientlam.constants import BARYCENTER_TOLERANCE, DET_ZERO_FACTOR
from orientlam.enums import SVDOrdering
from orientlam.exceptions import MismatchedInputsError, NonpositiveDeltaError
from orientlam.laminate import Laminate, Leaf, Node, measure_statistics, split_matrix
from orientlam.models.reports import EstimateReport
from orientlam.utils.matrix import (
    RotSVD,
    as_matrix,
    determinant,
    determinants,
    frobenius_norm,
    frobenius_norms,
    signed_svd,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DeltaBuild:
    """Result of the delta-shift construction."""

    m0: np.ndarray
    laminate: Laminate
    L: int
    delta: float
    factors: RotSVD

    @property
    def d(self) -> int:
        return int(self.m0.shape[0])

    @property
    def atom_count(self) -> int:
        """2^(d - L)."""
        return 2 ** (self.d - self.L)


def _split_from(matrix: np.ndarray, k: int, factors: RotSVD, delta: float) -> Node:
    """Split along (P e_k) (x) (Q e_k) with amplitudes +-2 delta, then recurse on k + 1."""
    if k == factors.d:
        return Leaf(matrix=matrix)
    a = factors.P[:, k].copy()
    b = factors.Q[:, k].copy()
    shift = np.outer(a, b)
    left = _split_from(matrix + (2.0 * delta) * shift, k + 1, factors, delta)
    right = _split_from(matrix + (-2.0 * delta) * shift, k + 1, factors, delta)
    return split_matrix(matrix, 0.5, a, b, 2.0 * delta, -2.0 * delta, left=left, right=right)


def build_delta_laminate(M0: Any, delta: float) -> DeltaBuild:
    """
    Build the finite-order laminate of M0 supported on {|det| >= delta^d}.

    The signed SVD in abs-descending form gives L entries with |theta_k| >= delta;
    each remaining direction k = L+1..d is split with t = 1/2 along
    (P e_k) (x) (Q e_k) with amplitudes +-2 delta.

    Args:
        M0: Matrix
        delta: Shift size, delta > 0

    Returns:
        DeltaBuild with 2^(d-L) atoms (a Dirac when L = d)

    Raises:
        NonpositiveDeltaError: If delta <= 0 or not finite
    """
    m0 = as_matrix(M0)
    if not (math.isfinite(delta) and delta > 0.0):
        logger.error(f"Delta shift needs delta > 0, got {delta!r}")
        raise NonpositiveDeltaError(f"delta must be positive, got {delta!r}")
    factors = signed_svd(m0, SVDOrdering.ABS_DESCENDING)
    L = int(np.sum(np.abs(factors.theta) >= delta))
    tree = _split_from(m0, L, factors, delta)
    logger.debug(f"Delta shift: L={L}, {2 ** (m0.shape[0] - L)} atoms, delta={delta!r}")
    return DeltaBuild(
        m0=m0, laminate=Laminate(d=m0.shape[0], tree=tree), L=L, delta=float(delta), factors=factors
    )


def sign_balance(build: DeltaBuild) -> int:
    """Number of atoms with positive determinant."""
    return int(np.sum(determinants(build.laminate.atoms.matrices) > 0.0))


def verify_delta(build: DeltaBuild, M0: Any, delta: float, p: float) -> EstimateReport:
    """
    Check estimates (i)-(v) of the delta-shift laminate.

    Args:
        build: Output of :func:`build_delta_laminate`
        M0: Matrix the build was produced from
        delta: Shift size used
        p: Moment exponent, p >= 1

    Returns:
        EstimateReport with checks barycenter, det_floor, sign_balance,
        raw_moment, centered_moment and det_ceiling

    Raises:
        MismatchedInputsError: If build, M0 and delta do not belong together
    """
    m0 = as_matrix(M0)
    if m0.shape != build.m0.shape or frobenius_norm(m0 - build.m0) > BARYCENTER_TOLERANCE * (
        1.0 + frobenius_norm(m0)
    ):
        raise MismatchedInputsError("Build was not produced from this M0")
    if delta != build.delta:
        raise MismatchedInputsError(f"Build used delta={build.delta!r}, got {delta!r}")
    d = build.d
    atoms = build.laminate.atoms
    dets = determinants(atoms.matrices)
    norm0 = frobenius_norm(m0)
    c_p = (2.0 * math.sqrt(d)) ** p
    report = EstimateReport(title=f"delta-shift delta={delta!r} p={p!r}")

    bary = np.einsum("k,kij->ij", atoms.weights, atoms.matrices)
    residual = frobenius_norm(bary - m0) / (1.0 + norm0)
    report.add("barycenter", residual, BARYCENTER_TOLERANCE, residual <= BARYCENTER_TOLERANCE)

    slack = DET_ZERO_FACTOR * (1.0 + frobenius_norms(atoms.matrices)) ** d
    floor_ok = bool(np.all(np.abs(dets) >= delta**d - slack))
    report.add("det_floor", float(np.min(np.abs(dets))), delta**d, floor_ok)

    positive = int(np.sum(dets > 0.0))
    if build.L < d:
        expected = 2 ** (d - build.L - 1)
        report.add("sign_balance", positive, expected, positive == expected)
    else:
        report.add("sign_balance", positive, 1, True, note="no split (L = d), exempt")

    stats = measure_statistics(atoms.weights, atoms.matrices, p, 1.0, center=m0)
    raw_bound = 2.0 ** (p - 1.0) * (norm0**p + c_p * delta**p)
    report.add(
        "raw_moment", stats.p_moment, raw_bound, stats.p_moment <= raw_bound * (1.0 + 1e-12)
    )
    centered_bound = c_p * delta**p
    report.add(
        "centered_moment",
        stats.centered_p_moment,
        centered_bound,
        stats.centered_p_moment <= centered_bound * (1.0 + 1e-12),
    )

    ceiling = 3.0 * delta * (norm0 + 2.0 * delta) ** (d - 1)
    if abs(determinant(m0)) < delta**d:
        worst = float(np.max(np.abs(dets)))
        report.add("det_ceiling", worst, ceiling, worst < ceiling)
    else:
        report.add("det_ceiling", 0.0, ceiling, True, note="|det M0| >= delta^d, not applicable")

    logger.debug(f"verify_delta L={build.L}: passed={report.passed}")
    return report
