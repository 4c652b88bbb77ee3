"""Small-dimension matrix primitives: norms, determinants and the signed SVD."""

import logging
import math
from dataclasses import dataclass
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from orientlam.constants import (
    DET_ZERO_FACTOR,
    MAX_DIMENSION,
    MIN_DIMENSION,
    ROTATION_TOLERANCE,
    SVD_MAX_SWEEPS,
    SVD_RELATIVE_TOLERANCE,
)
from orientlam.enums import SVDOrdering
from orientlam.exceptions import (
    InvalidMatrixError,
    NoConvergenceError,
    NotRotationError,
    SingularInputError,
)

logger = logging.getLogger(__name__)


def as_matrix(value: Any, d: Optional[int] = None) -> np.ndarray:
    """
    Convert a value to a validated d x d float matrix.

    Args:
        value: Nested sequence or array
        d: Expected dimension (optional)

    Returns:
        New float64 array of shape (d, d)

    Raises:
        InvalidMatrixError: If the value is not a finite square matrix with 2 <= d <= 4
    """
    try:
        matrix = np.array(value, dtype=float)
    except (TypeError, ValueError) as e:
        raise InvalidMatrixError(f"Not a numeric matrix: {e}") from e
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidMatrixError(f"Matrix must be square, got shape {matrix.shape}")
    size = matrix.shape[0]
    if not MIN_DIMENSION <= size <= MAX_DIMENSION:
        raise InvalidMatrixError(
            f"Dimension must be between {MIN_DIMENSION} and {MAX_DIMENSION}, got {size}"
        )
    if d is not None and size != d:
        raise InvalidMatrixError(f"Expected a {d}x{d} matrix, got {size}x{size}")
    if not np.all(np.isfinite(matrix)):
        raise InvalidMatrixError("Matrix entries must be finite")
    return matrix


def frobenius_norm(matrix: np.ndarray) -> float:
    """Entrywise Euclidean norm, equal to the l2 norm of the singular values."""
    return float(np.sqrt(np.sum(matrix * matrix)))


def frobenius_norms(stack: np.ndarray) -> np.ndarray:
    """Frobenius norms of a stack of matrices of shape (..., d, d)."""
    return np.sqrt(np.sum(stack * stack, axis=(-2, -1)))


def _det2(a: np.ndarray) -> np.ndarray:
    return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]


def _det3(a: np.ndarray) -> np.ndarray:
    return (
        a[..., 0, 0] * (a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1])
        - a[..., 0, 1] * (a[..., 1, 0] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 0])
        + a[..., 0, 2] * (a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0])
    )


def _det4(a: np.ndarray) -> np.ndarray:
    total = np.zeros(a.shape[:-2])
    for col in range(4):
        minor = np.delete(np.delete(a, 0, axis=-2), col, axis=-1)
        sign = -1.0 if col % 2 else 1.0
        total = total + sign * a[..., 0, col] * _det3(minor)
    return total


def determinants(stack: np.ndarray) -> np.ndarray:
    """Closed-form (cofactor) determinants of a stack of matrices of shape (..., d, d)."""
    size = stack.shape[-1]
    if size == 2:
        return _det2(stack)
    if size == 3:
        return _det3(stack)
    if size == 4:
        return _det4(stack)
    raise InvalidMatrixError(f"Unsupported dimension {size}")


def determinant(matrix: np.ndarray) -> float:
    """Closed-form determinant for d <= 4."""
    return float(determinants(matrix))


def det_zero_tolerance(stack: np.ndarray) -> np.ndarray:
    """Scale-aware zero-determinant tolerance 1e-9 (1 + |M|)^d, per matrix."""
    return DET_ZERO_FACTOR * (1.0 + frobenius_norms(stack)) ** stack.shape[-1]


def _jacobi_svd(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Two-sided Jacobi SVD of a square matrix.

    Returns U, s, V with matrix = U diag(s) V^T, U and V products of plane
    rotations and s the (signed) diagonal left after the sweeps.

    Raises:
        NoConvergenceError: If the off-diagonal mass stays above tolerance
    """
    size = matrix.shape[0]
    work = matrix.copy()
    left = np.eye(size)
    right = np.eye(size)
    scale = frobenius_norm(matrix)
    if scale == 0.0:
        return left, np.zeros(size), right
    tolerance = SVD_RELATIVE_TOLERANCE * scale

    off_norm = math.inf
    for sweep in range(SVD_MAX_SWEEPS + 1):
        off = work - np.diag(np.diag(work))
        off_norm = frobenius_norm(off)
        if off_norm <= tolerance:
            logger.debug(f"Jacobi SVD converged after {sweep} sweeps (off={off_norm:.3e})")
            return left, np.diag(work).copy(), right
        if sweep == SVD_MAX_SWEEPS:
            break
        for p in range(size - 1):
            for q in range(p + 1, size):
                w, x = work[p, p], work[p, q]
                y, z = work[q, p], work[q, q]
                if x == 0.0 and y == 0.0:
                    continue
                # R^T B symmetric
                phi = math.atan2(x - y, w + z)
                c1, s1 = math.cos(phi), math.sin(phi)
                a_ = c1 * w - s1 * y
                b_ = c1 * x - s1 * z
                d_ = s1 * x + c1 * z
                theta = 0.5 * math.atan2(2.0 * b_, a_ - d_)
                c2, s2 = math.cos(theta), math.sin(theta)
                rot = np.array([[c1, s1], [-s1, c1]])
                jac = np.array([[c2, -s2], [s2, c2]])
                u2 = rot @ jac
                idx = [p, q]
                work[idx, :] = u2.T @ work[idx, :]
                work[:, idx] = work[:, idx] @ jac
                left[:, idx] = left[:, idx] @ u2
                right[:, idx] = right[:, idx] @ jac
                work[p, q] = 0.0
                work[q, p] = 0.0

    logger.error(f"Jacobi SVD failed to converge: off-diagonal norm {off_norm:.3e}")
    raise NoConvergenceError(
        f"Jacobi SVD did not converge in {SVD_MAX_SWEEPS} sweeps",
        sweeps=SVD_MAX_SWEEPS,
        off_norm=off_norm,
    )


def singular_values(stack: np.ndarray) -> np.ndarray:
    """Singular values in descending order, for a matrix or a stack of matrices."""
    return np.linalg.svd(stack, compute_uv=False)


def rank_one_defects(stack: np.ndarray) -> np.ndarray:
    """Second-largest singular values of a stack of matrices."""
    return singular_values(stack)[..., 1]


def rank_one_defect(matrix: np.ndarray) -> float:
    """Second-largest singular value; small values certify rank <= 1."""
    return float(rank_one_defects(matrix))


@dataclass(frozen=True)
class RotSVD:
    """Factorization M = P diag(theta) Q^T with P, Q in SO(d)."""

    P: np.ndarray
    theta: np.ndarray
    Q: np.ndarray
    ordering: SVDOrdering

    @property
    def d(self) -> int:
        return int(self.theta.shape[0])

    @property
    def sigma(self) -> np.ndarray:
        """Unsigned singular values in the stored order."""
        return np.abs(self.theta)

    def reconstruct(self, theta: Optional[np.ndarray] = None) -> np.ndarray:
        """P diag(theta) Q^T, optionally with replaced diagonal."""
        values = self.theta if theta is None else theta
        return (self.P * values) @ self.Q.T


def _stable_order(sigma: np.ndarray, descending: bool) -> List[int]:
    keys = range(sigma.shape[0])
    if descending:
        return sorted(keys, key=lambda k: (-sigma[k], k))
    return sorted(keys, key=lambda k: (sigma[k], k))


def signed_svd(matrix: np.ndarray, ordering: SVDOrdering) -> RotSVD:
    """
    Signed (rotational) singular value decomposition.

    Reflections are absorbed into one diagonal entry so that both factors
    are special-orthogonal: the first entry for neg-first-ascending, the
    last (smallest in modulus) for abs-descending.

    Args:
        matrix: Input matrix
        ordering: Canonical form

    Returns:
        RotSVD with P, Q in SO(d)

    Raises:
        SingularInputError: If neg-first-ascending is requested for det M >= 0 or sigma_1 = 0
        NoConvergenceError: If the Jacobi iteration fails
    """
    if ordering == SVDOrdering.NEG_FIRST_ASCENDING and not determinant(matrix) < 0.0:
        raise SingularInputError("neg-first-ascending form requires det M < 0")

    left, diag, right = _jacobi_svd(matrix)
    signs = np.where(diag < 0.0, -1.0, 1.0)
    left = left * signs
    sigma = np.abs(diag)

    descending = ordering == SVDOrdering.ABS_DESCENDING
    order = _stable_order(sigma, descending)
    P = left[:, order]
    Q = right[:, order]
    theta = sigma[order].copy()

    det_p = determinant(P)
    det_q = determinant(Q)
    if ordering == SVDOrdering.NEG_FIRST_ASCENDING:
        if theta[0] == 0.0:
            raise SingularInputError("neg-first-ascending form requires sigma_1 > 0")
        if det_p * det_q > 0.0:
            raise SingularInputError("Orientation of singular factors inconsistent with det M < 0")
        if det_p < 0.0:
            P[:, 0] = -P[:, 0]
        else:
            Q[:, 0] = -Q[:, 0]
        theta[0] = -theta[0]
    else:
        if det_p < 0.0:
            P[:, -1] = -P[:, -1]
            theta[-1] = -theta[-1]
        if det_q < 0.0:
            Q[:, -1] = -Q[:, -1]
            theta[-1] = -theta[-1]

    return RotSVD(P=P, theta=theta, Q=Q, ordering=ordering)


def is_rotation(matrix: np.ndarray, tolerance: float = ROTATION_TOLERANCE) -> bool:
    """Check R^T R = I and det R = 1 within tolerance."""
    size = matrix.shape[0]
    if matrix.shape != (size, size):
        return False
    gram_error = np.max(np.abs(matrix.T @ matrix - np.eye(size)))
    return bool(gram_error <= tolerance and abs(determinant(matrix) - 1.0) <= tolerance)


def require_rotation(matrix: np.ndarray, name: str = "matrix") -> None:
    """Raise NotRotationError unless the matrix lies in SO(d)."""
    if not is_rotation(matrix):
        raise NotRotationError(f"{name} is not special-orthogonal")


def nearest_zero_det(matrix: np.ndarray) -> np.ndarray:
    """Project a det<0 matrix onto {det = 0} by zeroing its negated smallest singular value."""
    factors = signed_svd(matrix, SVDOrdering.NEG_FIRST_ASCENDING)
    theta = factors.theta.copy()
    theta[0] = 0.0
    return factors.reconstruct(theta)


def lift_singular_values(matrix: np.ndarray, eta: float) -> np.ndarray:
    """Raise every singular value of modulus below eta to +eta (abs-descending form)."""
    factors = signed_svd(matrix, SVDOrdering.ABS_DESCENDING)
    theta = np.where(np.abs(factors.theta) < eta, eta, factors.theta)
    return factors.reconstruct(theta)


def outer(a: Sequence[float], b: Sequence[float]) -> np.ndarray:
    """Rank-one matrix a (x) b."""
    return np.outer(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
