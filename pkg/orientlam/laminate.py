"""Finite-order laminates: weighted atoms with a binary rank-one splitting tree."""

import logging
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from orientlam.constants import (
    BARYCENTER_TOLERANCE,
    RANK_ONE_TOLERANCE,
    SPLIT_AMPLITUDE_TOLERANCE,
    WEIGHT_SUM_TOLERANCE,
)
from orientlam.enums import AtomLabel
from orientlam.exceptions import BarycenterViolationError, LaminateError, NotALeafError
from orientlam.models.integrand import Integrand, resolve_integrand
from orientlam.models.reports import LaminateStats, NodeCheck, ValidationReport
from orientlam.utils.matrix import (
    as_matrix,
    det_zero_tolerance,
    determinants,
    frobenius_norm,
    frobenius_norms,
    rank_one_defects,
    require_rotation,
)
from orientlam.utils.serialization import matrix_to_list, vector_to_list

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Leaf:
    """Atom of a laminate."""

    matrix: np.ndarray
    label: AtomLabel = AtomLabel.PLAIN


@dataclass(frozen=True, eq=False)
class Split:
    """
    Internal node: matrix = t * left + (1 - t) * right.

    When the split was produced by a rank-one move, ``direction`` holds (a, b)
    and ``amplitudes`` the coefficients with left = matrix + amp_l * a (x) b,
    right = matrix + amp_r * a (x) b.
    """

    matrix: np.ndarray
    t: float
    left: "Node"
    right: "Node"
    direction: Optional[Tuple[np.ndarray, np.ndarray]] = None
    amplitudes: Optional[Tuple[float, float]] = None
    label: AtomLabel = AtomLabel.PLAIN


Node = Union[Leaf, Split]


@dataclass(frozen=True, eq=False)
class Atoms:
    """Flat view of a laminate: weights, matrices and labels in leaf order."""

    weights: np.ndarray
    matrices: np.ndarray
    labels: Tuple[AtomLabel, ...]

    def __len__(self) -> int:
        return int(self.weights.shape[0])


def _iter_nodes(node: Node) -> Iterator[Tuple[str, float, Node]]:
    """Depth-first, left-first traversal yielding (path, weight, node)."""
    stack: List[Tuple[str, float, Node]] = [("", 1.0, node)]
    while stack:
        path, weight, current = stack.pop()
        yield path, weight, current
        if isinstance(current, Split):
            stack.append((path + "R", weight * (1.0 - current.t), current.right))
            stack.append((path + "L", weight * current.t, current.left))


@dataclass(frozen=True, eq=False)
class Laminate:
    """
    Finite-order laminate witnessed by a binary splitting tree.

    Leaves are numbered 0, 1, ... in depth-first, left-first order; that
    numbering is the leaf id used by :func:`rank_one_split`.
    """

    d: int
    tree: Node

    @property
    def root(self) -> np.ndarray:
        """Root matrix (the barycenter recorded by the tree)."""
        return self.tree.matrix

    @cached_property
    def atoms(self) -> Atoms:
        """Weighted atoms obtained by multiplying split weights down the tree."""
        weights: List[float] = []
        matrices: List[np.ndarray] = []
        labels: List[AtomLabel] = []
        for _, weight, node in _iter_nodes(self.tree):
            if isinstance(node, Leaf):
                weights.append(weight)
                matrices.append(node.matrix)
                labels.append(node.label)
        return Atoms(
            weights=np.array(weights), matrices=np.array(matrices), labels=tuple(labels)
        )

    def leaves(self) -> List[Leaf]:
        """Leaves in id order."""
        return [node for _, _, node in _iter_nodes(self.tree) if isinstance(node, Leaf)]

    def splits(self) -> List[Tuple[str, Split]]:
        """Internal nodes with their paths, in traversal order."""
        return [(path, node) for path, _, node in _iter_nodes(self.tree) if isinstance(node, Split)]

    def depth(self) -> int:
        """Number of split levels on the longest root-to-leaf path."""
        return max(len(path) for path, _, node in _iter_nodes(self.tree) if isinstance(node, Leaf))

    def __len__(self) -> int:
        return len(self.atoms)


def dirac(matrix: Any) -> Laminate:
    """
    Single-atom laminate at a matrix.

    Args:
        matrix: Matrix M

    Returns:
        Laminate with one atom of weight 1 at M
    """
    m = as_matrix(matrix)
    return Laminate(d=m.shape[0], tree=Leaf(matrix=m))


def split_matrix(
    matrix: np.ndarray,
    t: float,
    a: np.ndarray,
    b: np.ndarray,
    amplitude_left: float,
    amplitude_right: float,
    left: Optional[Node] = None,
    right: Optional[Node] = None,
    label: AtomLabel = AtomLabel.PLAIN,
) -> Split:
    """
    Split a matrix along a rank-one direction.

    Args:
        matrix: Matrix N being split
        t: Weight of the left child, in (0, 1)
        a: Left vector of the direction a (x) b
        b: Right vector (the normal) of the direction
        amplitude_left: Coefficient of a (x) b in the left child
        amplitude_right: Coefficient of a (x) b in the right child
        left: Subtree to hang under the left child (default: a plain leaf)
        right: Subtree to hang under the right child (default: a plain leaf)
        label: Label recorded on the new internal node

    Returns:
        Internal node with children N + amp_l a (x) b and N + amp_r a (x) b

    Raises:
        BarycenterViolationError: If t is outside (0, 1) or t amp_l + (1 - t) amp_r != 0
    """
    if not 0.0 < t < 1.0:
        raise BarycenterViolationError(f"Split weight must lie in (0, 1), got {t}")
    drift = t * amplitude_left + (1.0 - t) * amplitude_right
    if abs(drift) > SPLIT_AMPLITUDE_TOLERANCE * (1.0 + abs(amplitude_left) + abs(amplitude_right)):
        raise BarycenterViolationError(
            f"Split moves the barycenter: t*amp_l + (1-t)*amp_r = {drift!r}"
        )
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    rank_one = np.outer(a, b)
    left_matrix = matrix + amplitude_left * rank_one
    right_matrix = matrix + amplitude_right * rank_one
    if left is None:
        left = Leaf(matrix=left_matrix)
    if right is None:
        right = Leaf(matrix=right_matrix)
    return Split(
        matrix=matrix,
        t=float(t),
        left=left,
        right=right,
        direction=(a, b),
        amplitudes=(float(amplitude_left), float(amplitude_right)),
        label=label,
    )


def _leaf_path(tree: Node, leaf_id: int) -> str:
    index = 0
    for path, _, node in _iter_nodes(tree):
        if isinstance(node, Leaf):
            if index == leaf_id:
                return path
            index += 1
    raise NotALeafError(f"No leaf with id {leaf_id}")


def _replace_at(node: Node, path: str, new: Node) -> Node:
    if not path:
        return new
    if not isinstance(node, Split):
        raise NotALeafError(f"Path {path!r} does not exist")
    if path[0] == "L":
        return replace(node, left=_replace_at(node.left, path[1:], new))
    return replace(node, right=_replace_at(node.right, path[1:], new))


def rank_one_split(
    lam: Laminate,
    leaf_id: int,
    t: float,
    direction: Tuple[Any, Any],
    amplitude_left: float,
    amplitude_right: float,
) -> Laminate:
    """
    Replace a leaf by a rank-one split of its matrix.

    Args:
        lam: Laminate
        leaf_id: Id of the leaf to split
        t: Weight of the left child
        direction: Pair (a, b) defining a (x) b
        amplitude_left: Coefficient of a (x) b in the left child
        amplitude_right: Coefficient of a (x) b in the right child

    Returns:
        New laminate with the same barycenter

    Raises:
        NotALeafError: If no leaf has this id
        BarycenterViolationError: If the amplitudes move the barycenter
    """
    if leaf_id < 0:
        raise NotALeafError(f"No leaf with id {leaf_id}")
    path = _leaf_path(lam.tree, leaf_id)
    node = lam.tree
    for step in path:
        assert isinstance(node, Split)
        node = node.left if step == "L" else node.right
    assert isinstance(node, Leaf)
    a, b = direction
    new = split_matrix(node.matrix, t, a, b, amplitude_left, amplitude_right)
    logger.debug(f"Split leaf {leaf_id} at path {path!r} with t={t}")
    return Laminate(d=lam.d, tree=_replace_at(lam.tree, path, new))


def naive_tree(left: Any, right: Any, t: float = 0.5, matrix: Optional[Any] = None) -> Laminate:
    """
    Two-atom tree built without any rank-one check.

    Args:
        left: Left atom
        right: Right atom
        t: Recorded weight of the left atom
        matrix: Recorded node matrix (default: t * left + (1 - t) * right)

    Returns:
        Laminate that may fail :func:`validate_hm`
    """
    left_m = as_matrix(left)
    right_m = as_matrix(right, left_m.shape[0])
    node = t * left_m + (1.0 - t) * right_m if matrix is None else as_matrix(matrix)
    tree = Split(matrix=node, t=float(t), left=Leaf(left_m), right=Leaf(right_m))
    return Laminate(d=left_m.shape[0], tree=tree)


def validate_hm(lam: Laminate) -> ValidationReport:
    """
    Check that the splitting tree witnesses the (H_m)-condition.

    Every internal node must be the t-average of its children and the
    children must be rank-one connected; the atom weights must sum to 1 and
    average to the root. Failures are reported, never raised.

    Args:
        lam: Laminate

    Returns:
        ValidationReport with per-node residuals
    """
    atoms = lam.atoms
    weight_sum_error = abs(float(np.sum(atoms.weights)) - 1.0)
    mean = np.einsum("k,kij->ij", atoms.weights, atoms.matrices)
    root_residual = frobenius_norm(lam.root - mean) / (1.0 + frobenius_norm(lam.root))

    splits = lam.splits()
    nodes: List[NodeCheck] = []
    if splits:
        node_m = np.array([s.matrix for _, s in splits])
        left_m = np.array([s.left.matrix for _, s in splits])
        right_m = np.array([s.right.matrix for _, s in splits])
        t = np.array([s.t for _, s in splits])
        scale = 1.0 + frobenius_norms(left_m) + frobenius_norms(right_m)
        averaged = t[:, None, None] * left_m + (1.0 - t)[:, None, None] * right_m
        residuals = frobenius_norms(node_m - averaged) / scale
        defects = rank_one_defects(left_m - right_m)
        tolerances = RANK_ONE_TOLERANCE * scale
        for i, (path, _) in enumerate(splits):
            ok = bool(residuals[i] <= BARYCENTER_TOLERANCE and defects[i] <= tolerances[i])
            nodes.append(
                NodeCheck(
                    path=path,
                    barycenter_residual=float(residuals[i]),
                    rank_one_defect=float(defects[i]),
                    rank_one_tolerance=float(tolerances[i]),
                    passed=ok,
                )
            )

    passed = (
        weight_sum_error <= WEIGHT_SUM_TOLERANCE
        and root_residual <= BARYCENTER_TOLERANCE
        and all(node.passed for node in nodes)
    )
    report = ValidationReport(
        passed=passed,
        weight_sum_error=weight_sum_error,
        root_residual=root_residual,
        max_barycenter_residual=max((n.barycenter_residual for n in nodes), default=0.0),
        max_rank_one_defect=max((n.rank_one_defect for n in nodes), default=0.0),
        nodes=nodes,
    )
    if not passed:
        logger.debug(f"Laminate failed validation at {len(report.failures)} node(s)")
    return report


def barycenter(lam: Laminate) -> np.ndarray:
    """Weighted atom sum."""
    atoms = lam.atoms
    return np.einsum("k,kij->ij", atoms.weights, atoms.matrices)


def measure_p_moment(
    weights: np.ndarray, matrices: np.ndarray, p: float, center: Optional[np.ndarray] = None
) -> float:
    """Sum of w_k |M_k - center|^p over a discrete measure."""
    shifted = matrices if center is None else matrices - center
    return float(np.sum(weights * frobenius_norms(shifted) ** p))


def p_moment(lam: Laminate, p: float, center: Optional[Any] = None) -> float:
    """
    p-th moment of a laminate.

    Args:
        lam: Laminate
        p: Exponent, p >= 1
        center: Optional center (default 0)

    Returns:
        Sum of w_k |M_k - center|^p
    """
    atoms = lam.atoms
    c = None if center is None else np.asarray(center, dtype=float)
    return measure_p_moment(atoms.weights, atoms.matrices, p, c)


def measure_statistics(
    weights: np.ndarray,
    matrices: np.ndarray,
    p: float,
    q: float,
    center: Optional[np.ndarray] = None,
) -> LaminateStats:
    """
    Determinant-sign masses and moments of a discrete measure on matrices.

    Args:
        weights: Atom weights, shape (k,)
        matrices: Atom matrices, shape (k, d, d)
        p: Moment exponent
        q: Exponent of the negative-determinant moment
        center: Center of the centered moment (default: the weighted mean)

    Returns:
        LaminateStats
    """
    det = determinants(matrices)
    tau = det_zero_tolerance(matrices)
    negative = det < -tau
    positive = det > tau
    zero = ~(negative | positive)
    if center is None:
        center = np.einsum("k,kij->ij", weights, matrices)
    return LaminateStats(
        mass_det_neg=float(np.sum(weights[negative])),
        mass_det_zero=float(np.sum(weights[zero])),
        mass_det_pos=float(np.sum(weights[positive])),
        p_moment=measure_p_moment(weights, matrices, p),
        centered_p_moment=measure_p_moment(weights, matrices, p, center),
        det_integral=float(np.sum(weights * det)),
        neg_det_q_moment=float(np.sum(weights[negative] * np.abs(det[negative]) ** q)),
    )


def statistics(lam: Laminate, p: float, q: float) -> LaminateStats:
    """Statistics of a laminate, centered at its root."""
    atoms = lam.atoms
    return measure_statistics(atoms.weights, atoms.matrices, p, q, center=lam.root)


def _push(node: Node, P: np.ndarray, Q: np.ndarray) -> Node:
    matrix = P @ node.matrix @ Q.T
    if isinstance(node, Leaf):
        return Leaf(matrix=matrix, label=node.label)
    direction = None
    if node.direction is not None:
        direction = (P @ node.direction[0], Q @ node.direction[1])
    return replace(
        node,
        matrix=matrix,
        left=_push(node.left, P, Q),
        right=_push(node.right, P, Q),
        direction=direction,
    )


def pushforward_rotation(lam: Laminate, P: Any, Q: Any) -> Laminate:
    """
    Push a laminate forward under N -> P N Q^T.

    Args:
        lam: Laminate
        P: Left rotation
        Q: Right rotation

    Returns:
        Laminate with the same tree and weights

    Raises:
        NotRotationError: If P or Q is not in SO(d)
    """
    P = as_matrix(P, lam.d)
    Q = as_matrix(Q, lam.d)
    require_rotation(P, "P")
    require_rotation(Q, "Q")
    return Laminate(d=lam.d, tree=_push(lam.tree, P, Q))


def measure_energy(weights: np.ndarray, matrices: np.ndarray, integrand: Integrand) -> float:
    """Sum of w_k f(M_k)."""
    return float(np.sum(weights * integrand.evaluate(matrices)))


def energy(lam: Laminate, integrand: Union[str, Integrand]) -> float:
    """
    Energy of a laminate for an integrand of the bank.

    Args:
        lam: Laminate
        integrand: Integrand or tag such as ``pnorm:2``

    Returns:
        Sum of w_k f(M_k)

    Raises:
        UnknownIntegrandError: If the integrand is not in the bank
    """
    f = resolve_integrand(integrand)
    atoms = lam.atoms
    return measure_energy(atoms.weights, atoms.matrices, f)


def _node_to_dict(node: Node) -> Dict[str, Any]:
    if isinstance(node, Leaf):
        data: Dict[str, Any] = {"atom": matrix_to_list(node.matrix)}
        if node.label != AtomLabel.PLAIN:
            data["label"] = node.label.value
        return data
    data = {
        "t": node.t,
        "matrix": matrix_to_list(node.matrix),
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }
    if node.direction is not None and node.amplitudes is not None:
        data["direction"] = {
            "a": vector_to_list(node.direction[0]),
            "b": vector_to_list(node.direction[1]),
            "amplitudes": list(node.amplitudes),
        }
    if node.label != AtomLabel.PLAIN:
        data["label"] = node.label.value
    return data


def laminate_to_dict(lam: Laminate) -> Dict[str, Any]:
    """
    JSON document of a laminate.

    Schema: {"d", "root", "tree"} where tree nodes are
    {"t", "matrix", "left", "right"} or leaves {"atom"}.
    """
    return {"d": lam.d, "root": matrix_to_list(lam.root), "tree": _node_to_dict(lam.tree)}


def _node_from_dict(data: Dict[str, Any], d: int) -> Node:
    label = AtomLabel.from_string(data.get("label", AtomLabel.PLAIN.value))
    if "atom" in data:
        return Leaf(matrix=as_matrix(data["atom"], d), label=label)
    direction = None
    amplitudes = None
    if "direction" in data:
        raw = data["direction"]
        direction = (np.array(raw["a"], dtype=float), np.array(raw["b"], dtype=float))
        amplitudes = (float(raw["amplitudes"][0]), float(raw["amplitudes"][1]))
    return Split(
        matrix=as_matrix(data["matrix"], d),
        t=float(data["t"]),
        left=_node_from_dict(data["left"], d),
        right=_node_from_dict(data["right"], d),
        direction=direction,
        amplitudes=amplitudes,
        label=label,
    )


def laminate_from_dict(data: Dict[str, Any]) -> Laminate:
    """
    Parse a laminate JSON document.

    Raises:
        LaminateError: If the document is malformed
    """
    try:
        d = int(data["d"])
        return Laminate(d=d, tree=_node_from_dict(data["tree"], d))
    except (KeyError, TypeError, ValueError, IndexError) as e:
        logger.error(f"Malformed laminate document: {e}")
        raise LaminateError(f"Malformed laminate document: {e}") from e
