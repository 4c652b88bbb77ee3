"""Lamination of a negative-determinant matrix onto the zero-determinant set."""

import logging
import math
from dataclasses import dataclass, replace
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from orientlam.constants import (
    BARYCENTER_TOLERANCE,
    DET_UNDERFLOW,
    DET_ZERO_FACTOR,
    MAX_LEVELS,
)
from orientlam.enums import AtomLabel, SVDOrdering
from orientlam.exceptions import (
    BadFormError,
    ConfigInvalidError,
    MismatchedInputsError,
    NotNegativeDetError,
)
from orientlam.laminate import (
    Laminate,
    Leaf,
    Node,
    measure_statistics,
    split_matrix,
    validate_hm,
)
from orientlam.models.reports import EstimateReport, ScanRow
from orientlam.utils.matrix import (
    as_matrix,
    determinant,
    determinants,
    frobenius_norm,
    frobenius_norms,
    signed_svd,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeomParams:
    """Exponent p, dimension d and level count of the geometric estimates."""

    p: float
    d: int
    j_max: int = 1

    def __post_init__(self) -> None:
        if not 1.0 <= self.p <= self.d:
            raise ConfigInvalidError(f"p must lie in [1, {self.d}], got {self.p}", field="p")

    @property
    def r(self) -> float:
        """Ratio r = 2^(p/d - 1) of the geometric series."""
        return 2.0 ** (self.p / self.d - 1.0)

    def c_geom(self, j: Optional[int] = None) -> float:
        """
        Constant of the centered moment bound at level j.

        [sqrt(2) / (2^(1/d) - 1)]^p * [1 / (1 - r) + r^j]; infinite for p = d.
        """
        level = self.j_max if j is None else j
        if self.p >= self.d:
            return math.inf
        prefactor = (math.sqrt(2.0) / (2.0 ** (1.0 / self.d) - 1.0)) ** self.p
        return prefactor * (1.0 / (1.0 - self.r) + self.r**level)

    def det_moment_factor(self, j: Optional[int] = None) -> float:
        """Partial geometric sum of r^i for i = 0..j."""
        level = self.j_max if j is None else j
        return float(sum(self.r**i for i in range(level + 1)))


@dataclass(frozen=True, eq=False)
class LabeledAtom:
    """Atom of one Step-2 decomposition."""

    name: str
    weight: float
    matrix: np.ndarray
    label: AtomLabel


@dataclass(frozen=True, eq=False)
class LevelRecord:
    """Atoms created at one level: 2^i good and 2^i bad, each of weight 4^-i."""

    level: int
    good: np.ndarray
    bad: np.ndarray
    bad_det_magnitude: float
    max_step_distance: float

    @property
    def good_count(self) -> int:
        return int(self.good.shape[0])

    @property
    def bad_count(self) -> int:
        return int(self.bad.shape[0])

    @property
    def weight(self) -> float:
        return 4.0 ** (-self.level)


@dataclass(frozen=True, eq=False)
class _LevelSplits:
    """Split data of every bad atom of one level, in leaf order."""

    parents: List[np.ndarray]
    left: List[np.ndarray]
    right: List[np.ndarray]
    first: List[Tuple[np.ndarray, np.ndarray]]
    second: List[Tuple[np.ndarray, np.ndarray]]
    gamma: List[float]
    good: List[Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True, eq=False)
class ZeroDetBuild:
    """Result of the zero-determinant construction up to level j."""

    m0: np.ndarray
    laminate: Laminate
    levels: List[LevelRecord]
    truncated: bool = False

    @property
    def j(self) -> int:
        """Number of levels actually built."""
        return len(self.levels)

    @property
    def d(self) -> int:
        return int(self.m0.shape[0])

    def measure(
        self, j: Optional[int] = None
    ) -> Tuple[np.ndarray, np.ndarray, Tuple[AtomLabel, ...]]:
        """
        Atoms of the level-j measure without rebuilding.

        Good atoms of levels 1..j followed by the bad atoms of level j.

        Raises:
            MismatchedInputsError: If j exceeds the built level count
        """
        level = self.j if j is None else j
        if not 0 <= level <= self.j:
            raise MismatchedInputsError(f"Level {level} not built (have {self.j})")
        if level == 0:
            return np.ones(1), self.m0[None, :, :].copy(), (AtomLabel.BAD,)
        weights: List[np.ndarray] = []
        matrices: List[np.ndarray] = []
        labels: List[AtomLabel] = []
        for record in self.levels[:level]:
            weights.append(np.full(record.good_count, record.weight))
            matrices.append(record.good)
            labels.extend([AtomLabel.GOOD] * record.good_count)
        last = self.levels[level - 1]
        weights.append(np.full(last.bad_count, last.weight))
        matrices.append(last.bad)
        labels.extend([AtomLabel.BAD] * last.bad_count)
        return np.concatenate(weights), np.concatenate(matrices), tuple(labels)

    def laminate_at(self, j: int) -> Laminate:
        """Splitting tree of the level-j measure, pruned from the full build."""
        if not 0 <= j <= self.j:
            raise MismatchedInputsError(f"Level {j} not built (have {self.j})")
        if j == self.j:
            return self.laminate
        return Laminate(d=self.laminate.d, tree=_prune(self.laminate.tree, j))


def _prune(node: Node, levels: int) -> Node:
    if isinstance(node, Leaf):
        return node
    if node.label == AtomLabel.BAD:
        if levels == 0:
            return Leaf(matrix=node.matrix, label=AtomLabel.BAD)
        levels -= 1
    return replace(node, left=_prune(node.left, levels), right=_prune(node.right, levels))


def _check_canonical(D0: np.ndarray, sigma1_smallest: bool) -> Tuple[float, np.ndarray]:
    """Validate diag(-s1, s2, ..., sd) with s2 <= ... <= sd; return s1 and the tail."""
    if np.any(D0 - np.diag(np.diag(D0)) != 0.0):
        raise BadFormError("Matrix must be diagonal")
    diag = np.diag(D0)
    sigma1 = -float(diag[0])
    tail = diag[1:]
    if not sigma1 > 0.0:
        raise BadFormError("First diagonal entry must be negative")
    if np.any(tail <= 0.0) or np.any(np.diff(tail) < 0.0):
        raise BadFormError("Remaining diagonal entries must be positive and ascending")
    if sigma1_smallest and sigma1 > float(tail[0]):
        raise BadFormError("First singular value must be the smallest")
    return sigma1, tail


def naive_split(M0: Any) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split diag(-s1, s2, ...) into two zero-determinant matrices with mean M0.

    M1 sets the first two entries to (0, 2 s2) and M2 to (-2 s1, 0). The two
    are not rank-one connected in general.

    Raises:
        BadFormError: If M0 is not in canonical diagonal form
    """
    D0 = as_matrix(M0)
    sigma1, tail = _check_canonical(D0, sigma1_smallest=False)
    m1 = D0.copy()
    m1[0, 0] = 0.0
    m1[1, 1] = 2.0 * tail[0]
    m2 = D0.copy()
    m2[0, 0] = -2.0 * sigma1
    m2[1, 1] = 0.0
    return m1, m2


def decompose_step(D0: Any) -> List[LabeledAtom]:
    """
    Four-atom rank-one decomposition of a canonical diagonal matrix.

    With gamma = sqrt(s1 s2): B1, G1, G2, B2 = D0 +- gamma e1 (x) e2 +- gamma e2 (x) e1,
    each with weight 1/4. G1, G2 have zero determinant, B1, B2 twice det D0.

    Args:
        D0: diag(-s1, s2, ..., sd) with 0 < s1 <= s2 <= ... <= sd

    Returns:
        Atoms in the order B1, G1, G2, B2

    Raises:
        BadFormError: If D0 is not in canonical form
    """
    D = as_matrix(D0)
    sigma1, tail = _check_canonical(D, sigma1_smallest=True)
    gamma = math.sqrt(sigma1 * float(tail[0]))
    e12 = np.zeros_like(D)
    e12[0, 1] = gamma
    e21 = np.zeros_like(D)
    e21[1, 0] = gamma
    return [
        LabeledAtom("B1", 0.25, D + e12 + e21, AtomLabel.BAD),
        LabeledAtom("G1", 0.25, D + e12 - e21, AtomLabel.GOOD),
        LabeledAtom("G2", 0.25, D - e12 + e21, AtomLabel.GOOD),
        LabeledAtom("B2", 0.25, D - e12 - e21, AtomLabel.BAD),
    ]


def _expand_level(bad: List[np.ndarray]) -> _LevelSplits:
    splits = _LevelSplits([], [], [], [], [], [], [])
    for matrix in bad:
        factors = signed_svd(matrix, SVDOrdering.NEG_FIRST_ASCENDING)
        gamma = math.sqrt(-factors.theta[0] * factors.theta[1])
        a1, b1 = factors.P[:, 0].copy(), factors.Q[:, 1].copy()
        a2, b2 = factors.P[:, 1].copy(), factors.Q[:, 0].copy()
        first = np.outer(a1, b1)
        second = np.outer(a2, b2)
        left = matrix + gamma * first
        right = matrix + (-gamma) * first
        splits.parents.append(matrix)
        splits.left.append(left)
        splits.right.append(right)
        splits.first.append((a1, b1))
        splits.second.append((a2, b2))
        splits.gamma.append(gamma)
        # (B1, G1) under left, (G2, B2) under right
        splits.good.append((left + (-gamma) * second, right + gamma * second))
    return splits


def build_zero_det_laminate(M0: Any, j: int) -> ZeroDetBuild:
    """
    Build the level-j zero-determinant laminate of a matrix with det M0 < 0.

    Every bad atom is brought to canonical form by the signed SVD and split
    twice with t = 1/2, first along (P e1) (x) (Q e2), then along (P e2) (x) (Q e1).

    Args:
        M0: Matrix with negative determinant
        j: Number of levels, 1 <= j <= 20

    Returns:
        ZeroDetBuild with per-level records

    Raises:
        NotNegativeDetError: If det M0 >= 0
        SingularInputError: If a bad atom has a vanishing singular value
    """
    m0 = as_matrix(M0)
    if not 1 <= j <= MAX_LEVELS:
        raise ConfigInvalidError(f"Level count must be between 1 and {MAX_LEVELS}", field="levels")
    det0 = determinant(m0)
    if not det0 < 0.0:
        logger.error(f"Zero-det construction needs det M0 < 0, got {det0!r}")
        raise NotNegativeDetError(f"det M0 must be negative, got {det0!r}")

    bad: List[np.ndarray] = [m0]
    levels: List[LevelRecord] = []
    level_splits: List[_LevelSplits] = []
    truncated = False
    for level in range(1, j + 1):
        if np.min(np.abs(determinants(np.array(bad)))) < DET_UNDERFLOW:
            logger.debug(f"Determinant underflow before level {level}, stopping")
            truncated = True
            break
        splits = _expand_level(bad)
        new_bad: List[np.ndarray] = []
        good: List[np.ndarray] = []
        steps: List[float] = []
        for k, gamma in enumerate(splits.gamma):
            second = np.outer(*splits.second[k])
            b1 = splits.left[k] + gamma * second
            b2 = splits.right[k] + (-gamma) * second
            g1, g2 = splits.good[k]
            new_bad.extend([b1, b2])
            good.extend([g1, g2])
            parent = splits.parents[k]
            steps.extend(frobenius_norm(atom - parent) for atom in (b1, g1, g2, b2))
        bad_stack = np.array(new_bad)
        levels.append(
            LevelRecord(
                level=level,
                good=np.array(good),
                bad=bad_stack,
                bad_det_magnitude=float(np.max(np.abs(determinants(bad_stack)))),
                max_step_distance=max(steps),
            )
        )
        level_splits.append(splits)
        bad = new_bad
        logger.debug(f"Built level {level}: {len(good)} good, {len(new_bad)} bad atoms")

    nodes: List[Node] = [Leaf(matrix=m, label=AtomLabel.BAD) for m in bad]
    for splits in reversed(level_splits):
        parents: List[Node] = []
        for k, gamma in enumerate(splits.gamma):
            g1, g2 = splits.good[k]
            a2, b2 = splits.second[k]
            a1, b1 = splits.first[k]
            left = split_matrix(
                splits.left[k],
                0.5,
                a2,
                b2,
                gamma,
                -gamma,
                left=nodes[2 * k],
                right=Leaf(matrix=g1, label=AtomLabel.GOOD),
            )
            right = split_matrix(
                splits.right[k],
                0.5,
                a2,
                b2,
                gamma,
                -gamma,
                left=Leaf(matrix=g2, label=AtomLabel.GOOD),
                right=nodes[2 * k + 1],
            )
            parents.append(
                split_matrix(
                    splits.parents[k],
                    0.5,
                    a1,
                    b1,
                    gamma,
                    -gamma,
                    left=left,
                    right=right,
                    label=AtomLabel.BAD,
                )
            )
        nodes = parents

    return ZeroDetBuild(
        m0=m0,
        laminate=Laminate(d=m0.shape[0], tree=nodes[0]),
        levels=levels,
        truncated=truncated,
    )


def _require_same_input(build: ZeroDetBuild, M0: Any) -> np.ndarray:
    m0 = as_matrix(M0)
    if m0.shape != build.m0.shape:
        raise MismatchedInputsError("Dimension of M0 differs from the build")
    if frobenius_norm(m0 - build.m0) > BARYCENTER_TOLERANCE * (1.0 + frobenius_norm(m0)):
        raise MismatchedInputsError("Build was not produced from this M0")
    return m0


def verify_geometry(
    build: ZeroDetBuild, M0: Any, p: float, j: Optional[int] = None
) -> EstimateReport:
    """
    Check the geometric estimates of the level-j measure.

    Checks: barycenter, (H_m) witness, zero determinant of good atoms, bad
    mass 2^-j, bad-determinant growth 2^i |det M0|, the centered and raw
    p-moment bounds with the explicit constant, the negative-determinant
    moment bound and the determinant integral.

    Args:
        build: Output of :func:`build_zero_det_laminate`
        M0: Matrix the build was produced from
        p: Exponent with 1 <= p < d
        j: Level to check (default: all built levels)

    Returns:
        EstimateReport

    Raises:
        MismatchedInputsError: If the build does not belong to M0 or j is not built
        ConfigInvalidError: If p is outside [1, d)
    """
    m0 = _require_same_input(build, M0)
    d = build.d
    if not 1.0 <= p < d:
        raise ConfigInvalidError(f"verify_geometry needs 1 <= p < {d}, got {p}", field="p")
    level = build.j if j is None else j
    weights, matrices, labels = build.measure(level)
    geom = GeomParams(p=p, d=d, j_max=level)
    det0 = abs(determinant(m0))
    norm0 = frobenius_norm(m0)
    report = EstimateReport(title=f"zero-det j={level} p={p!r}", truncated=build.truncated)

    bary = np.einsum("k,kij->ij", weights, matrices)
    residual = frobenius_norm(bary - m0) / (1.0 + norm0)
    report.add("barycenter", residual, BARYCENTER_TOLERANCE, residual <= BARYCENTER_TOLERANCE)

    validation = validate_hm(build.laminate_at(level))
    report.add("hm_witness", validation.max_rank_one_defect, 0.0, validation.passed)

    is_bad = np.array([label == AtomLabel.BAD for label in labels])
    good = matrices[~is_bad]
    if good.shape[0]:
        scaled = np.abs(determinants(good)) / (1.0 + frobenius_norms(good)) ** d
        worst = float(np.max(scaled))
    else:
        worst = 0.0
    report.add("good_det", worst, DET_ZERO_FACTOR, worst <= DET_ZERO_FACTOR)

    bad_mass = float(np.sum(weights[is_bad]))
    expected_mass = 2.0 ** (-level)
    report.add("bad_mass", bad_mass, expected_mass, abs(bad_mass - expected_mass) <= 1e-15)

    growth = 0.0
    for record in build.levels[:level]:
        expected = 2.0**record.level * det0
        dets = np.abs(determinants(record.bad))
        growth = max(growth, float(np.max(np.abs(dets - expected))) / expected)
    report.add("bad_det_growth", growth, 1e-8, growth <= 1e-8)

    stats = measure_statistics(weights, matrices, p, p / d, center=m0)
    centered_bound = geom.c_geom(level) * det0 ** (p / d)
    report.add(
        "centered_moment",
        stats.centered_p_moment,
        centered_bound,
        stats.centered_p_moment <= centered_bound,
    )
    raw_bound = 2.0**p * centered_bound + 2.0**p * norm0**p
    report.add("raw_moment", stats.p_moment, raw_bound, stats.p_moment <= raw_bound)

    det_bound = det0 ** (p / d) * geom.det_moment_factor(level)
    report.add(
        "det_moment",
        stats.neg_det_q_moment,
        det_bound,
        stats.neg_det_q_moment <= det_bound * (1.0 + 1e-12),
    )

    det_error = abs(stats.det_integral + det0) / det0
    report.add("det_integral", stats.det_integral, -det0, det_error <= 1e-9)

    logger.debug(f"verify_geometry j={level} p={p}: passed={report.passed}")
    return report


def rigidity_scan(M0: Any, p_grid: Sequence[float], j_grid: Sequence[int]) -> List[ScanRow]:
    """
    Centered p-moments of the level-j measures over a grid of (p, j).

    For p < d every row is checked against the explicit moment bound; for
    p >= d a row passes when its increment is at least half the first
    increment (no Cauchy decay).

    Args:
        M0: Matrix with det M0 < 0
        p_grid: Exponents in [1, d]
        j_grid: Levels

    Returns:
        Rows ordered by p, then j

    Raises:
        NotNegativeDetError: If det M0 >= 0
    """
    m0 = as_matrix(M0)
    d = m0.shape[0]
    if not j_grid:
        raise ConfigInvalidError("Level grid is empty", field="levels_grid")
    build = build_zero_det_laminate(m0, max(j_grid))
    det0 = abs(determinant(m0))

    rows: List[ScanRow] = []
    for p in p_grid:
        geom = GeomParams(p=p, d=d, j_max=build.j)
        moments = [0.0]
        det_integrals = [determinant(m0)]
        for level in range(1, build.j + 1):
            weights, matrices, _ = build.measure(level)
            stats = measure_statistics(weights, matrices, p, p / d, center=m0)
            moments.append(stats.centered_p_moment)
            det_integrals.append(stats.det_integral)
        first_increment = moments[1] - moments[0] if build.j >= 1 else 0.0
        for level in j_grid:
            if level > build.j:
                continue
            increment = moments[level] - moments[level - 1]
            if p < d:
                bound: Optional[float] = geom.c_geom(level) * det0 ** (p / d)
                passed = moments[level] <= bound
            else:
                bound = None
                passed = increment >= 0.5 * first_increment
            rows.append(
                ScanRow(
                    p=p,
                    j=level,
                    moment_centered=moments[level],
                    increment=increment,
                    det_integral=det_integrals[level],
                    bound=bound,
                    passed=passed,
                )
            )
    return rows
