"""Weak and strict orientation repair of piecewise-constant gradient fields."""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from orientlam.constants import (
    DEFAULT_BUDGET,
    DEFICIENCY_SLACK,
    DET_ZERO_FACTOR,
    MAX_LEVELS,
    MAX_SUBCELLS,
    MIN_DELTA,
)
from orientlam.enums import RepairStage
from orientlam.exceptions import (
    ConfigInvalidError,
    NotWeaklyOrientedError,
    ScheduleExhaustedError,
    SubdivisionOverflowError,
)
from orientlam.fields.grid import GradientField, Slabs, field_energy, field_stats
from orientlam.lamination.delta_shift import build_delta_laminate
from orientlam.lamination.zero_det import GeomParams, build_zero_det_laminate
from orientlam.laminate import measure_energy
from orientlam.models.config import DeltaSchedule, RepairSchedule
from orientlam.models.integrand import Integrand, resolve_integrand
from orientlam.models.reports import EnergyRecord, FieldStats, RepairStep, RepairTrace
from orientlam.utils.matrix import (
    det_zero_tolerance,
    determinant,
    determinants,
    frobenius_norm,
    frobenius_norms,
    lift_singular_values,
    nearest_zero_det,
)

logger = logging.getLogger(__name__)

Selector = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class _Expansion:
    """Measure replacing one piece: relative weights and matrices."""

    weights: np.ndarray
    matrices: np.ndarray

    @classmethod
    def dirac(cls, matrix: np.ndarray) -> "_Expansion":
        return cls(weights=np.ones(1), matrices=matrix[None, :, :])


@dataclass(frozen=True, eq=False)
class _StageResult:
    field: GradientField
    cost: float
    changed_on_good: float
    measure_energy: Optional[float]


def _negative(det: np.ndarray, tau: np.ndarray) -> np.ndarray:
    return det < -tau


def _zero(det: np.ndarray, tau: np.ndarray) -> np.ndarray:
    return np.abs(det) <= tau


def _refine_cell(
    cell: Slabs,
    select: Selector,
    expand: Callable[[np.ndarray], _Expansion],
    p: float,
    integrand: Optional[Integrand],
) -> Tuple[Slabs, float, float, float]:
    det = determinants(cell.matrices)
    tau = det_zero_tolerance(cell.matrices)
    mask = select(det, tau)
    plain_energy = 0.0
    if integrand is not None:
        values = integrand.evaluate(cell.matrices)
        plain_energy = float(np.sum(cell.weights[~mask] * values[~mask]))
    if not mask.any():
        return cell, 0.0, 0.0, plain_energy

    weights: List[np.ndarray] = []
    matrices: List[np.ndarray] = []
    costs: List[float] = []
    energies: List[float] = []
    start = 0
    for k in np.flatnonzero(mask):
        weights.append(cell.weights[start:k])
        matrices.append(cell.matrices[start:k])
        w = float(cell.weights[k])
        parent = cell.matrices[k]
        sub = expand(parent)
        weights.append(w * sub.weights)
        matrices.append(sub.matrices)
        costs.append(w * float(np.sum(sub.weights * frobenius_norms(sub.matrices - parent) ** p)))
        if integrand is not None:
            energies.append(w * measure_energy(sub.weights, sub.matrices, integrand))
        start = k + 1
    weights.append(cell.weights[start:])
    matrices.append(cell.matrices[start:])

    refined = Slabs(weights=np.concatenate(weights), matrices=np.concatenate(matrices))
    changed_on_good = float(np.sum(cell.weights[mask & (det >= -tau)]))
    return refined, float(np.sum(costs)), changed_on_good, plain_energy + float(np.sum(energies))


def _refine(
    field: GradientField,
    select: Selector,
    expand: Callable[[np.ndarray], _Expansion],
    p: float,
    integrand: Optional[Integrand],
) -> _StageResult:
    """Replace every selected piece by its expansion, processing shared cells once."""
    memo: Dict[int, Tuple[Slabs, float, float, float]] = {}
    cells: List[Slabs] = []
    count = field.cell_count
    costs = np.empty(count)
    changed = np.empty(count)
    energies = np.empty(count)
    for i, cell in enumerate(field.cells):
        key = id(cell)
        if key not in memo:
            memo[key] = _refine_cell(cell, select, expand, p, integrand)
        new_cell, costs[i], changed[i], energies[i] = memo[key]
        cells.append(new_cell)
    refined = GradientField(d=field.d, n=field.n, cells=tuple(cells))
    pieces = refined.piece_count()
    if pieces > MAX_SUBCELLS:
        raise SubdivisionOverflowError(f"Refinement needs {pieces} pieces (cap {MAX_SUBCELLS})")
    vol = field.cell_volume
    return _StageResult(
        field=refined,
        cost=float(np.sum(costs)) * vol,
        changed_on_good=float(np.sum(changed)) * vol,
        measure_energy=float(np.sum(energies)) * vol if integrand is not None else None,
    )


def _step(
    l: int,
    stage: RepairStage,
    stats: FieldStats,
    lp_step: float = 0.0,
    lp_bound: Optional[float] = None,
    changed_on_good: float = 0.0,
    level: Optional[int] = None,
    delta: Optional[float] = None,
) -> RepairStep:
    return RepairStep(
        l=l,
        stage=stage,
        neg_mass=stats.neg_mass,
        zero_mass=stats.zero_mass,
        det_deficiency=stats.det_deficiency,
        lp_step=lp_step,
        lp_bound=lp_bound,
        changed_on_good=changed_on_good,
        level=level,
        delta=delta,
        pieces=stats.pieces,
    )


def _record_energy(
    trace: RepairTrace,
    integrand: Optional[Integrand],
    stage: RepairStage,
    l: int,
    field: GradientField,
    measure: Optional[float],
) -> None:
    if integrand is None:
        return
    value = field_energy(field, integrand)
    trace.energy.append(
        EnergyRecord(
            stage=stage,
            l=l,
            field_energy=value,
            measure_energy=value if measure is None else measure,
        )
    )


def _predicted_pieces(field: GradientField, j: int) -> int:
    """Piece count after laminating every negative piece at level j (3 * 2^j - 2 atoms each)."""
    memo: Dict[int, int] = {}
    total = 0
    for cell in field.cells:
        key = id(cell)
        if key not in memo:
            det = determinants(cell.matrices)
            negatives = int(np.sum(_negative(det, det_zero_tolerance(cell.matrices))))
            memo[key] = len(cell) + negatives * (3 * 2**j - 3)
        total += memo[key]
    return total


def _resolve(integrand: Union[None, str, Integrand]) -> Optional[Integrand]:
    return None if integrand is None else resolve_integrand(integrand)


def weak_repair(
    field: GradientField,
    p: float,
    schedule: Optional[RepairSchedule] = None,
    l_max: int = 2,
    close: bool = True,
    integrand: Union[None, str, Integrand] = None,
) -> Tuple[GradientField, RepairTrace]:
    """
    Drive the negative-determinant part of a field to zero by lamination.

    Iteration l laminates every det < 0 piece with the zero-determinant
    construction at level j(l), escalating j until the deficiency is at most
    2^(-l p) times the initial deficiency. The laminate's atoms become
    consecutive slabs of the piece; det >= 0 pieces are never touched. The
    closing stage projects the remaining det < 0 pieces to their nearest
    zero-determinant matrix.

    Args:
        field: Input field
        p: Exponent with 1 < p < d
        schedule: Level schedule (default j(l) = l + 1, cap 20)
        l_max: Number of lamination iterations
        close: Run the closing stage
        integrand: Optional integrand for energy records

    Returns:
        Repaired field and its trace (row 0 is the input state). A field
        without negative pieces is returned as is.

    Raises:
        ScheduleExhaustedError: If the level cap is reached before the test passes
        SubdivisionOverflowError: If the refinement would exceed 2^24 pieces
    """
    d = field.d
    if not 1.0 < p < d:
        raise ConfigInvalidError(f"weak repair needs 1 < p < {d}, got {p}", field="p")
    if l_max < 1:
        raise ConfigInvalidError("l_max must be at least 1", field="l_max")
    schedule = schedule or RepairSchedule()
    f = _resolve(integrand)

    stats = field_stats(field, p)
    trace = RepairTrace(p=p, steps=[_step(0, RepairStage.INITIAL, stats)])
    _record_energy(trace, f, RepairStage.INITIAL, 0, field, None)
    if stats.neg_mass == 0.0:
        logger.debug("Field has no negative pieces, nothing to repair")
        return field, trace

    def0 = stats.det_deficiency
    cache: Dict[Tuple[bytes, int], _Expansion] = {}

    def laminate_at(level: int) -> Callable[[np.ndarray], _Expansion]:
        def expand(matrix: np.ndarray) -> _Expansion:
            key = (matrix.tobytes(), level)
            if key not in cache:
                atoms = build_zero_det_laminate(matrix, level).laminate.atoms
                cache[key] = _Expansion(weights=atoms.weights, matrices=atoms.matrices)
            return cache[key]

        return expand

    current = field
    for l in range(1, l_max + 1):
        target = 2.0 ** (-l * p) * def0
        j = schedule.level(l)
        while True:
            if j > schedule.max_level:
                logger.error(f"Level cap reached in weak iteration {l}")
                raise ScheduleExhaustedError(
                    f"No level <= {schedule.max_level} meets the deficiency target", iteration=l
                )
            predicted = _predicted_pieces(current, j)
            if predicted > MAX_SUBCELLS:
                raise SubdivisionOverflowError(
                    f"Iteration {l} at level {j} needs {predicted} pieces (cap {MAX_SUBCELLS})"
                )
            result = _refine(current, _negative, laminate_at(j), p, f)
            new_stats = field_stats(result.field, p)
            if new_stats.det_deficiency <= target * (1.0 + DEFICIENCY_SLACK):
                break
            logger.debug(f"Iteration {l}: level {j} misses the target, escalating")
            j += 1

        previous_target = 2.0 ** (-(l - 1) * p) * def0 * (1.0 + DEFICIENCY_SLACK)
        bound = (GeomParams(p=p, d=d).c_geom(j) * previous_target) ** (1.0 / p)
        trace.steps.append(
            _step(
                l,
                RepairStage.LAMINATE,
                new_stats,
                lp_step=result.cost ** (1.0 / p),
                lp_bound=bound,
                changed_on_good=result.changed_on_good,
                level=j,
            )
        )
        _record_energy(trace, f, RepairStage.LAMINATE, l, result.field, result.measure_energy)
        current = result.field
        stats = new_stats
        logger.debug(f"Weak iteration {l}: level {j}, {stats.pieces} pieces")

    if close and stats.neg_mass > 0.0:
        result = _refine(
            current, _negative, lambda m: _Expansion.dirac(nearest_zero_det(m)), p, f
        )
        closing_bound = stats.det_deficiency ** (1.0 / p) * (1.0 + DEFICIENCY_SLACK)
        stats = field_stats(result.field, p)
        trace.steps.append(
            _step(
                l_max + 1,
                RepairStage.CLOSE,
                stats,
                lp_step=result.cost ** (1.0 / p),
                lp_bound=closing_bound,
                changed_on_good=result.changed_on_good,
            )
        )
        _record_energy(trace, f, RepairStage.CLOSE, l_max + 1, result.field, result.measure_energy)
        current = result.field
    return current, trace


def _shift_expansion(
    matrix: np.ndarray,
    delta: float,
    inner_level: int,
    cache: Dict[Tuple[bytes, float, int], _Expansion],
) -> _Expansion:
    """Delta-shift laminate of a piece with its negative atoms laminated onto det = 0."""
    key = (matrix.tobytes(), delta, inner_level)
    if key in cache:
        return cache[key]
    atoms = build_delta_laminate(matrix, delta).laminate.atoms
    weights: List[np.ndarray] = []
    matrices: List[np.ndarray] = []
    for w, atom in zip(atoms.weights, atoms.matrices):
        if not determinant(atom) < -float(det_zero_tolerance(atom)):
            weights.append(np.array([w]))
            matrices.append(atom[None, :, :])
            continue
        inner = build_zero_det_laminate(atom, inner_level).laminate.atoms
        weights.append(w * inner.weights)
        matrices.append(inner.matrices)
    expansion = _Expansion(weights=np.concatenate(weights), matrices=np.concatenate(matrices))
    cache[key] = expansion
    return expansion


def _inner_level(added: float, target: float, r: float) -> int:
    """
    Smallest level whose leftover deficiency meets the target.

    A level-j zero-det laminate keeps r^j of an atom's deficiency, so the
    level-1 leftover ``added`` shrinks by r per extra level.
    """
    if added <= target:
        return 1
    return 1 + math.ceil(math.log(added / target) / math.log(1.0 / r) - 1e-12)


def _nonpositive(det: np.ndarray, tau: np.ndarray) -> np.ndarray:
    return det <= tau


def _lift_floor(matrix: np.ndarray, eta0: float) -> float:
    """Smallest lift that keeps the lifted determinant above four times its zero tolerance."""
    d = matrix.shape[0]
    scale = 1.0 + frobenius_norm(matrix) + 2.0 * math.sqrt(d) * eta0
    return (4.0 * DET_ZERO_FACTOR) ** (1.0 / d) * scale


def strict_repair(
    field: GradientField,
    p: float,
    schedule: Optional[DeltaSchedule] = None,
    l_max: int = 4,
    budget: float = DEFAULT_BUDGET,
    inner_levels: Optional[int] = None,
    close: bool = True,
    integrand: Union[None, str, Integrand] = None,
) -> Tuple[GradientField, RepairTrace]:
    """
    Make a weakly orientation-preserving field strictly orientation-preserving.

    Iteration l replaces every det = 0 piece by its delta-shift laminate with
    delta_l = delta0 2^-l, whose negative atoms are laminated at once with the
    zero-determinant construction. The inner level is the smallest one that
    leaves at most (2^-(l+2) budget)^p of new det deficiency; delta is halved
    until the L^p step is at most 2^-(l+1) budget. Split iterations conserve
    every cell's mean and det integral. The closing stage projects the
    leftover det < 0 pieces to det = 0 and lifts the sub-eta singular values
    of all zero pieces to a positive eta.

    Args:
        field: Field with det >= 0 on every piece
        p: Exponent with 1 <= p < d
        schedule: Shift schedule (default delta0 = 0.1)
        l_max: Number of shift iterations
        budget: Total L^p drift budget
        inner_levels: Fixed zero-determinant level for negative shift atoms
            (default: chosen per iteration from the deficiency target)
        close: Run the closing stage
        integrand: Optional integrand for energy records

    Returns:
        Repaired field and its trace. A field with det > 0 everywhere is
        returned as is.

    Raises:
        NotWeaklyOrientedError: If the field has det < 0 pieces
        ScheduleExhaustedError: If delta falls below 1e-12 or closing cannot meet its budget
        SubdivisionOverflowError: If a split would exceed 2^24 pieces
    """
    d = field.d
    if not 1.0 <= p < d:
        raise ConfigInvalidError(f"strict repair needs 1 <= p < {d}, got {p}", field="p")
    if not budget > 0.0:
        raise ConfigInvalidError("budget must be positive", field="budget")
    if l_max < 1:
        raise ConfigInvalidError("l_max must be at least 1", field="l_max")
    if inner_levels is not None and not 1 <= inner_levels <= MAX_LEVELS:
        raise ConfigInvalidError(
            f"inner_levels must be between 1 and {MAX_LEVELS}", field="inner_levels"
        )
    schedule = schedule or DeltaSchedule()
    f = _resolve(integrand)
    r = GeomParams(p=p, d=d).r

    stats = field_stats(field, p)
    if stats.neg_mass > 0.0:
        logger.error(f"Strict repair input has negative mass {stats.neg_mass!r}")
        raise NotWeaklyOrientedError(f"Field has det < 0 on volume {stats.neg_mass!r}")
    trace = RepairTrace(p=p, steps=[_step(0, RepairStage.INITIAL, stats)])
    _record_energy(trace, f, RepairStage.INITIAL, 0, field, None)
    if stats.zero_mass == 0.0:
        logger.debug("Field is strictly orientation-preserving already")
        return field, trace

    cache: Dict[Tuple[bytes, float, int], _Expansion] = {}

    def split(current: GradientField, delta: float, level: int) -> _StageResult:
        return _refine(
            current, _zero, lambda m: _shift_expansion(m, delta, level, cache), p, f
        )

    current = field
    delta = schedule.delta0
    last_l = 0
    for l in range(1, l_max + 1):
        if stats.zero_mass == 0.0:
            break
        target = 2.0 ** (-(l + 1)) * budget
        deficiency_target = (2.0 ** (-(l + 2)) * budget) ** p
        delta = schedule.delta(l)
        while True:
            if delta < MIN_DELTA:
                logger.error(f"Shift size underflow in strict iteration {l}")
                raise ScheduleExhaustedError(
                    f"delta fell below {MIN_DELTA} in iteration {l}", iteration=l
                )
            level = inner_levels or 1
            result = split(current, delta, level)
            if inner_levels is None and result.cost ** (1.0 / p) <= target:
                added = field_stats(result.field, p).det_deficiency - stats.det_deficiency
                level = _inner_level(added, deficiency_target, r)
                if level > MAX_LEVELS:
                    logger.debug(f"Iteration {l}: delta={delta!r} needs level {level}")
                    delta *= 0.5
                    continue
                if level > 1:
                    result = split(current, delta, level)
            if result.cost ** (1.0 / p) <= target:
                break
            delta *= 0.5
        stats = field_stats(result.field, p)
        trace.steps.append(
            _step(
                l,
                RepairStage.SPLIT,
                stats,
                lp_step=result.cost ** (1.0 / p),
                lp_bound=target,
                changed_on_good=result.changed_on_good,
                level=level,
                delta=delta,
            )
        )
        _record_energy(trace, f, RepairStage.SPLIT, l, result.field, result.measure_energy)
        current = result.field
        last_l = l
        logger.debug(
            f"Strict iteration {l}: delta={delta!r}, level {level}, zero mass {stats.zero_mass!r}"
        )

    if close and (stats.zero_mass > 0.0 or stats.neg_mass > 0.0):
        l = last_l + 1
        # projection moves a det < 0 piece by sigma_1 <= |det|^(1/d)
        bound = stats.det_deficiency ** (1.0 / p) * (1.0 + DEFICIENCY_SLACK)
        bound += 2.0 ** (-(l + 1)) * budget
        eta0 = delta
        eta = eta0
        while True:
            lift = eta

            def expand(matrix: np.ndarray) -> _Expansion:
                if determinant(matrix) < -float(det_zero_tolerance(matrix)):
                    matrix = nearest_zero_det(matrix)
                level = max(lift, _lift_floor(matrix, eta0))
                return _Expansion.dirac(lift_singular_values(matrix, level))

            result = _refine(current, _nonpositive, expand, p, f)
            if result.cost ** (1.0 / p) <= bound:
                break
            eta *= 0.5
            if eta < MIN_DELTA:
                raise ScheduleExhaustedError(
                    "Closing lift cannot meet its budget", iteration=l
                )
        stats = field_stats(result.field, p)
        if stats.zero_mass > 0.0 or stats.neg_mass > 0.0 or stats.min_det <= 0.0:
            raise ScheduleExhaustedError("Closing left non-positive determinants", iteration=l)
        trace.steps.append(
            _step(
                l,
                RepairStage.CLOSE,
                stats,
                lp_step=result.cost ** (1.0 / p),
                lp_bound=bound,
                changed_on_good=result.changed_on_good,
                delta=eta,
            )
        )
        _record_energy(trace, f, RepairStage.CLOSE, l, result.field, result.measure_energy)
        current = result.field
    return current, trace


def drift(trace: RepairTrace) -> float:
    """Sum of the recorded L^p steps."""
    return float(sum(step.lp_step for step in trace.steps))


def zero_mass_envelope(l: int, zero_mass0: float) -> float:
    """l / 2^l + |Z^0| / 2^l."""
    return (l + zero_mass0) * 2.0 ** (-l)
