"""Acceptance battery run by ``orientlam verify-suite``."""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterator, List, Tuple

import numpy as np

from orientlam.constants import DEFAULT_SEED
from orientlam.enums import AtomLabel, RepairStage
from orientlam.fields import (
    constant_field,
    drift,
    energy_compare,
    lp_distance,
    strict_repair,
    weak_repair,
    zero_mass_envelope,
)
from orientlam.lamination import (
    GeomParams,
    build_delta_laminate,
    build_zero_det_laminate,
    rigidity_scan,
    verify_delta,
)
from orientlam.laminate import measure_statistics
from orientlam.models.reports import SuiteRow
from orientlam.realization import continuity_residual, histogram_tv, realize_laminate, tv_bound
from orientlam.utils.matrix import determinant, determinants, frobenius_norm
from orientlam.utils.rng import make_rng, random_matrices, random_negative_det_matrices

logger = logging.getLogger(__name__)

FLIP = np.diag([-1.0, 1.0])


@dataclass(frozen=True)
class SuiteSize:
    """Corpus sizes of the battery."""

    corpus: int
    max_level: int
    delta_cases: int
    weak_levels: int
    strict_levels: int
    grid: int

    @classmethod
    def reduced(cls) -> "SuiteSize":
        return cls(corpus=20, max_level=10, delta_cases=60, weak_levels=2, strict_levels=4, grid=4)

    @classmethod
    def full(cls) -> "SuiteSize":
        return cls(
            corpus=200, max_level=10, delta_cases=500, weak_levels=3, strict_levels=6, grid=4
        )


def _corpus(size: SuiteSize, seed: int) -> Iterator[np.ndarray]:
    for d in (2, 3):
        rng = make_rng(seed + d)
        yield from random_negative_det_matrices(rng, size.corpus, d)


def _zero_det_rows(size: SuiteSize, seed: int) -> List[SuiteRow]:
    """Bad-mass law, barycenter, det linearity, moment bounds and bad-det growth."""
    mass_error = 0.0
    bary_error = 0.0
    moment_ratio = 0.0
    growth_error = 0.0
    builds = 0
    for m0 in _corpus(size, seed):
        d = m0.shape[0]
        det0 = abs(determinant(m0))
        build = build_zero_det_laminate(m0, size.max_level)
        builds += 1
        exponents = sorted({1.0, 1.25, 1.5, d - 0.1})
        for level in range(1, build.j + 1):
            weights, matrices, labels = build.measure(level)
            bad = np.array([label == AtomLabel.BAD for label in labels])
            mass_error = max(mass_error, abs(float(np.sum(weights[bad])) - 2.0**-level))
            bary = np.einsum("k,kij->ij", weights, matrices)
            det_integral = float(np.sum(weights * determinants(matrices)))
            bary_error = max(
                bary_error,
                frobenius_norm(bary - m0) / (1.0 + frobenius_norm(m0)),
                abs(det_integral + det0) / det0,
            )
            for p in exponents:
                stats = measure_statistics(weights, matrices, p, p / d, center=m0)
                bound = GeomParams(p=p, d=d).c_geom(level) * det0 ** (p / d)
                moment_ratio = max(moment_ratio, stats.centered_p_moment / bound)
        for record in build.levels:
            expected = 2.0**record.level * det0
            dets = np.abs(determinants(record.bad))
            growth_error = max(growth_error, float(np.max(np.abs(dets - expected))) / expected)

    detail = f"{builds} matrices, j <= {size.max_level}"
    return [
        SuiteRow(
            criterion="1-bad-mass",
            measured=mass_error,
            bound=1e-15,
            passed=mass_error <= 1e-15,
            detail=detail,
        ),
        SuiteRow(
            criterion="2-barycenter-det",
            measured=bary_error,
            bound=1e-8,
            passed=bary_error <= 1e-8,
            detail=detail,
        ),
        SuiteRow(
            criterion="3-moment-bounds",
            measured=moment_ratio,
            bound=1.0,
            passed=moment_ratio <= 1.0,
            detail="largest centered moment / bound",
        ),
        SuiteRow(
            criterion="4-bad-det-growth",
            measured=growth_error,
            bound=1e-8,
            passed=growth_error <= 1e-8,
            detail=detail,
        ),
    ]


def _rigidity_rows() -> List[SuiteRow]:
    """Moment growth at p = d against geometric decay at p = 1.5."""
    rows = rigidity_scan(FLIP, [1.5, 2.0], list(range(1, 15)))
    critical = [row for row in rows if row.p == 2.0 and row.j >= 2]
    failures = sum(not row.passed for row in critical)
    increments = {row.j: row.increment for row in rows if row.p == 1.5}
    ratios = [increments[j] / increments[j - 1] for j in range(10, 15)]
    r = GeomParams(p=1.5, d=2).r
    deviation = abs(float(np.mean(ratios)) - r) / r
    return [
        SuiteRow(
            criterion="5-rigidity-p=d",
            measured=float(failures),
            bound=0.0,
            passed=failures == 0,
            detail="levels 2..14 without Cauchy decay",
        ),
        SuiteRow(
            criterion="5-decay-p<d",
            measured=deviation,
            bound=0.1,
            passed=deviation <= 0.1,
            detail=f"tail increment ratio vs r={r!r}",
        ),
    ]


def _delta_rows(size: SuiteSize, seed: int) -> List[SuiteRow]:
    """Delta-shift estimates on random (M0, delta) and the M0 = 0 equality case."""
    rng = make_rng(seed + 100)
    failures = 0
    cases = 0
    for k in range(size.delta_cases):
        d = 2 + k % 3
        m0 = random_matrices(rng, 1, d)[0]
        delta = float(rng.uniform(0.05, 1.5))
        report = verify_delta(build_delta_laminate(m0, delta), m0, delta, 1.5)
        failures += not report.passed
        cases += 1
    equality = 0.0
    for d in (2, 3, 4):
        zero = np.zeros((d, d))
        build = build_delta_laminate(zero, 0.1)
        stats = measure_statistics(
            build.laminate.atoms.weights, build.laminate.atoms.matrices, 1.5, 1.0, center=zero
        )
        expected = (2.0 * math.sqrt(d) * 0.1) ** 1.5
        equality = max(equality, abs(stats.centered_p_moment - expected) / expected)
    return [
        SuiteRow(
            criterion="6-delta-shift",
            measured=float(failures),
            bound=0.0,
            passed=failures == 0,
            detail=f"{cases} random cases",
        ),
        SuiteRow(
            criterion="6-delta-equality",
            measured=equality,
            bound=1e-12,
            passed=equality <= 1e-12,
            detail="M0 = 0, d = 2, 3, 4",
        ),
    ]


def _weak_row(size: SuiteSize) -> SuiteRow:
    p = 1.5
    field = constant_field(FLIP, size.grid)
    repaired, trace = weak_repair(field, p, l_max=size.weak_levels)
    def0 = trace.initial.det_deficiency
    law = all(
        s.det_deficiency <= 2.0 ** (-s.l * p) * def0 * (1.0 + 1e-9)
        for s in trace.steps
        if s.stage == RepairStage.LAMINATE
    )
    cost = lp_distance(field, repaired, p) ** p
    bound = GeomParams(p=p, d=2).c_geom(1) * def0
    untouched = all(s.changed_on_good == 0.0 for s in trace.steps)
    passed = trace.final.neg_mass == 0.0 and law and untouched and cost <= bound
    return SuiteRow(
        criterion="7-weak-repair",
        measured=cost,
        bound=bound,
        passed=passed,
        detail=f"l_max={size.weak_levels}, deficiency law={law}, untouched={untouched}",
    )


def _strict_row(size: SuiteSize) -> SuiteRow:
    field = constant_field(np.zeros((2, 2)), size.grid)
    budget = 1.0
    repaired, trace = strict_repair(field, 1.5, l_max=size.strict_levels, budget=budget)
    zero0 = trace.initial.zero_mass
    envelope = all(
        s.zero_mass <= zero_mass_envelope(s.l, zero0) * (1.0 + 1e-12)
        for s in trace.steps
        if s.stage == RepairStage.SPLIT
    )
    total = drift(trace)
    positive = trace.final.zero_mass == 0.0 and trace.final.neg_mass == 0.0
    return SuiteRow(
        criterion="8-strict-repair",
        measured=total,
        bound=budget,
        passed=positive and envelope and total <= budget,
        detail=f"l_max={size.strict_levels}, envelope={envelope}, min det > 0={positive}",
    )


def _realization_rows() -> List[SuiteRow]:
    lam = build_zero_det_laminate(FLIP, 1).laminate
    rows: List[SuiteRow] = []
    for epsilon in (0.2, 0.1, 0.05):
        smap = realize_laminate(lam, depth_cap=2, epsilon=epsilon, periods=8)
        tv = histogram_tv(smap, lam)
        jump = continuity_residual(smap)
        bound = tv_bound(epsilon, lam.depth())
        rows.append(
            SuiteRow(
                criterion=f"9-realization-eps={epsilon!r}",
                measured=tv,
                bound=bound,
                passed=tv <= bound and jump <= 1e-12,
                detail=f"continuity residual {jump!r}",
            )
        )
    return rows


def _energy_rows(size: SuiteSize) -> List[SuiteRow]:
    field = constant_field(FLIP, size.grid)
    pnorm = energy_compare(field, 1.5, "pnorm:2", weak_levels=1, strict_levels=2)
    det = energy_compare(field, 1.5, "det", weak_levels=1, strict_levels=2)
    # every non-closing stage keeps the det integral of the last closing stage
    spread = 0.0
    reference = determinant(FLIP)
    for record in det.records:
        if record.stage == RepairStage.CLOSE:
            reference = record.field_energy
            continue
        spread = max(spread, abs(record.field_energy - reference))
    return [
        SuiteRow(
            criterion="10-energy-pnorm",
            measured=pnorm.gap,
            bound=1e-10,
            passed=pnorm.gap <= 1e-10,
            detail="realized vs measure energy",
        ),
        SuiteRow(
            criterion="10-energy-det",
            measured=spread,
            bound=1e-10,
            passed=spread <= 1e-10,
            detail="det integral on lamination and split stages",
        ),
    ]


def run_suite(full: bool = False, seed: int = DEFAULT_SEED) -> List[SuiteRow]:
    """
    Run the acceptance battery.

    Args:
        full: Use the full corpus sizes instead of the reduced ones
        seed: Base seed of the random corpora

    Returns:
        One or more rows per criterion, in criterion order
    """
    size = SuiteSize.full() if full else SuiteSize.reduced()
    stages: List[Tuple[str, Callable[[], List[SuiteRow]]]] = [
        ("zero-det", lambda: _zero_det_rows(size, seed)),
        ("rigidity", _rigidity_rows),
        ("delta-shift", lambda: _delta_rows(size, seed)),
        ("weak", lambda: [_weak_row(size)]),
        ("strict", lambda: [_strict_row(size)]),
        ("realization", _realization_rows),
        ("energy", lambda: _energy_rows(size)),
    ]
    rows: List[SuiteRow] = []
    for name, stage in stages:
        logger.debug(f"Suite stage {name}")
        rows.extend(stage())
    return rows
