"""Command-line entry point: ``orientlam <command> [options]``."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, NoReturn, Optional, Sequence, Tuple

from orientlam.enums import Command, RepairStage
from orientlam.exceptions import ConfigInvalidError, OrientLamError
from orientlam.fields import (
    GradientField,
    drift,
    energy_compare,
    field_from_dict,
    field_to_dict,
    make_field,
    strict_repair,
    weak_repair,
    zero_mass_envelope,
)
from orientlam.lamination import (
    build_delta_laminate,
    build_zero_det_laminate,
    rigidity_scan,
    verify_delta,
    verify_geometry,
)
from orientlam.laminate import laminate_from_dict, laminate_to_dict
from orientlam.models.config import DeltaSchedule, RepairSchedule, RunConfig
from orientlam.models.reports import EstimateReport, RepairTrace, ScanRow, SuiteRow
from orientlam.realization import (
    map_to_dict,
    realization_summary,
    realize_laminate,
    sample_grid,
)
from orientlam.suite import run_suite
from orientlam.utils.serialization import (
    dumps,
    matrix_to_list,
    parse_matrix,
    read_json,
    write_csv,
    write_json,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CHECK_FAILED = 2

Outcome = Tuple[bool, Dict[str, Any]]


class _Parser(argparse.ArgumentParser):
    """Argument parser reporting usage errors as ConfigInvalidError."""

    def error(self, message: str) -> NoReturn:
        raise ConfigInvalidError(message)


def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigInvalidError(f"Not a list of numbers: {text!r}", field="p_grid") from e


def _level_list(text: str) -> List[int]:
    """``a..b`` (inclusive) or a comma list."""
    try:
        if ".." in text:
            lo, _, hi = text.partition("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigInvalidError(f"Not a level range: {text!r}", field="levels_grid") from e


def _add_field_source(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--field", dest="field_path", type=Path, help="Field JSON to load")
    parser.add_argument("--generator", default="constant", help="Field generator tag")
    parser.add_argument("--matrix", help="Matrix of the constant field (JSON rows or @file)")
    parser.add_argument("--n", type=int, default=4, help="Cells per axis")
    parser.add_argument("--dimension", type=int, default=2, help="Field dimension")
    parser.add_argument("--mix", type=float, default=0.3, help="Negative-det cell fraction")
    parser.add_argument("--p", type=float, default=1.5, help="Exponent p < d")
    parser.add_argument("--l-max", type=int, default=2, help="Repair iterations")


def build_parser() -> argparse.ArgumentParser:
    """Parser with one subcommand per pipeline."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--emit-dir", type=Path, default=Path("."), help="Artifact directory")
    common.add_argument("--seed", type=int, default=0, help="Seed of the PCG64 generator")
    common.add_argument("--verbose", action="store_true", help="Debug logging")

    parser = _Parser(prog="orientlam", description="Orientation-preserving laminates")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    zero = sub.add_parser(Command.ZERO_DET.value, parents=[common], help="Zero-det laminate")
    zero.add_argument("--matrix", required=True, help="M0 with det < 0")
    zero.add_argument("--levels", type=int, default=6, help="Lamination levels j")
    zero.add_argument("--verify", type=float, help="Check the estimates at exponent p")
    zero.add_argument("--scan", dest="p_grid", type=_float_list, help="Scan exponents: 1.5,2")
    zero.add_argument(
        "--levels-grid", dest="levels_grid", type=_level_list, help="Scan levels, e.g. 2..14"
    )

    delta = sub.add_parser(Command.DELTA_SHIFT.value, parents=[common], help="Delta shift")
    delta.add_argument("--matrix", required=True, help="M0")
    delta.add_argument("--delta", type=float, required=True, help="Shift size")
    delta.add_argument("--verify", type=float, help="Check the estimates at exponent p")

    weak = sub.add_parser(Command.REPAIR.value, parents=[common], help="Weak repair")
    _add_field_source(weak)
    weak.add_argument("--level-offset", type=int, default=1, help="j0 in j(l) = l + j0")
    weak.add_argument("--no-close", dest="close", action="store_false", help="Skip closing")

    strict = sub.add_parser(Command.STRICT_REPAIR.value, parents=[common], help="Strict repair")
    _add_field_source(strict)
    strict.add_argument("--budget", type=float, default=1.0, help="Total L^p drift budget")
    strict.add_argument("--delta0", type=float, default=0.1, help="Initial shift size")
    strict.add_argument("--inner-levels", type=int, help="Fixed level for new det<0 atoms")
    strict.add_argument("--no-close", dest="close", action="store_false", help="Skip closing")

    scan = sub.add_parser(
        Command.RIGIDITY_SCAN.value, parents=[common], help="Alias of zero-det --scan"
    )
    scan.add_argument("--matrix", required=True, help="M0 with det < 0")
    scan.add_argument("--p", dest="p_grid", type=_float_list, required=True, help="e.g. 1.5,2")
    scan.add_argument(
        "--levels", dest="levels_grid", type=_level_list, required=True, help="e.g. 2..14"
    )

    real = sub.add_parser(Command.REALIZE.value, parents=[common], help="Realize a laminate")
    real.add_argument("--laminate", dest="laminate_path", type=Path, help="Laminate JSON")
    real.add_argument("--matrix", help="Realize the zero-det laminate of this M0 instead")
    real.add_argument("--levels", type=int, default=1, help="Levels of that laminate")
    real.add_argument("--epsilon", type=float, default=0.05, help="Scale ratio in (0, 1/4)")
    real.add_argument("--depth", type=int, default=2, help="Depth cap (at most 3)")
    real.add_argument("--periods", type=int, default=8, help="Top-level periods")
    real.add_argument(
        "--emit", type=lambda s: [x for x in s.split(",") if x], default=["map.json"]
    )
    real.add_argument("--grid-size", type=int, default=64, help="Samples per axis")

    energy = sub.add_parser(Command.ENERGY.value, parents=[common], help="Energy tracking")
    _add_field_source(energy)
    energy.add_argument("--integrand", default="pnorm:2", help="Integrand tag")
    energy.add_argument("--budget", type=float, default=1.0, help="Strict drift budget")

    suite = sub.add_parser(Command.VERIFY_SUITE.value, parents=[common], help="Acceptance suite")
    suite.add_argument("--full", action="store_true", help="Full corpus sizes")
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    values = {k: v for k, v in vars(args).items() if v is not None}
    if "matrix" in values:
        values["matrix"] = matrix_to_list(parse_matrix(values["matrix"]))
    return RunConfig.build(**values)


def _load_field(config: RunConfig) -> GradientField:
    if config.field_path is not None:
        try:
            return field_from_dict(read_json(config.field_path))
        except (OSError, ValueError) as e:
            raise ConfigInvalidError(f"Cannot read field: {e}", field="field_path") from e
    return make_field(
        config.generator,
        config.n,
        d=config.dimension,
        seed=config.seed,
        matrix=config.matrix,
        mix=config.mix,
    )


def _write_report(config: RunConfig, report: EstimateReport) -> None:
    write_csv(config.emit_dir / "report.csv", EstimateReport.header(), report.rows())


def _run_zero_det(config: RunConfig) -> Outcome:
    build = build_zero_det_laminate(config.require("matrix"), config.levels)
    write_json(config.emit_dir / "laminate.json", laminate_to_dict(build.laminate))
    summary: Dict[str, Any] = {
        "levels": build.j,
        "truncated": build.truncated,
        "atoms": len(build.laminate),
    }
    passed = True
    if config.verify is not None:
        report = verify_geometry(build, config.matrix, config.verify)
        _write_report(config, report)
        passed = report.passed
        summary["failures"] = [c.name for c in report.checks if not c.passed]
    if config.p_grid or config.levels_grid:
        scanned, rows = _scan(config)
        passed = passed and scanned
        summary["scan_rows"] = rows
    return passed, summary


def _run_delta_shift(config: RunConfig) -> Outcome:
    delta = config.require("delta")
    build = build_delta_laminate(config.require("matrix"), delta)
    write_json(config.emit_dir / "laminate.json", laminate_to_dict(build.laminate))
    summary: Dict[str, Any] = {"L": build.L, "atoms": build.atom_count}
    passed = True
    if config.verify is not None:
        report = verify_delta(build, config.matrix, delta, config.verify)
        _write_report(config, report)
        passed = report.passed
        summary["failures"] = [c.name for c in report.checks if not c.passed]
    return passed, summary


def _write_trace(config: RunConfig, field: GradientField, trace: RepairTrace) -> None:
    write_json(config.emit_dir / "field.json", field_to_dict(field))
    write_csv(config.emit_dir / "trace.csv", RepairTrace.header(), trace.rows())


def _run_repair(config: RunConfig) -> Outcome:
    field = _load_field(config)
    schedule = RepairSchedule(level_offset=config.level_offset)
    repaired, trace = weak_repair(
        field, config.p, schedule=schedule, l_max=config.l_max, close=config.close
    )
    _write_trace(config, repaired, trace)
    def0 = trace.initial.det_deficiency
    law = all(
        s.det_deficiency <= 2.0 ** (-s.l * config.p) * def0 * (1.0 + 1e-9)
        for s in trace.steps
        if s.stage == RepairStage.LAMINATE
    )
    bounded = all(s.lp_bound is None or s.lp_step <= s.lp_bound for s in trace.steps)
    oriented = trace.final.neg_mass == 0.0 or not config.close
    summary = {
        "iterations": trace.iterations,
        "neg_mass": trace.final.neg_mass,
        "pieces": trace.final.pieces,
        "deficiency_law": law,
        "steps_bounded": bounded,
    }
    return law and bounded and oriented, summary


def _run_strict_repair(config: RunConfig) -> Outcome:
    field = _load_field(config)
    repaired, trace = strict_repair(
        field,
        config.p,
        schedule=DeltaSchedule(delta0=config.delta0),
        l_max=config.l_max,
        budget=config.budget,
        inner_levels=config.inner_levels,
        close=config.close,
    )
    _write_trace(config, repaired, trace)
    zero0 = trace.initial.zero_mass
    envelope = all(
        s.zero_mass <= zero_mass_envelope(s.l, zero0) * (1.0 + 1e-12)
        for s in trace.steps
        if s.stage == RepairStage.SPLIT
    )
    total = drift(trace)
    strict = trace.final.zero_mass == 0.0 and trace.final.neg_mass == 0.0
    positive = strict or not config.close
    summary = {
        "iterations": trace.iterations,
        "zero_mass": trace.final.zero_mass,
        "neg_mass": trace.final.neg_mass,
        "min_det_positive": strict,
        "drift": total,
        "envelope": envelope,
    }
    return envelope and positive and total <= config.budget, summary


def _scan(config: RunConfig) -> Tuple[bool, int]:
    """Write scan.csv over the configured (p, j) grid."""
    if not config.p_grid:
        raise ConfigInvalidError("A level grid needs exponents to scan", field="p_grid")
    if not config.levels_grid:
        raise ConfigInvalidError("A scan needs a level grid", field="levels_grid")
    rows = rigidity_scan(config.require("matrix"), config.p_grid, config.levels_grid)
    write_csv(config.emit_dir / "scan.csv", ScanRow.header(), [r.to_row() for r in rows])
    return all(r.passed for r in rows), len(rows)


def _run_rigidity_scan(config: RunConfig) -> Outcome:
    passed, rows = _scan(config)
    return passed, {"rows": rows}


def _run_realize(config: RunConfig) -> Outcome:
    if config.laminate_path is not None:
        try:
            lam = laminate_from_dict(read_json(config.laminate_path))
        except (OSError, ValueError) as e:
            raise ConfigInvalidError(f"Cannot read laminate: {e}", field="laminate_path") from e
    else:
        lam = build_zero_det_laminate(config.require("matrix"), config.levels).laminate
    smap = realize_laminate(
        lam, depth_cap=config.depth, epsilon=config.epsilon, periods=config.periods
    )
    if "map.json" in config.emit:
        write_json(config.emit_dir / "map.json", map_to_dict(smap))
    if "grid.csv" in config.emit:
        header, rows = sample_grid(smap, config.grid_size)
        write_csv(config.emit_dir / "grid.csv", header, rows)
    summary = realization_summary(smap, lam)
    passed = summary["tv"] <= summary["tv_bound"] and summary["continuity"] <= 1e-12
    return passed, summary


def _run_energy(config: RunConfig) -> Outcome:
    field = _load_field(config)
    report = energy_compare(
        field,
        config.p,
        config.integrand,
        weak_levels=config.l_max,
        strict_levels=config.l_max,
        budget=config.budget,
    )
    write_csv(config.emit_dir / "energy.csv", report.header(), report.rows())
    summary = {
        "integrand": report.integrand,
        "field_energy": report.final_field_energy,
        "measure_energy": report.final_measure_energy,
        "tolerance": report.tolerance,
    }
    return report.passed, summary


def _run_verify_suite(config: RunConfig) -> Outcome:
    rows = run_suite(full=config.full, seed=config.seed)
    write_csv(config.emit_dir / "summary.csv", SuiteRow.header(), [r.to_row() for r in rows])
    failed = [r.criterion for r in rows if not r.passed]
    return not failed, {"criteria": len(rows), "failed": failed}


HANDLERS: Dict[Command, Callable[[RunConfig], Outcome]] = {
    Command.ZERO_DET: _run_zero_det,
    Command.DELTA_SHIFT: _run_delta_shift,
    Command.REPAIR: _run_repair,
    Command.STRICT_REPAIR: _run_strict_repair,
    Command.RIGIDITY_SCAN: _run_rigidity_scan,
    Command.REALIZE: _run_realize,
    Command.ENERGY: _run_energy,
    Command.VERIFY_SUITE: _run_verify_suite,
}


def dispatch(config: RunConfig) -> int:
    """
    Run the configured pipeline and write its artifacts.

    Returns:
        0 when every check passes, 2 when a check fails
    """
    try:
        config.emit_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigInvalidError(f"Cannot create {config.emit_dir}: {e}", field="emit_dir") from e
    passed, summary = HANDLERS[config.command](config)
    summary = {"command": config.command.value, "passed": passed, **summary}
    sys.stdout.write(dumps(summary))
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run and map every error to exit code 1."""
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            level=logging.DEBUG if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        return dispatch(_config(args))
    except OrientLamError as e:
        field = getattr(e, "field", None)
        prefix = f"{type(e).__name__}" + (f" [{field}]" if field else "")
        sys.stderr.write(f"{prefix}: {e}\n")
        return EXIT_ERROR
    except Exception as e:
        logger.debug("Unexpected failure", exc_info=True)
        sys.stderr.write(f"{type(e).__name__}: {e}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
