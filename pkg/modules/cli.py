"""
Module 7: Command-Line Surface

Usage:
    wronski-count count --d 3 --m 1,1,1,1 --methods all
    wronski-count solve --d 4 --m 2,2,1 --seed 7 --json report.json
    wronski-count verify-sweep --max-d 7 --max-n 5 --max-m 4 --csv sweep.csv
    wronski-count tables genfun --order 6

Exit codes:
    0: all routes agree
    1: route disagreement or failed verification
    2: solver coverage shortfall only

Author: Wronski Count
"""

import argparse
import logging
import time
from itertools import product
from typing import List, NamedTuple, Optional, Sequence, Tuple
import sys
import os

import numpy as np
import pandas as pd

# Add parent directory to path for imports
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from utils.helpers import (
    Route,
    SpecRegime,
    ExitCode,
    WronskiError,
    InvalidArgumentError,
    NotCriticalError,
    ReconstructionError,
    load_config,
    setup_logging,
    thread_count,
    parse_int_list,
    parse_complex_list
)
from modules.combinatorics import (
    ProblemSpec,
    count_classes,
    classify_spec,
    dim_sing_formula,
    catalan,
    wronski_map_degree,
    genfun_coefficients
)
from modules.sl2rep import dim_sing_oracle, trivial_multiplicity
from modules.schubert import intersection_number, wronski_map_degree_schubert
from modules.polywronski import NumericPolynomial
from modules.bethe import (
    MasterProblem,
    SolverConfig,
    OrbitSolver,
    reconstruct_class,
    boundary_class,
    verify_class,
    sample_configuration,
    perturbation_spot_check
)
from modules.report_writer import RunReport, ReportWriter, sweep_frame

logger = logging.getLogger(__name__)

MAX_TABLE_ORDER = 64
DEFAULT_METHODS = (Route.FORMULA, Route.SCHUBERT, Route.REP)
ALL_METHODS = (Route.FORMULA, Route.SCHUBERT, Route.SING, Route.REP)

REGIME_NOTES = {
    SpecRegime.VANISHING: ("A critical point of multiplicity above d-1, or a total multiplicity "
                           "outside [d-1, 2d-2], admits no rational function of degree d: "
                           "the count is 0."),
    SpecRegime.BOUNDARY: ("M = d-1: the only class is spanned by 1 and a primitive of "
                          "prod (x - z_j)^m_j, so the count is 1."),
    SpecRegime.SINGLE_POINT: ("A single critical point carries a class exactly when its "
                              "multiplicity is d-1."),
}

SOLVER_FLAGS = ('max_starts', 'saturation_window', 'eps_newton', 'eps_verify',
                'delta_dedupe', 'delta_sep')

# Singular-vector dimensions equal the class count only inside d-1 <= M <= 2d-2, m_j <= d-1.
CLASS_ROUTES = (Route.FORMULA, Route.SCHUBERT)
SKIPPED_ROUTES_NOTE = ("The sing and rep routes count singular vectors, which match the number of "
                       "classes only for admissible specs; they were skipped.")


class SweepResult(NamedTuple):
    exit_code: int
    frame: pd.DataFrame
    offending: List[str]


class TableResult(NamedTuple):
    exit_code: int
    rows: List[Tuple]
    text: str


def _route_count(route: Route, spec: ProblemSpec) -> int:
    if route is Route.FORMULA:
        return count_classes(spec)
    if route is Route.SCHUBERT:
        return intersection_number(spec)
    if route is Route.SING:
        return dim_sing_formula(spec.m, spec.k)
    if route is Route.REP:
        return dim_sing_oracle(spec.m, spec.k)
    raise InvalidArgumentError(f"Route {route.value} is not a closed-form route")


def parse_methods(text: str) -> Tuple[Route, ...]:
    """
    Parse '--methods': 'all' or a comma separated subset of route names.

    Args:
        text: e.g. 'formula,rep'

    Returns:
        Tuple of routes in the given order
    """
    if text.strip() == 'all':
        return ALL_METHODS
    routes = []
    for name in text.split(','):
        try:
            route = Route(name.strip())
        except ValueError:
            raise InvalidArgumentError(f"Unknown route {name.strip()!r}")
        if route is Route.ORBITS:
            raise InvalidArgumentError("The orbits route is only available through 'solve'")
        routes.append(route)
    return tuple(routes)


def cmd_count(d: int, m: Sequence[int], methods: Sequence[Route] = DEFAULT_METHODS) -> RunReport:
    """
    Count classes by the requested closed-form routes.

    Args:
        d: Degree
        m: Multiplicities
        methods: Routes to run

    Returns:
        RunReport with exit code 1 iff the routes disagree
    """
    spec = ProblemSpec(d, tuple(m))
    regime = classify_spec(spec)
    report = RunReport(command='count', spec=spec, regime=regime.value)
    if regime is SpecRegime.VANISHING and any(r not in CLASS_ROUTES for r in methods):
        methods = [r for r in methods if r in CLASS_ROUTES]
        report.notes.append(SKIPPED_ROUTES_NOTE)
    for route in methods:
        start = time.perf_counter()
        report.counts[route.value] = _route_count(route, spec)
        report.timings[route.value] = (time.perf_counter() - start) * 1000
    if regime in REGIME_NOTES:
        report.notes.append(REGIME_NOTES[regime])
    if not report.agreement:
        logger.error(f"Routes disagree for {spec.label()}: {report.counts}")
        report.exit_code = ExitCode.DISAGREEMENT.value
    return report


def _distinct_equation_count(polys: Sequence[NumericPolynomial], tol: float = 1e-6) -> int:
    """Number of pairwise distinct polynomials up to a relative tolerance."""
    distinct: List[NumericPolynomial] = []
    for p in polys:
        if not any((p - q).coefficient_norm() <= tol * max(1.0, q.coefficient_norm())
                   for q in distinct):
            distinct.append(p)
    return len(distinct)


def _solve_instance(prob: MasterProblem, expected: int, cfg: SolverConfig) -> Tuple[List[dict], List, int]:
    """
    Solve, reconstruct and verify one instance.

    Returns:
        (orbit summaries, Van Vleck polynomials, number of failed verifications)
    """
    summaries = []
    van_vleck = []
    failures = 0

    if prob.k == 0:
        rc = boundary_class(prob)
        verification = verify_class(rc, prob, cfg.eps_verify, cfg.delta_sep)
        summaries.append({'points': [], 'reconstruction': rc.to_dict(),
                          'verification': verification.to_dict()})
        failures += 0 if verification.passed else 1
        if verification.van_vleck is not None:
            van_vleck.append(verification.van_vleck)
        return summaries, van_vleck, failures

    solver = OrbitSolver(cfg)
    for orbit in solver.solve(prob, expected):
        summary = orbit.to_dict()
        try:
            rc = reconstruct_class(orbit, prob, cfg.residue_tol, cfg.eps_verify)
        except (NotCriticalError, ReconstructionError) as e:
            logger.error(f"Reconstruction failed: {e}")
            summary.update(reconstruction=None, verification=None, failure=str(e))
            failures += 1
            summaries.append(summary)
            continue
        verification = verify_class(rc, prob, cfg.eps_verify, cfg.delta_sep)
        if not verification.passed:
            logger.error(f"Verification failed for orbit {orbit.points}")
            failures += 1
        if verification.van_vleck is not None:
            van_vleck.append(verification.van_vleck)
        summary.update(reconstruction=rc.to_dict(), verification=verification.to_dict())
        summaries.append(summary)
    return summaries, van_vleck, failures


def cmd_solve(d: int, m: Sequence[int], z: Optional[Sequence[complex]] = None,
              solver_config: SolverConfig = None, spot_check: bool = False) -> RunReport:
    """
    Enumerate, reconstruct and verify every class of a type.

    Args:
        d: Degree
        m: Multiplicities
        z: Critical points (sampled from the seed when omitted)
        solver_config: Solver settings
        spot_check: Also re-solve with z moved by 1e-6 and compare orbit counts

    Returns:
        RunReport; exit code 1 on overcount or failed verification,
        2 on a coverage shortfall only
    """
    cfg = solver_config or SolverConfig()
    spec = ProblemSpec(d, tuple(m))
    if z is None:
        z = sample_configuration(spec.n, np.random.default_rng(cfg.seed))
    spec = ProblemSpec(d, spec.m, tuple(z))
    regime = classify_spec(spec)
    expected = count_classes(spec)
    report = RunReport(command='solve', spec=spec, regime=regime.value,
                       z_used=list(spec.z), config=cfg.to_dict(), seed=cfg.seed)
    report.counts[Route.FORMULA.value] = expected
    if regime in REGIME_NOTES:
        report.notes.append(REGIME_NOTES[regime])

    if expected == 0:
        report.counts[Route.ORBITS.value] = 0
        return report

    prob = MasterProblem.from_spec(spec)
    start = time.perf_counter()
    summaries, van_vleck, failures = _solve_instance(prob, expected, cfg)
    report.timings[Route.ORBITS.value] = (time.perf_counter() - start) * 1000
    report.orbits = summaries
    found = len(summaries)
    report.counts[Route.ORBITS.value] = found
    report.counts['equations'] = _distinct_equation_count(van_vleck)
    if spot_check and prob.k > 0:
        check = perturbation_spot_check(prob, cfg, original=found)
        report.spot_check = check.to_dict()
        if not check.stable:
            report.notes.append(f"Orbit count changed under a 1e-6 move of z "
                                f"({check.original} -> {check.perturbed}); z may not be generic")

    if found > expected:
        report.notes.append(f"Overcount: {found} orbits exceed the bound {expected}")
        report.exit_code = ExitCode.DISAGREEMENT.value
    elif failures:
        report.notes.append(f"{failures} class(es) failed verification")
        report.exit_code = ExitCode.DISAGREEMENT.value
    elif found < expected:
        report.notes.append(f"Solver coverage shortfall: {found} of {expected} orbits found")
        report.exit_code = ExitCode.COVERAGE_SHORTFALL.value
    return report


def sweep_specs(max_d: int, max_n: int, max_m: int):
    """Every ordered spec with 1 <= d <= max_d, 1 <= n <= max_n, 1 <= m_j <= max_m."""
    for d in range(1, max_d + 1):
        for n in range(1, max_n + 1):
            for m in product(range(1, max_m + 1), repeat=n):
                yield ProblemSpec(d, m)


def cmd_verify_sweep(max_d: int, max_n: int, max_m: int, with_bethe: int = 0,
                     solver_config: SolverConfig = None,
                     bethe_max_count: int = 6) -> SweepResult:
    """
    Check formula = schubert = sing = rep on every spec of the grid.

    Admissible specs become CSV rows; vanishing specs are checked for a zero
    count without being listed. With `with_bethe` > 0, that many random rows
    with 1 <= count <= bethe_max_count are also solved end to end.

    Returns:
        SweepResult
    """
    cfg = solver_config or SolverConfig()
    rows = []
    offending = []
    vanishing_checked = 0
    for spec in sweep_specs(max_d, max_n, max_m):
        regime = classify_spec(spec)
        if regime is SpecRegime.VANISHING or (regime is SpecRegime.SINGLE_POINT
                                              and not spec.admissible):
            vanishing_checked += 1
            counts = {route.value: _route_count(route, spec) for route in CLASS_ROUTES}
            if any(counts.values()):
                offending.append(f"{spec.label()} vanishing spec counts {counts}")
            continue
        counts = {route.value: _route_count(route, spec) for route in ALL_METHODS}
        agree = len(set(counts.values())) == 1
        if regime is SpecRegime.BOUNDARY and counts[Route.FORMULA.value] != 1:
            agree = False
        if not agree:
            offending.append(f"{spec.label()} counts {counts}")
        rows.append({'spec': spec.label(), 'd': spec.d, 'm': ",".join(map(str, spec.m)),
                     'regime': regime.value, **counts, 'agree': agree,
                     'orbits': None, 'max_residual': None})
    logger.info(f"Sweep checked {len(rows)} admissible and {vanishing_checked} vanishing specs")

    exit_code = ExitCode.DISAGREEMENT.value if offending else ExitCode.OK.value
    if with_bethe > 0:
        bethe_code = _bethe_rows(rows, with_bethe, cfg, bethe_max_count, offending)
        if exit_code == ExitCode.OK.value:
            exit_code = bethe_code
    return SweepResult(exit_code, sweep_frame(rows), offending)


def _bethe_rows(rows: List[dict], count: int, cfg: SolverConfig, max_count: int,
                offending: List[str]) -> int:
    """Solve `count` random rows in place; return the resulting exit code."""
    candidates = [i for i, row in enumerate(rows)
                  if 1 <= row['formula'] <= max_count and row['regime'] != SpecRegime.BOUNDARY.value]
    rng = np.random.default_rng(cfg.seed)
    if not candidates:
        logger.warning("No sweep rows qualify for end-to-end solving")
        return ExitCode.OK.value
    chosen = sorted(rng.choice(len(candidates), size=min(count, len(candidates)), replace=False))
    exit_code = ExitCode.OK.value
    for position in chosen:
        row = rows[candidates[position]]
        m = tuple(parse_int_list(row['m']))
        z = sample_configuration(len(m), rng)
        prob = MasterProblem(tuple(z), m, row['d'])
        summaries, _, failures = _solve_instance(prob, row['formula'], cfg)
        residuals = [s['reconstruction']['wronskian_residual']
                     for s in summaries if s.get('reconstruction')]
        row['orbits'] = len(summaries)
        row['max_residual'] = max(residuals) if residuals else None
        logger.info(f"Solved {row['spec']}: {len(summaries)} of {row['formula']} orbits")
        if len(summaries) > row['formula'] or failures:
            row['agree'] = False
            offending.append(f"{row['spec']} orbits {len(summaries)} formula {row['formula']} "
                             f"failed verifications {failures}")
            exit_code = ExitCode.DISAGREEMENT.value
        elif len(summaries) < row['formula'] and exit_code == ExitCode.OK.value:
            exit_code = ExitCode.COVERAGE_SHORTFALL.value
    return exit_code


def cmd_tables(kind: str, order: int) -> TableResult:
    """
    Catalan numbers or generating-function coefficients next to their oracles.

    Args:
        kind: 'catalan' or 'genfun'
        order: Number of entries, at most 64

    Returns:
        TableResult; exit code 1 on any mismatch
    """
    if not 1 <= order <= MAX_TABLE_ORDER:
        raise InvalidArgumentError(f"order must lie in [1, {MAX_TABLE_ORDER}], got {order}")
    if kind == 'catalan':
        rows = [(d, catalan(d), trivial_multiplicity([1] * (2 * d - 2)),
                 wronski_map_degree(d), wronski_map_degree_schubert(d))
                for d in range(1, order + 1)]
        title = "Catalan numbers  (index, C_d, L_0 multiplicity, Wronski degree, sigma_1 power)"
    elif kind == 'genfun':
        rows = [(k, value, trivial_multiplicity([1] * k))
                for k, value in enumerate(genfun_coefficients(order), 1)]
        title = "Generating function coefficients  (k, M_k, L_0 multiplicity)"
    else:
        raise InvalidArgumentError(f"Unknown table kind {kind!r}")
    mismatch = any(any(o != row[1] for o in row[2:]) for row in rows)
    if mismatch:
        logger.error(f"{kind} table disagrees with its oracle")
    exit_code = ExitCode.DISAGREEMENT.value if mismatch else ExitCode.OK.value
    return TableResult(exit_code, rows, ReportWriter.format_series_table(title, rows))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="PATH",
                        help="Write the JSON report to PATH ('-' for standard output)")
    common.add_argument("--seed", type=int, help="Random seed (nonnegative integer)")
    common.add_argument("--config", metavar="PATH",
                        help="YAML/JSON file with solver settings or a full settings file")
    common.add_argument("--no-timings", action="store_true",
                        help="Omit timings so that reports are byte-identical across runs")
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="Override the configured log level")

    parser = argparse.ArgumentParser(
        prog="wronski-count",
        description="Count, construct and verify classes of rational functions "
                    "with prescribed critical points"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    count = sub.add_parser("count", parents=[common], help="Count classes by closed-form routes")
    count.add_argument("--d", type=int, required=True, help="Degree of the rational functions")
    count.add_argument("--m", required=True, help="Multiplicities, e.g. 2,2,1")
    count.add_argument("--methods", default="formula,schubert,rep",
                       help="'all' or a subset of formula,schubert,sing,rep")

    solve = sub.add_parser("solve", parents=[common], help="Enumerate and verify the classes")
    solve.add_argument("--d", type=int, required=True, help="Degree of the rational functions")
    solve.add_argument("--m", required=True, help="Multiplicities, e.g. 2,2,1")
    solve.add_argument("--z", help="Critical points as re,im pairs separated by ';'")
    solve.add_argument("--max-starts", type=int, help="Maximum number of Newton starts")
    solve.add_argument("--saturation-window", type=int,
                       help="Stop after this many starts without a new orbit")
    solve.add_argument("--eps-newton", type=float, help="Newton gradient tolerance")
    solve.add_argument("--eps-verify", type=float, help="Verification tolerance")
    solve.add_argument("--delta-dedupe", type=float, help="Orbit deduplication distance")
    solve.add_argument("--delta-sep", type=float, help="Domain separation margin")
    solve.add_argument("--spot-check", action="store_true",
                       help="Re-solve with z moved by 1e-6 and compare orbit counts")

    sweep = sub.add_parser("verify-sweep", parents=[common],
                           help="Check the route identities over a grid of specs")
    sweep.add_argument("--max-d", type=int, help="Largest degree (default from settings)")
    sweep.add_argument("--max-n", type=int, help="Largest number of critical points")
    sweep.add_argument("--max-m", type=int, help="Largest multiplicity")
    sweep.add_argument("--csv", metavar="PATH", help="CSV output path")
    sweep.add_argument("--with-bethe", type=int, default=0, metavar="N",
                       help="Also solve N random instances end to end")

    tables = sub.add_parser("tables", parents=[common], help="Catalan / generating-function tables")
    tables.add_argument("kind", choices=["catalan", "genfun"])
    tables.add_argument("--order", type=int, default=8, help=f"Number of entries (<= {MAX_TABLE_ORDER})")

    return parser


def resolve_config(args: argparse.Namespace, config: dict) -> Tuple[dict, SolverConfig]:
    """
    Merge settings.yaml, an optional --config file and command-line flags.

    Args:
        args: Parsed arguments
        config: Settings loaded from settings.yaml

    Returns:
        (merged configuration, solver config)
    """
    config = {section: (dict(values) if isinstance(values, dict) else values)
              for section, values in config.items()}
    if getattr(args, 'config', None):
        extra = load_config(args.config)
        if 'solver' in extra:
            for section, values in extra.items():
                if isinstance(values, dict):
                    config.setdefault(section, {}).update(values)
                else:
                    config[section] = values
        else:
            config.setdefault('solver', {}).update(extra)

    solver = dict(config.get('solver') or {})
    for name in SOLVER_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            solver[name] = value
    if getattr(args, 'seed', None) is not None:
        solver['seed'] = args.seed
    solver['threads'] = thread_count(config)
    return config, SolverConfig.from_dict(solver)


def run(args: argparse.Namespace, config: dict) -> int:
    config, solver_config = resolve_config(args, config)
    writer = ReportWriter(config, include_timings=not args.no_timings)

    if args.command == "count":
        report = cmd_count(args.d, parse_int_list(args.m), parse_methods(args.methods))
        if args.json:
            writer.write_json(report, args.json)
        if args.json != '-':
            print(writer.format_count_table(report))
        return report.exit_code

    if args.command == "solve":
        z = parse_complex_list(args.z) if args.z else None
        report = cmd_solve(args.d, parse_int_list(args.m), z, solver_config, args.spot_check)
        if args.json:
            writer.write_json(report, args.json)
        if args.json != '-':
            print(writer.format_solve_table(report))
        return report.exit_code

    if args.command == "verify-sweep":
        sweep_config = config.get('sweep', {})
        result = cmd_verify_sweep(
            args.max_d if args.max_d is not None else sweep_config.get('max_d', 7),
            args.max_n if args.max_n is not None else sweep_config.get('max_n', 5),
            args.max_m if args.max_m is not None else sweep_config.get('max_m', 4),
            with_bethe=args.with_bethe,
            solver_config=solver_config,
            bethe_max_count=sweep_config.get('bethe_max_count', 6)
        )
        csv_path = args.csv or sweep_config.get('csv_path')
        if csv_path:
            writer.write_sweep_csv(result.frame.to_dict('records'), csv_path)
        print(writer.format_sweep_summary(result.frame, result.offending))
        return result.exit_code

    if args.command == "tables":
        result = cmd_tables(args.kind, args.order)
        print(result.text)
        return result.exit_code

    raise InvalidArgumentError(f"Unknown command {args.command!r}")


def main(argv: Sequence[str] = None) -> int:
    """
    Parse arguments, run the command and return its exit code.

    Args:
        argv: Argument list (default: sys.argv[1:])

    Returns:
        Process exit code
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    config = load_config()
    setup_logging(config, args.log_level)

    try:
        return run(args, config)
    except WronskiError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return ExitCode.DISAGREEMENT.value


if __name__ == "__main__":
    sys.exit(main())
