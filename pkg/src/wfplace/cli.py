"""Command-line pipeline: validate, solve, sweep, simulate, compare.

Exit codes: 0 success, 1 semantic validation failure, 2 I/O or parse
failure, 3 internal consistency failure (oracle or model/simulation
mismatch -- always a bug, never bad input).
"""

from __future__ import annotations

import argparse
import sys

from .cost import DeploymentPlan, check_plan, evaluate, format_cost_report
from .errors import (
    ConsistencyError,
    DeadlockError,
    EnumerationLimitError,
    ParseError,
    ValidationError,
)
from .files import load_cost_matrix, load_workflow
from .model import missing_locations, validate_workflow
from .plans import parse_deployment_plan, serialize_deployment_plan
from .rational import Rational, format_rational, parse_rational
from .sim import plan_from_deployment, service_completion_times, simulate
from .solver import (
    SolveRequest,
    solve_branch_and_bound,
    solve_brute_force,
    solve_centralized,
    speedup,
)


def _parse_rate(text: str) -> Rational:
    value = parse_rational(text)
    if value < 0:
        raise argparse.ArgumentTypeError("rates must be non-negative")
    return value


def _parse_rates(text: str) -> list[Rational]:
    items = [part for part in text.split(",") if part.strip()]
    if not items:
        raise argparse.ArgumentTypeError("expected a comma-separated list of rates")
    return [_parse_rate(part) for part in items]


def _build_request(args) -> SolveRequest:
    workflow = load_workflow(args.workflow)
    matrix = load_cost_matrix(args.matrix)
    problems = validate_workflow(workflow) + missing_locations(workflow, matrix)
    if problems:
        raise ValidationError("; ".join(str(p) for p in problems))
    if args.regions:
        regions = tuple(r for r in args.regions.split(",") if r)
    else:
        regions = tuple(matrix.locations)
    return SolveRequest(
        workflow=workflow,
        cost_matrix=matrix,
        candidate_regions=regions,
        overhead_rate=getattr(args, "overhead", 0) or 0,
        max_engines=getattr(args, "max_engines", None),
    )


def _cmd_validate(args) -> int:
    workflow = load_workflow(args.workflow)
    matrix = load_cost_matrix(args.matrix)
    problems = validate_workflow(workflow) + missing_locations(workflow, matrix)
    if problems:
        for problem in problems:
            print(problem)
        return 1
    print("OK")
    return 0


def _cmd_solve(args) -> int:
    request = _build_request(args)
    solution = solve_branch_and_bound(request, threads=args.threads)
    if args.oracle:
        reference = solve_brute_force(request)
        if (reference.plan.assignment != solution.plan.assignment
                or reference.report.total_cost != solution.report.total_cost):
            raise ConsistencyError(
                "branch-and-bound disagrees with brute force: "
                f"{solution.plan.assignment} total {solution.report.total_cost} vs "
                f"{reference.plan.assignment} total {reference.report.total_cost}"
            )
    print(serialize_deployment_plan(solution.plan.assignment), end="")
    print()
    print(format_cost_report(solution.report), end="")
    return 0


def _cmd_sweep(args) -> int:
    request = _build_request(args)
    separator = "\t" if args.format == "tsv" else "  "
    print(separator.join(("rate", "engines", "movement", "total")))
    for rate in args.rates:
        solution = solve_branch_and_bound(
            SolveRequest(
                request.workflow, request.cost_matrix, request.candidate_regions,
                overhead_rate=rate, max_engines=request.max_engines,
            ),
            threads=args.threads,
        )
        report = solution.report
        print(separator.join((
            format_rational(rate),
            str(report.engines_used),
            format_rational(report.total_movement),
            format_rational(report.total_cost),
        )))
    return 0


def _check_model_matches_simulation(workflow, matrix, assignment) -> dict:
    """Simulate a deployment and cross-check it against the cost model."""
    plan = DeploymentPlan(assignment)
    check_plan(workflow, plan, matrix)
    report = evaluate(workflow, plan, matrix)
    _, execution, config = plan_from_deployment(workflow, assignment, matrix)
    trace = simulate(execution, config)
    times = service_completion_times(execution, trace)
    for sid, expected in report.cost_up_to.items():
        if times[sid] != expected:
            raise ConsistencyError(
                f"simulated completion of {sid} is {times[sid]},"
                f" cost model says {expected}"
            )
    if trace.makespan != report.total_movement:
        raise ConsistencyError(
            f"simulated makespan {trace.makespan} differs from"
            f" modelled movement {report.total_movement}"
        )
    return times


def _cmd_simulate(args) -> int:
    workflow = load_workflow(args.workflow)
    matrix = load_cost_matrix(args.matrix)
    problems = validate_workflow(workflow) + missing_locations(workflow, matrix)
    if problems:
        raise ValidationError("; ".join(str(p) for p in problems))
    with open(args.plan, encoding="utf-8") as handle:
        assignment = parse_deployment_plan(handle.read())
    missing = [sid for sid in workflow.service_ids() if sid not in assignment]
    if missing:
        raise ValidationError(f"plan assigns no region to: {', '.join(missing)}")
    times = _check_model_matches_simulation(workflow, matrix, assignment)
    for sid in workflow.service_ids():
        print(f"service {sid} done {format_rational(times[sid])}")
    print(f"makespan {format_rational(max(times.values()))}")
    return 0


def _cmd_compare(args) -> int:
    request = _build_request(args)
    baseline = solve_centralized(request, args.baseline_region)
    optimized = solve_branch_and_bound(request, threads=args.threads)
    _check_model_matches_simulation(
        request.workflow, request.cost_matrix, baseline.plan.assignment
    )
    _check_model_matches_simulation(
        request.workflow, request.cost_matrix, optimized.plan.assignment
    )
    ratio = speedup(baseline, optimized)
    print(f"baseline_movement {format_rational(baseline.report.total_movement)}")
    print(f"optimized_movement {format_rational(optimized.report.total_movement)}")
    print(f"speedup {format_rational(ratio)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wfplace",
        description="Place workflow engines across regions to minimize data movement.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_solver=True):
        p.add_argument("workflow", help="workflow file")
        p.add_argument("matrix", help="cost matrix file")
        if with_solver:
            p.add_argument("--regions", default="",
                           help="comma-separated candidate engine regions"
                                " (default: every matrix location)")
            p.add_argument("--threads", type=int, default=1,
                           help="solver worker threads (same plan regardless)")

    validate = sub.add_parser("validate", help="check a workflow against a matrix")
    add_common(validate, with_solver=False)
    validate.set_defaults(func=_cmd_validate)

    solve = sub.add_parser("solve", help="find the cheapest deployment plan")
    add_common(solve)
    solve.add_argument("--overhead", type=_parse_rate, required=True,
                       help="cost added per engine beyond the first")
    solve.add_argument("--max-engines", type=int, default=None)
    solve.add_argument("--oracle", action="store_true",
                       help="cross-check against brute force (exit 3 on mismatch)")
    solve.set_defaults(func=_cmd_solve)

    sweep = sub.add_parser("sweep", help="solve once per overhead rate")
    add_common(sweep)
    sweep.add_argument("--rates", type=_parse_rates, required=True,
                       help="comma-separated overhead rates")
    sweep.add_argument("--max-engines", type=int, default=None)
    sweep.add_argument("--format", choices=("tsv", "text"), default="tsv")
    sweep.set_defaults(func=_cmd_sweep)

    simulate_cmd = sub.add_parser(
        "simulate", help="simulate a deployment plan and cross-check the cost model"
    )
    add_common(simulate_cmd, with_solver=False)
    simulate_cmd.add_argument("plan", help="deployment plan file")
    simulate_cmd.set_defaults(func=_cmd_simulate)

    compare = sub.add_parser(
        "compare", help="speedup of the optimal deployment over a centralized baseline"
    )
    add_common(compare)
    compare.add_argument("--baseline-region", required=True)
    compare.add_argument("--overhead", type=_parse_rate, default=0)
    compare.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, EnumerationLimitError, DeadlockError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConsistencyError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
