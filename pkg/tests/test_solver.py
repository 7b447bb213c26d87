import random
from fractions import Fraction

import pytest

from conftest import make_chain, naive_total_cost, random_problem
from wfplace.cost import DeploymentPlan, evaluate
from wfplace.errors import EnumerationLimitError, ValidationError
from wfplace.model import CostMatrix, Service, Workflow
from wfplace.solver import (
    SolveRequest,
    lower_bound,
    solve_branch_and_bound,
    solve_brute_force,
    solve_centralized,
    speedup,
    sweep_overhead,
)


def chain_request(overhead=0, max_engines=None):
    workflow, matrix = make_chain()
    return SolveRequest(workflow, matrix, ("r1", "r2"), overhead, max_engines)


class TestSolveRequest:
    def test_empty_regions(self):
        workflow, matrix = make_chain()
        with pytest.raises(ValidationError):
            SolveRequest(workflow, matrix, ())

    def test_duplicate_regions(self):
        workflow, matrix = make_chain()
        with pytest.raises(ValidationError):
            SolveRequest(workflow, matrix, ("r1", "r1"))

    def test_unknown_region(self):
        workflow, matrix = make_chain()
        with pytest.raises(ValidationError, match="mars"):
            SolveRequest(workflow, matrix, ("r1", "mars"))

    def test_max_engines_bounds(self):
        workflow, matrix = make_chain()
        with pytest.raises(ValidationError):
            SolveRequest(workflow, matrix, ("r1",), max_engines=0)
        with pytest.raises(ValidationError):
            SolveRequest(workflow, matrix, ("r1",), max_engines=2)


class TestBruteForce:
    def test_singleton_space(self):
        workflow = Workflow((Service("s1", "x", 1, 1),), ())
        matrix = CostMatrix.from_rows(["r", "x"], [[0, 1], [1, 0]])
        solution = solve_brute_force(SolveRequest(workflow, matrix, ("r",)))
        assert solution.plan.assignment == {"s1": "r"}
        assert solution.nodes_explored == 1
        assert solution.proven_optimal

    def test_chain_prefers_split_at_zero_overhead(self):
        solution = solve_brute_force(chain_request(0))
        assert solution.plan.assignment == {"s1": "r1", "s2": "r2"}
        assert solution.report.total_cost == 10

    def test_chain_ties_break_lexicographically_at_high_overhead(self):
        solution = solve_brute_force(chain_request(10))
        assert solution.plan.assignment == {"s1": "r1", "s2": "r1"}
        assert solution.report.total_cost == 18

    def test_cap_refusal_names_the_space(self):
        with pytest.raises(EnumerationLimitError, match=r"2\^2 = 4"):
            solve_brute_force(chain_request(0), cap=3)

    def test_max_engines_restricts(self):
        solution = solve_brute_force(chain_request(0, max_engines=1))
        assert solution.report.engines_used == 1
        assert solution.report.total_cost == 18


class TestBranchAndBound:
    def test_matches_brute_force_on_random_instances(self):
        for seed in range(60):
            workflow, matrix, regions = random_problem(seed)
            overhead = (0, 7, 10_000)[seed % 3]
            request = SolveRequest(workflow, matrix, regions, overhead)
            exact = solve_branch_and_bound(request)
            oracle = solve_brute_force(request)
            assert exact.plan.assignment == oracle.plan.assignment, seed
            assert exact.report.total_cost == oracle.report.total_cost, seed
            assert exact.proven_optimal

    def test_single_region_explores_linearly(self):
        workflow, matrix = make_chain()
        request = SolveRequest(workflow, matrix, ("r1",))
        solution = solve_branch_and_bound(request)
        assert solution.plan.assignment == {"s1": "r1", "s2": "r1"}
        assert solution.nodes_explored <= len(workflow.services) + 1

    def test_threads_return_identical_plan(self):
        for seed in (3, 8, 13):
            workflow, matrix, regions = random_problem(seed)
            request = SolveRequest(workflow, matrix, regions, overhead_rate=2)
            sequential = solve_branch_and_bound(request, threads=1)
            parallel = solve_branch_and_bound(request, threads=3)
            assert sequential.plan.assignment == parallel.plan.assignment
            assert sequential.report.total_cost == parallel.report.total_cost

    def test_deterministic_repeat(self):
        request = chain_request(3)
        assert solve_branch_and_bound(request) == solve_branch_and_bound(request)

    def test_solution_report_is_evaluate_of_plan(self):
        workflow, matrix, regions = random_problem(5)
        request = SolveRequest(workflow, matrix, regions, overhead_rate=1)
        solution = solve_branch_and_bound(request)
        assert solution.report == evaluate(workflow, solution.plan, matrix)


class TestLowerBound:
    def test_empty_prefix_is_nonnegative_and_admissible(self):
        request = chain_request(4)
        bound = lower_bound(request, {})
        assert bound >= 0
        assert bound <= solve_brute_force(request).report.total_cost

    def test_full_assignment_is_exact(self, chain):
        workflow, matrix = chain
        request = chain_request(7)
        for assignment in (
            {"s1": "r1", "s2": "r2"},
            {"s1": "r2", "s2": "r2"},
            {"s1": "r2", "s2": "r1"},
        ):
            report = evaluate(workflow, DeploymentPlan(assignment, 7), matrix)
            assert lower_bound(request, assignment) == report.total_cost

    def test_admissible_on_random_prefixes(self):
        rng = random.Random(23)
        for seed in range(40):
            workflow, matrix, regions = random_problem(seed)
            overhead = rng.choice((0, 3, 50))
            request = SolveRequest(workflow, matrix, regions, overhead)
            order = [s.id for s in workflow.services]
            prefix_len = rng.randint(0, len(order))
            partial = {sid: rng.choice(regions) for sid in order[:prefix_len]}
            bound = lower_bound(request, partial)
            best = min(
                naive_total_cost(workflow, matrix, {**partial, **dict(zip(
                    order[prefix_len:], completion))}, overhead)
                for completion in _all_completions(regions, len(order) - prefix_len)
            )
            assert bound <= best, (seed, partial)

    def test_unknown_service_rejected(self):
        with pytest.raises(ValidationError, match="s9"):
            lower_bound(chain_request(), {"s9": "r1"})


def _all_completions(regions, count):
    import itertools

    return itertools.product(regions, repeat=count) if count else [()]


class TestSweep:
    def test_zero_rate_minimizes_pure_movement(self):
        request = chain_request()
        [(rate, solution)] = sweep_overhead(request, [0])
        assert rate == 0
        assert solution.report.total_movement == 10

    def test_rate_above_single_engine_movement_collapses_to_one_engine(self):
        request = chain_request()
        results = sweep_overhead(request, [19])
        assert results[0][1].report.engines_used == 1
        assert results[0][1].report.total_cost == 18

    def test_monotone_in_rate(self):
        for seed in (2, 9, 14):
            workflow, matrix, regions = random_problem(seed)
            request = SolveRequest(workflow, matrix, regions)
            results = sweep_overhead(request, [0, 1, 5, 25, 3000])
            engines = [s.report.engines_used for _, s in results]
            movement = [s.report.total_movement for _, s in results]
            assert engines == sorted(engines, reverse=True)
            assert movement == sorted(movement)

    def test_empty_rates_rejected(self):
        with pytest.raises(ValidationError):
            sweep_overhead(chain_request(), [])


class TestCentralizedAndSpeedup:
    def test_matches_single_engine_brute_force_at_best_region(self):
        for seed in (1, 4, 7):
            workflow, matrix, regions = random_problem(seed)
            request = SolveRequest(workflow, matrix, regions)
            single = solve_brute_force(
                SolveRequest(workflow, matrix, regions, max_engines=1)
            )
            best_region = single.plan.assignment[workflow.services[0].id]
            baseline = solve_centralized(request, best_region)
            assert baseline.plan.assignment == single.plan.assignment
            assert baseline.report.total_cost == single.report.total_cost

    def test_chain_baseline_cost(self):
        baseline = solve_centralized(chain_request(), "r1")
        assert baseline.report.total_cost == 18
        assert baseline.report.engines_used == 1
        assert baseline.report.total_overhead == 0

    def test_region_outside_candidates_allowed(self):
        # a user's home site can serve as a baseline without being a
        # candidate engine region
        baseline = solve_centralized(chain_request(), "a")
        assert baseline.report.engines_used == 1

    def test_unknown_region(self):
        with pytest.raises(ValidationError, match="mars"):
            solve_centralized(chain_request(), "mars")

    def test_speedup_identity(self):
        solution = solve_branch_and_bound(chain_request())
        assert speedup(solution, solution) == 1

    def test_speedup_of_chain(self):
        baseline = solve_centralized(chain_request(), "r1")
        optimized = solve_branch_and_bound(chain_request())
        assert speedup(baseline, optimized) == Fraction(9, 5)

    def test_zero_movement_rejected(self):
        workflow = Workflow((Service("s1", "x", 0, 0),), ())
        matrix = CostMatrix.from_rows(["r", "x"], [[0, 1], [1, 0]])
        solution = solve_brute_force(SolveRequest(workflow, matrix, ("r",)))
        with pytest.raises(ValidationError):
            speedup(solution, solution)


def test_decentralization_dominance():
    # unrestricted optimum <= best single-engine optimum <= any centralized plan
    for seed in (0, 5, 10, 15):
        workflow, matrix, regions = random_problem(seed)
        free = solve_branch_and_bound(SolveRequest(workflow, matrix, regions))
        single = solve_branch_and_bound(
            SolveRequest(workflow, matrix, regions, max_engines=1)
        )
        assert free.report.total_movement <= single.report.total_movement
        for region in regions:
            baseline = solve_centralized(SolveRequest(workflow, matrix, regions), region)
            assert single.report.total_movement <= baseline.report.total_movement
