"""Exact minimization of deployment cost over service-to-region assignments.

Two solvers share one objective and one tie-breaking rule:

* solve_brute_force enumerates every assignment (guarded by a cap) and is
  the oracle the branch-and-bound solver is tested against.
* solve_branch_and_bound assigns services depth-first in topological order
  and prunes with an admissible lower bound, so it returns a provably
  optimal plan without visiting the whole space.

Ties on total cost are broken by the lexicographically smallest assignment
vector, reading services in workflow declaration order and regions in
candidate order. Both solvers implement exactly that rule, so equal-cost
instances yield identical plans, not merely equal costs.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping, Sequence

from .cost import CostReport, DeploymentPlan, evaluate, invocation_cost
from .errors import EnumerationLimitError, ValidationError
from .model import CostMatrix, Workflow, topological_order, validate_workflow
from .rational import Rational

DEFAULT_ENUMERATION_CAP = 10_000_000


@dataclass(frozen=True)
class SolveRequest:
    """One optimization problem: workflow, costs, candidate engine regions,
    overhead rate, and an optional hard cap on distinct engines."""

    workflow: Workflow
    cost_matrix: CostMatrix
    candidate_regions: tuple[str, ...]
    overhead_rate: Rational = 0
    max_engines: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "candidate_regions", tuple(self.candidate_regions))
        if not self.candidate_regions:
            raise ValidationError("candidate_regions must be non-empty")
        if len(set(self.candidate_regions)) != len(self.candidate_regions):
            raise ValidationError("candidate_regions contains duplicates")
        unknown = [r for r in self.candidate_regions if r not in set(self.cost_matrix.locations)]
        if unknown:
            raise ValidationError(f"candidate regions not in cost matrix: {unknown}")
        if self.overhead_rate < 0:
            raise ValidationError("overhead_rate must be non-negative")
        if self.max_engines is not None:
            if self.max_engines < 1:
                raise ValidationError("max_engines must be positive")
            if self.max_engines > len(self.candidate_regions):
                raise ValidationError("max_engines exceeds the number of candidate regions")


@dataclass(frozen=True)
class Solution:
    plan: DeploymentPlan
    report: CostReport
    nodes_explored: int
    proven_optimal: bool


class _Instance:
    """A SolveRequest compiled to integer indices for the search loops."""

    def __init__(self, req: SolveRequest):
        problems = validate_workflow(req.workflow)
        if problems:
            raise ValidationError(
                "invalid workflow: " + "; ".join(str(v) for v in problems)
            )
        self.req = req
        workflow = req.workflow
        self.ids = list(workflow.service_ids())
        self.n = len(self.ids)
        self.regions = req.candidate_regions
        self.m = len(self.regions)
        index = {sid: i for i, sid in enumerate(self.ids)}
        self.topo = [index[sid] for sid in topological_order(workflow)]
        self.preds: list[list[tuple[int, Rational]]] = [[] for _ in range(self.n)]
        for producer, consumer in workflow.edges:
            out = workflow.services[index[producer]].out_size
            self.preds[index[consumer]].append((index[producer], out))
        matrix = req.cost_matrix
        self.rcost = [
            [matrix.cost(a, b) for b in self.regions] for a in self.regions
        ]
        self.invo = [
            [invocation_cost(svc, r, matrix) for r in self.regions]
            for svc in workflow.services
        ]
        self.min_invo = [min(row) for row in self.invo]
        self.overhead = req.overhead_rate
        self.max_engines = req.max_engines if req.max_engines is not None else self.m
        self._joint_min: dict[tuple[int, int, Rational], Rational] = {}

    def assignment_cost(self, assign: Sequence[int]) -> Rational:
        """Exact total cost of a full assignment (region index per service)."""
        upto: list[Rational] = [0] * self.n
        movement: Rational = 0
        for i in self.topo:
            engine = assign[i]
            slowest: Rational = 0
            for j, out in self.preds[i]:
                shipped = upto[j] + self.rcost[assign[j]][engine] * out
                if shipped > slowest:
                    slowest = shipped
            value = slowest + self.invo[i][engine]
            upto[i] = value
            if value > movement:
                movement = value
        engines = len(set(assign))
        return movement + self.overhead * (engines - 1)

    def _joint(self, svc: int, pred_region: int, out: Rational) -> Rational:
        """min over regions r of transfer(pred_region -> r) * out + invocation(svc @ r)."""
        key = (svc, pred_region, out)
        cached = self._joint_min.get(key)
        if cached is None:
            row = self.rcost[pred_region]
            invo = self.invo[svc]
            cached = min(row[r] * out + invo[r] for r in range(self.m))
            self._joint_min[key] = cached
        return cached

    def bound(self, assigned: Mapping[int, int]) -> Rational:
        """Admissible lower bound on the total cost of any completion.

        Assigned services accumulate exactly (transfers from unassigned
        predecessors bounded by zero); unassigned services take the best
        case over regions, jointly with the incoming transfer when the
        predecessor's engine is already fixed. Engines already in use
        contribute their overhead; future engines contribute nothing.
        """
        value: list[Rational] = [0] * self.n
        movement: Rational = 0
        for i in self.topo:
            engine = assigned.get(i)
            if engine is not None:
                slowest: Rational = 0
                for j, out in self.preds[i]:
                    pred_engine = assigned.get(j)
                    shipped = value[j]
                    if pred_engine is not None:
                        shipped = shipped + self.rcost[pred_engine][engine] * out
                    if shipped > slowest:
                        slowest = shipped
                best = slowest + self.invo[i][engine]
            elif not self.preds[i]:
                best = self.min_invo[i]
            else:
                best = 0
                for j, out in self.preds[i]:
                    pred_engine = assigned.get(j)
                    if pred_engine is not None:
                        shipped = value[j] + self._joint(i, pred_engine, out)
                    else:
                        shipped = value[j] + self.min_invo[i]
                    if shipped > best:
                        best = shipped
            value[i] = best
            if best > movement:
                movement = best
        engines = len(set(assigned.values()))
        if engines > 1:
            movement = movement + self.overhead * (engines - 1)
        return movement

    def centralized_cost(self) -> Rational:
        return min(self.assignment_cost([r] * self.n) for r in range(self.m))

    def to_solution(self, assign: Sequence[int], nodes: int,
                    proven: bool = True) -> Solution:
        plan = DeploymentPlan(
            {sid: self.regions[assign[i]] for i, sid in enumerate(self.ids)},
            self.req.overhead_rate,
        )
        report = evaluate(self.req.workflow, plan, self.req.cost_matrix)
        return Solution(plan, report, nodes, proven)


def solve_brute_force(req: SolveRequest, *,
                      cap: int = DEFAULT_ENUMERATION_CAP) -> Solution:
    """Enumerate every assignment and return the cheapest, ties broken
    lexicographically. Refuses instances whose search space exceeds cap."""
    inst = _Instance(req)
    space = inst.m**inst.n
    if space > cap:
        raise EnumerationLimitError(
            f"search space {inst.m}^{inst.n} = {space} exceeds the cap of {cap}"
        )
    best_cost: Rational | None = None
    best_assign: tuple[int, ...] | None = None
    for assign in itertools.product(range(inst.m), repeat=inst.n):
        if len(set(assign)) > inst.max_engines:
            continue
        cost = inst.assignment_cost(assign)
        if best_cost is None or cost < best_cost:
            best_cost = cost
            best_assign = assign
    assert best_assign is not None
    return inst.to_solution(best_assign, nodes=space)


def _dfs(inst: _Instance, order: Sequence[int], incumbent_cost: Rational,
         preassigned: Mapping[int, int] | None = None,
         stop_on_adopt: bool = False) -> tuple[Rational, tuple[int, ...] | None, int]:
    """Depth-first search over the suffix of `order` not covered by
    `preassigned`. Starts with a cost-only incumbent (no plan held), so
    descending into equal-bound subtrees is allowed until the first plan at
    the incumbent cost is adopted; visiting leaves in lexicographic order
    then makes the held plan the lexicographically smallest optimum.
    """
    assigned: dict[int, int] = dict(preassigned or {})
    region_counts = [0] * inst.m
    for r in assigned.values():
        region_counts[r] += 1
    used = sum(1 for c in region_counts if c)
    incumbent_plan: tuple[int, ...] | None = None
    nodes = 0
    n, m = inst.n, inst.m
    done = False

    def rec():
        nonlocal incumbent_cost, incumbent_plan, nodes, used, done
        nodes += 1
        depth = len(assigned)
        if depth == n:
            cost = inst.bound(assigned)
            if cost < incumbent_cost or (cost == incumbent_cost and incumbent_plan is None):
                incumbent_cost = cost
                incumbent_plan = tuple(assigned[i] for i in range(n))
                if stop_on_adopt:
                    done = True
            return
        i = order[depth]
        for r in range(m):
            fresh = region_counts[r] == 0
            if fresh and used == inst.max_engines:
                continue
            assigned[i] = r
            region_counts[r] += 1
            if fresh:
                used += 1
            b = inst.bound(assigned)
            if b < incumbent_cost or (b == incumbent_cost and incumbent_plan is None):
                rec()
            region_counts[r] -= 1
            if fresh:
                used -= 1
            del assigned[i]
            if done:
                return

    rec()
    return incumbent_cost, incumbent_plan, nodes


def solve_branch_and_bound(req: SolveRequest, *, threads: int = 1) -> Solution:
    """Exact depth-first branch-and-bound: same plan and cost as
    solve_brute_force on every instance, typically far fewer nodes.

    The incumbent cost starts at the best all-to-one-region plan. With
    threads > 1, top-level region choices are searched independently and
    merged; the returned plan is identical to the sequential one (node
    counts may differ between thread counts, never between runs).
    """
    if threads < 1:
        raise ValidationError("threads must be positive")
    inst = _Instance(req)
    start_cost = inst.centralized_cost()
    order = inst.topo

    if threads == 1:
        cost, assign, nodes = _dfs(inst, order, start_cost)
    else:
        first = order[0]
        results = []
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_dfs, inst, order, start_cost, {first: r})
                for r in range(inst.m)
            ]
            results = [f.result() for f in futures]
        nodes = 1
        cost, assign = start_cost, None
        for branch_cost, branch_assign, branch_nodes in results:
            nodes += branch_nodes
            if branch_assign is None:
                continue
            if assign is None or branch_cost < cost:
                cost, assign = branch_cost, branch_assign

    assert assign is not None
    # The per-branch lexicographic argument needs the assignment order to
    # equal the declaration order; refine the plan when it does not, or when
    # branches were searched independently.
    workflow_order = list(range(inst.n))
    if order != workflow_order or threads > 1:
        cost2, assign2, extra = _dfs(
            inst, workflow_order, cost, stop_on_adopt=True
        )
        assert cost2 == cost and assign2 is not None
        assign = assign2
        nodes += extra
    return inst.to_solution(assign, nodes)


def lower_bound(req: SolveRequest, partial: Mapping[str, str]) -> Rational:
    """Admissible lower bound on the total cost of completing a partial
    assignment; equals the exact total cost when the assignment is full."""
    inst = _Instance(req)
    index = {sid: i for i, sid in enumerate(inst.ids)}
    region_index = {r: i for i, r in enumerate(inst.regions)}
    assigned: dict[int, int] = {}
    for sid, region in partial.items():
        if sid not in index:
            raise ValidationError(f"unknown service in partial assignment: {sid}")
        if region not in region_index:
            raise ValidationError(f"unknown candidate region: {region}")
        assigned[index[sid]] = region_index[region]
    return inst.bound(assigned)


def sweep_overhead(req: SolveRequest, rates: Sequence[Rational], *,
                   threads: int = 1) -> list[tuple[Rational, Solution]]:
    """Solve the same instance once per overhead rate, in input order."""
    if not rates:
        raise ValidationError("rates must be non-empty")
    return [
        (rate, solve_branch_and_bound(replace(req, overhead_rate=rate), threads=threads))
        for rate in rates
    ]


def solve_centralized(req: SolveRequest, region: str) -> Solution:
    """Score the all-services-to-one-region baseline plan. The region may be
    any matrix location (e.g. a user's home site outside the candidates)."""
    if (region, region) not in req.cost_matrix.costs:
        raise ValidationError(f"unknown region: {region!r}")
    plan = DeploymentPlan(
        {sid: region for sid in req.workflow.service_ids()}, req.overhead_rate
    )
    report = evaluate(req.workflow, plan, req.cost_matrix)
    return Solution(plan, report, nodes_explored=1, proven_optimal=False)


def speedup(baseline: Solution, optimized: Solution) -> Fraction:
    """Ratio of movement costs: how much faster the optimized deployment
    moves the workflow's data than the baseline does."""
    base = baseline.report.total_movement
    opt = optimized.report.total_movement
    if base <= 0 or opt <= 0:
        raise ValidationError("speedup needs positive movement on both sides")
    return Fraction(base) / Fraction(opt)
