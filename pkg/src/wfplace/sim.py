"""Deterministic simulation of an execution plan over a cost matrix.

Implements the engines' data-driven firing rule: a step runs as soon as
every reference it consumes is available on its engine, and engines run
any number of ready steps concurrently. An invocation occupies its engine
for the time it takes to ship the inputs to the service, compute, and
ship the output back; a transfer occupies the wire between two engines
for cost x size. With zero compute time the per-step completion times
reproduce the cost model's accumulated costs exactly, which is the
package's central cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import DeadlockError, ValidationError
from .model import CostMatrix, Workflow, topological_order
from .plans import (
    EngineInvocation,
    ExecutionPlan,
    HostSpec,
    InvocationDescription,
    InvocationStep,
    Operand,
    Transfer,
    generate_execution_plan,
)
from .rational import Rational, format_rational
from .solver import Solution


@dataclass(frozen=True)
class SimConfig:
    """Everything the simulator needs beyond the plan itself: per-unit
    movement costs, the size of each data reference (external inputs may be
    omitted and default to 0), where each service lives, and optional
    per-service compute times (default 0)."""

    cost_matrix: CostMatrix
    data_sizes: Mapping[str, Rational]
    service_locations: Mapping[str, str]
    compute_time: Mapping[str, Rational] = field(default_factory=dict)


@dataclass(frozen=True)
class SimTrace:
    """Per-step ready and completion times, indexed by step position."""

    ready: dict[int, Rational]
    completion: dict[int, Rational]
    makespan: Rational


def simulate(plan: ExecutionPlan, config: SimConfig) -> SimTrace:
    """Run a plan to completion and return its timing trace.

    A reference produced by no invocation step counts as external input:
    available everywhere at time 0, size taken from data_sizes or 0.
    Raises DeadlockError (listing the blocked steps) if some step's inputs
    can never arrive, and ValidationError on missing sizes or locations.
    """
    engine_location = plan.engine_host()
    matrix = config.cost_matrix
    produced = {
        step.output for step in plan.steps if isinstance(step, EngineInvocation)
    }

    def size_of(ref: str) -> Rational:
        if ref in produced:
            try:
                return config.data_sizes[ref]
            except KeyError:
                raise ValidationError(f"missing size entry for reference {ref}") from None
        return config.data_sizes.get(ref, 0)

    def location_of(engine: str) -> str:
        try:
            return engine_location[engine]
        except KeyError:
            raise ValidationError(f"engine {engine} is not deployed") from None

    available: dict[tuple[str, str], Rational] = {}

    def ready_time(engine: str, refs: list[str]) -> Rational | None:
        worst: Rational = 0
        for ref in refs:
            if ref not in produced:
                continue  # external input, on every engine at time 0
            when = available.get((engine, ref))
            if when is None:
                return None
            if when > worst:
                worst = when
        return worst

    ready: dict[int, Rational] = {}
    completion: dict[int, Rational] = {}
    pending = list(range(len(plan.steps)))
    while pending:
        progressed = False
        still: list[int] = []
        for index in pending:
            step = plan.steps[index]
            if isinstance(step, Transfer):
                start = ready_time(step.from_engine, [step.ref])
                if start is None:
                    still.append(index)
                    continue
                wire = matrix.cost(
                    location_of(step.from_engine), location_of(step.to_engine)
                )
                finish = start + wire * size_of(step.ref)
                available[step.to_engine, step.ref] = finish
                available[step.from_engine, step.ack] = finish
            else:
                refs = step.consumed_refs()
                start = ready_time(step.engine, refs)
                if start is None:
                    still.append(index)
                    continue
                engine_loc = location_of(step.engine)
                try:
                    service_loc = config.service_locations[step.service]
                except KeyError:
                    raise ValidationError(
                        f"no location known for service {step.service}"
                    ) from None
                inbound_total = sum(size_of(r) for r in refs)
                duration = (
                    matrix.cost(engine_loc, service_loc) * inbound_total
                    + config.compute_time.get(step.service, 0)
                    + matrix.cost(service_loc, engine_loc) * size_of(step.output)
                )
                finish = start + duration
                available[step.engine, step.output] = finish
            ready[index] = start
            completion[index] = finish
            progressed = True
        if not progressed:
            blocked = ", ".join(f"step {i} ({_describe(plan.steps[i])})" for i in still)
            raise DeadlockError(f"blocked steps never become ready: {blocked}", tuple(still))
        pending = still
    makespan = max(completion.values(), default=0)
    return SimTrace(ready, completion, makespan)


def _describe(step) -> str:
    if isinstance(step, Transfer):
        return f"{step.from_engine} pushes {step.ref} to {step.to_engine}"
    return f"{step.engine} invokes {step.service}"


def plan_from_deployment(
    workflow: Workflow,
    assignment: Mapping[str, str],
    matrix: CostMatrix,
    hosts: Mapping[str, HostSpec] | None = None,
    compute_time: Mapping[str, Rational] | None = None,
) -> tuple[InvocationDescription, ExecutionPlan, SimConfig]:
    """Synthesize the full executable story of a deployment.

    Builds an invocation description from the workflow (one step per
    service in topological order, predecessors' outputs threaded through as
    reference inputs, sources seeded with one literal input), distributes
    it over the assigned engines, and collects the simulator inputs.

    Requires the workflow's declared input sizes to be consistent with the
    dataflow: each service's in_size must equal the sum of its
    predecessors' out_sizes (zero for sources), because that is what the
    engines will actually ship.
    """
    services = {s.id: s for s in workflow.services}
    order = topological_order(workflow)
    position = {sid: i for i, sid in enumerate(services)}
    producers: dict[str, list[str]] = {sid: [] for sid in services}
    for producer, consumer in workflow.edges:
        producers[consumer].append(producer)
    for sid in order:
        expected = sum(services[p].out_size for p in producers[sid])
        if services[sid].in_size != expected:
            raise ValidationError(
                f"in_size of {sid} is {services[sid].in_size} but its predecessors"
                f" produce {expected}; the simulation would not match the cost model"
            )

    steps = []
    for sid in order:
        preds = sorted(producers[sid], key=position.__getitem__)
        if preds:
            inputs = tuple(
                (Operand(f"in_{p}", literal=True), Operand(f"v_{p}")) for p in preds
            )
        else:
            inputs = ((Operand("seed", literal=True), Operand("0", literal=True)),)
        steps.append(InvocationStep(sid, inputs, f"v_{sid}"))
    description = InvocationDescription(tuple(steps))
    execution = generate_execution_plan(description, assignment, hosts)
    config = SimConfig(
        cost_matrix=matrix,
        data_sizes={f"v_{sid}": services[sid].out_size for sid in services},
        service_locations={sid: services[sid].location for sid in services},
        compute_time=dict(compute_time or {}),
    )
    return description, execution, config


def plan_from_solution(
    workflow: Workflow,
    matrix: CostMatrix,
    solution: Solution,
    hosts: Mapping[str, HostSpec] | None = None,
) -> tuple[InvocationDescription, ExecutionPlan, SimConfig]:
    """plan_from_deployment for a solver Solution."""
    return plan_from_deployment(workflow, solution.plan.assignment, matrix, hosts)


def service_completion_times(
    plan: ExecutionPlan, trace: SimTrace
) -> dict[str, Rational]:
    """Completion time of each service's invocation step."""
    times: dict[str, Rational] = {}
    for index, step in enumerate(plan.steps):
        if isinstance(step, EngineInvocation):
            times[step.service] = trace.completion[index]
    return times


def format_trace(trace: SimTrace) -> str:
    lines = [
        f"step {index} ready {format_rational(trace.ready[index])}"
        f" done {format_rational(trace.completion[index])}"
        for index in sorted(trace.completion)
    ]
    lines.append(f"makespan {format_rational(trace.makespan)}")
    return "\n".join(lines) + "\n"


def format_service_times(plan: ExecutionPlan, trace: SimTrace) -> str:
    """Per-service completion report mirroring an annotated workflow graph."""
    times = service_completion_times(plan, trace)
    lines = [f"service {sid} done {format_rational(t)}" for sid, t in times.items()]
    lines.append(f"makespan {format_rational(trace.makespan)}")
    return "\n".join(lines) + "\n"
