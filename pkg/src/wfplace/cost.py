"""Data-movement cost of executing a workflow under a deployment plan.

The cost of invoking one service is the round trip of its input and
output data between its engine and its home location. Costs accumulate
along the DAG: a service can start once the slowest of its predecessors
has finished and shipped its output over (fan-in predecessors overlap,
so the max is taken, not the sum). The workflow's movement cost is the
largest accumulated cost of any service, and each engine region beyond
the first adds a flat overhead penalty.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError
from .model import CostMatrix, Service, Workflow, sinks, topological_order
from .rational import Rational, format_rational


@dataclass(frozen=True)
class DeploymentPlan:
    """A total mapping of services to engine regions, plus the per-extra-engine
    overhead rate used when scoring it."""

    assignment: dict[str, str]
    overhead_rate: Rational = 0

    def __post_init__(self):
        object.__setattr__(self, "assignment", dict(self.assignment))
        if self.overhead_rate < 0:
            raise ValueError(f"overhead_rate must be non-negative, got {self.overhead_rate}")

    def engine_of(self, service_id: str) -> str:
        try:
            return self.assignment[service_id]
        except KeyError:
            raise ValidationError(f"plan assigns no engine to service {service_id}") from None


@dataclass(frozen=True)
class CostReport:
    """Full cost breakdown of one (workflow, plan, matrix) evaluation."""

    invocation_cost: dict[str, Rational]
    cost_up_to: dict[str, Rational]
    total_movement: Rational
    engines_used: int
    total_overhead: Rational
    total_cost: Rational


def invocation_cost(service: Service, engine: str, matrix: CostMatrix) -> Rational:
    """Round-trip cost of invoking a service from an engine region."""
    inbound = matrix.cost(engine, service.location) * service.in_size
    outbound = matrix.cost(service.location, engine) * service.out_size
    return inbound + outbound


def cost_up_to(workflow: Workflow, plan: DeploymentPlan,
               matrix: CostMatrix) -> dict[str, Rational]:
    """Accumulated completion cost of every service, keyed in declaration order.

    For each service: the slowest predecessor's accumulated cost plus the
    transfer of that predecessor's output between the two engines (zero for
    an empty predecessor set), plus the service's own invocation cost.
    """
    services = {s.id: s for s in workflow.services}
    accumulated: dict[str, Rational] = {}
    for sid in topological_order(workflow):
        service = services[sid]
        engine = plan.engine_of(sid)
        slowest: Rational = 0
        for producer, consumer in workflow.edges:
            if consumer != sid or producer not in accumulated:
                continue
            shipped = accumulated[producer] + matrix.cost(
                plan.engine_of(producer), engine
            ) * services[producer].out_size
            if shipped > slowest:
                slowest = shipped
        accumulated[sid] = slowest + invocation_cost(service, engine, matrix)
    return {s.id: accumulated[s.id] for s in workflow.services}


def evaluate(workflow: Workflow, plan: DeploymentPlan, matrix: CostMatrix) -> CostReport:
    """Score a deployment plan: movement, engine overhead and their total."""
    if not workflow.services:
        raise ValidationError("cannot evaluate an empty workflow")
    accumulated = cost_up_to(workflow, plan, matrix)
    per_service = {
        s.id: invocation_cost(s, plan.engine_of(s.id), matrix) for s in workflow.services
    }

    total_movement = max(accumulated.values())
    # Accumulated cost is monotone along every edge (all terms are
    # non-negative), which makes the max over sinks equal the global max.
    for producer, consumer in workflow.edges:
        assert accumulated[consumer] >= accumulated[producer], (producer, consumer)
    assert total_movement == max(accumulated[sid] for sid in sinks(workflow))

    engines_used = len({plan.engine_of(s.id) for s in workflow.services})
    total_overhead = plan.overhead_rate * (engines_used - 1)
    return CostReport(
        invocation_cost=per_service,
        cost_up_to=accumulated,
        total_movement=total_movement,
        engines_used=engines_used,
        total_overhead=total_overhead,
        total_cost=total_movement + total_overhead,
    )


def format_cost_report(report: CostReport) -> str:
    """Render a report in the line-oriented key/value layout."""
    lines = [
        f"service {sid} invo {format_rational(report.invocation_cost[sid])}"
        f" upto {format_rational(report.cost_up_to[sid])}"
        for sid in report.cost_up_to
    ]
    lines.append(f"movement {format_rational(report.total_movement)}")
    lines.append(f"engines {report.engines_used}")
    lines.append(f"overhead {format_rational(report.total_overhead)}")
    lines.append(f"total {format_rational(report.total_cost)}")
    return "\n".join(lines) + "\n"


def check_plan(workflow: Workflow, plan: DeploymentPlan,
               matrix: CostMatrix) -> None:
    """Raise ValidationError unless the plan is total over the workflow's
    services and every assigned region is a matrix location."""
    known = set(matrix.locations)
    for service in workflow.services:
        region = plan.engine_of(service.id)
        if region not in known:
            raise ValidationError(
                f"service {service.id} is assigned to unknown region {region}"
            )
