"""Domain model: service workflows and inter-location data-movement costs.

A workflow is a DAG of web services. Each service has a home location and
unitless input/output data sizes. A cost matrix gives the time to move one
unit of data between any two locations; engines are identified with the
region they run in, so an engine-to-engine move within one region is free
(the matrix diagonal is pinned to zero) while every other hop costs
whatever the matrix says. Services never talk to each other directly --
no code path ever looks up a service-to-service cost.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import ValidationError
from .rational import Rational

_TOKEN_RE = re.compile(r"^[^\s':]+$")


def is_token(text: str) -> bool:
    """True if text is a valid name: non-empty, no whitespace, no ' or :."""
    return bool(_TOKEN_RE.match(text))


def check_token(text: str, kind: str) -> str:
    if not is_token(text):
        raise ValueError(f"invalid {kind} token: {text!r}")
    return text


def _check_size(value: Rational, what: str) -> Rational:
    if not isinstance(value, (int, Fraction)) or isinstance(value, bool):
        raise TypeError(f"{what} must be an int or Fraction, got {type(value).__name__}")
    if value < 0:
        raise ValueError(f"{what} must be non-negative, got {value}")
    return value


@dataclass(frozen=True)
class Service:
    """One web service: identity, home location, and relative data sizes."""

    id: str
    location: str
    in_size: Rational
    out_size: Rational

    def __post_init__(self):
        check_token(self.id, "service id")
        check_token(self.location, "location id")
        _check_size(self.in_size, f"in_size of {self.id}")
        _check_size(self.out_size, f"out_size of {self.id}")


@dataclass(frozen=True)
class Workflow:
    """An ordered list of services plus producer -> consumer data-flow edges.

    Construction is permissive: duplicate ids, dangling edge endpoints and
    cycles are representable so that validate_workflow can report them.
    Duplicate edges are collapsed (the edge set has set semantics).
    """

    services: tuple[Service, ...]
    edges: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "services", tuple(self.services))
        seen: set[tuple[str, str]] = set()
        unique = []
        for producer, consumer in self.edges:
            edge = (producer, consumer)
            if edge not in seen:
                seen.add(edge)
                unique.append(edge)
        object.__setattr__(self, "edges", tuple(unique))

    def service_ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.services)

    def service(self, service_id: str) -> Service:
        for svc in self.services:
            if svc.id == service_id:
                return svc
        raise KeyError(f"unknown service: {service_id!r}")


@dataclass(frozen=True)
class Violation:
    """One violated workflow invariant, naming the offending elements."""

    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


def validate_workflow(workflow: Workflow) -> list[Violation]:
    """Return every violated invariant; an empty list means the DAG is valid."""
    violations: list[Violation] = []
    if not workflow.services:
        violations.append(Violation("no-services", "workflow declares no services"))
        return violations

    ids = [s.id for s in workflow.services]
    known = set(ids)
    seen: set[str] = set()
    for service_id in ids:
        if service_id in seen:
            violations.append(
                Violation("duplicate-service", f"service {service_id} declared more than once")
            )
        seen.add(service_id)

    for producer, consumer in workflow.edges:
        for endpoint in (producer, consumer):
            if endpoint not in known:
                violations.append(
                    Violation(
                        "unknown-service",
                        f"edge ({producer}, {consumer}) names undeclared service {endpoint}",
                    )
                )
        if producer == consumer:
            violations.append(
                Violation("self-edge", f"service {producer} feeds itself")
            )

    cyclic = _cycle_members(workflow)
    if cyclic:
        violations.append(
            Violation("cycle", "cycle involving: " + ", ".join(sorted(cyclic)))
        )

    consumers = {c for _, c in workflow.edges}
    if not (known - consumers):
        violations.append(
            Violation("no-source", "every service has a predecessor")
        )
    return violations


def predecessors(workflow: Workflow, service_id: str) -> set[str]:
    """The services that produce inputs for service_id (empty for a source)."""
    if service_id not in set(workflow.service_ids()):
        raise KeyError(f"unknown service: {service_id!r}")
    return {p for p, c in workflow.edges if c == service_id}


def sinks(workflow: Workflow) -> set[str]:
    """The services that feed no other service."""
    producers = {p for p, _ in workflow.edges}
    return {sid for sid in workflow.service_ids() if sid not in producers}


def topological_order(workflow: Workflow) -> list[str]:
    """Service ids in dependency order, stable w.r.t. declaration order.

    Among the services whose predecessors are all emitted, the one declared
    earliest comes next; if the declaration order is already topological it
    is returned unchanged. Raises ValidationError on a cycle.
    """
    ids = list(workflow.service_ids())
    index = {sid: i for i, sid in enumerate(ids)}
    indegree = {sid: 0 for sid in ids}
    successors: dict[str, list[str]] = {sid: [] for sid in ids}
    for producer, consumer in workflow.edges:
        if producer in indegree and consumer in indegree:
            indegree[consumer] += 1
            successors[producer].append(consumer)

    ready = [index[sid] for sid in ids if indegree[sid] == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        sid = ids[heapq.heappop(ready)]
        order.append(sid)
        for nxt in successors[sid]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                heapq.heappush(ready, index[nxt])
    if len(order) != len(ids):
        left = sorted(set(ids) - set(order))
        raise ValidationError("workflow has a cycle involving: " + ", ".join(left))
    return order


def _cycle_members(workflow: Workflow) -> set[str]:
    """Services that lie on a directed cycle (self-edges excluded)."""
    successors: dict[str, set[str]] = {}
    for producer, consumer in workflow.edges:
        if producer != consumer:
            successors.setdefault(producer, set()).add(consumer)
    members: set[str] = set()
    for start in successors:
        stack = list(successors.get(start, ()))
        visited: set[str] = set()
        while stack:
            node = stack.pop()
            if node == start:
                members.add(start)
                break
            if node in visited:
                continue
            visited.add(node)
            stack.extend(successors.get(node, ()))
    return members


@dataclass(frozen=True)
class CostMatrix:
    """Per-unit data movement cost between every ordered pair of locations.

    The matrix is total over locations x locations, entries are exact
    non-negative rationals, and the diagonal is exactly zero. Asymmetric
    matrices are allowed.
    """

    locations: tuple[str, ...]
    costs: dict[tuple[str, str], Rational]

    def __post_init__(self):
        object.__setattr__(self, "locations", tuple(self.locations))
        if not self.locations:
            raise ValueError("cost matrix needs at least one location")
        if len(set(self.locations)) != len(self.locations):
            raise ValueError("duplicate location in cost matrix")
        for loc in self.locations:
            check_token(loc, "location id")
        costs = dict(self.costs)
        for src in self.locations:
            for dst in self.locations:
                if (src, dst) not in costs:
                    raise ValueError(f"missing cost entry ({src}, {dst})")
                value = costs[src, dst]
                _check_size(value, f"cost ({src}, {dst})")
                if src == dst and value != 0:
                    raise ValueError(f"diagonal cost ({src}, {src}) must be 0, got {value}")
        if len(costs) != len(self.locations) ** 2:
            extra = set(costs) - {(a, b) for a in self.locations for b in self.locations}
            raise ValueError(f"cost entries for unknown locations: {sorted(extra)[:3]}")
        object.__setattr__(self, "costs", costs)

    @classmethod
    def from_rows(cls, locations: list[str] | tuple[str, ...],
                  rows: list[list[Rational]]) -> "CostMatrix":
        """Build from a dense row-major table in location order."""
        locations = tuple(locations)
        if len(rows) != len(locations):
            raise ValueError(f"expected {len(locations)} rows, got {len(rows)}")
        costs: dict[tuple[str, str], Rational] = {}
        for src, row in zip(locations, rows):
            if len(row) != len(locations):
                raise ValueError(f"row {src} has {len(row)} entries, expected {len(locations)}")
            for dst, value in zip(locations, row):
                costs[src, dst] = value
        return cls(locations, costs)

    def cost(self, src: str, dst: str) -> Rational:
        """Per-unit cost of moving data from src to dst."""
        for loc in (src, dst):
            if (loc, loc) not in self.costs:
                raise KeyError(f"unknown location: {loc!r}")
        return self.costs[src, dst]


def missing_locations(workflow: Workflow, matrix: CostMatrix) -> list[Violation]:
    """Cross-check: every service home location must be a matrix location."""
    known = set(matrix.locations)
    return [
        Violation(
            "unknown-location",
            f"service {svc.id} lives at {svc.location}, absent from the cost matrix",
        )
        for svc in workflow.services
        if svc.location not in known
    ]
