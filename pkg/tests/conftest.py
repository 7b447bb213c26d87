"""Shared fixtures: hand-built instances and an independent cost oracle."""

from __future__ import annotations

import random
from collections import defaultdict
from fractions import Fraction

import pytest

from wfplace.generate import generate_instance, generate_workflow
from wfplace.model import CostMatrix, Service, Workflow
from wfplace.rational import Rational


def make_chain() -> tuple[Workflow, CostMatrix]:
    """Two-service chain with two candidate regions r1, r2.

    Derived by hand: invocation costs are 3 for each service at its near
    region and 15 at the far one, the inter-region rate is 2 and s1 ships
    2 units, so the split plan costs 3 + 4 + 3 = 10 while either
    single-region plan costs 18.
    """
    workflow = Workflow(
        (
            Service("s1", "a", 0, 2),
            Service("s2", "b", 2, 1),
        ),
        (("s1", "s2"),),
    )
    half3 = Fraction(3, 2)
    far = Fraction(15, 2)
    matrix = CostMatrix.from_rows(
        ["r1", "r2", "a", "b"],
        [
            [0, 2, half3, 5],
            [2, 0, far, 1],
            [half3, far, 0, 9],
            [5, 1, 9, 0],
        ],
    )
    return workflow, matrix


def make_fan_in() -> tuple[Workflow, CostMatrix]:
    """s1, s2 -> s3, all invoked from region r.

    Invocation costs at r are 4, 6 and 2, so s3 completes at
    max(4, 6) + 2 = 8.
    """
    workflow = Workflow(
        (
            Service("s1", "x1", 0, 2),
            Service("s2", "x2", 0, 3),
            Service("s3", "x3", 5, 1),
        ),
        (("s1", "s3"), ("s2", "s3")),
    )
    third = Fraction(1, 3)
    matrix = CostMatrix.from_rows(
        ["r", "x1", "x2", "x3"],
        [
            [0, 2, 2, third],
            [2, 0, 4, 4],
            [2, 4, 0, 4],
            [third, 4, 4, 0],
        ],
    )
    return workflow, matrix


@pytest.fixture
def chain() -> tuple[Workflow, CostMatrix]:
    return make_chain()


@pytest.fixture
def fan_in() -> tuple[Workflow, CostMatrix]:
    return make_fan_in()


def random_matrix(rng: random.Random, locations: list[str], *,
                  symmetric: bool = False) -> CostMatrix:
    """Random integer matrix, zero diagonal, entries 1..9."""
    n = len(locations)
    rows: list[list[Rational]] = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if symmetric and j < i:
                rows[i][j] = rows[j][i]
            else:
                rows[i][j] = rng.randint(1, 9)
    return CostMatrix.from_rows(locations, rows)


def shuffle_declaration(workflow: Workflow, rng: random.Random) -> Workflow:
    """Same DAG, services declared in a random (possibly non-topological) order."""
    services = list(workflow.services)
    rng.shuffle(services)
    return Workflow(tuple(services), workflow.edges)


def random_problem(seed: int) -> tuple[Workflow, CostMatrix, tuple[str, ...]]:
    """Small random instance for oracle-checked solver tests (|S| <= 6, |E| <= 4).

    Alternates between two classes: free sizes with a fully random
    asymmetric matrix over the home regions, and geo-clustered instances
    whose services live at their own sites. Declaration order is shuffled
    half the time so tie-breaking is exercised on non-topological inputs.
    """
    rng = random.Random(seed)
    n_services = rng.randint(2, 6)
    n_regions = rng.randint(2, 4)
    if seed % 2 == 0:
        workflow = generate_workflow(
            seed, n_services, n_regions, consistent_sizes=False
        )
        regions = tuple(f"region_{k + 1}" for k in range(n_regions))
        matrix = random_matrix(rng, list(regions))
    else:
        workflow, matrix, regions = generate_instance(seed, n_services, n_regions)
    if rng.random() < 0.5:
        workflow = shuffle_declaration(workflow, rng)
    return workflow, matrix, regions


def naive_total_cost(workflow: Workflow, matrix: CostMatrix,
                     assignment: dict[str, str], overhead: Rational) -> Rational:
    """Straight recursive re-statement of the cost model, independent of the
    package's evaluation path; used as the second opinion in oracle tests."""
    producers = defaultdict(list)
    for producer, consumer in workflow.edges:
        producers[consumer].append(producer)
    services = {s.id: s for s in workflow.services}
    memo: dict[str, Rational] = {}

    def up_to(sid: str) -> Rational:
        if sid not in memo:
            svc = services[sid]
            engine = assignment[sid]
            invo = (matrix.cost(engine, svc.location) * svc.in_size
                    + matrix.cost(svc.location, engine) * svc.out_size)
            arrival: Rational = 0
            for producer in producers[sid]:
                t = up_to(producer) + matrix.cost(
                    assignment[producer], engine) * services[producer].out_size
                if t > arrival:
                    arrival = t
            memo[sid] = arrival + invo
        return memo[sid]

    movement = max(up_to(s.id) for s in workflow.services)
    engines = len({assignment[s.id] for s in workflow.services})
    return movement + overhead * (engines - 1)
