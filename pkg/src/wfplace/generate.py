"""Seeded generators for benchmark workflows and cost matrices.

Workflows are grown from the three DAG patterns common to scientific
pipelines -- linear chains, fan-in joins and fan-out splits -- mixed by
weight. Cost matrices come from a geo-clustered geometry: region points
are scattered around a few cluster centres on an integer plane and the
per-unit cost between two locations is their rounded distance plus
jitter, which mimics a measured inter-region round-trip-time table
(symmetric, zero diagonal, occasional triangle-inequality violations).
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import NamedTuple, Sequence

from .model import CostMatrix, Service, Workflow
from .rational import Rational

_PATTERNS = ("linear", "fan_in", "fan_out")


def _grow_dag(rng: random.Random, n_services: int,
              weights: Sequence[float]) -> list[tuple[int, int]]:
    """Edges (producer, consumer) over 0..n-1; creation order is topological."""
    edges: list[tuple[int, int]] = []
    frontier = [0]
    next_id = 1
    while next_id < n_services:
        budget = n_services - next_id
        pattern = rng.choices(_PATTERNS, weights=weights)[0]
        if pattern == "fan_out" and budget >= 2:
            parent = frontier.pop(rng.randrange(len(frontier)))
            width = rng.randint(2, min(3, budget))
            for _ in range(width):
                edges.append((parent, next_id))
                frontier.append(next_id)
                next_id += 1
        elif pattern == "fan_in":
            while len(frontier) < 2 and budget > 1:
                frontier.append(next_id)  # spawn an extra source to join
                next_id += 1
                budget -= 1
            if len(frontier) < 2 or budget < 1:
                pattern = "linear"
            else:
                width = rng.randint(2, min(3, len(frontier)))
                joined = sorted(rng.sample(range(len(frontier)), width))
                for offset, position in enumerate(joined):
                    edges.append((frontier.pop(position - offset), next_id))
                frontier.append(next_id)
                next_id += 1
        if pattern == "linear" or (pattern == "fan_out" and budget < 2):
            position = rng.randrange(len(frontier))
            parent = frontier[position]
            edges.append((parent, next_id))
            frontier[position] = next_id
            next_id += 1
    return edges


def _sizes(rng: random.Random, n_services: int, edges: list[tuple[int, int]],
           consistent: bool) -> tuple[list[Rational], list[Rational]]:
    out_sizes: list[Rational] = [rng.randint(1, 10) for _ in range(n_services)]
    if consistent:
        in_sizes: list[Rational] = [0] * n_services
        for producer, consumer in edges:
            in_sizes[consumer] += out_sizes[producer]
    else:
        in_sizes = [rng.randint(1, 10) for _ in range(n_services)]
    return in_sizes, out_sizes


def generate_workflow(seed: int, n_services: int, n_regions: int,
                      weights: Sequence[float] = (1, 1, 1), *,
                      consistent_sizes: bool = True) -> Workflow:
    """Grow a connected DAG of n_services services homed on region_1..region_n.

    With consistent_sizes (the default) each service's in_size equals the
    sum of its predecessors' out_sizes (zero for sources), the regime in
    which simulation and cost model agree exactly; otherwise both sizes are
    drawn independently from 1..10.

    Deterministic per seed. Weights order: (linear, fan_in, fan_out).
    """
    if n_services < 1 or n_regions < 1:
        raise ValueError("need at least one service and one region")
    if len(weights) != 3 or any(w < 0 for w in weights) or not any(weights):
        raise ValueError("weights must be three non-negative numbers, not all zero")
    rng = random.Random(seed)
    edges = _grow_dag(rng, n_services, weights)
    homes = [f"region_{rng.randrange(n_regions) + 1}" for _ in range(n_services)]
    in_sizes, out_sizes = _sizes(rng, n_services, edges, consistent_sizes)
    services = tuple(
        Service(f"s{i + 1}", homes[i], in_sizes[i], out_sizes[i])
        for i in range(n_services)
    )
    return Workflow(
        services, tuple((f"s{p + 1}", f"s{c + 1}") for p, c in edges)
    )


def _cluster_points(rng: random.Random, count: int, *,
                    span: int = 1200, cluster_radius: int = 80) -> list[tuple[int, int]]:
    clusters = max(1, math.ceil(count / 3))
    centres = [
        (rng.randint(0, span), rng.randint(0, span)) for _ in range(clusters)
    ]
    points = []
    for index in range(count):
        cx, cy = centres[index % clusters]
        points.append(
            (cx + rng.randint(-cluster_radius, cluster_radius),
             cy + rng.randint(-cluster_radius, cluster_radius))
        )
    return points


def _distance_costs(rng: random.Random, points: Sequence[tuple[int, int]],
                    scale: Rational, jitter: int) -> list[list[Rational]]:
    count = len(points)
    rows: list[list[Rational]] = [[0] * count for _ in range(count)]
    for i in range(count):
        for j in range(i + 1, count):
            dx = points[i][0] - points[j][0]
            dy = points[i][1] - points[j][1]
            base = max(1, math.isqrt(dx * dx + dy * dy) + rng.randint(0, jitter))
            rows[i][j] = rows[j][i] = base * scale
    return rows


def synthetic_cost_matrix(seed: int, regions: Sequence[str], *,
                          model: str = "geo-clustered",
                          scale: Rational = 1, jitter: int = 4) -> CostMatrix:
    """Symmetric positive-off-diagonal cost matrix over the given regions.

    Regions are placed in clusters on an integer plane; entries are the
    rounded Euclidean distances plus jitter, times scale. Deterministic per
    seed; changing scale multiplies every off-diagonal entry exactly.
    """
    if model != "geo-clustered":
        raise ValueError(f"unknown cost model: {model!r}")
    if not regions:
        raise ValueError("need at least one region")
    if scale <= 0:
        raise ValueError("scale must be positive")
    rng = random.Random(seed)
    points = _cluster_points(rng, len(regions))
    rows = _distance_costs(rng, points, scale, jitter)
    return CostMatrix.from_rows(tuple(regions), rows)


class Instance(NamedTuple):
    """A ready-to-solve benchmark: workflow, matrix over regions plus each
    service's own home location, and the candidate engine regions."""

    workflow: Workflow
    cost_matrix: CostMatrix
    regions: tuple[str, ...]


def generate_instance(seed: int, n_services: int, n_regions: int,
                      weights: Sequence[float] = (1, 1, 1), *,
                      scale: Rational = 1, jitter: int = 4) -> Instance:
    """Generate a geo-clustered benchmark instance.

    Every service gets its own home location placed a short hop away from
    a uniformly drawn home region, so invoking a service costs a little
    even from an engine in its own region. The matrix covers the region
    points and the service points together; engines are only deployable in
    the regions.
    """
    base = generate_workflow(seed, n_services, n_regions)
    rng = random.Random(f"{seed}/geo")  # str seeding is stable across processes
    region_ids = tuple(f"region_{k + 1}" for k in range(n_regions))
    region_points = _cluster_points(rng, n_regions)
    point_of = dict(zip(region_ids, region_points))

    services = []
    locations = list(region_ids)
    points = list(region_points)
    for svc in base.services:
        home = point_of[svc.location]
        offset = (0, 0)
        while offset == (0, 0):
            offset = (rng.randint(-30, 30), rng.randint(-30, 30))
        site = f"{svc.id}_home"
        locations.append(site)
        points.append((home[0] + offset[0], home[1] + offset[1]))
        services.append(Service(svc.id, site, svc.in_size, svc.out_size))

    rows = _distance_costs(rng, points, scale, jitter)
    matrix = CostMatrix.from_rows(tuple(locations), rows)
    workflow = Workflow(tuple(services), base.edges)
    return Instance(workflow, matrix, region_ids)


def triangle_violation_rate(matrix: CostMatrix) -> Fraction:
    """Share of ordered location triples (a, b, c) with c(a,c) > c(a,b) + c(b,c)."""
    locs = matrix.locations
    if len(locs) < 3:
        return Fraction(0)
    violations = 0
    total = 0
    for a in locs:
        for b in locs:
            if b == a:
                continue
            for c in locs:
                if c == a or c == b:
                    continue
                total += 1
                if matrix.costs[a, c] > matrix.costs[a, b] + matrix.costs[b, c]:
                    violations += 1
    return Fraction(violations, total)
