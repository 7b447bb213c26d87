"""Line-oriented text formats for workflows and cost matrices.

Workflow file::

    # comment
    service <id> <location> <in_size> <out_size>
    edge <producer> <consumer>

Cost matrix file::

    locations <id> <id> ...
    <from> <c1> <c2> ...     one row per location, columns in header order

Values are rationals written as decimal strings ("7", "1.5"); "p/q" is
also accepted. '#' starts a comment line; blank lines are ignored.
"""

from __future__ import annotations

import os

from .errors import ParseError
from .model import CostMatrix, Service, Workflow
from .rational import Rational, format_rational, parse_rational


def _content_lines(text: str):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield number, line.split()


def parse_workflow_text(text: str) -> Workflow:
    """Parse a workflow file body. Structural errors carry line numbers;
    DAG-level problems (cycles, dangling edges) are left to validate_workflow."""
    services: list[Service] = []
    edges: list[tuple[str, str]] = []
    for number, fields in _content_lines(text):
        kind = fields[0]
        if kind == "service":
            if len(fields) != 5:
                raise ParseError(
                    f"expected 'service <id> <location> <in> <out>', got {len(fields)} fields",
                    number,
                )
            try:
                in_size = parse_rational(fields[3])
                out_size = parse_rational(fields[4])
                services.append(Service(fields[1], fields[2], in_size, out_size))
            except (ValueError, TypeError) as exc:
                raise ParseError(str(exc), number) from exc
        elif kind == "edge":
            if len(fields) != 3:
                raise ParseError("expected 'edge <producer> <consumer>'", number)
            edges.append((fields[1], fields[2]))
        else:
            raise ParseError(f"unknown directive {kind!r}", number)
    return Workflow(tuple(services), tuple(edges))


def serialize_workflow(workflow: Workflow) -> str:
    lines = [
        f"service {s.id} {s.location} {format_rational(s.in_size)} {format_rational(s.out_size)}"
        for s in workflow.services
    ]
    lines.extend(f"edge {p} {c}" for p, c in workflow.edges)
    return "\n".join(lines) + ("\n" if lines else "")


def parse_cost_matrix_text(text: str) -> CostMatrix:
    """Parse a cost matrix file body into a validated CostMatrix."""
    locations: tuple[str, ...] | None = None
    rows: dict[str, list[Rational]] = {}
    for number, fields in _content_lines(text):
        if locations is None:
            if fields[0] != "locations" or len(fields) < 2:
                raise ParseError("expected 'locations <id> <id> ...' header", number)
            locations = tuple(fields[1:])
            continue
        src = fields[0]
        if src not in locations:
            raise ParseError(f"row {src!r} is not a declared location", number)
        if src in rows:
            raise ParseError(f"duplicate row for {src}", number)
        if len(fields) - 1 != len(locations):
            raise ParseError(
                f"row {src} has {len(fields) - 1} entries, expected {len(locations)}",
                number,
            )
        try:
            values = [parse_rational(f) for f in fields[1:]]
        except ValueError as exc:
            raise ParseError(str(exc), number) from exc
        for dst, value in zip(locations, values):
            if value < 0:
                raise ParseError(f"negative cost ({src}, {dst})", number)
            if src == dst and value != 0:
                raise ParseError(f"diagonal cost ({src}, {src}) must be 0", number)
        rows[src] = values
    if locations is None:
        raise ParseError("empty cost matrix file")
    missing = [loc for loc in locations if loc not in rows]
    if missing:
        raise ParseError(f"missing rows for: {', '.join(missing)}")
    try:
        return CostMatrix.from_rows(locations, [rows[loc] for loc in locations])
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def serialize_cost_matrix(matrix: CostMatrix) -> str:
    lines = ["locations " + " ".join(matrix.locations)]
    for src in matrix.locations:
        row = " ".join(format_rational(matrix.costs[src, dst]) for dst in matrix.locations)
        lines.append(f"{src} {row}")
    return "\n".join(lines) + "\n"


def load_workflow(path: str | os.PathLike) -> Workflow:
    with open(path, encoding="utf-8") as handle:
        return parse_workflow_text(handle.read())


def load_cost_matrix(path: str | os.PathLike) -> CostMatrix:
    with open(path, encoding="utf-8") as handle:
        return parse_cost_matrix_text(handle.read())
