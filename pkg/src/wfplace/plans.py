"""The three script formats gluing the toolchain together.

* Invocation description -- one service call per line: service name, one
  or more name:value inputs, output reference. Either side of a pair is a
  literal when wrapped in single quotes and a reference into engine memory
  otherwise.
* Deployment plan -- one ``service --> region`` mapping per line.
* Execution plan -- host/engine/deployment declarations followed by the
  per-engine invocation steps; data crossing engines travels via a
  ``<target>.Setter`` push step that stores the named reference on the
  receiving engine.

All three formats accept '#' comment lines and blank lines, and round-trip
through their parse/serialize pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .errors import ParseError, ValidationError
from .model import is_token

_SETTER_SUFFIX = ".Setter"
_DIRECTIVES = ("host", "serv", "depl")


@dataclass(frozen=True)
class Operand:
    """One side of an input pair: a quoted literal or a memory reference."""

    text: str
    literal: bool = False

    def __post_init__(self):
        if not self.text:
            raise ValueError("empty operand")
        if "'" in self.text or any(c.isspace() for c in self.text):
            raise ValueError(f"operand may not contain quotes or whitespace: {self.text!r}")
        if not self.literal and ":" in self.text:
            raise ValueError(f"reference may not contain ':': {self.text!r}")

    def render(self) -> str:
        return f"'{self.text}'" if self.literal else self.text


Pair = tuple[Operand, Operand]


@dataclass(frozen=True)
class InvocationStep:
    """One service call: name, ordered input pairs, single output reference."""

    service: str
    inputs: tuple[Pair, ...]
    output: str

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        if not self.inputs:
            raise ValueError(f"step {self.service} needs at least one input")
        if not is_token(self.output):
            raise ValueError(f"output must be an unquoted reference token: {self.output!r}")

    def consumed_refs(self) -> list[str]:
        """Reference operands this step reads, in input order, deduplicated."""
        return _consumed_refs(self.inputs)


def _consumed_refs(inputs: tuple[Pair, ...]) -> list[str]:
    refs: list[str] = []
    for name, value in inputs:
        for operand in (name, value):
            if not operand.literal and operand.text not in refs:
                refs.append(operand.text)
    return refs


@dataclass(frozen=True)
class InvocationDescription:
    """An ordered single-assignment dataflow of service invocations."""

    steps: tuple[InvocationStep, ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        produced: dict[str, int] = {}
        for position, step in enumerate(self.steps):
            if step.output in produced:
                raise ValueError(f"output {step.output} assigned more than once")
            produced[step.output] = position
        for position, step in enumerate(self.steps):
            for ref in step.consumed_refs():
                if ref in produced and produced[ref] >= position:
                    raise ValueError(
                        f"step {step.service} reads {ref} before it is produced"
                    )


def _split_fields(text: str) -> Iterable[tuple[int, list[str]]]:
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield number, line.split()


def _parse_operand(text: str, line: int) -> Operand:
    if text.count("'") not in (0, 2) or (text.count("'") == 2 and not
                                         (text.startswith("'") and text.endswith("'"))):
        raise ParseError(f"unterminated or stray quote in {text!r}", line)
    try:
        if text.startswith("'") and text.endswith("'") and len(text) >= 2:
            return Operand(text[1:-1], literal=True)
        return Operand(text, literal=False)
    except ValueError as exc:
        raise ParseError(str(exc), line) from exc


def _parse_pair(fieldtext: str, line: int) -> Pair:
    split_at = None
    in_quote = False
    for position, char in enumerate(fieldtext):
        if char == "'":
            in_quote = not in_quote
        elif char == ":" and not in_quote:
            if split_at is not None:
                raise ParseError(f"more than one ':' in input pair {fieldtext!r}", line)
            split_at = position
    if in_quote:
        raise ParseError(f"unterminated quote in {fieldtext!r}", line)
    if split_at is None:
        raise ParseError(f"input pair {fieldtext!r} has no ':' outside quotes", line)
    name, value = fieldtext[:split_at], fieldtext[split_at + 1:]
    if not name or not value:
        raise ParseError(f"empty side in input pair {fieldtext!r}", line)
    return _parse_operand(name, line), _parse_operand(value, line)


def parse_invocation_description(text: str) -> InvocationDescription:
    """Parse one invocation per non-empty line; errors carry line numbers."""
    steps: list[InvocationStep] = []
    lines: list[int] = []
    for number, fields in _split_fields(text):
        if len(fields) < 3:
            raise ParseError(
                "expected '<service> <name>:<value> ... <output>' (>= 3 fields)", number
            )
        service, middle, output = fields[0], fields[1:-1], fields[-1]
        if not is_token(service):
            raise ParseError(f"invalid service name {service!r}", number)
        if not is_token(output):
            raise ParseError(f"output must be an unquoted reference: {output!r}", number)
        pairs = tuple(_parse_pair(f, number) for f in middle)
        steps.append(InvocationStep(service, pairs, output))
        lines.append(number)
    try:
        return InvocationDescription(tuple(steps))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def serialize_invocation_description(description: InvocationDescription) -> str:
    lines = []
    for step in description.steps:
        pairs = " ".join(f"{n.render()}:{v.render()}" for n, v in step.inputs)
        lines.append(f"{step.service} {pairs} {step.output}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_deployment_plan(text: str) -> dict[str, str]:
    """Parse ``service --> region`` lines into a mapping."""
    mapping: dict[str, str] = {}
    for number, fields in _split_fields(text):
        if len(fields) != 3 or fields[1] != "-->":
            raise ParseError("expected '<service> --> <region>'", number)
        service, region = fields[0], fields[2]
        for token, kind in ((service, "service"), (region, "region")):
            if not is_token(token):
                raise ParseError(f"invalid {kind} token {token!r}", number)
        if service in mapping:
            raise ParseError(f"service {service} mapped more than once", number)
        mapping[service] = region
    return mapping


def serialize_deployment_plan(mapping: Mapping[str, str]) -> str:
    lines = [f"{service} --> {region}" for service, region in mapping.items()]
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class Host:
    """A machine a workflow engine can be deployed on; address None means
    not provisioned yet (written as '_')."""

    alias: str
    provider: str
    user: str
    address: str | None


@dataclass(frozen=True)
class EngineDecl:
    alias: str
    application: str


@dataclass(frozen=True)
class Deployment:
    engine: str
    host: str


@dataclass(frozen=True)
class EngineInvocation:
    """An invocation step executed by a specific engine."""

    engine: str
    service: str
    inputs: tuple[Pair, ...]
    output: str

    def consumed_refs(self) -> list[str]:
        return _consumed_refs(self.inputs)


@dataclass(frozen=True)
class Transfer:
    """A push of one data reference from one engine's store into another's."""

    from_engine: str
    to_engine: str
    ref: str
    ack: str


Step = Union[EngineInvocation, Transfer]


@dataclass(frozen=True)
class ExecutionPlan:
    hosts: tuple[Host, ...]
    engines: tuple[EngineDecl, ...]
    deployments: tuple[Deployment, ...]
    steps: tuple[Step, ...]

    def engine_host(self) -> dict[str, str]:
        return {d.engine: d.host for d in self.deployments}


def parse_execution_plan(text: str) -> ExecutionPlan:
    """Parse and structurally validate an execution plan."""
    hosts: list[Host] = []
    engines: list[EngineDecl] = []
    deployments: list[tuple[Deployment, int]] = []
    steps: list[tuple[Step, int]] = []
    for number, fields in _split_fields(text):
        kind = fields[0]
        if kind == "host":
            if len(fields) != 5:
                raise ParseError("expected 'host <alias> <provider> <user> <addr>'", number)
            address = None if fields[4] == "_" else fields[4]
            hosts.append(Host(fields[1], fields[2], fields[3], address))
        elif kind == "serv":
            if len(fields) != 3:
                raise ParseError("expected 'serv <alias> <application>'", number)
            engines.append(EngineDecl(fields[1], fields[2]))
        elif kind == "depl":
            if len(fields) != 3:
                raise ParseError("expected 'depl <engine> <host>'", number)
            deployments.append((Deployment(fields[1], fields[2]), number))
        else:
            steps.append(_parse_step(fields, number))

    host_aliases = _unique_aliases((h.alias for h in hosts), "host")
    engine_aliases = _unique_aliases((e.alias for e in engines), "engine")
    deployed: set[str] = set()
    for deployment, number in deployments:
        if deployment.engine not in engine_aliases:
            raise ParseError(f"deployment of undeclared engine {deployment.engine}", number)
        if deployment.host not in host_aliases:
            raise ParseError(f"deployment on undeclared host {deployment.host}", number)
        if deployment.engine in deployed:
            raise ParseError(f"engine {deployment.engine} deployed more than once", number)
        deployed.add(deployment.engine)
    for step, number in steps:
        executor = step.engine if isinstance(step, EngineInvocation) else step.from_engine
        targets = [executor]
        if isinstance(step, Transfer):
            if step.to_engine not in engine_aliases:
                raise ParseError(
                    f"Setter target {step.to_engine} is not a declared engine", number
                )
            targets.append(step.to_engine)
        for alias in targets:
            if alias not in engine_aliases:
                raise ParseError(f"step references undeclared engine {alias}", number)
            if alias not in deployed:
                raise ParseError(f"step references undeployed engine {alias}", number)
    return ExecutionPlan(
        tuple(hosts),
        tuple(engines),
        tuple(d for d, _ in deployments),
        tuple(s for s, _ in steps),
    )


def _unique_aliases(aliases: Iterable[str], kind: str) -> set[str]:
    seen: set[str] = set()
    for alias in aliases:
        if alias in seen:
            raise ParseError(f"duplicate {kind} alias {alias}")
        seen.add(alias)
    return seen


def _parse_step(fields: list[str], number: int) -> tuple[Step, int]:
    if len(fields) < 4:
        raise ParseError(
            "expected '<engine> <service> <name>:<value> ... <output>'", number
        )
    engine, callee, output = fields[0], fields[1], fields[-1]
    if not is_token(output):
        raise ParseError(f"output must be an unquoted reference: {output!r}", number)
    if callee.endswith(_SETTER_SUFFIX) and len(callee) > len(_SETTER_SUFFIX):
        target = callee[: -len(_SETTER_SUFFIX)]
        if len(fields) != 4:
            raise ParseError("a Setter step carries exactly one input pair", number)
        name, value = _parse_pair(fields[2], number)
        if not name.literal or value.literal:
            raise ParseError(
                "a Setter input must be '<ref>':<ref> (literal key, reference value)",
                number,
            )
        return Transfer(engine, target, name.text, output), number
    pairs = tuple(_parse_pair(f, number) for f in fields[2:-1])
    return EngineInvocation(engine, callee, pairs, output), number


def serialize_execution_plan(plan: ExecutionPlan) -> str:
    """Canonical text form; parse(serialize(plan)) == plan."""
    sections: list[list[str]] = []
    if plan.hosts:
        sections.append(
            ["# define hosts"]
            + [f"host {h.alias} {h.provider} {h.user} {h.address or '_'}" for h in plan.hosts]
        )
    if plan.engines:
        sections.append(
            ["# define engines"]
            + [f"serv {e.alias} {e.application}" for e in plan.engines]
        )
    if plan.deployments:
        sections.append(
            ["# deploy engines on hosts"]
            + [f"depl {d.engine} {d.host}" for d in plan.deployments]
        )
    if plan.steps:
        lines = ["# invocations"]
        for step in plan.steps:
            if isinstance(step, Transfer):
                lines.append(
                    f"{step.from_engine} {step.to_engine}{_SETTER_SUFFIX}"
                    f" '{step.ref}':{step.ref} {step.ack}"
                )
            else:
                pairs = " ".join(f"{n.render()}:{v.render()}" for n, v in step.inputs)
                lines.append(f"{step.engine} {step.service} {pairs} {step.output}")
        sections.append(lines)
    if not sections:
        return ""
    return "\n\n".join("\n".join(lines) for lines in sections) + "\n"


@dataclass(frozen=True)
class HostSpec:
    """Provisioning fields for one region's host, minus the alias (the
    region id itself is used as the host alias)."""

    provider: str = "aws"
    user: str = "ubuntu"
    address: str | None = None


def generate_execution_plan(
    description: InvocationDescription,
    assignment: Mapping[str, str],
    hosts: Mapping[str, HostSpec] | None = None,
) -> ExecutionPlan:
    """Distribute an invocation description over the engines of a deployment.

    Emits declarations for exactly the regions used (engine aliases eng_1,
    eng_2, ... in first-use order), keeps invocation steps in description
    order, and pushes every reference that crosses engines with exactly one
    Transfer per (producer engine, consumer engine, reference), acknowledged
    as ack_1, ack_2, ... in emission order.
    """
    region_of: dict[str, str] = {}
    for step in description.steps:
        if step.service not in assignment:
            raise ValidationError(f"service {step.service} has no assigned region")
        region_of[step.service] = assignment[step.service]

    engine_alias: dict[str, str] = {}
    for step in description.steps:
        region = region_of[step.service]
        if region not in engine_alias:
            engine_alias[region] = f"eng_{len(engine_alias) + 1}"

    host_decls: list[Host] = []
    for region in engine_alias:
        if hosts is None:
            spec = HostSpec()
        else:
            spec = hosts.get(region)
            if spec is None:
                raise ValidationError(f"no host record for region {region}")
        host_decls.append(Host(region, spec.provider, spec.user, spec.address))

    engine_decls = [EngineDecl(alias, "engine") for alias in engine_alias.values()]
    deployments = [Deployment(alias, region) for region, alias in engine_alias.items()]

    producer_engine = {
        step.output: engine_alias[region_of[step.service]] for step in description.steps
    }
    consumer_engines: dict[str, list[str]] = {}
    for step in description.steps:
        consumer = engine_alias[region_of[step.service]]
        for ref in step.consumed_refs():
            targets = consumer_engines.setdefault(ref, [])
            if consumer not in targets:
                targets.append(consumer)

    steps: list[Step] = []
    acks = 0
    for step in description.steps:
        engine = engine_alias[region_of[step.service]]
        steps.append(EngineInvocation(engine, step.service, step.inputs, step.output))
        for target in consumer_engines.get(step.output, ()):
            if target == engine:
                continue
            acks += 1
            steps.append(Transfer(engine, target, step.output, f"ack_{acks}"))
    return ExecutionPlan(
        tuple(host_decls), tuple(engine_decls), tuple(deployments), tuple(steps)
    )
