"""Optimal placement of workflow engines across geo-distributed regions.

Given a DAG of web services, their relative data sizes and a per-unit
data-movement cost matrix, this package finds the cheapest mapping of
services to engine regions, writes the deployment as plain-text plan
files, and verifies every solution with an exact discrete-event
simulation of the decentralized execution.
"""

from .cost import (
    CostReport,
    DeploymentPlan,
    cost_up_to,
    evaluate,
    format_cost_report,
    invocation_cost,
)
from .errors import (
    ConsistencyError,
    DeadlockError,
    EnumerationLimitError,
    ParseError,
    ValidationError,
)
from .files import (
    load_cost_matrix,
    load_workflow,
    parse_cost_matrix_text,
    parse_workflow_text,
    serialize_cost_matrix,
    serialize_workflow,
)
from .generate import (
    Instance,
    generate_instance,
    generate_workflow,
    synthetic_cost_matrix,
    triangle_violation_rate,
)
from .model import (
    CostMatrix,
    Service,
    Violation,
    Workflow,
    predecessors,
    sinks,
    topological_order,
    validate_workflow,
)
from .plans import (
    ExecutionPlan,
    Host,
    HostSpec,
    InvocationDescription,
    InvocationStep,
    Operand,
    Transfer,
    generate_execution_plan,
    parse_deployment_plan,
    parse_execution_plan,
    parse_invocation_description,
    serialize_deployment_plan,
    serialize_execution_plan,
    serialize_invocation_description,
)
from .rational import Rational, format_rational, parse_rational
from .sim import (
    SimConfig,
    SimTrace,
    format_trace,
    plan_from_deployment,
    plan_from_solution,
    service_completion_times,
    simulate,
)
from .solver import (
    Solution,
    SolveRequest,
    lower_bound,
    solve_branch_and_bound,
    solve_brute_force,
    solve_centralized,
    speedup,
    sweep_overhead,
)

__version__ = "0.1.0"
