"""Minimum convex-cost network flow by a spanning-tree convex-simplex heuristic."""

from .costs import CallableCost, CostFn, eval_cost, eval_deriv, exponential, linear, power, quadratic, validate_convex
from .errors import *  # noqa: F401,F403
from .instance import emit_result, format_instance, parse_instance
from .network import (
    ARTIFICIAL_ARC,
    Arc,
    IncidenceColumn,
    Network,
    OrientedLoop,
    TreeBasis,
    build_network,
    find_loop,
    incidence_column,
    tree_solve_flows,
)
from .solver import (
    CandidatePair,
    Case,
    FlowState,
    NodePotentials,
    SolveResult,
    SolverParams,
    Termination,
    TraceRecord,
    adjust_flows,
    check_optimality,
    compute_delta,
    compute_potentials,
    line_search,
    phase1_initial_solution,
    reduced_gradient,
    select_candidates,
    solve,
    update_basis,
)

__version__ = "0.1.0"
