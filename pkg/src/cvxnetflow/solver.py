"""Convex-simplex heuristic for minimum convex-cost network flow.

The method keeps a spanning-tree basis like the network simplex method but,
as in Zangwill's convex simplex method, lets nonbasic arcs carry positive
flow. Each iteration

1. prices the arcs with node potentials fitted to the basic arcs,
2. picks the most negative reduced gradient (increase that arc) or the
   largest ``flow * gradient`` product (decrease that arc),
3. pushes flow around the arc's fundamental loop up to the blocking bound,
4. line-searches the segment between the current and the pushed point,
5. swaps the blocking arc out of the basis only when the full step is taken.

A run stops when the optimality test passes, when the line search stops
moving (``lambda = 1``, returning the best iterate), or at the iteration cap.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .costs import linear
from .errors import BlockingNotInLoop, Infeasible, NegativeFlowResult
from .network import Network, OrientedLoop, TreeBasis, build_network, find_loop, tree_solve_flows


class Termination(str, enum.Enum):
    OPTIMAL = "Optimal"
    HEURISTIC_LAMBDA_ONE = "HeuristicLambdaOne"
    MAX_ITERATIONS = "MaxIterations"
    INFEASIBLE = "Infeasible"


class Case(str, enum.Enum):
    INCREASE = "increase"
    DECREASE = "decrease"


@dataclass(frozen=True)
class SolverParams:
    eps_opt: float = 1e-7
    eps_lambda: float = 1e-9
    ls_tol: float = 1e-10
    max_iters: int = 10_000
    #: step used when no loop arc limits the push; None means
    #: ``max(1, 2 * total supply + current max flow)``
    delta_cap: Optional[float] = None
    record_trace: bool = True

    def __post_init__(self):
        for name in ("eps_opt", "eps_lambda", "ls_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if self.delta_cap is not None and not self.delta_cap > 0:
            raise ValueError("delta_cap must be positive")


@dataclass(frozen=True)
class FlowState:
    flows: np.ndarray
    objective: float

    @classmethod
    def from_flows(cls, network: Network, flows) -> FlowState:
        x = np.array(flows, dtype=float)
        x[(x < 0) & (x >= -1e-12)] = 0.0
        return cls(x, network.objective(x))

    def __len__(self):
        return len(self.flows)


class NodePotentials(NamedTuple):
    mu: np.ndarray


class CandidatePair(NamedTuple):
    """Pricing result. ``rl``/``st`` are None when every arc is basic."""

    rl: Optional[int]
    g_rl: float
    st: Optional[int]
    s_st: float


@dataclass
class TraceRecord:
    iter: int
    case: str
    entering: int
    leaving: Optional[int]
    delta: float
    lam: float
    objective: float
    at_cap: bool = False
    degenerate: bool = False
    #: largest |reduced gradient| over basic arcs when the iteration started
    basic_residual: float = 0.0
    flows: Optional[np.ndarray] = field(default=None, repr=False)


@dataclass
class SolveResult:
    flows: Optional[FlowState]
    objective: float
    kkt_residual: float
    iterations: int
    termination: Termination
    trace: list[TraceRecord] = field(default_factory=list)
    basis: Optional[TreeBasis] = None
    initial_objective: float = float("nan")

    @classmethod
    def infeasible(cls) -> SolveResult:
        nan = float("nan")
        return cls(None, nan, nan, 0, Termination.INFEASIBLE)


# -- pricing -----------------------------------------------------------------


def _flows(flow) -> np.ndarray:
    return flow.flows if isinstance(flow, FlowState) else np.asarray(flow, dtype=float)


def compute_potentials(network: Network, tree: TreeBasis, flow) -> NodePotentials:
    """Potentials with ``mu[root] = 0`` and zero reduced gradient on tree arcs."""
    x = _flows(flow)
    mu = np.zeros(network.node_count)
    tails, costs = network.tails, network.costs
    for v in tree.order[1:]:
        k = tree.parent_arc[v]
        p = tree.parent[v]
        slope = costs[k].deriv(float(x[k]))
        mu[v] = mu[p] - slope if tails[k] == p else mu[p] + slope
    return NodePotentials(mu)


def reduced_gradient(network: Network, arc: int, flow, potentials: NodePotentials) -> float:
    a = network.arc(arc)
    mu = potentials.mu
    return float(a.cost.deriv(float(_flows(flow)[arc])) - (mu[a.tail] - mu[a.head]))


def _gradients(network: Network, x: np.ndarray, mu: np.ndarray) -> list[float]:
    return [
        c.deriv(float(xk)) - (mu[t] - mu[h])
        for c, xk, t, h in zip(network.costs, x, network.tails, network.heads)
    ]


def _pick(x, basis, grads) -> CandidatePair:
    rl = st = None
    g_rl = s_st = 0.0
    for k, g in enumerate(grads):
        if k in basis.tree_arcs:
            continue
        s = x[k] * g + 0.0  # no -0.0 from zero flows
        if rl is None or g < g_rl:
            rl, g_rl = k, g
        if st is None or s > s_st:
            st, s_st = k, s
    return CandidatePair(rl, float(g_rl), st, float(s_st))


def select_candidates(
    network: Network, flow, basis: TreeBasis, potentials: NodePotentials
) -> CandidatePair:
    """Most negative reduced gradient and largest ``flow * gradient`` over
    nonbasic arcs; ties go to the smaller arc id."""
    x = _flows(flow)
    return _pick(x, basis, _gradients(network, x, potentials.mu))


def check_optimality(pair: CandidatePair, eps_opt: float) -> bool:
    return pair.g_rl >= -eps_opt and pair.s_st <= eps_opt


# -- the loop step -----------------------------------------------------------


def compute_delta(
    network: Network,
    loop: OrientedLoop,
    flow,
    case: Case,
    delta_cap: float = float("inf"),
) -> tuple[float, Optional[int]]:
    """Largest push around ``loop`` before a shrinking flow reaches zero.

    For :attr:`Case.INCREASE` the entering arc grows and loop arcs with
    ``d = -1`` shrink. For :attr:`Case.DECREASE` the entering arc itself
    shrinks along with loop arcs with ``d = +1``. Returns ``(delta_cap,
    None)`` when nothing shrinks.
    """
    x = _flows(flow)
    shrinking = -1 if Case(case) is Case.INCREASE else 1
    cands = [k for k, d in loop.members if d == shrinking]
    if Case(case) is Case.DECREASE:
        cands.append(loop.entering_arc)
    if not cands:
        return float(delta_cap), None
    blocking = min(cands, key=lambda k: (x[k], k))
    return max(float(x[blocking]), 0.0), blocking


def adjust_flows(network: Network, flow, loop: OrientedLoop, delta: float, case: Case) -> FlowState:
    """Push ``delta`` units around the loop (backwards for a decrease)."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    x = _flows(flow)
    y = x.copy()
    sign = 1.0 if Case(case) is Case.INCREASE else -1.0
    step = sign * delta
    y[loop.entering_arc] += step
    for k, d in loop.members:
        y[k] += d * step
    tol = 1e-12 * max(1.0, float(np.max(np.abs(x), initial=0.0)))
    if np.any(y < -tol):
        k = int(np.argmin(y))
        raise NegativeFlowResult(f"push of {delta} drives arc {k} to {y[k]}")
    y[y < 0] = 0.0
    return FlowState.from_flows(network, y)


def line_search(network: Network, x_k: FlowState, y_k: FlowState, ls_tol: float = 1e-10):
    """Minimise the cost on ``lam * x_k + (1 - lam) * y_k`` over ``lam in [0, 1]``.

    ``lam = 1`` keeps ``x_k``; ``lam = 0`` moves all the way to ``y_k``.
    The cost is convex along the segment, so its slope is monotone and the
    minimiser is bracketed by bisection on the exact slope. Returns
    ``(x_next, lam)``.
    """
    x, y = x_k.flows, y_k.flows
    diff = x - y
    moving = np.flatnonzero(diff)
    if moving.size == 0:
        return x_k, 1.0
    costs = [network.costs[k] for k in moving]
    ym, dm = y[moving], diff[moving]

    def slope(lam):
        pts = np.maximum(ym + lam * dm, 0.0)
        return sum(c.deriv(float(p)) * float(d) for c, p, d in zip(costs, pts, dm))

    if slope(0.0) >= 0:
        lam = 0.0
    elif slope(1.0) <= 0:
        return x_k, 1.0
    else:
        lo, hi = 0.0, 1.0
        while hi - lo > ls_tol:
            mid = 0.5 * (lo + hi)
            if slope(mid) > 0:
                hi = mid
            else:
                lo = mid
        lam = 0.5 * (lo + hi)
    if lam == 0.0:
        nxt = y_k
    else:
        pts = y + lam * diff
        pts[pts < 0] = 0.0
        nxt = FlowState.from_flows(network, pts)
    if nxt.objective > x_k.objective:
        return x_k, 1.0
    return nxt, lam


def update_basis(
    network: Network,
    basis: TreeBasis,
    entering: int,
    blocking: Optional[int],
    x_next: FlowState,
    y_k: FlowState,
) -> TreeBasis:
    """Swap ``blocking`` for ``entering`` only if the full step was taken."""
    if blocking is None or blocking == entering:
        return basis
    if blocking not in basis.tree_arcs:
        raise BlockingNotInLoop(f"blocking arc {blocking} is not basic")
    if x_next is not y_k and not np.array_equal(x_next.flows, y_k.flows):
        return basis
    return basis.swap(network, entering, blocking)


def _kkt_residual(network: Network, x: np.ndarray, grads) -> float:
    worst = 0.0
    for xk, g in zip(x, grads):
        worst = max(worst, -g, xk * g, -xk)
    return float(worst)


# -- driver ------------------------------------------------------------------


@dataclass
class _Outcome:
    termination: Termination
    flow: FlowState
    tree: TreeBasis
    iterations: int
    trace: list


def _run(network: Network, x: FlowState, tree: TreeBasis, params: SolverParams) -> _Outcome:
    m = network.node_count
    zero_tol = 1e-12 * max(1.0, float(np.abs(network.supply_array).sum()))
    best_x, best_tree = x, tree
    trace: list[TraceRecord] = []
    it = 0
    degenerate_run = 0

    def done(term):
        return _Outcome(term, best_x, best_tree, it, trace)

    while True:
        mu = compute_potentials(network, tree, x).mu
        grads = _gradients(network, x.flows, mu)
        pair = _pick(x.flows, tree, grads)
        if check_optimality(pair, params.eps_opt):
            return _Outcome(Termination.OPTIMAL, x, tree, it, trace)
        if it >= params.max_iters or degenerate_run > m * m:
            return done(Termination.MAX_ITERATIONS)

        increase = max(0.0, -pair.g_rl) >= pair.s_st
        if increase and degenerate_run > m:
            # long degenerate run: smallest-index entering rule breaks cycles
            pair = pair._replace(
                rl=next(k for k, g in enumerate(grads) if g < -params.eps_opt and k not in tree)
            )
        case = Case.INCREASE if increase else Case.DECREASE
        arc = pair.rl if increase else pair.st
        basic_residual = max((abs(grads[k]) for k in tree.tree_arcs), default=0.0)

        loop = find_loop(network, tree, arc)
        cap = params.delta_cap
        if cap is None:
            cap = max(1.0, 2.0 * network.total_supply + float(x.flows.max()))
        delta, blocking = compute_delta(network, loop, x, case, cap)
        it += 1

        if blocking is not None and blocking != arc and delta <= zero_tol:
            # degenerate pivot: swap the basis without moving flow
            if delta > 0:
                x = adjust_flows(network, x, loop, delta, case)
            tree = tree.swap(network, arc, blocking)
            degenerate_run += 1
            lam, leaving, at_cap = 0.0, blocking, False
            improvement = None
        else:
            degenerate_run = 0
            y = adjust_flows(network, x, loop, delta, case)
            x_next, lam = line_search(network, x, y, params.ls_tol)
            if lam <= params.eps_lambda and x_next is not y:
                x_next, lam = y, 0.0
            new_tree = update_basis(network, tree, arc, blocking, x_next, y)
            leaving = blocking if new_tree is not tree else None
            at_cap = blocking is None and lam == 0.0
            improvement = x.objective - x_next.objective
            x, tree = x_next, new_tree

        if x.objective <= best_x.objective:
            best_x, best_tree = x, tree
        if params.record_trace:
            trace.append(
                TraceRecord(
                    it, case.value, arc, leaving, float(delta), float(lam), x.objective,
                    at_cap=at_cap, degenerate=improvement is None,
                    basic_residual=float(basic_residual), flows=x.flows.copy(),
                )
            )
        if (
            improvement is not None
            and lam >= 1.0 - params.eps_lambda
            and improvement < params.eps_opt
        ):
            return done(Termination.HEURISTIC_LAMBDA_ONE)


def phase1_initial_solution(network: Network) -> tuple[FlowState, TreeBasis]:
    """Feasible starting flow on a spanning tree of real arcs.

    Every non-root node gets a helper arc to or from the root oriented so
    that routing its supply through the root is feasible. Helper flow is
    then priced out with unit costs (real arcs free) by linear pivots. Any
    helper still carrying flow means the instance is infeasible.
    """
    n, m, root = network.arc_count, network.node_count, network.root
    b = network.supplies
    arcs = [(a.tail, a.head, linear(0.0)) for a in network.arcs]
    start = [0.0] * n
    for v in range(m):
        if v == root:
            continue
        if b[v] >= 0:
            arcs.append((v, root, linear(1.0)))
        else:
            arcs.append((root, v, linear(1.0)))
        start.append(abs(float(b[v])))
    aux = build_network(m, [float(v) for v in b], arcs, root)
    tree = TreeBasis.from_arcs(aux, range(n, n + m - 1))
    params = SolverParams(eps_opt=1e-9, max_iters=50 * (n + m) ** 2, record_trace=False)
    out = _run(aux, FlowState.from_flows(aux, start), tree, params)

    tol = 1e-9 * max(1.0, float(np.abs(network.supply_array).sum()))
    if out.flow.flows[n:].sum() > tol:
        raise Infeasible(f"phase 1 left {out.flow.flows[n:].sum():g} units on helper arcs")

    tree = out.tree
    for h in sorted(k for k in tree.tree_arcs if k >= n):
        child = tree.parent_arc.index(h)
        below = {v for v in range(m) if _has_ancestor(tree, v, child)}
        bridge = next(
            a.id for a in network.arcs if (a.tail in below) != (a.head in below)
        )
        tree = tree.swap(aux, bridge, h)
    basis = TreeBasis.from_arcs(network, tree.tree_arcs)
    fixed = {k: float(out.flow.flows[k]) for k in range(n) if k not in basis.tree_arcs}
    flows = tree_solve_flows(network, basis, [float(v) for v in b], fixed)
    return FlowState.from_flows(network, [flows[k] for k in range(n)]), basis


def _has_ancestor(tree: TreeBasis, v: int, anc: int) -> bool:
    while v != -1:
        if v == anc:
            return True
        v = tree.parent[v]
    return False


def solve(network: Network, params: SolverParams | None = None) -> SolveResult:
    """Run the full method on ``network``.

    Raises:
        Infeasible: no nonnegative flow meets the supplies.
    """
    params = params or SolverParams()
    x0, tree = phase1_initial_solution(network)
    out = _run(network, x0, tree, params)
    mu = compute_potentials(network, out.tree, out.flow).mu
    kkt = _kkt_residual(network, out.flow.flows, _gradients(network, out.flow.flows, mu))
    return SolveResult(
        flows=out.flow,
        objective=out.flow.objective,
        kkt_residual=kkt,
        iterations=out.iterations,
        termination=out.termination,
        trace=out.trace,
        basis=out.tree,
        initial_objective=x0.objective,
    )
