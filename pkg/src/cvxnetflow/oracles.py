"""Brute-force reference solvers for small instances.

These exist to check :func:`cvxnetflow.solve` and are deliberately built on
different machinery: spanning-tree enumeration for linear costs, a refined
grid over circulation amplitudes for convex costs, and potentials fitted by
least squares / linear programming for the KKT certificate. Nothing here is
used by the solver.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import NoFeasibleTree, NonlinearCost, TooLarge, TooManyCycles
from .network import Network, TreeBasis, tree_solve_flows


class OracleMethod(str, enum.Enum):
    TREE_ENUMERATION = "TreeEnumeration"
    CYCLE_GRID = "CycleGrid"


@dataclass(frozen=True)
class OracleResult:
    flows: np.ndarray
    objective: float
    method: OracleMethod


def _spans(m, arcs, network):
    parent = list(range(m))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for k in arcs:
        ru, rv = find(network.tails[k]), find(network.heads[k])
        if ru == rv:
            return False
        parent[ru] = rv
    return True


def enumerate_tree_solutions(network: Network, max_nodes: int = 10) -> OracleResult:
    """Exact optimum of a linear-cost instance by visiting every spanning tree.

    Each tree's basic solution (non-tree arcs at zero) is an extreme point
    candidate; the cheapest nonnegative one wins. Exponential in size.
    """
    if not network.is_linear:
        raise NonlinearCost("tree enumeration needs every arc cost to be linear")
    m, n = network.node_count, network.arc_count
    if m > max_nodes:
        raise TooLarge(f"{m} nodes exceeds the enumeration limit of {max_nodes}")
    tol = 1e-9 * max(1.0, float(np.abs(network.supply_array).sum()))
    best = None
    for arcs in itertools.combinations(range(n), m - 1):
        if not _spans(m, arcs, network):
            continue
        flows = tree_solve_flows(network, TreeBasis.from_arcs(network, arcs))
        x = np.array([float(flows[k]) for k in range(n)])
        if x.min() < -tol:
            continue
        x[x < 0] = 0.0
        obj = network.objective(x)
        if best is None or obj < best[1]:
            best = (x, obj)
    if best is None:
        raise NoFeasibleTree("no spanning tree yields a nonnegative flow")
    return OracleResult(best[0], best[1], OracleMethod.TREE_ENUMERATION)


def feasible_flow(network: Network) -> np.ndarray | None:
    """Some nonnegative conserving flow, found by an LP solver, or None."""
    a = network.incidence_matrix
    res = linprog(
        np.zeros(network.arc_count), A_eq=a, b_eq=network.supply_array,
        bounds=[(0, None)] * network.arc_count, method="highs",
    )
    if res.status != 0:
        return None
    return np.maximum(res.x, 0.0)


def cycle_basis(network: Network) -> np.ndarray:
    """Rows are circulations, one per non-tree arc of a greedy spanning tree.

    The tree part of each row is recovered by solving the incidence
    equations, not by walking the tree.
    """
    m, n = network.node_count, network.arc_count
    tree = []
    for k in range(n):
        if _spans(m, tree + [k], network):
            tree.append(k)
    a = network.incidence_matrix
    a_tree = a[:, tree]
    rows = []
    for k in range(n):
        if k in tree:
            continue
        t, *_ = np.linalg.lstsq(a_tree, -a[:, k], rcond=None)
        v = np.zeros(n)
        v[tree] = np.round(t)
        v[k] = 1.0
        rows.append(v)
    return np.array(rows).reshape(len(rows), n)


def _amplitude_box(base, cycles, cap):
    lo, hi = [], []
    n_cyc = len(cycles)
    for k in range(n_cyc):
        bounds = []
        for sense in (1.0, -1.0):
            c = np.zeros(n_cyc)
            c[k] = sense
            res = linprog(
                c, A_ub=-cycles.T, b_ub=base, bounds=[(-cap, cap)] * n_cyc, method="highs",
            )
            bounds.append(sense * res.fun if res.status == 0 else 0.0)
        lo.append(bounds[0])
        hi.append(bounds[1])
    return np.array(lo), np.array(hi)


def _grid_costs(network, flows):
    total = np.zeros(flows.shape[0])
    for k, c in enumerate(network.costs):
        total += c.value(np.maximum(flows[:, k], 0.0))
    return total


def cycle_space_bruteforce(
    network: Network,
    base_flow=None,
    grid_levels: int = 101,
    passes: int = 3,
    max_cycles: int = 4,
) -> OracleResult:
    """Grid search over fundamental-cycle amplitudes, refined ``passes`` times.

    Every feasible flow is ``base_flow`` plus a combination of the
    fundamental circulations. Each pass lays ``grid_levels`` points per
    cycle over the current box and then shrinks the box to one grid step
    either side of the best feasible point.
    """
    if base_flow is None:
        base = feasible_flow(network)
        if base is None:
            raise NoFeasibleTree("instance has no feasible flow")
    else:
        base = np.asarray(getattr(base_flow, "flows", base_flow), dtype=float)
    cycles = cycle_basis(network)
    n_cyc = len(cycles)
    if n_cyc > max_cycles:
        raise TooManyCycles(f"{n_cyc} independent cycles, limit is {max_cycles}")
    if n_cyc == 0:
        return OracleResult(base.copy(), network.objective(base), OracleMethod.CYCLE_GRID)

    cap = 2.0 * float(np.abs(network.supply_array).sum()) + float(base.max()) + 1.0
    lo, hi = _amplitude_box(base, cycles, cap)
    feas_tol = 1e-12 * max(1.0, float(base.max()))
    best_t, best_obj = np.zeros(n_cyc), network.objective(base)
    for _ in range(passes):
        axes = [np.linspace(lo[k], hi[k], grid_levels) for k in range(n_cyc)]
        # sweep the first axis one slice at a time to bound memory
        if n_cyc > 1:
            rest = np.array(np.meshgrid(*axes[1:], indexing="ij")).reshape(n_cyc - 1, -1).T
        else:
            rest = np.empty((1, 0))
        for t0 in axes[0]:
            pts = np.column_stack([np.full(len(rest), t0), rest])
            flows = base + pts @ cycles
            ok = np.all(flows >= -feas_tol, axis=1)
            if not ok.any():
                continue
            objs = _grid_costs(network, flows[ok])
            i = int(np.argmin(objs))
            if objs[i] < best_obj:
                best_obj, best_t = float(objs[i]), pts[ok][i]
        step = (hi - lo) / (grid_levels - 1)
        lo, hi = np.maximum(lo, best_t - step), np.minimum(hi, best_t + step)
    x = np.maximum(base + best_t @ cycles, 0.0)
    return OracleResult(x, network.objective(x), OracleMethod.CYCLE_GRID)


def _residual(network, x, mu):
    worst = float(max(0.0, -x.min()))
    for k, c in enumerate(network.costs):
        g = c.deriv(max(float(x[k]), 0.0)) - (mu[network.tails[k]] - mu[network.heads[k]])
        worst = max(worst, -g, x[k] * g)
    return float(worst)


def kkt_residual(network: Network, flow, loaded_tol: float = 1e-9) -> float:
    """Worst violation of the optimality conditions at ``flow``.

    ``max over arcs of max(-g, x*g, -x)`` where ``g`` is the reduced
    gradient under potentials fitted to the flow itself (root pinned at 0),
    independent of any basis. Two fits are tried and the better certificate
    is kept: least squares over the loaded arcs, and a minimax LP over all
    arcs (needed when the loaded arcs do not connect every node).
    """
    x = np.asarray(getattr(flow, "flows", flow), dtype=float)
    m, root = network.node_count, network.root
    slopes = np.array([c.deriv(max(float(xk), 0.0)) for c, xk in zip(network.costs, x)])
    a = network.incidence_matrix.T  # row k: +1 at tail, -1 at head
    free = [v for v in range(m) if v != root]

    mu = np.zeros(m)
    loaded = x > loaded_tol * max(1.0, float(x.max(initial=0.0)))
    if loaded.any():
        sol, *_ = np.linalg.lstsq(a[loaded][:, free], slopes[loaded], rcond=None)
        mu[free] = sol
    best = _residual(network, x, mu)
    if best <= 1e-12:
        return best

    # variables: mu over free nodes, then the bound t; minimise t
    n = network.arc_count
    rows, rhs = [], []
    for k in range(n):
        coef = a[k, free]
        rows.append(np.append(coef, -1.0))  # -g <= t
        rhs.append(slopes[k])
        if x[k] > 0:
            rows.append(np.append(-x[k] * coef, -1.0))  # x*g <= t
            rhs.append(-x[k] * slopes[k])
    c = np.zeros(len(free) + 1)
    c[-1] = 1.0
    res = linprog(
        c, A_ub=np.array(rows), b_ub=np.array(rhs),
        bounds=[(None, None)] * len(free) + [(0, None)], method="highs",
    )
    if res.status == 0:
        mu_lp = np.zeros(m)
        mu_lp[free] = res.x[:-1]
        best = min(best, _residual(network, x, mu_lp))
    return best
