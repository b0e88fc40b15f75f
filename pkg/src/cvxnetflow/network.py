"""Directed networks, incidence columns, spanning-tree bases and their loops.

Nodes are dense 0-based integers ``0 .. m-1`` and arcs are identified by
their 0-based position in the arc list, so parallel arcs are distinct. The
instance file format uses 1-based node ids; :mod:`cvxnetflow.instance`
does the translation.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from numbers import Integral, Rational
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .costs import CallableCost, CostFn, validate_convex
from .errors import (
    ArcAlreadyBasic,
    BadCostParams,
    Disconnected,
    InvalidTree,
    SelfLoop,
    UnbalancedSupplies,
    UnknownArc,
)

#: id of the synthetic root arc that makes the basis square
ARTIFICIAL_ARC = -1


@dataclass(frozen=True)
class Arc:
    id: int
    tail: int
    head: int
    cost: CostFn


@dataclass(frozen=True)
class Network:
    """Immutable network; build it with :func:`build_network`."""

    node_count: int
    supplies: tuple
    arcs: tuple[Arc, ...]
    root: int = 0

    @property
    def arc_count(self) -> int:
        return len(self.arcs)

    @cached_property
    def tails(self) -> tuple[int, ...]:
        return tuple(a.tail for a in self.arcs)

    @cached_property
    def heads(self) -> tuple[int, ...]:
        return tuple(a.head for a in self.arcs)

    @cached_property
    def costs(self) -> tuple:
        return tuple(a.cost for a in self.arcs)

    @cached_property
    def supply_array(self) -> np.ndarray:
        return np.array([float(b) for b in self.supplies])

    @cached_property
    def total_supply(self) -> float:
        """Sum of the positive supplies."""
        return float(sum(b for b in self.supplies if b > 0))

    @cached_property
    def incidence_matrix(self) -> np.ndarray:
        """Dense ``m x n`` node-arc incidence matrix (rank ``m - 1``)."""
        a = np.zeros((self.node_count, self.arc_count))
        idx = np.arange(self.arc_count)
        a[list(self.tails), idx] = 1.0
        a[list(self.heads), idx] = -1.0
        return a

    @property
    def is_linear(self) -> bool:
        return all(c.is_linear for c in self.costs)

    def arc(self, arc_id: int) -> Arc:
        if not isinstance(arc_id, Integral) or not 0 <= arc_id < len(self.arcs):
            raise UnknownArc(f"no arc with id {arc_id!r}")
        return self.arcs[arc_id]

    def imbalance(self, flows) -> np.ndarray:
        """Per-node ``outflow - inflow - b``; zero for a conserving flow."""
        return self.incidence_matrix @ np.asarray(flows, dtype=float) - self.supply_array

    def objective(self, flows) -> float:
        return float(sum(c.value(float(x)) for c, x in zip(self.costs, flows)))


def _is_exact(values) -> bool:
    return all(isinstance(v, Rational) for v in values)


def build_network(
    node_count: int,
    supplies: Sequence | Mapping[int, float] | None,
    arcs: Iterable[tuple[int, int, CostFn]],
    root: int = 0,
) -> Network:
    """Validate and assemble a :class:`Network`.

    Args:
        node_count: number of nodes ``m >= 2``.
        supplies: either a length-``m`` sequence or a ``{node: b}`` mapping;
            missing nodes get supply 0.
        arcs: ``(tail, head, cost)`` triples; arc ids follow list order.
        root: node carrying the artificial root arc.

    Raises:
        UnbalancedSupplies, SelfLoop, Disconnected, BadCostParams, ValueError
    """
    m = int(node_count)
    if m < 2:
        raise ValueError(f"need at least 2 nodes, got {m}")
    if supplies is None:
        b = [0] * m
    elif isinstance(supplies, Mapping):
        b = [0] * m
        for node, value in supplies.items():
            _check_node(node, m)
            b[node] = value
    else:
        b = list(supplies)
        if len(b) != m:
            raise ValueError(f"expected {m} supplies, got {len(b)}")
    _check_node(root, m)

    arc_list = []
    for k, (tail, head, cost) in enumerate(arcs):
        _check_node(tail, m)
        _check_node(head, m)
        if tail == head:
            raise SelfLoop(f"arc {k} is a self-loop at node {tail}")
        if isinstance(cost, CostFn):
            validate_convex(cost)
        elif not isinstance(cost, CallableCost):
            raise BadCostParams(f"arc {k}: unsupported cost object {cost!r}")
        arc_list.append(Arc(k, int(tail), int(head), cost))
    if not arc_list:
        raise ValueError("network has no arcs")

    if not all(np.isfinite(float(v)) for v in b):
        raise ValueError("supplies must be finite")
    total = sum(b)
    if _is_exact(b):
        balanced = total == 0
    else:
        balanced = abs(float(total)) <= 1e-9 * sum(abs(float(v)) for v in b)
    if not balanced:
        raise UnbalancedSupplies(f"supplies sum to {total}, not 0")

    _check_connected(m, arc_list)
    return Network(m, tuple(b), tuple(arc_list), int(root))


def _check_node(node, m):
    if not isinstance(node, Integral) or not 0 <= node < m:
        raise ValueError(f"node {node!r} outside 0..{m - 1}")


def _check_connected(m, arcs):
    adj = [[] for _ in range(m)]
    for a in arcs:
        adj[a.tail].append(a.head)
        adj[a.head].append(a.tail)
    seen = {0}
    stack = [0]
    while stack:
        for v in adj[stack.pop()]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    if len(seen) != m:
        missing = sorted(set(range(m)) - seen)
        raise Disconnected(f"nodes {missing} unreachable from node 0")


class IncidenceColumn(NamedTuple):
    tail_row: int
    head_row: int

    def dense(self, m: int) -> np.ndarray:
        col = np.zeros(m)
        col[self.tail_row] = 1.0
        col[self.head_row] = -1.0
        return col


def incidence_column(network: Network, arc_id: int) -> IncidenceColumn:
    arc = network.arc(arc_id)
    return IncidenceColumn(arc.tail, arc.head)


@dataclass(frozen=True)
class TreeBasis:
    """A spanning tree of basic arcs rooted at ``network.root``.

    ``parent[v]`` / ``parent_arc[v]`` give the tree edge from ``v`` towards
    the root; the root's parent arc is :data:`ARTIFICIAL_ARC`. ``order``
    lists nodes so every parent precedes its children.
    """

    tree_arcs: frozenset
    parent: tuple[int, ...]
    parent_arc: tuple[int, ...]
    depth: tuple[int, ...]
    order: tuple[int, ...]
    artificial_arc: int = ARTIFICIAL_ARC

    @classmethod
    def from_arcs(cls, network: Network, arc_ids: Iterable[int]) -> TreeBasis:
        ids = frozenset(arc_ids)
        m = network.node_count
        if len(ids) != m - 1:
            raise InvalidTree(f"a spanning tree needs {m - 1} arcs, got {len(ids)}")
        adj = [[] for _ in range(m)]
        for k in ids:
            a = network.arc(k)
            adj[a.tail].append((a.head, k))
            adj[a.head].append((a.tail, k))
        root = network.root
        parent = [-2] * m
        parent_arc = [ARTIFICIAL_ARC] * m
        depth = [0] * m
        parent[root] = -1
        order = [root]
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v, k in adj[u]:
                if parent[v] == -2:
                    parent[v], parent_arc[v], depth[v] = u, k, depth[u] + 1
                    order.append(v)
                    queue.append(v)
        if len(order) != m:
            raise InvalidTree("arcs do not span every node")
        return cls(ids, tuple(parent), tuple(parent_arc), tuple(depth), tuple(order))

    def __contains__(self, arc_id) -> bool:
        return arc_id in self.tree_arcs

    def swap(self, network: Network, entering: int, leaving: int) -> TreeBasis:
        """Return the basis with ``leaving`` replaced by ``entering``."""
        if leaving not in self.tree_arcs:
            raise InvalidTree(f"arc {leaving} is not basic")
        return TreeBasis.from_arcs(network, (self.tree_arcs - {leaving}) | {entering})


class OrientedLoop(NamedTuple):
    """Fundamental cycle of ``entering_arc``.

    ``members`` holds ``(arc_id, d)`` for the tree arcs of the cycle, walked
    from the entering arc's head back to its tail. ``d = +1`` when the arc
    points along the loop direction (that of the entering arc), ``-1``
    otherwise.
    """

    entering_arc: int
    members: tuple[tuple[int, int], ...]


def find_loop(network: Network, tree: TreeBasis, entering_arc: int) -> OrientedLoop:
    arc = network.arc(entering_arc)
    if entering_arc in tree.tree_arcs:
        raise ArcAlreadyBasic(f"arc {entering_arc} is already basic")
    tails = network.tails
    up, down = [], []
    u, v = arc.head, arc.tail
    # climb from both ends to the common ancestor
    while u != v:
        if tree.depth[u] >= tree.depth[v]:
            k = tree.parent_arc[u]
            up.append((k, 1 if tails[k] == u else -1))
            u = tree.parent[u]
        else:
            k = tree.parent_arc[v]
            # walked downwards towards v, so an arc leaving the parent agrees
            down.append((k, 1 if tails[k] == tree.parent[v] else -1))
            v = tree.parent[v]
    return OrientedLoop(entering_arc, tuple(up + down[::-1]))


def tree_solve_flows(
    network: Network,
    tree: TreeBasis,
    supplies: Sequence | None = None,
    nonbasic: Mapping[int, float] | None = None,
) -> dict[int, float]:
    """Solve conservation for the tree arcs with non-tree flows held fixed.

    Leaves are eliminated towards the root; only additions are used, so
    ``int`` or ``Fraction`` input stays exact. Tree flows may come out
    negative; the caller judges feasibility.
    Returns flows for every arc, keyed by arc id.
    """
    b = network.supplies if supplies is None else supplies
    nonbasic = nonbasic or {}
    zero = 0 if _is_exact(b) and _is_exact(nonbasic.values()) else 0.0
    remaining = [zero + v for v in b]
    flows = {}
    for a in network.arcs:
        if a.id in tree.tree_arcs:
            continue
        x = nonbasic.get(a.id, zero)
        flows[a.id] = x
        remaining[a.tail] -= x
        remaining[a.head] += x
    for v in reversed(tree.order[1:]):
        k = tree.parent_arc[v]
        p = tree.parent[v]
        if network.tails[k] == v:
            x = remaining[v]
            remaining[p] += x
        else:
            x = -remaining[v]
            remaining[p] -= x
        flows[k] = x
    return {k: flows[k] for k in range(network.arc_count)}
