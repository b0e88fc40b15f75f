"""With linear costs the method reduces to the network simplex method.

Every vertex of the feasible polyhedron is the basic solution of some
spanning tree, so enumerating trees gives the exact optimum on small
instances. This script checks the solver against that on random networks.
"""

import numpy as np

import cvxnetflow as cnf
from cvxnetflow.oracles import enumerate_tree_solutions


def random_instance(rng, m=6, n=10):
    pairs = [(i, int(rng.integers(i))) for i in range(1, m)]  # spanning tree
    pairs += [tuple(int(v) for v in rng.choice(m, 2, replace=False)) for _ in range(n - m + 1)]
    flows = rng.integers(0, 4, len(pairs))
    b = np.zeros(m, dtype=int)
    for (u, v), f in zip(pairs, flows):
        b[u] += f
        b[v] -= f
    costs = rng.integers(1, 21, len(pairs))
    return cnf.build_network(m, b.tolist(), [(u, v, cnf.linear(int(c))) for (u, v), c in zip(pairs, costs)])


rng = np.random.default_rng(0)
print(f"{'#':>3} {'solver':>10} {'exact':>10} {'pivots':>7}")
for i in range(10):
    net = random_instance(rng)
    result = cnf.solve(net)
    exact = enumerate_tree_solutions(net)
    print(f"{i:>3} {result.objective:>10.4f} {exact.objective:>10.4f} {result.iterations:>7}")
    assert abs(result.objective - exact.objective) <= 1e-9 * max(1, exact.objective)
