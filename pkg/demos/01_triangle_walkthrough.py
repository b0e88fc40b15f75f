"""One iteration of the convex-simplex method, by hand, on a triangle.

Three nodes, 4 units from node 0 to node 2, and cost x**2 on every arc.
Sending f units on the direct arc and 4 - f on the two-hop path costs
f**2 + 2 (4 - f)**2, which is smallest at f = 8/3.
"""

import numpy as np

import cvxnetflow as cnf

q = cnf.quadratic(1.0, 0.0)
net = cnf.build_network(3, [4, 0, -4], [(0, 1, q), (1, 2, q), (0, 2, q)])

# %% Phase 1: a feasible flow on a spanning tree
x, tree = cnf.phase1_initial_solution(net)
print("start flows", x.flows, "cost", x.objective, "tree arcs", sorted(tree.tree_arcs))

# %% Price the arcs
mu = cnf.compute_potentials(net, tree, x)
print("potentials", mu.mu)
for k in range(net.arc_count):
    print(f"  reduced gradient of arc {k}: {cnf.reduced_gradient(net, k, x, mu):+.3f}")

pair = cnf.select_candidates(net, x, tree, mu)
print("candidates", pair, "optimal?", cnf.check_optimality(pair, 1e-7))

# %% Push flow around the direct arc's loop
loop = cnf.find_loop(net, tree, pair.rl)
print("loop members (arc, direction)", loop.members)
delta, blocking = cnf.compute_delta(net, loop, x, cnf.Case.INCREASE)
y = cnf.adjust_flows(net, x, loop, delta, cnf.Case.INCREASE)
print(f"push {delta} units; blocking arc {blocking}; pushed flows {y.flows} cost {y.objective}")

# %% The full push overshoots; the line search stops a third of the way back
x_next, lam = cnf.line_search(net, x, y)
print(f"lambda = {lam:.10f}, flows {x_next.flows}, cost {x_next.objective:.10f}")
tree = cnf.update_basis(net, tree, pair.rl, blocking, x_next, y)
print("basis after partial step", sorted(tree.tree_arcs))

# %% The solver does all of this in a loop
result = cnf.solve(net)
print(result.termination.value, result.iterations, "iteration(s)", result.flows.flows, result.objective)
assert np.allclose(result.flows.flows, [4 / 3, 4 / 3, 8 / 3])
