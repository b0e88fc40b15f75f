"""Mixed convex costs, an independent global check, and the lambda = 1 stop."""

from pathlib import Path

import cvxnetflow as cnf
from cvxnetflow.oracles import cycle_space_bruteforce, kkt_residual

# %% A 4-node network with quadratic, power and exponential arc costs
net = cnf.build_network(
    4,
    [5, 0, 0, -5],
    [
        (0, 1, cnf.quadratic(1.0, 0.5)),
        (1, 3, cnf.power(0.8, 2.5)),
        (0, 2, cnf.exponential(1.0, 0.3)),
        (2, 3, cnf.quadratic(0.5, 0.0)),
        (1, 2, cnf.power(1.0, 1.5)),
    ],
)
result = cnf.solve(net)
print(result.termination.value, "after", result.iterations, "iterations")
for rec in result.trace:
    print(f"  {rec.iter:>2} {rec.case:<8} arc {rec.entering} delta {rec.delta:.4f} "
          f"lambda {rec.lam:.6f} cost {rec.objective:.8f}")

# %% Check the answer two independent ways
grid = cycle_space_bruteforce(net)
print(f"solver cost {result.objective:.8f}, grid search {grid.objective:.8f}")
print(f"KKT residual with potentials fitted to the flow alone: {kkt_residual(net, result.flows):.2e}")

# %% Two arcs that keep trading flow: the line search eventually stops moving
text = (Path(__file__).resolve().parent.parent / "tests" / "data" / "zigzag.net").read_text()
zz = cnf.parse_instance(text)
r = cnf.solve(zz)
print(r.termination.value, "after", r.iterations, "iterations; last lambdas",
      [round(rec.lam, 9) for rec in r.trace[-4:]])
print("returned cost is the best seen:", r.objective == min(rec.objective for rec in r.trace))
