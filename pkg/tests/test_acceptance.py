"""Exit criteria for the solver, one test per criterion.

Each test records a PASS/FAIL line that is printed in the pytest terminal
summary. Tolerances are fixed here and not tuned per run.
"""

import json
import random
import statistics
import time
from pathlib import Path

import numpy as np
import pytest

from cvxnetflow import (
    FlowState,
    Infeasible,
    SolverParams,
    Termination,
    build_network,
    compute_potentials,
    exponential,
    line_search,
    linear,
    parse_instance,
    power,
    quadratic,
    solve,
)
from cvxnetflow.cli import run_cli
from cvxnetflow.errors import NoFeasibleTree, ParseError
from cvxnetflow.oracles import cycle_space_bruteforce, enumerate_tree_solutions, kkt_residual

from conftest import ACCEPTANCE
from fuzzing import random_input
from instances import random_convex_instance, random_linear_instance, triangle_t1

DATA = Path(__file__).parent / "data"


def record(k, ok, detail):
    ACCEPTANCE[k] = (bool(ok), detail)
    assert ok, detail


@pytest.fixture(scope="module")
def runs():
    """Solver runs for criteria 1-3, reused by the certificate and invariant checks."""
    out = {"t1": [], "linear": [], "convex": [], "infeasible_draws": 0}

    net = triangle_t1()
    solve(net)  # warm caches before timing
    times = []
    for _ in range(5):
        t0 = time.perf_counter()
        r = solve(net)
        times.append(time.perf_counter() - t0)
    out["t1"].append((net, r))
    out["t1_time"] = statistics.median(times)

    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    while len(out["linear"]) < 200:
        net = random_linear_instance(rng, max_nodes=7, max_arcs=12)
        try:
            exact = enumerate_tree_solutions(net)
        except NoFeasibleTree:
            with pytest.raises(Infeasible):
                solve(net)
            out["infeasible_draws"] += 1
            continue
        out["linear"].append((net, solve(net), exact))
    out["linear_time"] = time.perf_counter() - t0

    rng = np.random.default_rng(7)
    for _ in range(50):
        net = random_convex_instance(rng, max_nodes=6, max_cycles=3)
        out["convex"].append((net, solve(net), cycle_space_bruteforce(net)))
    return out


def all_runs(runs):
    yield from runs["t1"]
    yield from ((net, r) for net, r, _ in runs["linear"])
    yield from ((net, r) for net, r, _ in runs["convex"])


def test_criterion_1_triangle(runs):
    (net, r), = runs["t1"]
    obj_err = abs(r.objective - 32 / 3)
    flow_err = float(np.abs(r.flows.flows - [4 / 3, 4 / 3, 8 / 3]).max())
    ms = runs["t1_time"] * 1e3
    ok = (
        obj_err <= 1e-6 and flow_err <= 1e-5 and r.termination is Termination.OPTIMAL
        and r.iterations < 50 and ms < 10
    )
    record(1, ok, f"obj err {obj_err:.1e}, flow err {flow_err:.1e}, {r.termination.value}, "
                  f"{r.iterations} iters, {ms:.2f} ms")


def test_criterion_2_linear_specialisation(runs):
    worst = 0.0
    not_optimal = 0
    for net, r, exact in runs["linear"]:
        worst = max(worst, abs(r.objective - exact.objective) / max(1.0, abs(exact.objective)))
        not_optimal += r.termination is not Termination.OPTIMAL
    t = runs["linear_time"]
    ok = worst <= 1e-9 and not_optimal == 0 and t < 10
    record(2, ok, f"200 instances ({runs['infeasible_draws']} infeasible draws also agreed), "
                  f"max rel err {worst:.1e}, {t:.2f} s")


def test_criterion_3_convex_oracle(runs):
    optimal = 0
    worst = -np.inf
    for net, r, grid in runs["convex"]:
        if r.termination is Termination.OPTIMAL:
            optimal += 1
            worst = max(worst, (r.objective - grid.objective) / max(1.0, abs(r.objective)))
    ok = optimal > 0 and worst <= 1e-3
    record(3, ok, f"{optimal}/50 Optimal, max (solver - oracle)/scale {worst:.1e}")


def test_criterion_4_kkt_certificate(runs):
    worst_reported = worst_oracle = 0.0
    count = 0
    for net, r in all_runs(runs):
        if r.termination is Termination.OPTIMAL:
            count += 1
            worst_reported = max(worst_reported, r.kkt_residual)
            worst_oracle = max(worst_oracle, kkt_residual(net, r.flows))
    ok = worst_reported <= 1e-6 and worst_oracle <= 1e-6
    record(4, ok, f"{count} Optimal runs, max residual {worst_reported:.1e} (solver), "
                  f"{worst_oracle:.1e} (independent fit)")


def test_criterion_5_invariants(runs):
    violations = []
    iterations = 0
    for i, (net, r) in enumerate(all_runs(runs)):
        scale = max(1.0, float(np.abs(net.supply_array).sum()))
        prev = r.initial_objective
        for rec in r.trace:
            iterations += 1
            if np.abs(net.imbalance(rec.flows)).max() > 1e-9 * scale:
                violations.append((i, rec.iter, "conservation"))
            if rec.flows.min() < -1e-12:
                violations.append((i, rec.iter, "nonnegativity"))
            if rec.objective > prev + 1e-12:
                violations.append((i, rec.iter, "descent"))
            if rec.basic_residual > 1e-10:
                violations.append((i, rec.iter, "basic gradient"))
            prev = rec.objective
        # the returned point's own potentials must price its basis at zero
        if r.basis is not None:
            mu = compute_potentials(net, r.basis, r.flows).mu
            for k in r.basis.tree_arcs:
                a = net.arcs[k]
                g = a.cost.deriv(float(r.flows.flows[k])) - (mu[a.tail] - mu[a.head])
                if abs(g) > 1e-10:
                    violations.append((i, "final", "basic gradient"))
    record(5, not violations, f"{iterations} traced iterations, {len(violations)} violations {violations[:3]}")


def _returns_best(r):
    return r.objective <= min(rec.objective for rec in r.trace)


def test_criterion_6_heuristic_path(runs):
    random_hits = [r for _, r in all_runs(runs) if r.termination is Termination.HEURISTIC_LAMBDA_ONE]
    zigzag = solve(parse_instance((DATA / "zigzag.net").read_text()))
    tight = solve(triangle_t1(), SolverParams(eps_opt=1e-15))
    near_one = sum(rec.lam > 0.9999 for rec in zigzag.trace)
    hand = [zigzag, tight]
    ok = (
        all(_returns_best(r) for r in random_hits)
        and all(r.termination is Termination.HEURISTIC_LAMBDA_ONE and _returns_best(r) for r in hand)
        and near_one >= 10
    )
    record(6, ok, f"{len(random_hits)} random runs stopped at lambda=1; hand-built zigzag: "
                  f"{near_one} line searches with lambda > 0.9999, best iterate returned")


def test_criterion_7_line_search():
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(100):
        k = int(rng.integers(1, 6))
        a = rng.uniform(0.1, 5.0, k)
        c = rng.uniform(-5.0, 5.0, k)
        y = rng.uniform(0.0, 10.0, k)
        x = np.maximum(y + rng.uniform(-10.0, 10.0, k), 0.0)
        d = x - y
        net = build_network(2, None, [(0, 1, quadratic(ai, ci)) for ai, ci in zip(a, c)])
        # phi(lam) = sum a (y + lam d)^2 + c (y + lam d), stationary where phi' = 0
        lam_true = float(np.clip(-np.sum((2 * a * y + c) * d) / np.sum(2 * a * d * d), 0, 1))
        _, lam = line_search(net, FlowState.from_flows(net, x), FlowState.from_flows(net, y))
        worst = max(worst, abs(lam - lam_true))
    record(7, worst <= 1e-8, f"100 segments, max |lambda - exact| {worst:.1e}")


def test_criterion_8_derivatives():
    rng = np.random.default_rng(8)
    makers = {
        "linear": lambda: linear(rng.uniform(-10, 10)),
        "quadratic": lambda: quadratic(rng.uniform(0, 5), rng.uniform(-5, 5)),
        "power": lambda: power(rng.uniform(0, 5), rng.uniform(1, 4)),
        "exponential": lambda: exponential(rng.uniform(0, 5), rng.uniform(0, 1)),
    }
    worst = {}
    for name, make in makers.items():
        errs = []
        for _ in range(100):
            f = make()
            x = rng.uniform(0.01, 10)
            h = 1e-6 * max(1.0, x)
            fd = (f.value(x + h) - f.value(x - h)) / (2 * h)
            d = f.deriv(x)
            errs.append(abs(d - fd) / max(1.0, abs(d)))
        worst[name] = max(errs)
    ok = max(worst.values()) <= 1e-5
    record(8, ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


def test_criterion_9_cli(capsys):
    golden_ok = True
    for name in ("t1", "t2"):
        code = run_cli(["--input", str(DATA / f"{name}.net"), "--format", "json"])
        got = json.loads(capsys.readouterr().out)
        want = json.loads((DATA / f"{name}.json").read_text())
        golden_ok &= code == 0 and list(got) == list(want)
        golden_ok &= got["termination"] == want["termination"]
        golden_ok &= abs(got["objective"] - want["objective"]) <= 1e-9
        golden_ok &= all(
            abs(g["flow"] - w["flow"]) <= 1e-9 and g["arc_id"] == w["arc_id"]
            for g, w in zip(got["flows"], want["flows"])
        )
    rnd = random.Random(9)
    crashes = []
    parsed = 0
    for i in range(10_000):
        data = random_input(rnd)
        try:
            parse_instance(data)
            parsed += 1
        except ParseError as exc:
            if exc.line < 1:
                crashes.append((i, "bad line"))
        except Exception as exc:  # anything but ParseError is a crash
            crashes.append((i, repr(exc)))
    record(9, golden_ok and not crashes,
           f"golden T1/T2 {'match' if golden_ok else 'MISMATCH'}; fuzz 10000 inputs, "
           f"{parsed} parsed, {len(crashes)} crashes {crashes[:2]}")
