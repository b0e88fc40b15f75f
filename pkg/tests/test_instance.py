import json
import random
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvxnetflow import (
    BadCostParams,
    CallableCost,
    Disconnected,
    ParseError,
    SolveResult,
    UnbalancedSupplies,
    build_network,
    linear,
    quadratic,
    solve,
)
from cvxnetflow.instance import emit_result, format_instance, parse_instance, result_document

from fuzzing import random_input
from instances import random_convex_instance, random_linear_instance, triangle_t1

T1_TEXT = "p mccnfp 3 3\nn 1 4\nn 3 -4\na 1 2 quad 1 0\na 2 3 quad 1 0\na 1 3 quad 1 0"


def test_parse_t1():
    assert parse_instance(T1_TEXT) == triangle_t1()


def test_parse_bytes_and_comments():
    text = "c hello\n\n" + T1_TEXT.replace("\n", "\r\n") + "\nc bye\n"
    assert parse_instance(text.encode()) == triangle_t1()


def test_root_directive():
    net = parse_instance("c root 3\n" + T1_TEXT)
    assert net.root == 2


def test_bad_cost_params_reported_at_arc_line():
    with pytest.raises(ParseError) as info:
        parse_instance("p mccnfp 2 1\nn 1 1\na 1 2 pow 1 0.5")
    assert info.value.line == 3
    assert isinstance(info.value.__cause__, BadCostParams)


def test_missing_problem_line():
    with pytest.raises(ParseError) as info:
        parse_instance("n 1 4\nn 3 -4\na 1 2 quad 1 0")
    assert info.value.line == 1
    with pytest.raises(ParseError) as info:
        parse_instance("c nothing here\n")
    assert info.value.line == 1


@pytest.mark.parametrize(
    "text, line",
    [
        ("p mccnfp 2 1\np mccnfp 2 1", 2),
        ("p mccnfp 2 1\nn 3 1", 2),
        ("p mccnfp 2 1\nn 1 1\nn 1 1", 3),
        ("p mccnfp 2 1\na 1 2 cubic 1", 2),
        ("p mccnfp 2 1\na 1 2 quad 1", 2),
        ("p mccnfp 2 1\na 1 1 lin 1", 2),
        ("p mccnfp 2 1\na 1 2 lin 1\na 2 1 lin 1", 3),
        ("p mccnfp 2 2\na 1 2 lin 1", 1),
        ("p mccnfp 2 1\nn 1 nan\na 1 2 lin 1", 2),
        ("p mccnfp 2 1\nx 1 2", 2),
        ("p mcf 2 1", 1),
        ("p mccnfp 5 2", 1),
        ("c root 9\np mccnfp 2 1\na 1 2 lin 1", 1),
        (b"p mccnfp 2 1\n\xff\xfe", 2),
    ],
)
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as info:
        parse_instance(text)
    assert info.value.line == line


def test_network_errors_are_chained():
    with pytest.raises(ParseError) as info:
        parse_instance("p mccnfp 2 1\nn 1 1\na 1 2 lin 1")
    assert isinstance(info.value.__cause__, UnbalancedSupplies)
    with pytest.raises(ParseError) as info:
        parse_instance("p mccnfp 4 3\na 1 2 lin 1\na 2 1 lin 1\na 3 4 lin 1")
    assert isinstance(info.value.__cause__, Disconnected)


def test_format_rejects_callable_costs():
    net = build_network(2, None, [(0, 1, CallableCost(lambda x: x, lambda x: 1.0))])
    with pytest.raises(ValueError):
        format_instance(net)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_round_trip(seed, convex):
    rng = np.random.default_rng(seed)
    net = random_convex_instance(rng) if convex else random_linear_instance(rng)
    assert parse_instance(format_instance(net, comment="generated")) == net


def test_round_trip_float_supplies():
    net = build_network(3, [0.1, 0.2, -0.30000000000000004], [(0, 1, linear(1)), (1, 2, quadratic(0.3, 1e-17))])
    assert parse_instance(format_instance(net)) == net


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fuzz_only_parse_errors(seed):
    data = random_input(random.Random(seed))
    try:
        parse_instance(data)
    except ParseError as exc:
        assert exc.line >= 1


@settings(max_examples=200, deadline=None)
@given(st.binary(max_size=300))
def test_fuzz_raw_bytes(data):
    try:
        parse_instance(data)
    except ParseError as exc:
        assert exc.line >= 1


def test_emit_json_t1():
    net = triangle_t1()
    doc = json.loads(emit_result(solve(net), net, "json"))
    assert doc["objective"] == 10.6666666667
    assert doc["termination"] == "Optimal"
    assert list(doc) == ["status", "objective", "kkt_residual", "iterations", "termination", "flows"]
    assert [f["arc_id"] for f in doc["flows"]] == [1, 2, 3]


def test_emit_infeasible_text():
    assert emit_result(SolveResult.infeasible(), None, "text") == "status: infeasible\n"
    doc = json.loads(emit_result(SolveResult.infeasible(), None, "json"))
    assert doc["status"] == "infeasible" and doc["objective"] is None and doc["flows"] == []


def test_emit_trace_length_matches_iterations():
    net = parse_instance((Path(__file__).parent / "data" / "zigzag.net").read_text())
    r = solve(net)
    doc = result_document(r, net, trace=True)
    assert len(doc["trace"]) == doc["iterations"] == r.iterations
    assert set(doc["trace"][0]) == {"iter", "case", "entering", "leaving", "delta", "lambda", "objective", "at_cap"}


def test_emit_is_deterministic():
    net = triangle_t1()
    a = emit_result(solve(net), net, "json", trace=True)
    b = emit_result(solve(net), net, "json", trace=True)
    assert a == b


def test_emit_text_table():
    net = triangle_t1()
    text = emit_result(solve(net), net, "text", trace=True)
    assert text.startswith("status:       optimal\n")
    assert "objective:    10.6666666667" in text
    assert "iter  case" in text
