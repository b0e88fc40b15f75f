"""Line-oriented instance files and result documents.

Instance grammar (node ids are 1-based)::

    c <comment>                 comment; ``c root <id>`` picks the root node
    p mccnfp <m> <n>            problem line, exactly once, before n/a lines
    n <node> <supply>           net supply b_i; unlisted nodes get 0
    a <tail> <head> <family> <params...>
                                family: lin c1 | quad c2 c1 | pow k p | expc k a

Results serialize to JSON (see :func:`result_document`) or a text table.
"""

from __future__ import annotations

import json
import math
from typing import Optional

from .costs import CallableCost, CostFn, validate_convex
from .errors import BadCostParams, FlowError, ParseError
from .network import Network, build_network
from .solver import SolveResult, Termination

#: file keyword -> (family, arity)
FAMILY_CODES = {
    "lin": ("linear", 1),
    "quad": ("quadratic", 2),
    "pow": ("power", 2),
    "expc": ("exponential", 2),
}
_CODE_OF = {fam: code for code, (fam, _) in FAMILY_CODES.items()}

STATUS = {
    Termination.OPTIMAL: "optimal",
    Termination.HEURISTIC_LAMBDA_ONE: "heuristic",
    Termination.MAX_ITERATIONS: "max_iterations",
    Termination.INFEASIBLE: "infeasible",
}


def _number(tok: str, lineno: int, what: str):
    try:
        return int(tok)
    except ValueError:
        pass
    try:
        value = float(tok)
    except ValueError:
        raise ParseError(f"{what}: expected a number, got {tok!r}", lineno) from None
    if not math.isfinite(value):
        raise ParseError(f"{what}: non-finite value {tok!r}", lineno)
    return value


def _node(tok: str, m: int, lineno: int) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise ParseError(f"bad node id {tok!r}", lineno) from None
    if not 1 <= v <= m:
        raise ParseError(f"node id {v} outside 1..{m}", lineno)
    return v - 1


def _lines(data):
    if isinstance(data, (bytes, bytearray)):
        for lineno, raw in enumerate(bytes(data).split(b"\n"), 1):
            try:
                yield lineno, raw.decode("utf-8")
            except UnicodeDecodeError:
                raise ParseError("invalid UTF-8", lineno) from None
    else:
        yield from enumerate(data.split("\n"), 1)


def parse_instance(data: str | bytes) -> Network:
    """Parse instance text (or UTF-8 bytes) into a validated :class:`Network`.

    Raises:
        ParseError: on any malformed or invalid input, carrying the line
            number. Validation errors from network construction are chained
            as ``__cause__``.
    """
    m = n_expected = None
    p_line = 1
    root = 0
    root_line = None
    supplies: dict[int, object] = {}
    arcs = []
    for lineno, line in _lines(data):
        toks = line.split()
        if not toks:
            continue
        kind = toks[0]
        if kind == "c":
            if len(toks) >= 2 and toks[1] == "root":
                if len(toks) != 3:
                    raise ParseError("expected 'c root <id>'", lineno)
                root_tok, root_line = toks[2], lineno
            continue
        if kind == "p":
            if m is not None:
                raise ParseError("duplicate problem line", lineno)
            if len(toks) != 4 or toks[1] != "mccnfp":
                raise ParseError("expected 'p mccnfp <nodes> <arcs>'", lineno)
            try:
                m, n_expected = int(toks[2]), int(toks[3])
            except ValueError:
                raise ParseError("node and arc counts must be integers", lineno) from None
            if m < 2 or n_expected < 1:
                raise ParseError("need at least 2 nodes and 1 arc", lineno)
            if n_expected < m - 1:
                raise ParseError(f"{n_expected} arcs cannot connect {m} nodes", lineno)
            p_line = lineno
            continue
        if m is None:
            raise ParseError("problem line must come first", lineno)
        if kind == "n":
            if len(toks) != 3:
                raise ParseError("expected 'n <node> <supply>'", lineno)
            v = _node(toks[1], m, lineno)
            if v in supplies:
                raise ParseError(f"duplicate supply for node {v + 1}", lineno)
            supplies[v] = _number(toks[2], lineno, "supply")
        elif kind == "a":
            if len(toks) < 4:
                raise ParseError("expected 'a <tail> <head> <family> <params...>'", lineno)
            tail, head = _node(toks[1], m, lineno), _node(toks[2], m, lineno)
            if toks[3] not in FAMILY_CODES:
                raise ParseError(f"unknown cost family {toks[3]!r}", lineno)
            family, arity = FAMILY_CODES[toks[3]]
            if len(toks) != 4 + arity:
                raise ParseError(f"{toks[3]} takes {arity} parameter(s)", lineno)
            cost = CostFn(family, tuple(float(_number(t, lineno, "cost parameter")) for t in toks[4:]))
            try:
                validate_convex(cost)
            except BadCostParams as exc:
                raise ParseError(str(exc), lineno) from exc
            if tail == head:
                raise ParseError(f"self-loop at node {tail + 1}", lineno)
            arcs.append((tail, head, cost))
            if len(arcs) > n_expected:
                raise ParseError(f"more than the declared {n_expected} arcs", lineno)
        else:
            raise ParseError(f"unknown line type {kind!r}", lineno)

    if m is None:
        raise ParseError("missing problem line", 1)
    if len(arcs) != n_expected:
        raise ParseError(f"declared {n_expected} arcs, found {len(arcs)}", p_line)
    if root_line is not None:
        root = _node(root_tok, m, root_line)
    try:
        return build_network(m, supplies, arcs, root)
    except (FlowError, ValueError) as exc:
        raise ParseError(str(exc), p_line) from exc


def _fmt(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def format_instance(network: Network, comment: Optional[str] = None) -> str:
    """Instance text that :func:`parse_instance` maps back to ``network``."""
    out = []
    if comment:
        out.extend(f"c {line}" for line in comment.splitlines())
    out.append(f"p mccnfp {network.node_count} {network.arc_count}")
    if network.root != 0:
        out.append(f"c root {network.root + 1}")
    for v, b in enumerate(network.supplies):
        if b != 0 or isinstance(b, float):
            out.append(f"n {v + 1} {_fmt(b)}")
    for a in network.arcs:
        if isinstance(a.cost, CallableCost):
            raise ValueError(f"arc {a.id} has a callable cost; not representable in a file")
        params = " ".join(repr(p) for p in a.cost.params)
        out.append(f"a {a.tail + 1} {a.head + 1} {_CODE_OF[a.cost.family]} {params}")
    return "\n".join(out) + "\n"


def _num(v):
    if v is None or not math.isfinite(v):
        return None
    return float(f"{v:.12g}")


def result_document(
    result: SolveResult, network: Optional[Network] = None, trace: bool = False
) -> dict:
    """JSON-ready dict. Node and arc ids are 1-based, flows in arc order."""
    doc = {
        "status": STATUS[result.termination],
        "objective": _num(result.objective),
        "kkt_residual": _num(result.kkt_residual),
        "iterations": result.iterations,
        "termination": result.termination.value,
        "flows": [],
    }
    if result.flows is not None and network is not None:
        doc["flows"] = [
            {"tail": a.tail + 1, "head": a.head + 1, "arc_id": a.id + 1, "flow": _num(x)}
            for a, x in zip(network.arcs, result.flows.flows)
        ]
    if trace:
        doc["trace"] = [
            {
                "iter": r.iter,
                "case": r.case,
                "entering": r.entering + 1,
                "leaving": None if r.leaving is None else r.leaving + 1,
                "delta": _num(r.delta),
                "lambda": _num(r.lam),
                "objective": _num(r.objective),
                "at_cap": r.at_cap,
            }
            for r in result.trace
        ]
    return doc


def emit_result(
    result: SolveResult,
    network: Optional[Network] = None,
    fmt: str = "text",
    trace: bool = False,
    extra: Optional[dict] = None,
) -> str:
    doc = result_document(result, network, trace)
    if extra:
        doc.update(extra)
    if fmt == "json":
        return json.dumps(doc, indent=2) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    if result.termination is Termination.INFEASIBLE:
        return "status: infeasible\n"

    def g(v):
        return "-" if v is None else f"{v:.12g}"

    lines = [
        f"status:       {doc['status']}",
        f"termination:  {doc['termination']}",
        f"objective:    {g(doc['objective'])}",
        f"kkt_residual: {g(doc['kkt_residual'])}",
        f"iterations:   {doc['iterations']}",
    ]
    for key, value in (extra or {}).items():
        lines.append(f"{key + ':':<13} {json.dumps(value)}")
    if doc["flows"]:
        rows = [(str(f["arc_id"]), str(f["tail"]), str(f["head"]), g(f["flow"])) for f in doc["flows"]]
        header = ("arc", "tail", "head", "flow")
        widths = [max(len(r[i]) for r in rows + [header]) for i in range(4)]
        lines.append("")
        for row in [header] + rows:
            lines.append("  ".join(c.rjust(w) for c, w in zip(row, widths)))
    if trace and doc.get("trace"):
        lines.append("")
        lines.append("iter  case      entering  leaving  delta  lambda  objective")
        for r in doc["trace"]:
            leaving = "-" if r["leaving"] is None else str(r["leaving"])
            lines.append(
                f"{r['iter']:>4}  {r['case']:<8}  {r['entering']:>8}  {leaving:>7}  "
                f"{g(r['delta'])}  {g(r['lambda'])}  {g(r['objective'])}"
            )
    return "\n".join(lines) + "\n"
