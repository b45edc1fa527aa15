"""Command-line front end.

Every command builds a JSON-serializable report; the human output is rendered
from that report alone, so ``--json`` output carries everything the text shows.

Exit codes: 0 when a verdict was reached, 2 when a budget ran out before one
was, 3 on bad input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

from . import SCHEMA_VERSION, __version__
from .builtins import KENKATABAMI_EXTERIOR, load_graph
from .cocycles import (
    EdgeCocycle,
    Obstructed,
    boundary_obstruction,
    evaluate,
    height_cocycle_k3,
    load_cocycle,
    path_independence_check,
    square_group_cocycle,
)
from .constructions import (
    BoxBudget,
    FailsAt,
    GlueBudget,
    HoldsUpTo,
    box_extension_test,
    kenkatabami_witness,
    rectangle_from_trace,
    strip_glue,
)
from .errors import BudgetExhausted, HomshiftError, NotConnected, ParseError
from .graphs import Graph, bipartite_cover, enumerate_squares, is_bipartite, is_connected, spanning_tree, strip_graph
from .patterns import Completion, PeriodicConfig, box, count_fills, fill, load_pattern, square_box
from .presentations import (
    Budget,
    Decomposable,
    FiniteOrder,
    GroupPresentation,
    Refuted,
    Unknown,
    abelianize,
    coset_enumeration,
    even_square_presentation,
    square_decomposable,
    square_presentation,
)
from .walks import format_walk, parse_walk

EXIT_OK = 0
EXIT_UNKNOWN = 2
EXIT_INPUT = 3

DEFAULT_SEED = 0
DEFAULT_MAX_COSETS = 10_000


class _Unknown(Exception):
    """Raised by a command whose verdict is a budget-bounded Unknown; carries the report."""

    def __init__(self, report: dict):
        super().__init__("unknown")
        self.report = report


# ---------------------------------------------------------------------------
# reports


def _digest(parts: Sequence[str]) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p.encode())
        h.update(b"\0")
    return h.hexdigest()[:16]


def _file_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None


def make_report(command: str, inputs: dict, graph: Graph | None, files: Sequence[str], results: dict,
                verdict: str, budget: dict | None = None, checks: Sequence[str] = ()) -> dict:
    parts = [json.dumps(inputs, sort_keys=True)]
    if graph is not None:
        parts.append(graph.serialize())
    parts += [_file_text(f) for f in files]
    return {
        "schema": SCHEMA_VERSION,
        "command": command,
        "inputs": inputs,
        "inputs_digest": _digest(parts),
        "verdict": verdict,
        "results": results,
        "budget": budget or {},
        "checks": list(checks),
    }


def _render_value(key: str, value: Any, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    if isinstance(value, dict):
        out.append(f"{pad}{key}:")
        for k, v in value.items():
            _render_value(str(k), v, indent + 1, out)
    elif isinstance(value, str) and "\n" in value:
        out.append(f"{pad}{key}:")
        out.extend(f"{pad}  {line}" for line in value.rstrip("\n").split("\n"))
    elif isinstance(value, list) and value and all(isinstance(v, (dict, list)) for v in value):
        out.append(f"{pad}{key}: [{len(value)} entries]")
    else:
        out.append(f"{pad}{key}: {json.dumps(value) if not isinstance(value, str) else value}")


def render(report: dict) -> str:
    """Human summary of a report (a pure function of the report)."""
    out = [f"{report['command']}: {report['verdict']}"]
    for k, v in report["results"].items():
        _render_value(k, v, 1, out)
    if report["budget"]:
        _render_value("budget", report["budget"], 1, out)
    if report["checks"]:
        out.append("  checks ran: " + ", ".join(report["checks"]))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# helpers


def _cells(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise ParseError(f"bad integer list {text!r}") from None


def _load_config(path: str, g: Graph) -> PeriodicConfig:
    try:
        data = json.loads(_file_text(path))
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad JSON in {path}: {exc}") from None
    return PeriodicConfig.from_json(data, g)


def _cocycle(ref: str, g: Graph) -> EdgeCocycle:
    if ref == "height":
        return height_cocycle_k3(g)
    if ref == "square-group":
        return square_group_cocycle(g)
    return load_cocycle(ref, g)


def _group_summary(pres: GroupPresentation, max_cosets: int) -> dict:
    ab = abelianize(pres)
    out: dict[str, Any] = {
        "generators": len(pres.generators),
        "relators": len(pres.relators),
        "abelianization": str(ab),
        "abelian_rank": ab.free_rank,
        "torsion": list(ab.torsion),
    }
    if max_cosets > 0:
        res = coset_enumeration(pres, max_cosets)
        if isinstance(res, FiniteOrder):
            out["order"] = res.order
            out["cosets_defined"] = res.cosets_defined
        else:
            out["order"] = None
            out["cosets_defined"] = res.cosets_defined
    if out.get("order") == 1:
        out["trivial"] = "yes"
    elif not ab.is_trivial:
        out["trivial"] = "no"
    else:
        out["trivial"] = "undetermined"
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(args: argparse.Namespace) -> dict:
    g = load_graph(args.graph)
    if not is_connected(g):
        raise NotConnected("the graph is not connected")
    a = g.vertices[0]
    bip = is_bipartite(g)
    sq = square_presentation(g, a, spanning_tree(g, a))
    even = even_square_presentation(g, a)
    results = {
        "vertices": len(g.vertices),
        "edges": len(g.edges),
        "connected": True,
        "bipartite": bip.bipartite,
        "squares": len(enumerate_squares(g)),
        "basepoint": a,
        "square_group": _group_summary(sq, args.max_cosets),
        "even_square_group": _group_summary(even, args.max_cosets),
        "square_presentation": sq.serialize(),
    }
    checks = ["connectivity", "bipartiteness", "abelianization"]
    if args.max_cosets > 0:
        checks.append("coset enumeration")
    return make_report("analyze", {"graph": args.graph, "max_cosets": args.max_cosets}, g, [], results,
                       "ok", {"max_cosets": args.max_cosets}, checks)


def cmd_sqdec(args: argparse.Namespace) -> dict:
    g = load_graph(args.graph)
    c = parse_walk(args.cycle, g)
    budget = Budget(max_len=args.max_len, max_states=args.max_states)
    v = square_decomposable(g, c, budget)
    inputs = {"graph": args.graph, "cycle": args.cycle}
    bud = {"max_len": args.max_len, "max_states": args.max_states}
    if isinstance(v, Decomposable):
        results: dict[str, Any] = {"verdict": "Decomposable", "moves": len(v.trace.moves), "trace": v.trace.to_json()}
        checks = ["parity", "abelian image", "square-move search"]
        if args.certificate:
            a = c.seq[0]
            cert = rectangle_from_trace(g, v.trace, (a, g.neighbors(a)[0], a))
            results["rectangle"] = {"k": cert.k, "n": cert.n, "nu": cert.nu, "checks": cert.checks(),
                                    "grid": cert.pattern.to_grid()}
            checks.append("rectangle certificate")
        return make_report("sqdec", inputs, g, [], results, "Decomposable", bud, checks)
    if isinstance(v, Refuted):
        results = {"verdict": "Refuted", "reason": v.reason, "image": str(v.image) if v.image else None}
        return make_report("sqdec", inputs, g, [], results, "Refuted", bud, ["parity", "abelian image"])
    raise _Unknown(make_report("sqdec", inputs, g, [], {"verdict": "Unknown", "report": dict(v.report)},
                               "Unknown", bud, ["parity", "abelian image", "square-move search"]))


def cmd_fill(args: argparse.Namespace) -> dict:
    g = load_graph(args.graph)
    p = load_pattern(args.pattern, g)
    if args.target_box is None:
        lo, hi = p.bounding_box()
        target = box(lo, hi)
    else:
        nums = _cells(args.target_box)
        if len(nums) == 1:
            target = square_box(nums[0], p.dim)
        elif len(nums) == 2 * p.dim:
            target = box(nums[:p.dim], nums[p.dim:])
        else:
            raise ParseError("--target-box takes R or lo..., hi... coordinates")
    inputs = {"graph": args.graph, "pattern": args.pattern, "target_box": args.target_box, "count": args.count}
    bud = {"node_budget": args.node_budget}
    try:
        if args.count:
            n = count_fills(p, target, limit=args.limit, node_budget=args.node_budget)
            results: dict[str, Any] = {"fills": n, "limit": args.limit}
            verdict = f"{n} fills" if args.limit is None or n < args.limit else f"at least {n} fills"
        else:
            res = fill(p, target, node_budget=args.node_budget)
            if isinstance(res, Completion):
                results = {"result": "Completion"}
                if res.pattern.dim == 2:
                    results["grid"] = res.pattern.to_grid()
                else:
                    results["pattern"] = res.pattern.to_json()
                verdict = "Completion"
            else:
                results = {"result": "NoFill", "nodes": res.nodes}
                verdict = "NoFill"
    except BudgetExhausted as exc:
        raise _Unknown(make_report("fill", inputs, g, [args.pattern], {"reason": str(exc)}, "Unknown", bud,
                                   ["fill search"])) from None
    return make_report("fill", inputs, g, [args.pattern], results, verdict, bud, ["fill search"])


def cmd_cocycle(args: argparse.Namespace) -> dict:
    g = load_graph(args.graph)
    x = _load_config(args.config, g)
    c = _cocycle(args.cocycle, g)
    n = _cells(args.vector)
    val = evaluate(c, x, n)
    results: dict[str, Any] = {
        "cocycle": c.name,
        "vector": list(n),
        "value": str(val.word),
        "abelian_image": str(c.abelian(val.word)),
    }
    checks = ["evaluation"]
    if args.paths:
        results["path_independent"] = path_independence_check(c, x, n, args.paths, seed=args.seed)
        checks.append(f"{args.paths} random lattice walks")
    inputs = {"graph": args.graph, "config": args.config, "vector": args.vector, "cocycle": args.cocycle,
              "paths": args.paths, "seed": args.seed}
    files = [args.config] + ([args.cocycle] if args.cocycle not in ("height", "square-group") else [])
    return make_report("cocycle", inputs, g, files, results, "ok", {}, checks)


def cmd_obstruct(args: argparse.Namespace) -> dict:
    g = load_graph(args.graph)
    p = load_pattern(args.pattern, g)
    c = _cocycle(args.cocycle, g)
    res = boundary_obstruction(c, p)
    results: dict[str, Any] = {"up_right": str(res.up_right), "right_up": str(res.right_up)}
    if isinstance(res, Obstructed):
        verdict = "Obstructed"
        results.update({"pair": ["1", str(res.loop)], "abelian_loop": str(c.abelian(res.loop)),
                        "exact_by": res.exact_by})
    else:
        verdict = "Passes"
        results["certified_equal"] = res.certified_equal
    inputs = {"graph": args.graph, "pattern": args.pattern, "cocycle": args.cocycle}
    files = [args.pattern] + ([args.cocycle] if args.cocycle not in ("height", "square-group") else [])
    return make_report("obstruct", inputs, g, files, results, verdict, {}, ["admissibility", "boundary values"])


def cmd_cover(args: argparse.Namespace) -> dict:
    g = load_graph(args.graph)
    cover, _ = bipartite_cover(g)
    results = {"vertices": len(cover.vertices), "edges": len(cover.edges), "graph": cover.serialize()}
    return make_report("cover", {"graph": args.graph}, g, [], results, "ok")


def cmd_strip_graph(args: argparse.Namespace) -> dict:
    g = load_graph(args.graph)
    sg = strip_graph(g, args.n)
    results = {"n": args.n, "vertices": len(sg.vertices), "edges": len(sg.edges), "graph": sg.serialize()}
    return make_report("strip-graph", {"graph": args.graph, "n": args.n}, g, [], results, "ok")


def cmd_box_ext(args: argparse.Namespace) -> dict:
    g = load_graph(args.graph)
    budget = BoxBudget(max_patterns=args.max_patterns, node_budget=args.node_budget)
    res = box_extension_test(g, args.r, args.n_max, budget, threads=args.threads)
    inputs = {"graph": args.graph, "r": args.r, "n_max": args.n_max}
    bud = {"max_patterns": args.max_patterns, "node_budget": args.node_budget, "threads": args.threads}
    checks = ["ring enumeration", "annulus fill", "box fill"]
    if isinstance(res, HoldsUpTo):
        return make_report("box-ext", inputs, g, [], {"result": "HoldsUpTo", "n_max": res.n_max,
                                                       "counters": dict(res.stats)}, "HoldsUpTo", bud, checks)
    if isinstance(res, FailsAt):
        results = {"result": "FailsAt", "n": res.n, "witness_ring": res.witness.to_grid(),
                   "counters": dict(res.stats)}
        return make_report("box-ext", inputs, g, [], results, "FailsAt", bud, checks)
    raise _Unknown(make_report("box-ext", inputs, g, [], {"result": "Unknown", "counters": dict(res.report)},
                               "Unknown", bud, checks))


def cmd_glue(args: argparse.Namespace) -> dict:
    g = load_graph(args.graph)
    x = _load_config(args.x, g)
    x2 = _load_config(args.x2, g)
    res = strip_glue(g, x, x2, args.r, GlueBudget(max_l=args.max_l, node_budget=args.node_budget))
    inputs = {"graph": args.graph, "x": args.x, "x2": args.x2, "r": args.r}
    bud = {"max_l": args.max_l, "node_budget": args.node_budget}
    checks = ["core agreement", "fill", "windowed admissibility", "strip agreement"]
    if isinstance(res, Unknown):
        raise _Unknown(make_report("glue", inputs, g, [args.x, args.x2], {"report": dict(res.report)},
                                   "Unknown", bud, checks))
    return make_report("glue", inputs, g, [args.x, args.x2], {"configuration": res.to_json(args.graph)},
                       "glued", bud, checks)


def cmd_witness(args: argparse.Namespace) -> dict:
    g = load_graph(args.graph)
    cycle = tuple(parse_walk(args.cycle, g).seq) if args.cycle else KENKATABAMI_EXTERIOR
    ev = kenkatabami_witness(args.l, g, cycle)
    results = {
        "cycle": format_walk(ev.cycle),
        "l": ev.l,
        "n": ev.n,
        "refutes_box_extension_for_r_up_to": ev.refuted_r,
        "checks": dict(ev.checks),
        "counters": dict(ev.stats),
    }
    inputs = {"graph": args.graph, "cycle": format_walk(cycle), "l": args.l}
    return make_report("witness", inputs, g, [], results, "box extension fails", {},
                       ["hypothesis", "annulus", "ring-by-ring uniqueness", "inner NoFill", "box NoFill"])


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the report as JSON")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for randomized checks")
    common.add_argument("--threads", type=int, default=1, help="worker processes for parallel searches")
    common.add_argument("--max-cosets", type=int, default=DEFAULT_MAX_COSETS,
                        help="coset enumeration cap (0 disables)")

    p = argparse.ArgumentParser(prog="homshift", description="Square groups, patterns and cocycles of graph homshifts.")
    p.add_argument("--version", action="version", version=f"homshift {__version__} (report schema {SCHEMA_VERSION})")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name: str, fn: Callable[[argparse.Namespace], dict], help_: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        sp.add_argument("graph", help="graph file or builtin name (e.g. builtin:C4)")
        return sp

    add("analyze", cmd_analyze, "connectivity, squares and square-group presentations")

    sp = add("sqdec", cmd_sqdec, "square decomposability of a cycle")
    sp.add_argument("cycle", help="comma-separated vertices, e.g. 0,1,2,3,0")
    sp.add_argument("--max-len", type=int, default=16)
    sp.add_argument("--max-states", type=int, default=100_000)
    sp.add_argument("--certificate", action="store_true", help="also build a rectangle certificate")

    sp = add("fill", cmd_fill, "extend a pattern to a box")
    sp.add_argument("pattern", help="pattern file (JSON or text grid)")
    sp.add_argument("--target-box", help="R for B(R), or x0,y0,x1,y1")
    sp.add_argument("--count", action="store_true", help="count extensions instead")
    sp.add_argument("--limit", type=int, default=None, help="stop counting at this many")
    sp.add_argument("--node-budget", type=int, default=None)

    sp = add("cocycle", cmd_cocycle, "evaluate a cocycle on a periodic configuration")
    sp.add_argument("config", help="configuration JSON")
    sp.add_argument("--vector", required=True, help="lattice vector, e.g. 6,0")
    sp.add_argument("--cocycle", default="square-group", help="height, square-group or a cocycle JSON file")
    sp.add_argument("--paths", type=int, default=0, help="also compare along this many random lattice walks")

    sp = add("obstruct", cmd_obstruct, "boundary obstruction of a rectangle boundary pattern")
    sp.add_argument("pattern", help="boundary pattern file")
    sp.add_argument("--cocycle", default="square-group", help="height, square-group or a cocycle JSON file")

    add("cover", cmd_cover, "bipartite cover of a non-bipartite graph")

    sp = add("strip-graph", cmd_strip_graph, "graph of walks with n vertices")
    sp.add_argument("n", type=int)

    sp = add("box-ext", cmd_box_ext, "exhaustive box-extension test")
    sp.add_argument("--r", type=int, default=1)
    sp.add_argument("--n-max", type=int, default=0)
    sp.add_argument("--max-patterns", type=int, default=200_000)
    sp.add_argument("--node-budget", type=int, default=200_000)

    sp = add("glue", cmd_glue, "glue two perturbations of a chessboard along a strip")
    sp.add_argument("x", help="configuration JSON")
    sp.add_argument("x2", help="configuration JSON")
    sp.add_argument("--r", type=int, default=1)
    sp.add_argument("--max-l", type=int, default=64)
    sp.add_argument("--node-budget", type=int, default=500_000)

    sp = add("witness", cmd_witness, "box-extension failure evidence around a rigid cycle")
    sp.add_argument("--l", type=int, default=1)
    sp.add_argument("--cycle", default=None, help="cycle meeting the unique-common-neighbour hypothesis")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    code = EXIT_OK
    try:
        report = args.func(args)
    except _Unknown as u:
        report, code = u.report, EXIT_UNKNOWN
    except (HomshiftError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(json.dumps(report, indent=2, sort_keys=False) + "\n" if args.json else render(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
