"""The dpclab command line."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import corpus
from .bounds import (Algebra, BoundReport, check_algebra, check_dc_bound_from_algebra, ig_transform,
                     usable_problem_rules)
from .dp import apply_argument_filtering, dependency_pairs, estimated_dependency_graph, usable_rules
from .errors import DpclabError, NotAnSrs
from .progeny import progenitor_graph
from .rewrite import DEFAULT_BUDGET, Derivation, derive, empirical_complexity, format_trace, parse_trace
from .simtrs import (SimParams, Simulator, constant_f_rules, fast_function, generate_sim_trs, linear_f_rules,
                     params_for)
from .suites import suite
from .terms import Trs, parse_term, parse_trs, pos_str, to_text, variables

VERBS = ("parse", "dp", "filter", "graph", "usable", "derive", "pgraph", "ig", "measure", "check",
         "simgen", "simulate", "fast")
CHECKS = ("progeny", "bounds", "srs", "rank", "algebra", "usable", "all")

# The filtering used for the motivating system, marked symbols included.
INTRO_FILTERING = {"f": 1, "f#": 1, "i": [1], "i#": 1, "∘": [1, 2], "∘#": [1, 2]}


class UsageError(DpclabError):
    pass


# ---------------------------------------------------------------- input

def load_trs(args) -> Trs:
    sources = [x for x in (args.example, args.input) if x is not None]
    if len(sources) != 1:
        raise UsageError("give exactly one input: a TRS file or --example NAME|FILE")
    src = sources[0]
    if src in corpus.NAMES:
        return corpus.example(src, args.param)
    path = Path(src)
    if not path.exists():
        raise UsageError(f"{src!r} is neither a bundled example ({', '.join(corpus.NAMES)}) nor a file")
    return parse_trs(path.read_text(encoding="utf-8"))


def example_name(args):
    src = args.example if args.example is not None else args.input
    return src if src in corpus.NAMES else None


def load_derivation(args, trs: Trs) -> Derivation:
    strategy = args.strategy or "li"
    if args.trace is not None:
        return parse_trace(corpus.resolve_trace(args.trace), trs)
    if strategy.startswith("trace:"):
        return parse_trace(corpus.resolve_trace(strategy[len("trace:"):]), trs)
    if args.term is None:
        name = example_name(args)
        if name in corpus.TRACES:
            return corpus.example_trace(name, corpus.TRACES[name][0])
        raise UsageError("give --term, --trace or --strategy trace:FILE")
    if strategy not in ("li", "lo"):
        raise UsageError(f"unknown strategy {strategy!r}")
    return derive(trs, parse_term(args.term), strategy, args.steps)


def need_term(args):
    if args.term is None:
        raise UsageError("--term is required")
    return parse_term(args.term)


# ---------------------------------------------------------------- output

class Out:
    def __init__(self, fmt: str):
        self.fmt = fmt
        self.buf = io.StringIO()

    def text(self, s: str):
        self.buf.write(s if s.endswith("\n") else s + "\n")

    def json(self, obj):
        self.text(json.dumps(obj, ensure_ascii=False, indent=2))

    def csv(self, header, rows):
        w = csv.writer(self.buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def rules_json(rules):
    return [{"lhs": to_text(r.lhs), "rhs": to_text(r.rhs)} for r in rules]


def emit_rules(out: Out, rules, key: str):
    if out.fmt == "json":
        out.json({key: rules_json(rules)})
    elif out.fmt == "csv":
        out.csv(["index", "lhs", "rhs"], [[i, to_text(r.lhs), to_text(r.rhs)] for i, r in enumerate(rules)])
    else:
        for i, r in enumerate(rules):
            out.text(f"{i}: {to_text(r.lhs)} -> {to_text(r.rhs)}")


def emit_reports(out: Out, reports) -> int:
    if out.fmt == "json":
        out.json([r.to_json() for r in reports])
    elif out.fmt == "csv":
        out.csv(["check", "pass", "lhs", "rhs"], [r.csv_row() for r in reports])
    else:
        for r in reports:
            status = "PASS" if r.passed else "FAIL"
            failed = [lab for lab, *_, ok in r.inequalities if not ok]
            detail = f" ({'; '.join(failed)})" if failed else ""
            out.text(f"{status} {r.check}{detail}")
        passed = sum(r.passed for r in reports)
        out.text(f"{passed}/{len(reports)} passed")
    return 0 if all(r.passed for r in reports) else 1


# ---------------------------------------------------------------- verbs

def cmd_parse(args, out):
    trs = load_trs(args)
    if out.fmt == "json":
        out.json({"rules": rules_json(trs.rules), "signature": dict(sorted(trs.signature.items())),
                  "defined": sorted(trs.defined)})
    elif out.fmt == "csv":
        emit_rules(out, trs.rules, "rules")
    else:
        out.text(str(trs))
    return 0


def cmd_dp(args, out):
    problem = dependency_pairs(load_trs(args))
    emit_rules(out, problem.pairs, "pairs")
    return 0


def filtering_for(args) -> dict:
    if args.pi is not None:
        text = Path(args.pi).read_text(encoding="utf-8") if Path(args.pi).exists() else args.pi
        try:
            pi = json.loads(text)
        except json.JSONDecodeError as e:
            raise UsageError(f"--pi is not valid JSON: {e}") from None
    elif example_name(args) == "Ra":
        pi = dict(INTRO_FILTERING)
    else:
        raise UsageError("--pi is required for this system")
    for f, v in list(pi.items()):
        pi.setdefault(f + "#", v)
    return pi


def cmd_filter(args, out):
    trs = load_trs(args)
    pi = filtering_for(args)
    if args.term is not None:
        image = apply_argument_filtering(pi, parse_term(args.term, variables=_variables(trs)))
        out.json({"term": to_text(image)}) if out.fmt == "json" else out.text(to_text(image))
        return 0
    filtered = apply_argument_filtering(pi, dependency_pairs(trs))
    if out.fmt == "json":
        out.json({"pairs": rules_json(filtered.pairs), "rules": rules_json(filtered.base.rules)})
    else:
        out.text("pairs:")
        emit_rules(out, filtered.pairs, "pairs")
        out.text("rules:")
        emit_rules(out, filtered.base.rules, "rules")
    return 0


def _variables(trs: Trs) -> set:
    return {v.name for r in trs.rules for v in variables(r.lhs)}


def cmd_graph(args, out):
    problem = dependency_pairs(load_trs(args))
    g = estimated_dependency_graph(problem)
    if out.fmt == "json":
        out.json(g.to_json())
    elif out.fmt == "dot":
        out.text(g.to_dot(problem))
    elif out.fmt == "csv":
        out.csv(["source", "target"], sorted(g.edges))
    else:
        out.text(f"{len(g.nodes)} nodes, {len(g.edges)} edges")
        for a, b in sorted(g.edges):
            out.text(f"{a} -> {b}")
        for c in g.sccs:
            kind = "trivial" if c.trivial else "nontrivial"
            out.text(f"scc rank {c.rank}: {list(c.members)} {kind}")
    return 0


def cmd_usable(args, out):
    problem = dependency_pairs(load_trs(args))
    u = usable_rules(problem, exact_size=args.max_size, budget=args.budget)
    if out.fmt == "json":
        out.json({"usable": rules_json(u.usable), "indices": list(u.indices), "ce": rules_json(u.ce),
                  "exact_check": u.exact_check})
        return 0
    emit_rules(out, u.usable, "usable")
    if out.fmt == "text":
        for r in u.ce:
            out.text(f"ce: {to_text(r.lhs)} -> {to_text(r.rhs)}")
        if u.exact_check is not None:
            out.text(f"exact check up to size {args.max_size}: {'ok' if u.exact_check else 'violated'}")
    return 0 if u.exact_check in (None, True) else 1


def cmd_derive(args, out):
    trs = load_trs(args)
    d = load_derivation(args, trs)
    if out.fmt == "json":
        out.json({"terms": [to_text(t) for t in d.terms],
                  "steps": [{"pos": pos_str(s.redex), "rule": s.rule_index} for s in d.steps]})
    else:
        out.text(format_trace(d))
    return 0


def cmd_pgraph(args, out):
    trs = load_trs(args)
    d = load_derivation(args, trs)
    g = progenitor_graph(d, trs)
    if out.fmt == "json":
        out.json(g.to_json())
    elif out.fmt == "dot":
        out.text(g.to_dot())
    elif out.fmt == "csv":
        out.csv(["source", "target"], [[f"t{a[0]}@{pos_str(a[1])}", f"t{b[0]}@{pos_str(b[1])}"]
                                       for a, b in g.edges])
    else:
        out.text(f"{len(g.nodes)} nodes, {len(g.edges)} edges")
        for i, p in g.nodes:
            out.text(f"node t{i}@{pos_str(p)}")
        for a, b in g.edges:
            out.text(f"edge t{a[0]}@{pos_str(a[1])} -> t{b[0]}@{pos_str(b[1])}")
    return 0


def cmd_ig(args, out):
    trs = load_trs(args)
    res = ig_transform(trs, need_term(args), args.budget)
    if out.fmt == "json":
        out.json({"image": to_text(res.image), "size": res.size})
    else:
        out.text(f"{to_text(res.image)}\nsize {res.size}")
    return 0


def cmd_measure(args, out):
    trs = load_trs(args)
    mode = args.mode or "dc"
    rows = empirical_complexity(trs, args.max_size or 5, mode, args.budget)
    data = [[r.size, r.value, to_text(r.witness) if r.witness is not None else "", r.exact] for r in rows]
    if out.fmt == "json":
        out.json([{"size": a, "value": b, "witness": c, "exact": e} for a, b, c, e in data])
    elif out.fmt == "csv":
        out.csv(["size", mode, "witness", "exact"], data)
    else:
        for a, b, c, e in data:
            out.text(f"{a}\t{b}\t{c}" + ("" if e else "\t(lower bound)"))
    return 0


def algebra_reports(args, trs: Trs) -> list:
    name = example_name(args)
    if args.algebra is not None:
        text = Path(args.algebra).read_text(encoding="utf-8") if Path(args.algebra).exists() else args.algebra
        interp, mode = json.loads(text), args.alg_mode or "linear_exact"
    elif name in corpus.ALGEBRAS:
        interp, mode = corpus.ALGEBRAS[name]
        mode = args.alg_mode or mode
    else:
        interp = mode = None
    reports = []
    if interp is not None:
        strict, weak = usable_problem_rules(trs)
        if args.algebra is None and name == "Rde":
            weak = trs.rules
        reports.append(check_algebra(strict, weak, Algebra(interp), mode, args.grid))
    if args.algebra is None and name in corpus.DC_ALGEBRAS:
        interp, p = corpus.DC_ALGEBRAS[name]
        reports.append(check_dc_bound_from_algebra(trs, Algebra(interp), p, args.max_size or 5,
                                                   args.budget, args.grid))
    if not reports and args.check == "algebra":
        raise UsageError("no algebra for this system; pass --algebra JSON")
    return reports


def usable_report(trs: Trs, max_size: int, budget: int) -> BoundReport:
    u = usable_rules(dependency_pairs(trs), exact_size=max_size, budget=budget)
    r = BoundReport("usable", witness={"usable": list(u.indices), "max_size": max_size})
    r.require("reachable rules within syntactic closure", 0, 0, holds=bool(u.exact_check))
    return r


def cmd_check(args, out):
    trs = load_trs(args)
    which = args.check
    names = {"bounds": "depth"}
    wanted = [c for c in CHECKS if c != "all"] if which == "all" else [which]
    reports = []
    for c in wanted:
        if c in ("progeny", "bounds", "srs", "rank"):
            if c == "srs" and not trs.is_srs:
                if which == "all":
                    continue
                raise NotAnSrs("the srs suite needs symbols of arity <= 1")
            res = suite(names.get(c, c), trs, count=args.random or 200, seed=args.seed, budget=args.budget)
            reports.extend(res.reports)
        elif c == "algebra":
            reports.extend(algebra_reports(args, trs))
        elif c == "usable":
            reports.append(usable_report(trs, args.max_size or 5, args.budget))
    return emit_reports(out, reports)


def sim_params(args, trs: Trs) -> SimParams:
    if args.f_linear is not None:
        c1, c0 = args.f_linear
        f_rules = linear_f_rules(c1, c0)
    else:
        f_rules = constant_f_rules(args.f_const if args.f_const is not None else 1)
    p = params_for(trs, f_rules=f_rules, a=args.a)
    if args.k is not None or args.C is not None:
        p = SimParams(p.a, args.C if args.C is not None else p.C, args.k if args.k is not None else p.k, f_rules)
    return p


def cmd_simgen(args, out):
    if args.example is None and args.input is None:
        trs = None
    else:
        trs = load_trs(args)
    if trs is None:
        if None in (args.k, args.a, args.C):
            raise UsageError("give a system or all of --k, --a, --C")
        c0 = args.f_const if args.f_const is not None else 1
        f_rules = linear_f_rules(*args.f_linear) if args.f_linear else constant_f_rules(c0)
        p = SimParams(args.a, args.C, args.k, f_rules)
    else:
        p = sim_params(args, trs)
    sim = generate_sim_trs(p)
    if out.fmt == "text":
        out.text(f"; a={p.a} C={p.C} k={p.k}")
    emit_rules(out, sim.rules, "rules")
    return 0


def cmd_simulate(args, out):
    trs = load_trs(args)
    p = sim_params(args, trs)
    sim = Simulator(trs, p, None, args.budget)
    sim_trs = generate_sim_trs(p)
    if args.term is not None and args.trace is None and not (args.strategy or "").startswith("trace:"):
        witnesses = [("seed", parse_term(args.term), sim.seed(parse_term(args.term)))]
    else:
        d = load_derivation(args, trs)
        witnesses = [(f"step {i + 1}", s.source, w) for i, (s, w) in enumerate(zip(d.steps, sim.simulate(d)))]
    ok = all(w.is_valid(sim_trs) for *_, w in witnesses)
    if out.fmt == "json":
        out.json([{"what": what, "source": to_text(src), "length": len(w), "valid": w.is_valid(sim_trs),
                   "initial": to_text(w.initial), "final": to_text(w.final)} for what, src, w in witnesses])
    elif out.fmt == "csv":
        out.csv(["what", "source", "length", "valid"],
                [[what, to_text(src), len(w), w.is_valid(sim_trs)] for what, src, w in witnesses])
    else:
        for what, src, w in witnesses:
            out.text(f"; {what}: {to_text(src)} ({len(w)} steps, {'valid' if w.is_valid(sim_trs) else 'INVALID'})")
            out.text(format_trace(w))
    return 0 if ok else 1


def cmd_fast(args, out):
    if None in (args.d, args.n, args.m):
        raise UsageError("fast needs --d, --n and --m")
    v = fast_function(args.d, args.n, args.m)
    if out.fmt == "json":
        out.json({"d": args.d, "n": args.n, "m": args.m, "value": str(v)})
    else:
        out.text(str(v))
    return 0


HANDLERS = {v: globals()[f"cmd_{v}"] for v in VERBS}


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--example", metavar="NAME|FILE")
    common.add_argument("--format", choices=("text", "json", "csv", "dot"), default="text")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    common.add_argument("--param", type=int, help="level of the labelled family Rl")
    common.add_argument("--max-size", type=int)
    common.add_argument("--random", type=int, metavar="N")
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--strategy", metavar="li|lo|trace:FILE")
    common.add_argument("--grid", type=int, default=6)
    common.add_argument("--term")
    common.add_argument("--trace", metavar="FILE")
    common.add_argument("--steps", type=int, default=1000)
    common.add_argument("--pi", metavar="JSON|FILE")
    common.add_argument("--mode", choices=("dc", "dp_complexity", "scc_complexity"))
    common.add_argument("--algebra", metavar="JSON|FILE")
    common.add_argument("--alg-mode", choices=("linear_exact", "sampled"))
    common.add_argument("--a", type=int)
    common.add_argument("--C", type=int)
    common.add_argument("--k", type=int)
    common.add_argument("--f-const", type=int)
    common.add_argument("--f-linear", type=int, nargs=2, metavar=("C1", "C0"))
    common.add_argument("--d", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--m", type=int)

    parser = argparse.ArgumentParser(prog="dpclab", description="Dependency pair complexity laboratory.")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in VERBS:
        p = sub.add_parser(verb, parents=[common])
        if verb == "check":
            p.add_argument("check", choices=CHECKS)
        p.add_argument("input", nargs="?", help="TRS file or bundled example name")
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    out = Out(args.format)
    try:
        if args.format == "dot" and args.verb not in ("graph", "pgraph"):
            raise UsageError("--format dot is only available for graph and pgraph")
        status = HANDLERS[args.verb](args, out)
    except DpclabError as e:
        print(f"dpclab: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    except (ValueError, json.JSONDecodeError) as e:
        print(f"dpclab: {e}", file=sys.stderr)
        return 2
    sys.stdout.write(out.buf.getvalue())
    return status


if __name__ == "__main__":
    sys.exit(main())
