"""Acceptance criteria 1-11, one test each, with a PASS/FAIL line per criterion.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import random
import sys

import pytest

from dpclab.bounds import (Algebra, check_algebra, constant_e, g_bound, g_closed_form_check, ig_transform)
from dpclab.corpus import ALGEBRAS, example, example_trace, labelled_family_start
from dpclab.dp import dependency_pairs, estimated_dependency_graph, usable_rules
from dpclab.errors import ArgumentTooLarge
from dpclab.progeny import progenitor_graph
from dpclab.rewrite import (Derivation, TermSampler, derivation_height, empirical_complexity, find_derivation,
                            relative_derivation_height, rewrite_at)
from dpclab.simtrs import (SccHeights, SimParams, Simulator, constant_f_rules, fast_function, generate_sim_trs,
                           linear_f_rules, params_for, seed_term_derivation, simulate_derivation)
from dpclab.suites import suite
from dpclab.terms import App, mark, parse_term, pos_str, subterm_at, to_text

RESULTS = {}


def record(n, ok, detail):
    RESULTS[n] = (ok, detail)
    line = f"ACCEPTANCE criterion {n:>2}: {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    return ok


def pairs_text(name):
    return [f"{to_text(p.lhs)} -> {to_text(p.rhs)}" for p in dependency_pairs(example(name)).pairs]


def graph_nodes(g):
    return [(i, pos_str(p)) for i, p in g.nodes]


# ---------------------------------------------------------------- 1

def criterion_1():
    counts = {n: len(pairs_text(n)) for n in ("Ra", "Rde", "Rebin")}
    rde = pairs_text("Rde") == ["f#(s(x)) -> f#(f(x))", "f#(s(x)) -> f#(x)"]
    rebin = pairs_text("Rebin") == ["d#(s(x)) -> d#(x)", "e#(s(x),y) -> e#(x,d(y))", "e#(s(x),y) -> d#(y)"]
    ok = counts == {"Ra": 9, "Rde": 2, "Rebin": 3} and rde and rebin
    return ok, f"pair counts {counts}, Rde pairs exact={rde}, Rebin pairs exact={rebin}"


# ---------------------------------------------------------------- 2

def criterion_2():
    g3 = progenitor_graph(example_trace("Rb", "fig1.trace"), example("Rb"))
    rb_graph = (graph_nodes(g3) == [(1, ""), (1, "1"), (1, "1.1"), (2, "1"), (2, "1.1")]
                and [(graph_nodes_of(a), graph_nodes_of(b)) for a, b in g3.edges]
                == [((1, "1"), (2, "1")), ((1, "1"), (2, "1.1"))])
    g4 = progenitor_graph(example_trace("Rd", "ex53.trace"), example("Rd"))
    children = sorted(len(g4.successors(n)) for n in g4.nodes)
    rd_graph = (graph_nodes(g4) == [(1, ""), (2, "1"), (2, "1.1"), (3, "1.1.1"), (3, "1.1.1.1"), (4, "1.1"),
                                    (4, "1.1.1")]
                and len(g4.edges) == 6 and children == [0, 0, 0, 0, 2, 2, 2])
    g6 = progenitor_graph(example_trace("Re", "ex56.trace"), example("Re"))
    re_chain = (graph_nodes(g6) == [(1, ""), (2, "1.1"), (3, "1.1.1.1")]
                and [(graph_nodes_of(a), graph_nodes_of(b)) for a, b in g6.edges]
                == [((1, ""), (2, "1.1")), ((2, "1.1"), (3, "1.1.1.1"))])
    return rb_graph and rd_graph and re_chain, f"rb_graph={rb_graph} rd_graph={rd_graph} Re chain={re_chain}"


def graph_nodes_of(node):
    return node[0], pos_str(node[1])


# ---------------------------------------------------------------- 3

def outermost_copying_witness(trs, d):
    """Extend d by rule-2 steps at the leftmost-outermost f until none is left."""
    copy_rule = 1
    steps = list(d.steps)
    cur = d.final
    while True:
        pos = next((p for p in _preorder(cur) if subterm_at(cur, p).symbol == "f"), None)
        if pos is None:
            return Derivation(d.initial, tuple(steps))
        step = rewrite_at(trs, cur, pos, copy_rule)
        steps.append(step)
        cur = step.target


def _preorder(t, p=()):
    yield p
    for i, u in enumerate(t.args, start=1):
        yield from _preorder(u, p + (i,))


def criterion_3():
    trs = example("Rde")
    details, ok = [], True
    exact_rows = {r.size: r for r in empirical_complexity(trs, 4, "dc")}
    for n in (1, 2, 3):
        d = example_trace("Rde", f"rde{n}.trace")
        expected_final = "s(" * n + "f(" * 2 ** n + "0" + ")" * (2 ** n + n)
        length_ok = len(d) == 2 ** n - 1 and to_text(d.final) == expected_final and d.is_valid(trs)
        target = 2 ** n - 1 + 2 ** (2 ** n) - 1
        size = n + 2
        if size in exact_rows:
            value, how = exact_rows[size].value, "exact"
        else:
            w = outermost_copying_witness(trs, d)
            value, how = (len(w) if w.is_valid(trs) else -1), "witness"
        ok &= length_ok and value >= target
        details.append(f"n={n}: trace {len(d)} steps, Dc({size}) {how} {value} >= {target}")
    dp_rows = empirical_complexity(trs, 6, "dp_complexity")
    linear = all(r.value <= r.size for r in dp_rows) and len(dp_rows) == 6
    ok &= linear
    details.append(f"dp_complexity {[r.value for r in dp_rows]} <= size")
    return ok, "; ".join(details)


# ---------------------------------------------------------------- 4

def criterion_4():
    trs = example("Rebin")
    problem = dependency_pairs(trs)
    u = usable_rules(problem)
    usable = [f"{to_text(r.lhs)} -> {to_text(r.rhs)}" for r in u.usable]
    usable_ok = usable == ["d(0) -> 0", "d(s(x)) -> s(s(d(x)))"]
    interp, _ = ALGEBRAS["Rebin"]
    report = check_algebra(problem.pairs, u.usable + u.ce, Algebra(interp), "sampled", 6)
    return usable_ok and report.passed, f"usable={usable}, algebra sampled grid 6 pass={report.passed}"


# ---------------------------------------------------------------- 5

def criterion_5():
    trs = example("Rde")
    problem = dependency_pairs(trs)
    interp, mode = ALGEBRAS["Rde"]
    report = check_algebra(problem.pairs, trs.rules, Algebra(interp), "linear_exact")
    heights = []
    for n in range(6):
        t = mark(App("f", (_numeral(n),)), trs.defined)
        heights.append(relative_derivation_height(problem.pairs_trs, trs, t))
    bounded = all(h <= n for n, h in enumerate(heights))
    return report.passed and bounded, f"linear_exact pass={report.passed}, heights {heights} <= n"


def _numeral(n):
    t = App("0")
    for _ in range(n):
        t = App("s", (t,))
    return t


# ---------------------------------------------------------------- 6

def criterion_6():
    trs = example("Rb")
    problem = dependency_pairs(trs)
    g = estimated_dependency_graph(problem)
    graph_ok = (g.edges == frozenset() and len(g.sccs) == 2 and all(c.trivial for c in g.sccs)
                and g.scc_of(0).rank == 1 and g.scc_of(1).rank == 2)
    h = SccHeights(trs, g, problem)
    expected = {"c": (0, 1), "g(c,c)": (0, 1), "f(f(c))": (2, 1), "f(c)": (2, 1), "f(g(c,c))": (2, 1)}
    heights_ok = all(h(parse_term(t)) == v for t, v in expected.items())
    p2 = problem.subset(g.by_rank(2).members)
    rdh_ok = all(relative_derivation_height(p2, trs, mark(parse_term(t), trs.defined)) == 1
                 for t in ("f(f(c))", "f(c)", "f(g(c,c))"))
    sim = Simulator(trs, SimParams(2, 2, 2, constant_f_rules(1)), g)
    tr_ok = (to_text(sim.tr(parse_term("f(f(c))"))) == "g_2(s(0),g_2(s(0),g_0(s(0),c,c),c),c)"
             and to_text(sim.tr(parse_term("f(g(c,c))")))
             == "g_2(s(0),g_0(s(0),g_0(s(0),c,c),g_0(s(0),c,c)),c)")
    ok = graph_ok and heights_ok and rdh_ok and tr_ok
    return ok, f"graph={graph_ok} sccheight={heights_ok} P2 heights={rdh_ok} tr={tr_ok}"


# ---------------------------------------------------------------- 7

R = "g_0(s(0),c,c)"
DISPLAYED = [
    "g_2(s(0),g_2(s(0),g_0(s(0),c,c),c),c)",
    f"g_2(s(0),g_2(0,g_2(0,g_2(0,{R},c),g_2(0,{R},c)),g_2(0,g_2(0,{R},c),g_2(0,{R},c))),c)",
    "g_2(s(0),g_2(0,g_2(0,g_0(s(0),c,c),c),g_2(0,g_0(s(0),c,c),c)),c)",
    "g_2(s(0),g_2(0,g_0(s(0),c,c),g_0(s(0),c,c)),c)",
    f"g_2(s(0),g_1(f(size(g_0(0,{R},{R}))),{R},{R}),c)",
    f"g_2(s(0),g_0(f(size(g_0(0,{R},{R}))),{R},{R}),c)",
    "g_2(s(0),g_0(s(0),g_0(s(0),c,c),g_0(s(0),c,c)),c)",
]
DECLARED = [1, 1, 2, 1, 1, 1]


def _ground_terms_by_depth(sig, depth):
    consts = [App(f) for f, n in sorted(sig.items()) if n == 0]
    levels = [consts]
    for _ in range(depth):
        upto = [t for lv in levels for t in lv]
        new = []
        for f, n in sorted(sig.items()):
            if n == 0:
                continue
            for args in _product(upto, n):
                t = App(f, args)
                if t.depth == len(levels):
                    new.append(t)
        levels.append(new)
    return [t for lv in levels for t in lv]


def _product(items, n):
    if n == 0:
        yield ()
        return
    for head in items:
        for rest in _product(items, n - 1):
            yield (head,) + rest


def criterion_7():
    trs = example("Rb")
    g = estimated_dependency_graph(dependency_pairs(trs))
    p = SimParams(2, 2, 2, constant_f_rules(1))
    sim_trs = generate_sim_trs(p)
    sim = Simulator(trs, p, g)
    d = example_trace("Rb", "fig1.trace")
    terms = [parse_term(t) for t in DISPLAYED]
    ends_ok = terms[0] == sim.tr(d.terms[0]) and terms[-1] == sim.tr(d.terms[1])
    found = []
    for s, t, k in zip(terms, terms[1:], DECLARED):
        w = find_derivation(sim_trs, s, t, k + 1)
        found.append(None if w is None else len(w))
    segments_ok = found == DECLARED
    rb_ok = all(w.is_valid(sim_trs) and len(w) >= 1 for w in simulate_derivation(trs, g, p, d))
    rd = example("Rd")
    prd = params_for(rd, f_rules=linear_f_rules(1, 0))
    rd_sim = generate_sim_trs(prd)
    rd_ws = simulate_derivation(rd, None, prd, example_trace("Rd", "ex53.trace"))
    rd_ok = all(w.is_valid(rd_sim) for w in rd_ws)
    shallow = _ground_terms_by_depth(trs.signature, 2)
    seeds_ok = all(seed_term_derivation(trs, g, p, t).is_valid(sim_trs) for t in shallow)
    ok = ends_ok and segments_ok and rb_ok and rd_ok and seeds_ok
    return ok, (f"displayed ends={ends_ok} segment lengths {found} vs {DECLARED}; Rb witnesses={rb_ok}; "
                f"Rd witnesses {[len(w) for w in rd_ws]} valid={rd_ok}; seeds of {len(shallow)} terms={seeds_ok}")


# ---------------------------------------------------------------- 8

SUITE_SYSTEMS = ("Rb", "Rd", "Re", "Rde", "Rebin")


def criterion_8():
    parts, ok = [], True
    for name in SUITE_SYSTEMS:
        trs = example(name)
        for s in ("progeny", "rank", "depth"):
            res = suite(s, trs, count=200, seed=1)
            good = len(res.reports) == 200 and res.passed
            ok &= good
            parts.append(f"{name}/{s} {len(res.reports)} runs {res.violations} violations")
    return ok, "; ".join(parts)


# ---------------------------------------------------------------- 9

def criterion_9():
    parts, ok = [], True
    for name in ("Re", "Rd"):
        res = suite("srs", example(name), count=200, seed=1)
        good = len(res.reports) == 200 and res.passed
        ok &= good
        parts.append(f"{name} {len(res.reports)} runs {res.violations} violations")
    return ok, "; ".join(parts)


# ---------------------------------------------------------------- 10

def ackermann(m, n):
    if m == 0:
        return n + 1
    if n == 0:
        return ackermann(m - 1, 1)
    return ackermann(m - 1, ackermann(m, n - 1))


def criterion_10():
    trs = example("Rl", 2)
    pairs = []
    for n in range(3):
        h = derivation_height(trs, labelled_family_start(0, n))
        pairs.append((n, h, ackermann(0, n)))
    ok = all(h >= a for _, h, a in pairs)
    return ok, "dh(t_0n) vs Ack(0,n): " + ", ".join(f"n={n}: {h} >= {a}" for n, h, a in pairs)


# ---------------------------------------------------------------- 11

def fast_properties(limit_bits=1 << 24):
    """Check the four growth properties where F values are exactly computable.

    Returns (checked, unevaluable, violations).
    """
    checked = unevaluable = violations = 0
    cache = {}

    def F(d, n, a):
        key = (d, n, a)
        if key not in cache:
            try:
                cache[key] = fast_function(d, n, a, limit_bits)
            except ArgumentTooLarge:
                cache[key] = None
        return cache[key]

    def check(values, predicate):
        nonlocal checked, unevaluable, violations
        if any(v is None for v in values):
            unevaluable += 1
            return
        checked += 1
        if not predicate(*values):
            violations += 1

    for d in (2, 3):
        for n in range(3):
            for a in range(6):
                check([F(d, n, a)], lambda v: v >= d ** (a + 1) and v > a)
                for b in range(a):
                    check([F(d, n, a), F(d, n, b)], lambda x, y: x > y)
                if a >= 1:
                    for m in range(n):
                        check([F(d, n, a), F(d, m, a)], lambda x, y: x > y)
                for b in range(6 - a):
                    check([F(d, n, a + b), F(d, n, a)], lambda x, y: x >= y + b)
                if 1 <= a <= 4:
                    check([F(d, n, a + 1), F(d, n, a)], lambda x, y: x >= 2 * y)
    return checked, unevaluable, violations


def criterion_11():
    parts, ok = [], True
    g_ok = all(g_bound(E, m, 0) == E ** (m + 1) for E in (6, 8) for m in range(9)) and all(
        g_bound(E, 0, n) == E for E in (6, 8) for n in range(3))
    closed_ok = all(g_closed_form_check(E, m, n).passed for E in (6, 8) for m in range(5) for n in range(3))
    trs = example("Rebin")
    E = constant_e(trs)
    rng = random.Random(5)
    sampler = TermSampler(trs.signature)
    ig_ok = True
    for _ in range(50):
        t = sampler.sample_upto(5, rng)
        ig_ok &= ig_transform(trs, t).size <= g_bound(E, t.size, min(derivation_height(trs, t), 2))
    checked, unevaluable, violations = fast_properties()
    fast_ok = violations == 0 and unevaluable == 0
    ok = g_ok and closed_ok and ig_ok and fast_ok
    parts.append(f"g base cases={g_ok}")
    parts.append(f"closed form={closed_ok}")
    parts.append(f"I_G size bound on 50 terms={ig_ok}")
    parts.append(f"F_n properties: {checked} instances checked, {violations} violations, "
                 f"{unevaluable} not exactly evaluable")
    return ok, "; ".join(parts)


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 12)}


@pytest.mark.parametrize("n", list(CRITERIA))
def test_acceptance_criterion(n):
    ok, detail = CRITERIA[n]()
    assert record(n, ok, detail), detail


if __name__ == "__main__":
    failed = 0
    for n, fn in CRITERIA.items():
        ok, detail = fn()
        failed += not record(n, ok, detail)
    sys.exit(1 if failed else 0)
