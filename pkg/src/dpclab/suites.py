"""Randomized property suites over recorded derivations."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .bounds import BoundReport, check_depth_bound, check_srs_bounds, max_subterm_dp_height
from .dp import dependency_pairs, estimated_dependency_graph
from .errors import BudgetExceeded, ChainNotProgenyLinked
from .progeny import Analysis, descendants_of_step, implicit_dp_derivation, progenitor_graph
from .rewrite import Derivation, TermSampler, random_derivation
from .simtrs import SccHeights
from .terms import Trs, branching_constant, ground_signature, is_prefix, is_strict_prefix, parallel, positions, subterm_at

SUITE_BUDGET = 20_000


@dataclass
class SuiteResult:
    name: str
    reports: list = field(default_factory=list)
    skipped: int = 0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    @property
    def violations(self) -> int:
        return sum(1 for r in self.reports if not r.passed)


def random_start_terms(trs: Trs, rng: random.Random, max_size: int = 10):
    sampler = TermSampler(ground_signature(trs.signature))
    while True:
        yield sampler.sample_upto(max_size, rng)


def run_random_suite(name: str, trs: Trs, check: Callable[[Derivation], BoundReport], count: int = 200,
                     seed: int = 1, max_steps: int = 12, max_size: int = 10,
                     max_skips: Optional[int] = None) -> SuiteResult:
    """Run check on count random derivations, resampling on budget overruns."""
    rng = random.Random(seed)
    out = SuiteResult(name)
    starts = random_start_terms(trs, rng, max_size)
    limit = 10 * count if max_skips is None else max_skips
    while len(out.reports) < count:
        d = random_derivation(trs, next(starts), max_steps, rng)
        try:
            out.reports.append(check(d))
        except BudgetExceeded:
            out.skipped += 1
            if out.skipped > limit:
                break
    return out


# ---------------------------------------------------------------- progeny properties

def progeny_report(trs: Trs, d: Derivation, problem=None) -> BoundReport:
    problem = problem or dependency_pairs(trs)
    C = branching_constant(trs)
    a = Analysis(d)
    terms = a.terms
    n = len(terms)
    redexes = [s.redex for s in d.steps]
    defined = trs.defined
    v = {k: 0 for k in ("nonempty", "defined_progenitor", "implicit_derivation", "descendants",
                        "prefix_lifting", "main_progenitor_unique", "constructor_main_progeny",
                        "edge_derivation", "hidden_steps", "coverage", "leaf_covering",
                        "out_degree", "forest", "roots")}

    def is_defined(t, p):
        u = subterm_at(t, p)
        return not u.is_var and u.symbol in defined

    for k, (step, pm) in enumerate(zip(d.steps, a.maps)):
        for q, ps in pm.parents.items():
            if not ps:
                v["nonempty"] += 1
        redex = step.redex
        for p in pm.children:
            if is_strict_prefix(p, redex) or parallel(p, redex) or not _in_lhs_skeleton(step, p):
                if descendants_of_step(step, p) != pm.children[p]:
                    v["descendants"] += 1
        for q in pm.parents:
            for q2 in pm.parents:
                if not is_prefix(q, q2):
                    continue
                for p0 in pm.parents[q]:
                    if not any(is_prefix(p0, p1) for p1 in pm.parents[q2]):
                        v["prefix_lifting"] += 1

    final = terms[-1]
    for q in positions(final):
        anc = a.progenitors(0, n - 1, q)
        if not anc:
            v["nonempty"] += 1
            continue
        if not is_defined(final, q):
            continue
        for p in anc:
            if not is_defined(terms[0], p):
                v["defined_progenitor"] += 1
        try:
            implicit_dp_derivation(d, trs, _progeny_chain(a, min(anc), q), problem)
        except ChainNotProgenyLinked:
            v["implicit_derivation"] += 1

    for j in range(n):
        for q in a.main_branches[j]:
            for i in range(j):
                if len(a.main_progenitors(i, j, q)) != 1:
                    v["main_progenitor_unique"] += 1
    for i in range(n):
        for p in a.main_branches[i]:
            if is_defined(terms[i], p):
                continue
            for j in range(i + 1, n):
                if len(a.main_progenies(i, j, p)) > 1:
                    v["constructor_main_progeny"] += 1

    for j in range(n):
        for q in a.main_branches[j]:
            if j == 0:
                continue
            chain = a.progenitor_chain(j, q)
            for i in range(j - 1, -1, -1):
                if chain[i] == redexes[i]:
                    break
                if a.main_progenies(i, j, chain[i]) != {q}:
                    v["hidden_steps"] += 1

    graph = progenitor_graph(d, trs, a)
    succ = {node: [] for node in graph.nodes}
    pred = {node: [] for node in graph.nodes}
    for x, y in graph.edges:
        succ[x].append(y)
        pred[y].append(x)
    for (i, p), (j, q) in graph.edges:
        chain = a.progenitor_chain(j - 1, q)[i - 1:]
        links = [(i + k, pos) for k, pos in enumerate(chain)]
        try:
            imp = implicit_dp_derivation(d, trs, links, problem)
            kinds = [s.kind for s in imp.steps]
            if not kinds or kinds[-1] != "dp" or any(k == "dp" for k in kinds[:-1]):
                v["edge_derivation"] += 1
        except ChainNotProgenyLinked:
            v["edge_derivation"] += 1

    def covering(node):
        i, p = node
        mine = a.main_progenies(i - 1, n - 1, p)
        for s in succ[node]:
            mine = mine - a.main_progenies(s[0] - 1, n - 1, s[1])
        return mine

    covered = {node: covering(node) for node in graph.nodes}
    for q in a.main_branches[-1]:
        ok = False
        mp = a.main_progenitors(0, n - 1, q)
        if len(mp) == 1:
            p = next(iter(mp))
            if not is_defined(terms[0], p):
                ok = True
        if not ok and not any(q in covered[node] for node in graph.nodes):
            v["coverage"] += 1
    for node in graph.nodes:
        if len(covered[node]) > C:
            v["leaf_covering"] += 1
        if len(succ[node]) > C:
            v["out_degree"] += 1
        if len(pred[node]) > 1:
            v["forest"] += 1
    roots = [node for node in graph.nodes if not pred[node]]
    expected_roots = [(1, p) for p in a.main_branches[0] if is_defined(terms[0], p)]
    if sorted(roots) != sorted(expected_roots):
        v["roots"] += 1

    r = BoundReport("progeny", witness={"steps": len(d), "nodes": len(graph.nodes), "C": C})
    for k, count in v.items():
        r.require(f"{k} violations", count, 0)
    return r


def _in_lhs_skeleton(step, p) -> bool:
    """p lies at or below the redex on a non-variable position of the lhs."""
    if not is_prefix(step.redex, p):
        return False
    u = step.rule.lhs
    for i in p[len(step.redex):]:
        if u.is_var:
            return False
        u = u.args[i - 1]
    return not u.is_var


def _progeny_chain(a: Analysis, p: tuple, q: tuple) -> list:
    n = len(a.terms)
    chain = [(1, p)]
    cur = p
    for k in range(n - 1):
        options = sorted(x for x in a.maps[k].children[cur] if q in a.progenies(k + 1, n - 1, x))
        if not options:
            raise ChainNotProgenyLinked(f"no progeny of {p} leads to {q}")
        cur = options[0]
        chain.append((k + 2, cur))
    return chain


# ---------------------------------------------------------------- rank monotonicity

def rank_report(heights: SccHeights, d: Derivation) -> BoundReport:
    bad_weak = bad_strict = 0
    a = Analysis(d)
    for step, pm in zip(d.steps, a.maps):
        for p, qs in pm.children.items():
            hs = heights(subterm_at(step.source, p))
            for q in qs:
                ht = heights(subterm_at(step.target, q))
                if p == step.redex:
                    if not hs > ht:
                        bad_strict += 1
                elif not hs >= ht:
                    bad_weak += 1
    r = BoundReport("rank_monotone", witness={"steps": len(d)})
    r.require("non-increasing violations", bad_weak, 0)
    r.require("strict decrease at redex violations", bad_strict, 0)
    return r


# ---------------------------------------------------------------- suite entry points

SUITES = ("progeny", "rank", "depth", "srs")


def suite(name: str, trs: Trs, count: int = 200, seed: int = 1, budget: int = SUITE_BUDGET,
          max_steps: int = 12, max_size: int = 10) -> SuiteResult:
    problem = dependency_pairs(trs)
    if name == "progeny":
        check = lambda d: progeny_report(trs, d, problem)
    elif name == "rank":
        heights = SccHeights(trs, estimated_dependency_graph(problem), problem, budget)
        check = lambda d: rank_report(heights, d)
    elif name == "depth":
        check = lambda d: check_depth_bound(trs, d, budget, max_subterm_dp_height(trs, d.initial, budget, problem))
    elif name == "srs":
        check = lambda d: check_srs_bounds(trs, d, budget, max_subterm_dp_height(trs, d.initial, budget, problem))
    else:
        raise ValueError(f"unknown suite {name!r}")
    return run_random_suite(name, trs, check, count, seed, max_steps, max_size)
