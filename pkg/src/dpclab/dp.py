"""Dependency pairs, argument filterings, the estimated dependency graph,
SCC ranks and usable rules."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

import networkx as nx

from .errors import BudgetExceeded, MissingFilterEntry
from .rewrite import is_normal_form, reachable
from .terms import (
    App,
    MARK,
    Rule,
    Term,
    Trs,
    Var,
    apply_subst,
    replace_at,
    ground_terms,
    is_proper_subterm,
    mark,
    match,
    positions,
    subterm_at,
    subterms,
    variables,
)

CE_SYMBOL = "c_e#cons"


@dataclass(frozen=True)
class DpProblem:
    base: Trs
    pairs: tuple
    marked_signature: Mapping[str, int] = field(compare=False)

    @property
    def pairs_trs(self) -> Trs:
        return Trs.from_rules(self.pairs, self.marked_signature)

    def subset(self, indices) -> Trs:
        return Trs.from_rules([self.pairs[i] for i in sorted(indices)], self.marked_signature)

    def mark(self, t: Term) -> Term:
        return mark(t, self.base.defined)


def dependency_pairs(trs: Trs) -> DpProblem:
    pairs = []
    for rule in trs.rules:
        for q in positions(rule.rhs):
            u = subterm_at(rule.rhs, q)
            if u.is_var or u.symbol not in trs.defined:
                continue
            if is_proper_subterm(u, rule.lhs):
                continue
            pairs.append(Rule(mark(rule.lhs, trs.defined), mark(u, trs.defined)))
    sig = dict(trs.signature)
    for f in trs.defined:
        sig[f + MARK] = trs.signature[f]
    return DpProblem(trs, tuple(pairs), sig)


# ---------------------------------------------------------------- argument filterings

Filtering = Mapping[str, Union[int, tuple, list]]


def validate_filtering(pi: Filtering, signature: Mapping[str, int]) -> None:
    for f, v in pi.items():
        n = signature.get(f)
        if n is None:
            continue
        if isinstance(v, int):
            if not 1 <= v <= n:
                raise ValueError(f"pi({f}) = {v} outside 1..{n}")
        else:
            v = list(v)
            if any(not 1 <= i <= n for i in v) or v != sorted(set(v)):
                raise ValueError(f"pi({f}) = {v} is not an increasing list within 1..{n}")


def filter_term(pi: Filtering, t: Term) -> Term:
    if t.is_var:
        return t
    try:
        v = pi[t.symbol]
    except KeyError:
        raise MissingFilterEntry(f"no filter entry for {t.symbol}") from None
    if isinstance(v, int):
        return filter_term(pi, t.args[v - 1])
    return App(t.symbol, [filter_term(pi, t.args[i - 1]) for i in v])


def filtered_rule(pi: Filtering, rule: Rule) -> Rule:
    """Filtered rules are orientation constraints and may be ill-formed as rules."""
    r = object.__new__(Rule)
    object.__setattr__(r, "lhs", filter_term(pi, rule.lhs))
    object.__setattr__(r, "rhs", filter_term(pi, rule.rhs))
    return r


def apply_argument_filtering(pi: Filtering, x):
    if isinstance(x, Term):
        return filter_term(pi, x)
    if isinstance(x, Rule):
        return filtered_rule(pi, x)
    if isinstance(x, Trs):
        return Trs.from_rules([filtered_rule(pi, r) for r in x.rules])
    if isinstance(x, DpProblem):
        base = apply_argument_filtering(pi, x.base)
        pairs = tuple(filtered_rule(pi, r) for r in x.pairs)
        sig = {}
        for r in pairs + base.rules:
            for t in (r.lhs, r.rhs):
                for s in subterms(t):
                    if not s.is_var:
                        sig[s.symbol] = len(s.args)
        return DpProblem(base, pairs, sig)
    raise TypeError(f"cannot filter {type(x).__name__}")


def filtered_step_holds(pi: Filtering, trs: Trs, source: Term, target: Term) -> bool:
    """pi(source) rewrites to pi(target) in at most one pi(R)-step."""
    a, b = filter_term(pi, source), filter_term(pi, target)
    if a == b:
        return True
    rules = [filtered_rule(pi, r) for r in trs.rules]
    for p in positions(a):
        u = subterm_at(a, p)
        for r in rules:
            sigma = match(r.lhs, u)
            if sigma is None:
                continue
            if any(v.name not in sigma for v in variables(r.rhs)):
                continue
            if replace_at(a, p, apply_subst(r.rhs, sigma)) == b:
                return True
    return False


# ---------------------------------------------------------------- unification

def unify(s: Term, t: Term) -> Optional[dict]:
    sigma: dict = {}

    def walk(u):
        while u.is_var and u.name in sigma:
            u = sigma[u.name]
        return u

    def occurs(name, u):
        u = walk(u)
        if u.is_var:
            return u.name == name
        return any(occurs(name, a) for a in u.args)

    stack = [(s, t)]
    while stack:
        a, b = stack.pop()
        a, b = walk(a), walk(b)
        if a.is_var and b.is_var and a.name == b.name:
            continue
        if a.is_var:
            if occurs(a.name, b):
                return None
            sigma[a.name] = b
        elif b.is_var:
            if occurs(b.name, a):
                return None
            sigma[b.name] = a
        elif a.symbol != b.symbol or len(a.args) != len(b.args):
            return None
        else:
            stack.extend(zip(a.args, b.args))
    return sigma


class _Fresh:
    def __init__(self, prefix):
        self.prefix = prefix
        self.n = itertools.count()

    def __call__(self):
        return Var(f"{self.prefix}{next(self.n)}")


def cap(t: Term, defined, fresh) -> Term:
    """Replace defined-rooted proper subterms by fresh variables."""
    if t.is_var:
        return t

    def go(u):
        if u.is_var:
            return u
        if u.symbol in defined:
            return fresh()
        return App(u.symbol, [go(a) for a in u.args])

    return App(t.symbol, [go(a) for a in t.args])


def ren(t: Term, fresh) -> Term:
    if t.is_var:
        return fresh()
    return App(t.symbol, [ren(a, fresh) for a in t.args])


def rename_apart(t: Term, prefix: str) -> Term:
    return apply_subst(t, {v.name: Var(prefix + v.name) for v in variables(t)})


# ---------------------------------------------------------------- dependency graph

@dataclass(frozen=True)
class Scc:
    members: tuple
    trivial: bool
    rank: int


@dataclass(frozen=True)
class DependencyGraph:
    nodes: tuple
    edges: frozenset
    sccs: tuple

    def scc_of(self, pair_index: int) -> Scc:
        for c in self.sccs:
            if pair_index in c.members:
                return c
        raise KeyError(pair_index)

    def by_rank(self, rank: int) -> Scc:
        for c in self.sccs:
            if c.rank == rank:
                return c
        raise KeyError(rank)

    def to_json(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "edges": [list(e) for e in sorted(self.edges)],
            "sccs": [{"members": list(c.members), "trivial": c.trivial, "rank": c.rank} for c in self.sccs],
        }

    def to_dot(self, problem: Optional[DpProblem] = None) -> str:
        lines = ["digraph dg {"]
        for n in self.nodes:
            label = str(problem.pairs[n]) if problem is not None else str(n)
            lines.append(f'  {n} [label="{n}: {label}"];')
        for a, b in sorted(self.edges):
            lines.append(f"  {a} -> {b};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def edge_possible(problem: DpProblem, src: Rule, dst: Rule) -> bool:
    fresh = _Fresh("_c")
    t = ren(cap(src.rhs, problem.base.defined, fresh), fresh)
    return unify(t, rename_apart(dst.lhs, "_u")) is not None


def estimated_dependency_graph(problem: DpProblem) -> DependencyGraph:
    n = len(problem.pairs)
    edges = frozenset(
        (i, j)
        for i in range(n)
        for j in range(n)
        if edge_possible(problem, problem.pairs[i], problem.pairs[j])
    )
    return DependencyGraph(tuple(range(n)), edges, _ranked_sccs(n, edges))


def _ranked_sccs(n: int, edges) -> tuple:
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    g.add_edges_from(edges)
    comps = sorted((tuple(sorted(c)) for c in nx.strongly_connected_components(g)), key=lambda c: c[0])
    comp_of = {v: k for k, c in enumerate(comps) for v in c}
    cond = nx.DiGraph()
    cond.add_nodes_from(range(len(comps)))
    cond.add_edges_from((comp_of[a], comp_of[b]) for a, b in edges if comp_of[a] != comp_of[b])
    rk1 = {}
    for c in reversed(list(nx.topological_sort(cond))):
        rk1[c] = 1 + max((rk1[d] for d in nx.descendants(cond, c)), default=0)
    order = sorted(range(len(comps)), key=lambda c: (rk1[c], c))
    rank = {c: i + 1 for i, c in enumerate(order)}
    out = []
    for k, c in enumerate(comps):
        trivial = len(c) == 1 and (c[0], c[0]) not in edges
        out.append(Scc(c, trivial, rank[k]))
    return tuple(out)


# ---------------------------------------------------------------- usable rules

@dataclass(frozen=True)
class UsableRules:
    usable: tuple
    indices: tuple
    ce: tuple
    exact_check: Optional[bool] = None


def ce_rules() -> tuple:
    x, y = Var("x"), Var("y")
    return (Rule(App(CE_SYMBOL, (x, y)), x), Rule(App(CE_SYMBOL, (x, y)), y))


def usable_rule_indices(base: Trs, rhss) -> list:
    needed = set()
    todo = [s.symbol for t in rhss for s in subterms(t) if not s.is_var]
    seen = set()
    while todo:
        f = todo.pop()
        if f in seen:
            continue
        seen.add(f)
        for i, r in enumerate(base.rules):
            if r.lhs.symbol == f:
                needed.add(i)
                todo.extend(s.symbol for s in subterms(r.rhs) if not s.is_var)
    return sorted(needed)


def usable_rules(problem: DpProblem, exact_size: Optional[int] = None,
                 budget: int = 20_000, pairs=None) -> UsableRules:
    rhss = [p.rhs for p in (problem.pairs if pairs is None else pairs)]
    idx = usable_rule_indices(problem.base, rhss)
    check = None
    if exact_size is not None:
        found = reachable_rule_witnesses(problem, rhss, exact_size, budget)
        check = found <= set(idx)
    return UsableRules(tuple(problem.base.rules[i] for i in idx), tuple(idx), ce_rules(), check)


def reachable_rule_witnesses(problem: DpProblem, rhss, max_size: int, budget: int) -> set:
    """Rules whose left-hand side instance is reachable from a pair rhs.

    Variables of the rhs are instantiated by ground normal forms of size at
    most max_size; exploration stops quietly at the budget.
    """
    base = problem.base
    normal = [t for t in ground_terms(base.signature, max_size) if is_normal_form(base, t)]
    found = set()
    for rhs in rhss:
        vs = variables(rhs)
        for combo in itertools.product(normal, repeat=len(vs)):
            start = apply_subst(rhs, {v.name: c for v, c in zip(vs, combo)})
            try:
                terms = reachable(base, start, budget)
            except BudgetExceeded:
                continue
            for t in terms:
                for s in subterms(t):
                    if s.is_var:
                        continue
                    for i, r in enumerate(base.rules):
                        if r.lhs.symbol == s.symbol and match(r.lhs, s) is not None:
                            found.add(i)
    return found
