"""Rewrite steps, derivations, and exact heights by exhaustive search.

All searches treat variables of the start term as fresh constants.  Terms
rooted by a symbol that heads no left-hand side never change at the root,
so their heights decompose over the arguments; the searches exploit this
to stay small.
"""

from __future__ import annotations

import random
import sys
from dataclasses import dataclass, field
from typing import Iterable, Optional

import networkx as nx

from .errors import BudgetExceeded, DpclabError, NonTerminating, NonTerminatingRelative, TrsSyntaxError
from .terms import (
    App,
    Rule,
    Term,
    Trs,
    apply_subst,
    ground_signature,
    match,
    parse_pos,
    parse_term,
    pos_str,
    positions,
    replace_at,
    subterm_at,
    symbols,
    to_text,
)

DEFAULT_BUDGET = 200_000


@dataclass(frozen=True)
class RewriteStep:
    source: Term
    redex: tuple
    rule_index: int
    subst: dict = field(compare=False, hash=False)
    target: Term = None
    rule: Rule = field(default=None, compare=False)

    def revalidate(self, trs: Trs) -> bool:
        rule = trs.rules[self.rule_index]
        sigma = match(rule.lhs, subterm_at(self.source, self.redex))
        if sigma is None:
            return False
        return replace_at(self.source, self.redex, apply_subst(rule.rhs, sigma)) == self.target


@dataclass(frozen=True)
class Derivation:
    initial: Term
    steps: tuple = ()

    @property
    def terms(self) -> list:
        return [self.initial] + [s.target for s in self.steps]

    @property
    def final(self) -> Term:
        return self.steps[-1].target if self.steps else self.initial

    def __len__(self):
        return len(self.steps)

    def is_valid(self, trs: Trs) -> bool:
        cur = self.initial
        for s in self.steps:
            if s.source != cur or not s.revalidate(trs):
                return False
            cur = s.target
        return True


def rewrite_at(trs: Trs, t: Term, p: tuple, rule_index: int) -> Optional[RewriteStep]:
    rule = trs.rules[rule_index]
    sigma = match(rule.lhs, subterm_at(t, p))
    if sigma is None:
        return None
    target = replace_at(t, p, apply_subst(rule.rhs, sigma))
    return RewriteStep(t, p, rule_index, sigma, target, rule)


def one_step_reducts(trs: Trs, t: Term) -> list:
    """All steps from t in (position-lex, rule-order) order."""
    out = []
    by_root = _rules_by_root(trs)
    for p in positions(t):
        u = subterm_at(t, p)
        if u.is_var:
            continue
        for i in by_root.get(u.symbol, ()):
            rule = trs.rules[i]
            sigma = match(rule.lhs, u)
            if sigma is not None:
                target = replace_at(t, p, apply_subst(rule.rhs, sigma))
                out.append(RewriteStep(t, p, i, sigma, target, rule))
    return out


def _rules_by_root(trs: Trs) -> dict:
    cache = getattr(trs, "_by_root", None)
    if cache is None:
        cache = {}
        for i, r in enumerate(trs.rules):
            cache.setdefault(r.lhs.symbol, []).append(i)
        object.__setattr__(trs, "_by_root", cache)
    return cache


def successors(trs: Trs, t: Term) -> list:
    """Distinct one-step reducts (targets only), deterministic order."""
    seen = {}
    for s in one_step_reducts(trs, t):
        seen.setdefault(s.target, None)
    return list(seen)


def is_normal_form(trs: Trs, t: Term) -> bool:
    by_root = _rules_by_root(trs)
    for p in positions(t):
        u = subterm_at(t, p)
        if not u.is_var:
            for i in by_root.get(u.symbol, ()):
                if match(trs.rules[i].lhs, u) is not None:
                    return False
    return True


# ---------------------------------------------------------------- strategies

def select_step(trs: Trs, t: Term, strategy: str) -> Optional[RewriteStep]:
    steps = one_step_reducts(trs, t)
    if not steps:
        return None
    if strategy == "lo":
        return steps[0]
    if strategy == "li":
        redexes = {s.redex for s in steps}
        inner = [s for s in steps if not any(q != s.redex and q[: len(s.redex)] == s.redex for q in redexes)]
        return inner[0]
    raise DpclabError(f"unknown strategy {strategy!r}")


def derive(trs: Trs, t: Term, strategy: str = "li", max_steps: int = 1000) -> Derivation:
    steps = []
    cur = t
    for _ in range(max_steps):
        step = select_step(trs, cur, strategy)
        if step is None:
            break
        steps.append(step)
        cur = step.target
    return Derivation(t, tuple(steps))


def extend(d: Derivation, more: Derivation) -> Derivation:
    if more.initial != d.final:
        raise DpclabError("derivations do not chain")
    return Derivation(d.initial, d.steps + more.steps)


def random_derivation(trs: Trs, t: Term, max_steps: int, rng: random.Random) -> Derivation:
    steps = []
    cur = t
    for _ in range(max_steps):
        options = one_step_reducts(trs, cur)
        if not options:
            break
        step = rng.choice(options)
        steps.append(step)
        cur = step.target
    return Derivation(t, tuple(steps))


class TermSampler:
    """Uniform sampling of ground terms of a given size by counting."""

    def __init__(self, signature):
        self.sig = sorted(ground_signature(signature).items())
        self._count = {}

    def count(self, n: int) -> int:
        if n in self._count:
            return self._count[n]
        total = sum(self._count_sym(k, n) for _, k in self.sig)
        self._count[n] = total
        return total

    def _count_sym(self, k, n):
        if k == 0:
            return 1 if n == 1 else 0
        return self._count_args(k, n - 1)

    def _count_args(self, k, n):
        if k == 0:
            return 1 if n == 0 else 0
        return sum(self.count(m) * self._count_args(k - 1, n - m) for m in range(1, n - k + 2))

    def sample(self, n: int, rng: random.Random) -> Term:
        r = rng.randrange(self.count(n))
        for sym, k in self.sig:
            c = self._count_sym(k, n)
            if r < c:
                return App(sym, self._sample_args(k, n - 1, rng))
            r -= c
        raise AssertionError("unreachable")

    def _sample_args(self, k, n, rng):
        if k == 0:
            return ()
        weights = [(m, self.count(m) * self._count_args(k - 1, n - m)) for m in range(1, n - k + 2)]
        r = rng.randrange(sum(w for _, w in weights))
        for m, w in weights:
            if r < w:
                return (self.sample(m, rng),) + self._sample_args(k - 1, n - m, rng)
            r -= w
        raise AssertionError("unreachable")

    def sample_upto(self, max_size: int, rng: random.Random) -> Term:
        sizes = [n for n in range(1, max_size + 1) if self.count(n)]
        return self.sample(rng.choice(sizes), rng)


# ---------------------------------------------------------------- traces

def parse_trace(text: str, trs: Trs, variables: Iterable[str] = ()) -> Derivation:
    """Read the trace format: terms on their own lines, '@pos #rule' between."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith(";")]
    if not lines:
        raise TrsSyntaxError("empty trace")
    cur = parse_term(lines[0], variables)
    initial = cur
    steps = []
    i = 1
    while i < len(lines):
        ann = lines[i]
        if not ann.startswith("@") or i + 1 >= len(lines):
            raise TrsSyntaxError(f"expected '@<pos> #<rule>' then a term, got {ann!r}")
        pos_part, _, rule_part = ann[1:].partition("#")
        p = parse_pos(pos_part)
        try:
            k = int(rule_part.strip())
        except ValueError:
            raise TrsSyntaxError(f"bad rule index in {ann!r}") from None
        nxt = parse_term(lines[i + 1], variables)
        if not 0 <= k < len(trs.rules):
            raise TrsSyntaxError(f"rule index {k} out of range")
        step = rewrite_at(trs, cur, p, k)
        if step is None or step.target != nxt:
            raise TrsSyntaxError(f"trace step {ann!r} does not rewrite {cur} to {nxt}")
        steps.append(step)
        cur = nxt
        i += 2
    return Derivation(initial, tuple(steps))


def format_trace(d: Derivation) -> str:
    out = [to_text(d.initial)]
    for s in d.steps:
        out.append(f"@{pos_str(s.redex)} #{s.rule_index}")
        out.append(to_text(s.target))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- heights

def _fold(trs: Trs, t: Term, budget: int, at_leaf, at_redex, at_frozen):
    """Memoized post-order evaluation over the reachability structure.

    Terms whose root heads a rule are expanded by their one-step reducts and
    combined by ``at_redex(term, child_values)``; other terms are split into
    arguments and combined by ``at_frozen(term, arg_values)``.
    """
    heads = set(_rules_by_root(trs))
    memo: dict = {}
    on_stack: set = set()
    explored = 0

    def children(u):
        if u.is_var or not u.args and u.symbol not in heads:
            return None, ()
        if u.symbol in heads:
            return "redex", successors(trs, u)
        return "frozen", u.args

    stack = []

    def push(u):
        nonlocal explored
        explored += 1
        if explored > budget:
            raise BudgetExceeded(f"explored more than {budget} terms from {t}")
        kind, kids = children(u)
        on_stack.add(u)
        stack.append((u, kind, list(kids), []))

    if t in memo:
        return memo[t]
    push(t)
    while stack:
        u, kind, kids, vals = stack[-1]
        if len(vals) < len(kids):
            k = kids[len(vals)]
            if k in memo:
                vals.append(memo[k])
            elif k in on_stack:
                raise NonTerminating(f"{k} reaches itself")
            else:
                push(k)
            continue
        stack.pop()
        on_stack.discard(u)
        if kind is None:
            v = at_leaf(u)
        elif kind == "redex":
            v = at_redex(u, vals)
        else:
            v = at_frozen(u, vals)
        memo[u] = v
        if stack:
            stack[-1][3].append(v)
    return memo[t]


def derivation_height(trs: Trs, t: Term, budget: int = DEFAULT_BUDGET) -> int:
    return _fold(
        trs, t, budget,
        at_leaf=lambda u: 0,
        at_redex=lambda u, vals: 1 + max(vals) if vals else 0,
        at_frozen=lambda u, vals: sum(vals),
    )


def potential_depth(trs: Trs, t: Term, budget: int = DEFAULT_BUDGET) -> int:
    return _fold(
        trs, t, budget,
        at_leaf=lambda u: 0,
        at_redex=lambda u, vals: max([u.depth] + vals),
        at_frozen=lambda u, vals: 1 + max(vals),
    )


def potential_size(trs: Trs, t: Term, budget: int = DEFAULT_BUDGET) -> int:
    return _fold(
        trs, t, budget,
        at_leaf=lambda u: 1,
        at_redex=lambda u, vals: max([u.size] + vals),
        at_frozen=lambda u, vals: 1 + sum(vals),
    )


def reachable(trs: Trs, t: Term, budget: int = DEFAULT_BUDGET) -> set:
    seen = {t}
    todo = [t]
    while todo:
        u = todo.pop()
        for v in successors(trs, u):
            if v not in seen:
                seen.add(v)
                if len(seen) > budget:
                    raise BudgetExceeded(f"more than {budget} terms reachable from {t}")
                todo.append(v)
    return seen


def find_derivation(trs: Trs, s: Term, t: Term, max_steps: int, budget: int = DEFAULT_BUDGET) -> Optional[Derivation]:
    """Shortest derivation from s to t of at most max_steps steps, by BFS."""
    if s == t:
        return Derivation(s)
    parent = {s: None}
    frontier = [s]
    for _ in range(max_steps):
        nxt = []
        for u in frontier:
            for step in one_step_reducts(trs, u):
                v = step.target
                if v in parent:
                    continue
                parent[v] = step
                if len(parent) > budget:
                    raise BudgetExceeded(f"search from {s} exceeded {budget} terms")
                if v == t:
                    steps = []
                    while parent[v] is not None:
                        steps.append(parent[v])
                        v = parent[v].source
                    return Derivation(s, tuple(reversed(steps)))
                nxt.append(v)
        frontier = nxt
        if not frontier:
            break
    return None


# ---------------------------------------------------------------- relative heights

def relative_derivation_height(strict: Trs, weak: Trs, t: Term, budget: int = DEFAULT_BUDGET) -> int:
    """Maximal number of strict steps in a strict-or-weak derivation from t."""
    heads = {r.lhs.symbol for r in strict.rules}
    present = set(symbols(t))
    for r in weak.rules:
        present.update(symbols(r.rhs))
    if not heads & present:
        return 0
    top = _TopRewriting.applicable(strict, weak, t)
    if top is not None:
        try:
            return top.height(t, budget)
        except _FallBack:
            pass
    return _relative_by_graph(strict, weak, t, budget)


def _relative_by_graph(strict: Trs, weak: Trs, t: Term, budget: int) -> int:
    g = nx.DiGraph()
    g.add_node(t)
    todo = [t]
    while todo:
        u = todo.pop()
        for trs, w in ((strict, 1), (weak, 0)):
            for v in successors(trs, u):
                if v not in g:
                    g.add_node(v)
                    if g.number_of_nodes() > budget:
                        raise BudgetExceeded(f"more than {budget} terms reachable from {t}")
                    todo.append(v)
                old = g.get_edge_data(u, v)
                if old is None or old["w"] < w:
                    g.add_edge(u, v, w=w)
    cond = nx.condensation(g)
    comp = cond.graph["mapping"]
    for u, v, data in g.edges(data=True):
        if comp[u] == comp[v] and data["w"] == 1:
            raise NonTerminatingRelative(f"strict step {u} -> {v} lies on a cycle")
    weight = {}
    for u, v, data in g.edges(data=True):
        cu, cv = comp[u], comp[v]
        if cu != cv:
            weight[(cu, cv)] = max(weight.get((cu, cv), 0), data["w"])
    best = {}
    for c in reversed(list(nx.topological_sort(cond))):
        best[c] = max((weight[(c, d)] + best[d] for d in cond.successors(c)), default=0)
    return best[comp[t]]


class _FallBack(Exception):
    pass


class _TopRewriting:
    """Relative heights when strict steps can only happen at the root.

    Applies when the strict rules are headed by symbols that occur nowhere
    else (as for marked dependency pairs), their arguments are linear
    constructor patterns, and the weak system is a left-linear constructor
    system.  Weak steps inside the arguments only lose options, so it is
    enough to follow the least-reduced argument instances that match a
    strict left-hand side; these are produced by a needed-reduction search.
    """

    def __init__(self, strict, weak, top):
        self.strict = strict
        self.weak = weak
        self.top = top
        self.weak_heads = set(r.lhs.symbol for r in weak.rules)
        self.roots = self._root_closure()
        self.reach_memo = {}
        self.frontier_memo = {}
        self.frontier_active = set()
        self.height_memo = {}
        self.explored = 0

    @classmethod
    def applicable(cls, strict: Trs, weak: Trs, t: Term):
        top = {r.lhs.symbol for r in strict.rules}
        if not top or t.is_var or t.symbol not in top:
            return None
        weak_heads = {r.lhs.symbol for r in weak.rules}
        if top & weak_heads:
            return None

        def clean(u):
            return all(s.is_var or s.symbol not in top for s in _subterms(u))

        for r in weak.rules:
            if not clean(r.lhs) or not clean(r.rhs):
                return None
            if not _linear(r.lhs) or not all(_constructor_pattern(a, weak_heads) for a in r.lhs.args):
                return None
        for r in strict.rules:
            if not _linear(r.lhs):
                return None
            if not all(clean(a) and _constructor_pattern(a, weak_heads) for a in r.lhs.args):
                return None
            if not r.rhs.is_var and not all(clean(a) for a in r.rhs.args):
                return None
        if not all(clean(a) for a in t.args):
            return None
        return cls(strict, weak, top)

    def _root_closure(self):
        roots = {f: {f} for f in self.weak_heads}
        changed = True
        while changed:
            changed = False
            for r in self.weak.rules:
                f = r.lhs.symbol
                if r.rhs.is_var:
                    new = {None}
                elif r.rhs.symbol in self.weak_heads:
                    new = roots[r.rhs.symbol]
                else:
                    new = {r.rhs.symbol}
                if not new <= roots[f]:
                    roots[f] |= new
                    changed = True
        return roots

    def _tick(self, budget):
        self.explored += 1
        if self.explored > budget:
            raise BudgetExceeded(f"explored more than {budget} terms")

    def height(self, t: Term, budget: int) -> int:
        memo = self.height_memo
        active = set()

        def go(u):
            if u.is_var or u.symbol not in self.top:
                return 0
            if u in memo:
                return memo[u]
            if u in active:
                raise NonTerminatingRelative(f"{u} reaches itself with a strict step")
            active.add(u)
            self._tick(budget)
            best = 0
            for r in self.strict.rules:
                if r.lhs.symbol != u.symbol:
                    continue
                choices = [self.frontier(a, p, budget) for a, p in zip(u.args, r.lhs.args)]
                for combo in _product(choices):
                    sigma = {}
                    for p, a in zip(r.lhs.args, combo):
                        sigma.update(match(p, a))
                    best = max(best, 1 + go(apply_subst(r.rhs, sigma)))
            active.discard(u)
            memo[u] = best
            return best

        limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(limit, 20000))
        try:
            return go(t)
        finally:
            sys.setrecursionlimit(limit)

    def could_reach(self, t: Term, p: Term) -> bool:
        """Over-approximates whether t rewrites to an instance of p."""
        if p.is_var:
            return True
        if t.is_var:
            return False
        key = (t, p)
        hit = self.reach_memo.get(key)
        if hit is not None:
            return hit
        if t.symbol not in self.weak_heads:
            ok = t.symbol == p.symbol and all(self.could_reach(a, b) for a, b in zip(t.args, p.args))
        else:
            ok = t.symbol == p.symbol and all(self.could_reach(a, b) for a, b in zip(t.args, p.args))
            if not ok:
                for r in self.weak.rules:
                    if r.lhs.symbol == t.symbol and all(self.could_reach(a, b) for a, b in zip(t.args, r.lhs.args)):
                        if self._abstract_reach(r.rhs, p):
                            ok = True
                            break
        self.reach_memo[key] = ok
        return ok

    def _abstract_reach(self, r: Term, p: Term) -> bool:
        if p.is_var or r.is_var:
            return True
        if r.symbol in self.weak_heads:
            rs = self.roots[r.symbol]
            return None in rs or p.symbol in rs
        return r.symbol == p.symbol and all(self._abstract_reach(a, b) for a, b in zip(r.args, p.args))

    def frontier(self, v: Term, p: Term, budget: int) -> list:
        """Least-reduced weak reducts of v that are instances of p."""
        if p.is_var:
            return [v]
        key = (v, p)
        if key in self.frontier_memo:
            return self.frontier_memo[key]
        if key in self.frontier_active:
            raise _FallBack()
        if not self.could_reach(v, p):
            self.frontier_memo[key] = []
            return []
        self.frontier_active.add(key)
        self._tick(budget)
        out = {}
        if v.symbol not in self.weak_heads:
            if v.symbol == p.symbol:
                parts = [self.frontier(a, b, budget) for a, b in zip(v.args, p.args)]
                for combo in _product(parts):
                    out.setdefault(App(v.symbol, combo), None)
        else:
            for r in self.weak.rules:
                if r.lhs.symbol != v.symbol:
                    continue
                parts = [self.frontier(a, b, budget) for a, b in zip(v.args, r.lhs.args)]
                for combo in _product(parts):
                    sigma = {}
                    for b, a in zip(r.lhs.args, combo):
                        sigma.update(match(b, a))
                    for w in self.frontier(apply_subst(r.rhs, sigma), p, budget):
                        out.setdefault(w, None)
        self.frontier_active.discard(key)
        res = list(out)
        self.frontier_memo[key] = res
        return res


def _product(lists):
    if not lists:
        yield ()
        return
    first, rest = lists[0], lists[1:]
    for x in first:
        for tail in _product(rest):
            yield (x,) + tail


def _subterms(t):
    yield t
    if not t.is_var:
        for a in t.args:
            yield from _subterms(a)


def _linear(t: Term) -> bool:
    names = [s.name for s in _subterms(t) if s.is_var]
    return len(names) == len(set(names))


def _constructor_pattern(t: Term, heads) -> bool:
    return all(s.is_var or s.symbol not in heads for s in _subterms(t))


# ---------------------------------------------------------------- empirical complexity

@dataclass(frozen=True)
class ComplexityRow:
    size: int
    value: int
    witness: Optional[Term]
    exact: bool


def empirical_complexity(trs: Trs, n: int, mode: str = "dc", budget: int = DEFAULT_BUDGET,
                         fallback_steps: int = 100_000) -> list:
    """Per size m <= n, the maximal height over ground terms of size <= m.

    In ``dc`` mode a start term whose reachable set exceeds the budget
    contributes a lower bound taken from the longer of its leftmost-outermost
    and leftmost-innermost derivations; such rows are flagged ``exact=False``.
    """
    from .terms import ground_terms

    if mode not in ("dc", "dp_complexity", "scc_complexity"):
        raise DpclabError(f"unknown mode {mode!r}")
    if n < 1:
        return []
    if mode != "dc":
        from .dp import dependency_pairs, estimated_dependency_graph
        problem = dependency_pairs(trs)
        graph = estimated_dependency_graph(problem)
        defined = trs.defined
    rows = []
    best, witness, exact = 0, None, True
    terms = ground_terms(trs.signature, n)
    for t in terms:
        if mode == "dc":
            try:
                v = derivation_height(trs, t, budget)
            except BudgetExceeded:
                v = max(len(derive(trs, t, s, fallback_steps)) for s in ("lo", "li"))
                exact = False
        else:
            from .terms import mark
            ts = mark(t, defined)
            if mode == "dp_complexity":
                v = relative_derivation_height(problem.pairs_trs, trs, ts, budget)
            else:
                v = max([relative_derivation_height(problem.subset(scc.members), trs, ts, budget)
                         for scc in graph.sccs] + [1])
        if v > best or witness is None:
            best, witness = v, t
        rows.append((t.size, best, witness, exact))
    out = []
    for m in range(1, n + 1):
        upto = [r for r in rows if r[0] <= m]
        if upto:
            out.append(ComplexityRow(m, upto[-1][1], upto[-1][2], upto[-1][3]))
    return out
