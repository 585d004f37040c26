"""Rank-height pairs of terms, the encoding into the simulating system, rule
generation for that system, constructive simulation witnesses, and the
fast-growing function family."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .dp import DependencyGraph, DpProblem, dependency_pairs, estimated_dependency_graph
from .errors import ArgumentTooLarge, BadParams, SimulationFailed
from .rewrite import DEFAULT_BUDGET, Derivation, RewriteStep, relative_derivation_height, rewrite_at, select_step
from .terms import (App, Rule, Term, Trs, Var, apply_subst, branching_constant, is_proper_subterm, mark,
                    match, parse_trs, positions, subterm_at)

ZERO, SUCC, CONST = "0", "s", "c"
SIZE, DOUBLE, SEED, START, FUN = "size", "d_a", "g", "z", "f"


def g_symbol(i: int) -> str:
    return f"g_{i}"


# ---------------------------------------------------------------- rank-height pairs

class SccHeights:
    """sccheight with a per-instance cache.

    The pair is (rank, height) for the highest-ranked SCC whose relative
    height from the marked term is positive; otherwise (0,1) for a defined
    root and (0,0) for the rest.
    """

    def __init__(self, trs: Trs, graph: Optional[DependencyGraph] = None,
                 problem: Optional[DpProblem] = None, budget: int = DEFAULT_BUDGET):
        self.trs = trs
        self.problem = problem or dependency_pairs(trs)
        self.graph = graph or estimated_dependency_graph(self.problem)
        self.budget = budget
        self.by_rank = sorted(self.graph.sccs, key=lambda c: -c.rank)
        self.strict = {c.rank: self.problem.subset(c.members) for c in self.graph.sccs}
        self.cache: dict = {}

    @property
    def k(self) -> int:
        return len(self.graph.sccs)

    def __call__(self, t: Term) -> tuple:
        if t in self.cache:
            return self.cache[t]
        if t.is_var or t.symbol not in self.trs.defined:
            res = (0, 0)
        else:
            ts = mark(t, self.trs.defined)
            res = (0, 1)
            for scc in self.by_rank:
                h = relative_derivation_height(self.strict[scc.rank], self.trs, ts, self.budget)
                if h > 0:
                    res = (scc.rank, h)
                    break
        self.cache[t] = res
        return res


def sccheight(trs: Trs, graph: DependencyGraph, t: Term, budget: int = DEFAULT_BUDGET) -> tuple:
    return SccHeights(trs, graph, budget=budget)(t)


def numeral(n: int, inner: Optional[Term] = None) -> Term:
    t = App(ZERO) if inner is None else inner
    for _ in range(n):
        t = App(SUCC, (t,))
    return t


def numeral_value(t: Term) -> Optional[int]:
    n = 0
    while not t.is_var and t.symbol == SUCC:
        n += 1
        t = t.args[0]
    return n if (not t.is_var and t.symbol == ZERO and not t.args) else None


def tr_encode(trs: Trs, graph: DependencyGraph, t: Term, a: Optional[int] = None,
              heights: Optional[SccHeights] = None) -> Term:
    heights = heights or SccHeights(trs, graph)
    a = max(trs.max_arity, 1) if a is None else a
    return _tr(heights, t, a)


def _tr(heights: SccHeights, t: Term, a: int) -> Term:
    if t.is_var:
        raise SimulationFailed("the encoding is defined on ground terms")
    if len(t.args) > a:
        raise BadParams(f"arity {len(t.args)} exceeds a={a}")
    i, l = heights(t)
    kids = [_tr(heights, u, a) for u in t.args] + [App(CONST)] * (a - len(t.args))
    return App(g_symbol(i), (numeral(l), *kids))


def approx(s: Term, t: Term) -> bool:
    """Same shape up to counters and g-indices."""
    if s.is_var or t.is_var:
        return False
    if s.symbol == CONST:
        return t.symbol == CONST and not t.args
    if not (s.symbol.startswith("g_") and t.symbol.startswith("g_")):
        return False
    if numeral_value(s.args[0]) is None or numeral_value(t.args[0]) is None:
        return False
    return len(s.args) == len(t.args) and all(approx(x, y) for x, y in zip(s.args[1:], t.args[1:]))


# ---------------------------------------------------------------- rule generation

@dataclass(frozen=True)
class SimParams:
    a: int
    C: int
    k: int
    f_rules: Trs = field(compare=False)

    def f(self, n: int) -> int:
        d = Derivation(App(FUN, (numeral(n),)))
        t = d.initial
        for _ in range(100_000):
            step = select_step(self.f_rules, t, "li")
            if step is None:
                break
            t = step.target
        v = numeral_value(t)
        if v is None:
            raise SimulationFailed(f"f({n}) does not normalize to a numeral")
        return v


def constant_f_rules(c0: int) -> Trs:
    return parse_trs(f"(VAR x) (RULES f(x) -> {_numeral_text(c0)})")


def linear_f_rules(c1: int, c0: int) -> Trs:
    """f(n) = c1*n + c0 on unary numerals."""
    rhs = "f(x)"
    for _ in range(c1):
        rhs = f"s({rhs})"
    return parse_trs(f"(VAR x) (RULES f(0) -> {_numeral_text(c0)} f(s(x)) -> {rhs})")


def _numeral_text(n: int) -> str:
    return "s(" * n + "0" + ")" * n


def m_term(level: int, i: int, x: Term, xs) -> Term:
    """M^level_i(x, xs)."""
    t = App(g_symbol(i), (x, *xs))
    for _ in range(level):
        t = App(g_symbol(i), (x, *([t] * len(xs))))
    return t


class SimSystem:
    """The generated rules together with a name-to-index table."""

    def __init__(self, p: SimParams):
        if p.a < 1 or p.C < 1 or p.k < 1:
            raise BadParams("need a >= 1, C >= 1, k >= 1")
        used = set(p.f_rules.defined) - {FUN}
        reserved = {g_symbol(i) for i in range(p.k + 1)} | {SIZE, DOUBLE, CONST, SEED, START}
        if used & reserved:
            raise BadParams(f"f rules define reserved symbols {sorted(used & reserved)}")
        self.params = p
        a, k = p.a, p.k
        x = Var("x")
        xs = [Var(f"x{j}") for j in range(1, a + 1)]
        c = App(CONST)
        zero = App(ZERO)
        rules, names = [], []

        def add(name, lhs, rhs):
            names.append(name)
            rules.append(Rule(lhs, rhs))

        def g(i, first, args):
            return App(g_symbol(i), (first, *args))

        def fresh_counter(args):
            return App(FUN, (App(SIZE, (g(0, zero, args),)),))

        for i in range(k + 1):
            add(("1", i), g(i, App(SUCC, (x,)), xs), m_term(p.C, i, x, xs))
        for i in range(1, k + 1):
            add(("2", i), g(i, x, xs), g(i - 1, fresh_counter(xs), xs))
        for i in range(k + 1):
            for j in range(1, a + 1):
                add(("3", i, j), App(SIZE, (g(i, x, xs),)), App(DOUBLE, (App(SIZE, (xs[j - 1],)),)))
        add(("4",), App(SIZE, (c,)), numeral(1))
        add(("5",), App(DOUBLE, (App(SUCC, (x,)),)), numeral(a, App(DOUBLE, (x,))))
        add(("6",), App(DOUBLE, (zero,)), zero)
        add(("7",), g(0, x, xs), c)
        for i in range(k + 1):
            for j in range(1, a + 1):
                add(("8", i, j), g(i, x, xs), xs[j - 1])
        add(("9",), App(SEED, (x,)), g(k, fresh_counter([x] * a), [x] * a))
        add(("10",), App(START), g(k, fresh_counter([c] * a), [c] * a))
        self.schema_count = len(rules)
        for n, r in enumerate(p.f_rules.rules):
            add(("f", n), r.lhs, r.rhs)
        self.names = names
        self.index = {name: n for n, name in enumerate(names)}
        self.trs = Trs.from_rules(rules)


def generate_sim_trs(p: SimParams) -> Trs:
    return SimSystem(p).trs


def params_for(trs: Trs, graph: Optional[DependencyGraph] = None, f_rules: Optional[Trs] = None,
               a: Optional[int] = None) -> SimParams:
    graph = graph or estimated_dependency_graph(dependency_pairs(trs))
    a = max(2, trs.max_arity) if a is None else a
    return SimParams(a, branching_constant(trs), max(1, len(graph.sccs)),
                     f_rules if f_rules is not None else constant_f_rules(1))


# ---------------------------------------------------------------- witness construction

def _g_index(t: Term) -> int:
    return int(t.symbol[2:])


def _g_count(t: Term) -> int:
    if t.is_var or not t.symbol.startswith("g_"):
        return 0
    return 1 + sum(_g_count(u) for u in t.args[1:])


class Builder:
    """Accumulates validated steps of the generated system on one term."""

    def __init__(self, system: SimSystem, start: Term):
        self.sys = system
        self.p = system.params
        self.cur = start
        self.initial = start
        self.steps: list = []

    def derivation(self) -> Derivation:
        return Derivation(self.initial, tuple(self.steps))

    def at(self, pos) -> Term:
        return subterm_at(self.cur, pos)

    def apply(self, pos, name) -> None:
        step = rewrite_at(self.sys.trs, self.cur, tuple(pos), self.sys.index[name])
        if step is None:
            raise SimulationFailed(f"rule {name} does not apply at {pos} of {self.cur}")
        self.steps.append(step)
        self.cur = step.target

    # counters ---------------------------------------------------------
    def decrement(self, pos) -> None:
        """g_i(s(x),..) to g_i(x,..) via the splitting rule and C projections."""
        i = _g_index(self.at(pos))
        self.apply(pos, ("1", i))
        for _ in range(self.p.C):
            self.apply(pos, ("8", i, 1))

    def erase(self, pos) -> None:
        """Any g_i(..) to c via index lowering and rule 7."""
        t = self.at(pos)
        if t.symbol == CONST:
            return
        if t.symbol == SEED:
            self.apply(pos, ("9",))
        elif t.symbol == START:
            self.apply(pos, ("10",))
        for i in range(_g_index(self.at(pos)), 0, -1):
            self.apply(pos, ("2", i))
        self.apply(pos, ("7",))

    def lower_to(self, pos, target: int) -> None:
        for i in range(_g_index(self.at(pos)), target, -1):
            self.apply(pos, ("2", i))

    def eval_size(self, pos) -> int:
        """size(T) for T shaped like an encoding, down to a numeral."""
        t = self.at(pos).args[0]
        i = _g_index(t)
        kids = t.args[1:]
        counts = [_g_count(u) for u in kids]
        j = max(range(len(kids)), key=lambda n: (counts[n], -n)) + 1
        self.apply(pos, ("3", i, j))
        inner = pos + (1,)
        if kids[j - 1].symbol == CONST:
            self.apply(inner, ("4",))
        else:
            self.eval_size(inner)
        l = numeral_value(self.at(inner))
        d_pos = tuple(pos)
        for _ in range(l):
            self.apply(d_pos, ("5",))
            d_pos = d_pos + (1,) * self.p.a
        self.apply(d_pos, ("6",))
        return numeral_value(self.at(pos))

    def eval_f(self, pos) -> int:
        f_trs = self.p.f_rules
        while True:
            step = select_step(f_trs, self.at(pos), "li")
            if step is None:
                break
            self.apply(tuple(pos) + step.redex, ("f", step.rule_index))
        v = numeral_value(self.at(pos))
        if v is None:
            raise SimulationFailed(f"f did not produce a numeral at {pos}")
        return v

    def refresh_counter(self, pos) -> int:
        """Evaluate the f(size(g_0(0,..))) counter left by rules 2, 9 or 10."""
        self.eval_size(tuple(pos) + (1, 1))
        return self.eval_f(tuple(pos) + (1,))

    def settle(self, pos, index: int, height: int) -> None:
        """Bring g_i(counter,..) at pos to g_index(s^height(0),..)."""
        t = self.at(pos)
        i = _g_index(t)
        if index > i:
            raise SimulationFailed(f"rank would increase from {i} to {index} at {pos}")
        if index < i:
            self.lower_to(pos, index)
            value = self.refresh_counter(pos)
        else:
            value = numeral_value(t.args[0])
            if value is None:
                value = self.refresh_counter(pos)
        if value < height:
            raise SimulationFailed(f"counter {value} below required height {height} at {pos}; f is too small")
        for _ in range(value - height):
            self.decrement(pos)


def _tr_position(p: tuple) -> tuple:
    return tuple(i + 1 for i in p)


class Simulator:
    def __init__(self, trs: Trs, params: SimParams, graph: Optional[DependencyGraph] = None,
                 budget: int = DEFAULT_BUDGET):
        self.trs = trs
        self.params = params
        self.system = SimSystem(params)
        self.heights = SccHeights(trs, graph, budget=budget)
        if self.heights.k > params.k:
            raise BadParams(f"k={params.k} is below the SCC count {self.heights.k}")
        if trs.max_arity > params.a:
            raise BadParams(f"a={params.a} is below the maximal arity {trs.max_arity}")

    def tr(self, t: Term) -> Term:
        return _tr(self.heights, t, self.params.a)

    # one rewrite step ---------------------------------------------------
    def simulate_step(self, step: RewriteStep) -> Derivation:
        s, t = step.source, step.target
        rule = self.trs.rules[step.rule_index]
        b = Builder(self.system, self.tr(s))
        q = _tr_position(step.redex)
        lhs_inst = subterm_at(s, step.redex)
        i, m = self.heights(lhs_inst)
        if m == 0:
            raise SimulationFailed(f"redex {lhs_inst} has height 0")
        b.apply(q, ("1", i))
        for _ in range(self.params.C - rule.rhs.depth):
            b.apply(q, ("8", i, 1))
        sigma_l = match(rule.lhs, lhs_inst)
        self._build(b, q, rule.rhs.depth, i, rule, sigma_l, rule.rhs)
        for k in range(len(step.redex) - 1, -1, -1):
            p0 = step.redex[:k]
            i2, m2 = self.heights(subterm_at(t, p0))
            if (i2, m2) > self.heights(subterm_at(s, p0)):
                raise SimulationFailed(f"sccheight increases at {p0}")
            b.settle(_tr_position(p0), i2, m2)
        if b.cur != self.tr(t):
            raise SimulationFailed(f"witness ends at {b.cur}, expected {self.tr(t)}")
        return b.derivation()

    def _project(self, b: Builder, pos, level: int, i: int, path_in_lhs: tuple) -> None:
        """From M^level_i(..) at pos reach the encoding of lhs|path instance."""
        for _ in range(level):
            b.apply(pos, ("8", i, 1))
        for step_index in path_in_lhs:
            cur_i = _g_index(b.at(pos))
            b.apply(pos, ("8", cur_i, step_index))

    def _build(self, b: Builder, pos, level: int, i: int, rule: Rule, sigma: dict, u: Term) -> None:
        """M^level_i(s^(m-1)(0), enc(lhs args)) at pos becomes the encoding of u sigma."""
        lhs = rule.lhs
        if u.is_var or is_proper_subterm(u, lhs):
            path = next(p for p in positions(lhs) if p and subterm_at(lhs, p) == u)
            self._project(b, pos, level, i, path)
            return
        depth = u.depth
        for _ in range(level - depth):
            b.apply(pos, ("8", i, 1))
        n = len(u.args)
        if depth == 0:
            for j in range(1, self.params.a + 1):
                b.erase(tuple(pos) + (j + 1,))
        else:
            for j in range(1, self.params.a + 1):
                child = tuple(pos) + (j + 1,)
                if j <= n:
                    self._build(b, child, depth - 1, i, rule, sigma, u.args[j - 1])
                else:
                    b.erase(child)
        i2, m2 = self.heights(apply_subst(u, sigma))
        b.settle(pos, i2, m2)

    def simulate(self, d: Derivation) -> list:
        return [self.simulate_step(st) for st in d.steps]

    # seeding --------------------------------------------------------------
    def seed_start(self, t: Term) -> Term:
        u = App(START)
        for _ in range(t.depth):
            u = App(SEED, (u,))
        return u

    def seed(self, t: Term) -> Derivation:
        b = Builder(self.system, self.seed_start(t))
        self._seed(b, (), t)
        if b.cur != self.tr(t):
            raise SimulationFailed(f"seeding ends at {b.cur}, expected {self.tr(t)}")
        return b.derivation()

    def _seed(self, b: Builder, pos: tuple, t: Term) -> None:
        while b.at(pos).symbol == SEED and self._seed_level(b.at(pos)) > t.depth:
            b.apply(pos, ("9",))
            b.apply(pos, ("8", self.params.k, 1))
        i, m = self.heights(t)
        if t.depth == 0:
            b.apply(pos, ("10",))
        else:
            b.apply(pos, ("9",))
            for j in range(1, self.params.a + 1):
                child = pos + (j + 1,)
                if j <= len(t.args):
                    self._seed(b, child, t.args[j - 1])
                else:
                    b.erase(child)
            if i == self.params.k:
                inner = pos + (1, 1, 1)
                for j in range(1, self.params.a + 1):
                    child = inner + (j + 1,)
                    if j <= len(t.args):
                        self._seed(b, child, t.args[j - 1])
                    else:
                        b.erase(child)
        if i < self.params.k:
            b.lower_to(pos, i)
        value = b.refresh_counter(pos)
        if value < m:
            raise SimulationFailed(f"counter {value} below required height {m}; f is too small")
        for _ in range(value - m):
            b.decrement(pos)

    @staticmethod
    def _seed_level(t: Term) -> int:
        n = 0
        while t.symbol == SEED:
            n += 1
            t = t.args[0]
        return n


def simulate_derivation(trs: Trs, graph: Optional[DependencyGraph], p: SimParams, d: Derivation) -> list:
    if not d.steps:
        raise SimulationFailed("no step to simulate")
    return Simulator(trs, p, graph).simulate(d)


def seed_term_derivation(trs: Trs, graph: Optional[DependencyGraph], p: SimParams, t: Term) -> Derivation:
    return Simulator(trs, p, graph).seed(t)


# ---------------------------------------------------------------- fast functions

FAST_LIMIT_BITS = 1 << 24


def fast_function(dparam: int, n: int, m: int, limit_bits: int = FAST_LIMIT_BITS) -> int:
    """F_0(m) = d^(m+1), F_(n+1)(m) = F_n^(m+1)(m), exactly or ArgumentTooLarge."""
    if dparam < 2 or n < 0 or m < 0:
        raise BadParams("need d >= 2 and naturals n, m")
    return _fast(dparam, n, m, limit_bits)


def _fast(d: int, n: int, m: int, limit: int) -> int:
    if n == 0:
        if (m + 1) * d.bit_length() > limit:
            raise ArgumentTooLarge(f"F_0 of a {m.bit_length()}-bit argument with d={d} exceeds {limit} bits")
        return d ** (m + 1)
    if m > limit:
        raise ArgumentTooLarge(f"F_{n} of a {m.bit_length()}-bit argument iterates too often")
    v = m
    for _ in range(m + 1):
        v = _fast(d, n - 1, v, limit)
    return v
