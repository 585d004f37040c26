"""Checkers for the length and size bounds, the usable-rules interpretation,
the g/G/h/H functions, and algebra-based orientation checks."""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, Optional

import sympy

from .dp import DpProblem, dependency_pairs, usable_rules
from .errors import (
    ArgumentTooLarge,
    IncompatibleAlgebra,
    MissingInterpretation,
    NonAffine,
    NotAnSrs,
)
from .progeny import progenitor_graph
from .rewrite import (DEFAULT_BUDGET, Derivation, derivation_height, empirical_complexity, one_step_reducts,
                      relative_derivation_height)
from .terms import App, Rule, Term, Trs, branching_constant, mark, subterms, to_text

NIL, CONS = "nil", "cons"


@dataclass
class BoundReport:
    check: str
    inequalities: list = field(default_factory=list)
    witness: dict = field(default_factory=dict)
    note: str = ""

    def require(self, label: str, lhs, rhs, holds: Optional[bool] = None) -> bool:
        """Record lhs <= rhs (or an explicit verdict for other relations)."""
        ok = lhs <= rhs if holds is None else holds
        self.inequalities.append((label, lhs, rhs, bool(ok)))
        return bool(ok)

    @property
    def passed(self) -> bool:
        return all(ok for *_, ok in self.inequalities)

    @property
    def lhs(self) -> list:
        return [x[1] for x in self.inequalities]

    @property
    def rhs(self) -> list:
        return [x[2] for x in self.inequalities]

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "pass": self.passed,
            "lhs": [_jsonable(v) for v in self.lhs],
            "rhs": [_jsonable(v) for v in self.rhs],
            "witness": {k: _jsonable(v) for k, v in self.witness.items()},
        }

    def csv_row(self) -> list:
        return [self.check, "pass" if self.passed else "fail",
                ";".join(str(_jsonable(v)) for v in self.lhs),
                ";".join(str(_jsonable(v)) for v in self.rhs)]


def _jsonable(v):
    if isinstance(v, (bool, int, float, str)) or v is None:
        return v
    if isinstance(v, Term):
        return to_text(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return str(v)


# ---------------------------------------------------------------- length bounds

def max_subterm_dp_height(trs: Trs, s: Term, budget: int = DEFAULT_BUDGET,
                          problem: Optional[DpProblem] = None) -> int:
    """max over subterms u of s of the DP(R)/R height of the marked u."""
    problem = problem or dependency_pairs(trs)
    strict = problem.pairs_trs
    return max(relative_derivation_height(strict, trs, mark(u, trs.defined), budget)
               for u in set(subterms(s)))


def check_depth_bound(trs: Trs, d: Derivation, budget: int = DEFAULT_BUDGET, m: Optional[int] = None) -> BoundReport:
    C = branching_constant(trs)
    s = d.initial
    if m is None:
        m = max_subterm_dp_height(trs, s, budget)
    bound = s.size * C ** (m + 2)
    deepest = max(t.depth for t in d.terms)
    r = BoundReport("depth_bound", witness={"C": C, "m": m, "size": s.size})
    r.require("depth(t) <= |s|*C^(m+2)", deepest, bound)
    return r


def check_srs_bounds(srs: Trs, d: Derivation, budget: int = DEFAULT_BUDGET, m: Optional[int] = None) -> BoundReport:
    if not srs.is_srs:
        raise NotAnSrs("all symbols must have arity <= 1")
    C = branching_constant(srs)
    s = d.initial
    if m is None:
        m = max_subterm_dp_height(srs, s, budget)
    graph = progenitor_graph(d, srs)
    r = BoundReport("srs_bounds", witness={"C": C, "m": m, "nodes": len(graph.nodes), "length": len(d)})
    r.require("length <= graph nodes", len(d), len(graph.nodes))
    r.require("length <= |s|*C^(m+1)", len(d), s.size * C ** (m + 1))
    return r


# ---------------------------------------------------------------- usable-rules interpretation

def interpreted_symbols(trs: Trs) -> frozenset:
    """Defined symbols of the rules that are not usable for DP(R)."""
    problem = dependency_pairs(trs)
    used = set(usable_rules(problem).indices)
    rest = [r for i, r in enumerate(trs.rules) if i not in used]
    return frozenset(r.lhs.symbol for r in rest)


def _order_key(t: Term):
    return (t.size, tuple(u.name if u.is_var else u.symbol for u in subterms(t)))


def list_term(items) -> Term:
    out = App(NIL)
    for t in reversed(sorted(set(items), key=_order_key)):
        out = App(CONS, (t, out))
    return out


@dataclass(frozen=True)
class IgResult:
    image: Term
    size: int


def ig_transform(trs: Trs, t: Term, budget: int = DEFAULT_BUDGET, symbols_g=None) -> IgResult:
    g = interpreted_symbols(trs) if symbols_g is None else frozenset(symbols_g)
    memo: dict = {}
    derivation_height(trs, t, budget)  # fails fast on nontermination or budget

    def go(u: Term) -> Term:
        if u in memo:
            return memo[u]
        if u.is_var:
            res = u
        else:
            args = tuple(go(a) for a in u.args)
            head = App(u.symbol, args)
            if u.symbol in g:
                reducts = [go(st.target) for st in one_step_reducts(trs, u)]
                res = App(CONS, (head, list_term(reducts)))
            else:
                res = head
        memo[u] = res
        return res

    image = go(t)
    return IgResult(image, image.size)


# ---------------------------------------------------------------- g, G, h, H

def constant_e(trs: Trs) -> int:
    a = trs.max_arity
    b = len(trs.rules)
    c = 1
    for r in trs.rules:
        counts = {}
        for u in subterms(r.rhs):
            if u.is_var:
                counts[u.name] = counts.get(u.name, 0) + 1
        c = max(c, 1 + max([r.rhs.size] + list(counts.values())))
    return max(2, a, b, c) + 3


G_MAX_M, G_MAX_N = 8, 2


def g_bound(E: int, m: int, n: int, guard: bool = True) -> int:
    if guard and (m > G_MAX_M or n > G_MAX_N):
        raise ArgumentTooLarge(f"g({m},{n}) is beyond the evaluable range m <= {G_MAX_M}, n <= {G_MAX_N}")
    if m < 0 or n < 0 or E < 1:
        raise ValueError("g takes naturals and E >= 1")
    return _g(E, m, n)


@lru_cache(maxsize=None)
def _g(E: int, m: int, n: int) -> int:
    if m == 0:
        return E
    if n == 0:
        return E ** (m + 1)
    prev = E
    for k in range(1, m + 1):
        prev = E * prev + E * k * _g(E, E * k, n - 1)
    return prev


def g_closed_form_check(E: int, m: int, n: int) -> BoundReport:
    """g(m,n) <= (E(n+1))^((n+1)E^(2m+1)) without expanding the right side."""
    value = g_bound(E, m, n)
    base = E * (n + 1)
    exponent = (n + 1) * E ** (2 * m + 1)
    r = BoundReport("g_closed_form", witness={"E": E, "m": m, "n": n, "base": base, "exponent": exponent})
    floor_log = base.bit_length() - 1
    if value.bit_length() <= exponent * floor_log:
        r.require("bits(g) <= exponent*floor(log2 base)", value.bit_length(), exponent * floor_log)
    elif exponent * math.log2(base) < 1_000_000:
        r.require("g <= base^exponent", value, base ** exponent)
    else:
        r.require("closed form decided", 0, 0, holds=False)
        r.note = "inconclusive: right side too large to expand"
    return r


def tower_g(d: int, m: int, n: int, limit_bits: int = 1 << 20) -> int:
    """G(m,n) = 2^2^(d(m+n+1))."""
    inner = d * (m + n + 1)
    if inner > math.log2(limit_bits):
        raise ArgumentTooLarge(f"G({m},{n}) with d={d} has more than {limit_bits} bits")
    return 2 ** (2 ** inner)


def tower_h(F: int, m: int, n: int, limit_bits: int = 1 << 20) -> int:
    """h(m,n) = 2^2^(m*2^(F(n+1)))."""
    if F * (n + 1) > 20:
        raise ArgumentTooLarge(f"h({m},{n}) is not evaluable")
    mid = m * 2 ** (F * (n + 1))
    if mid > math.log2(limit_bits):
        raise ArgumentTooLarge(f"h({m},{n}) has more than {limit_bits} bits")
    return 2 ** (2 ** mid)


def tower_hf(f: Callable[[int], int], F: int, d: int, m: int) -> int:
    """H[f](m) = f(1 + F*G(m, h(m,m)))."""
    return f(1 + F * tower_g(d, m, tower_h(F, m, m)))


# ---------------------------------------------------------------- algebras

def _argument_symbols(n: int) -> list:
    return sympy.symbols(f"x1:{n + 1}", integer=True, nonnegative=True) if n else []


class Algebra:
    """Interpretations over the naturals, one expression per symbol.

    Expressions use the argument names x1..xn, for example "2**x1*(x2+1)+1".
    """

    def __init__(self, interpretations: Mapping[str, str]):
        self.source = dict(interpretations)
        self.exprs = {}
        for sym, text in self.source.items():
            arity = _arity_of(text)
            local = {f"x{i}": s for i, s in enumerate(_argument_symbols(max(arity, 9)), start=1)}
            self.exprs[sym] = sympy.sympify(text, locals=local)

    def covers(self, signature: Mapping[str, int]) -> None:
        missing = sorted(s for s in signature if s not in self.exprs)
        if missing:
            raise MissingInterpretation(f"no interpretation for {', '.join(missing)}")

    def term(self, t: Term):
        """Symbolic value of t, term variables becoming nonnegative symbols."""
        if t.is_var:
            return sympy.Symbol(f"v_{t.name}", integer=True, nonnegative=True)
        try:
            e = self.exprs[t.symbol]
        except KeyError:
            raise MissingInterpretation(f"no interpretation for {t.symbol}") from None
        args = [self.term(a) for a in t.args]
        xs = _argument_symbols(len(args))
        return e.subs(dict(zip(xs, args)), simultaneous=True)

    def evaluate(self, sym: str, values) -> int:
        e = self.exprs[sym]
        xs = _argument_symbols(len(values))
        return int(e.subs(dict(zip(xs, values)), simultaneous=True))


def _arity_of(text: str) -> int:
    found = [int(m) for m in re.findall(r"\bx(\d+)\b", text)]
    return max(found, default=0)


def _affine_parts(expr, variables):
    expanded = sympy.expand(expr)
    poly = sympy.Poly(expanded, *variables) if variables else None
    if poly is None:
        if expanded.free_symbols:
            raise NonAffine(f"{expr} is not affine")
        return expanded, {}
    if poly.total_degree() > 1 or any(not c.is_number for c in poly.coeffs()):
        raise NonAffine(f"{expr} is not affine")
    coeffs = {v: poly.coeff_monomial(v) for v in variables}
    return poly.coeff_monomial(1), coeffs


def orient_linear(alg: Algebra, rule: Rule, strict: bool) -> tuple:
    left, right = alg.term(rule.lhs), alg.term(rule.rhs)
    variables = sorted((left - right).free_symbols | left.free_symbols | right.free_symbols, key=str)
    const, coeffs = _affine_parts(left - right, variables)
    ok = const >= (1 if strict else 0) and all(c >= 0 for c in coeffs.values())
    return bool(ok), None


def orient_sampled(alg: Algebra, rule: Rule, strict: bool, grid: int) -> tuple:
    left, right = alg.term(rule.lhs), alg.term(rule.rhs)
    variables = sorted(left.free_symbols | right.free_symbols, key=str)
    fl = sympy.lambdify(variables, left, modules=[{}, "math"])
    fr = sympy.lambdify(variables, right, modules=[{}, "math"])
    for values in itertools.product(range(grid + 1), repeat=len(variables)):
        a, b = fl(*values), fr(*values)
        if not (a > b if strict else a >= b):
            return False, dict(zip(map(str, variables), values))
    return True, None


def check_algebra(strict_rules, weak_rules, alg: Algebra, mode: str = "linear_exact",
                  grid: int = 6) -> BoundReport:
    r = BoundReport(f"algebra_{mode}", witness={"grid": grid} if mode == "sampled" else {})
    if mode == "sampled":
        r.note = "sampled mode refutes only; a pass is evidence, not proof"
    for rules, strict in ((strict_rules, True), (weak_rules, False)):
        for rule in rules:
            if mode == "linear_exact":
                ok, cex = orient_linear(alg, rule, strict)
            elif mode == "sampled":
                ok, cex = orient_sampled(alg, rule, strict, grid)
            else:
                raise ValueError(f"unknown mode {mode!r}")
            label = f"{rule} {'>' if strict else '>='}"
            r.require(label, 0, 0, holds=ok)
            if cex is not None:
                r.witness[f"counterexample {rule}"] = cex
    return r


def usable_problem_rules(trs: Trs) -> tuple:
    """(DP(R) as strict rules, U(DP(R)) with Ce as weak rules)."""
    problem = dependency_pairs(trs)
    u = usable_rules(problem)
    return problem.pairs, u.usable + u.ce


def check_dc_bound_from_algebra(trs: Trs, alg: Algebra, p: str, n: int,
                                budget: int = DEFAULT_BUDGET, grid: int = 6) -> BoundReport:
    """Empirical Dc(m) <= p^m(0) for m <= n, after checking compatibility."""
    try:
        ok = check_algebra(trs.rules, (), alg, "linear_exact").passed
    except NonAffine:
        ok = check_algebra(trs.rules, (), alg, "sampled", grid).passed
    if not ok:
        raise IncompatibleAlgebra("the algebra does not orient every rule strictly")
    x = sympy.Symbol("x1", integer=True, nonnegative=True)
    pexpr = sympy.sympify(p, locals={"x1": x, "n": x})
    step = sympy.lambdify([x], pexpr, modules=[{}, "math"])
    r = BoundReport("dc_from_algebra", witness={"p": p})
    sig = dict(trs.signature)
    for sym, arity in sig.items():
        alg.covers({sym: arity})
        dominated = all(step(v) >= alg.evaluate(sym, [v] * arity) for v in range(grid + 1))
        r.require(f"p dominates {sym} on 0..{grid}", 0, 0, holds=dominated)
    rows = empirical_complexity(trs, n, "dc", budget)
    iterate = 0
    for m in range(1, n + 1):
        iterate = step(iterate)
        row = next((x for x in rows if x.size == m), None)
        value = row.value if row else 0
        r.require(f"Dc({m}) <= p^{m}(0)", value, iterate)
    return r
