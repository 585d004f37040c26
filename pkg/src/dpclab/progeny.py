"""Progenies and progenitors of positions along derivations, main branches,
implicit dependency pair derivations and progenitor graphs."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from .dp import DpProblem, dependency_pairs
from .errors import ChainNotProgenyLinked, NotOnMainBranch, PositionOutOfRange, UndefinedRoot
from .rewrite import Derivation, RewriteStep, rewrite_at
from .terms import (
    Term,
    Trs,
    branches,
    fun_positions,
    has_position,
    is_prefix,
    is_proper_subterm,
    is_strict_prefix,
    mark,
    match,
    parallel,
    pos_str,
    positions,
    subterm_at,
    var_positions,
)


def _split_at_variable(lhs: Term, q: tuple):
    """Walk q through lhs; return (prefix, rest) if q passes a variable, else None."""
    u = lhs
    for k, i in enumerate(q):
        if u.is_var:
            return q[:k], q[k:]
        u = u.args[i - 1]
    if u.is_var:
        return q, ()
    return None


def progenies_of_step(step: RewriteStep, p: tuple) -> frozenset:
    if not has_position(step.source, p):
        raise PositionOutOfRange(f"{pos_str(p)} not in {step.source}")
    redex = step.redex
    lhs, rhs = step.rule.lhs, step.rule.rhs
    if not is_prefix(redex, p):
        return frozenset([p])
    q = p[len(redex):]
    split = _split_at_variable(lhs, q)
    if split is not None:
        q1, q2 = split
        x = subterm_at(lhs, q1)
        return frozenset(redex + q3 + q2 for q3 in var_positions(rhs) if subterm_at(rhs, q3) == x)
    if q:
        u = subterm_at(lhs, q)
        return frozenset(redex + q2 for q2 in positions(rhs) if subterm_at(rhs, q2) == u)
    return frozenset(redex + q1 for q1 in fun_positions(rhs)
                     if not is_proper_subterm(subterm_at(rhs, q1), lhs))


def descendants_of_step(step: RewriteStep, p: tuple) -> frozenset:
    redex = step.redex
    if is_strict_prefix(p, redex) or parallel(p, redex):
        return frozenset([p])
    split = _split_at_variable(step.rule.lhs, p[len(redex):])
    if split is None:
        return frozenset()
    q1, q2 = split
    x = subterm_at(step.rule.lhs, q1)
    rhs = step.rule.rhs
    return frozenset(redex + q3 + q2 for q3 in var_positions(rhs) if subterm_at(rhs, q3) == x)


@dataclass(frozen=True)
class ProgenyMap:
    """Progenies of every source position of one step, and the inverse."""
    step: RewriteStep
    children: dict = field(compare=False)
    parents: dict = field(compare=False)

    @classmethod
    def of(cls, step: RewriteStep) -> "ProgenyMap":
        children = {p: progenies_of_step(step, p) for p in positions(step.source)}
        parents = {q: set() for q in positions(step.target)}
        for p, qs in children.items():
            for q in qs:
                parents[q].add(p)
        return cls(step, children, {q: frozenset(ps) for q, ps in parents.items()})


def progenitors_of_step(step: RewriteStep, q: tuple) -> frozenset:
    if not has_position(step.target, q):
        raise PositionOutOfRange(f"{pos_str(q)} not in {step.target}")
    return ProgenyMap.of(step).parents[q]


def progenies_of_derivation(d: Derivation, p: tuple) -> frozenset:
    if not has_position(d.initial, p):
        raise PositionOutOfRange(f"{pos_str(p)} not in {d.initial}")
    cur = {p}
    for step in d.steps:
        cur = {q for x in cur for q in progenies_of_step(step, x)}
    return frozenset(cur)


def progenitors_of_derivation(d: Derivation, q: tuple) -> frozenset:
    analysis = Analysis(d)
    return analysis.progenitors(0, len(d), q)


# ---------------------------------------------------------------- per-derivation analysis

class Analysis:
    """Cached progeny maps and main branches of one derivation.

    Term indices are 0-based here; step k rewrites term k into term k+1.
    """

    def __init__(self, d: Derivation):
        self.d = d
        self.terms = d.terms
        self.maps = [ProgenyMap.of(s) for s in d.steps]

    def progenies(self, i: int, j: int, p: tuple) -> frozenset:
        cur = {p}
        for k in range(i, j):
            cur = {q for x in cur for q in self.maps[k].children[x]}
        return frozenset(cur)

    def progenitors(self, i: int, j: int, q: tuple) -> frozenset:
        cur = {q}
        for k in range(j - 1, i - 1, -1):
            cur = {p for x in cur for p in self.maps[k].parents[x]}
        return frozenset(cur)

    @cached_property
    def main_branches(self) -> list:
        n = len(self.terms)
        out = [None] * n
        last = branches(self.terms[-1])
        longest = max(len(b) for b in last)
        out[-1] = next(b for b in last if len(b) == longest)
        for i in range(n - 2, -1, -1):
            nxt = out[i + 1]
            parents = self.maps[i].parents
            for b in branches(self.terms[i]):
                bs = set(b)
                if all(parents[q] & bs for q in nxt):
                    out[i] = tuple(b)
                    break
            else:
                raise AssertionError(f"no main branch for term {i}")
        return [tuple(b) for b in out]

    @cached_property
    def branch_sets(self) -> list:
        return [frozenset(b) for b in self.main_branches]

    def main_progenies(self, i: int, j: int, p: tuple) -> frozenset:
        if p not in self.branch_sets[i]:
            return frozenset()
        cur = {p}
        for k in range(i, j):
            cur = {q for x in cur for q in self.maps[k].children[x]} & self.branch_sets[k + 1]
        return frozenset(cur)

    def main_progenitors(self, i: int, j: int, q: tuple) -> frozenset:
        if q not in self.branch_sets[j]:
            return frozenset()
        cur = {q}
        for k in range(j - 1, i - 1, -1):
            cur = {p for x in cur for p in self.maps[k].parents[x]} & self.branch_sets[k]
        return frozenset(cur)

    def main_progenitor(self, i: int, j: int, q: tuple) -> tuple:
        if q not in self.branch_sets[j]:
            raise NotOnMainBranch(f"{pos_str(q)} is not on the main branch of term {j + 1}")
        s = self.main_progenitors(i, j, q)
        if len(s) != 1:
            raise AssertionError(f"main progenitor of {pos_str(q)} is not unique: {sorted(s)}")
        return next(iter(s))

    def progenitor_chain(self, j: int, q: tuple) -> list:
        """chain[k] = the main progenitor of q in term k, for k <= j."""
        chain = [None] * (j + 1)
        chain[j] = q
        for k in range(j - 1, -1, -1):
            s = self.maps[k].parents[chain[k + 1]] & self.branch_sets[k]
            if len(s) != 1:
                raise AssertionError(f"main progenitor in term {k} not unique: {sorted(s)}")
            chain[k] = next(iter(s))
        return chain


def main_branches(d: Derivation) -> list:
    return Analysis(d).main_branches


def main_progeny(d: Derivation, i: int, j: int, p: tuple) -> frozenset:
    """Main progenies in term j of position p of term i (1-based term indices)."""
    return Analysis(d).main_progenies(i - 1, j - 1, p)


def main_progenitor(d: Derivation, i: int, j: int, q: tuple) -> tuple:
    return Analysis(d).main_progenitor(i - 1, j - 1, q)


# ---------------------------------------------------------------- progenitor graph

@dataclass(frozen=True)
class ProgenitorGraph:
    nodes: tuple
    edges: tuple

    def successors(self, node) -> list:
        return [b for a, b in self.edges if a == node]

    def predecessors(self, node) -> list:
        return [a for a, b in self.edges if b == node]

    def to_json(self) -> dict:
        index = {n: k for k, n in enumerate(self.nodes)}
        return {
            "nodes": [[i, pos_str(p)] for i, p in self.nodes],
            "edges": [[index[a], index[b]] for a, b in self.edges],
        }

    def to_dot(self) -> str:
        index = {n: k for k, n in enumerate(self.nodes)}
        lines = ["digraph pg {"]
        for k, (i, p) in enumerate(self.nodes):
            lines.append(f'  n{k} [label="t{i}@{pos_str(p)}"];')
        for a, b in self.edges:
            lines.append(f"  n{index[a]} -> n{index[b]};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _node_sort_key(node):
    return (node[0], node[1])


def progenitor_graph(d: Derivation, trs: Trs, analysis: Optional[Analysis] = None) -> ProgenitorGraph:
    """Nodes are (term index, position) with 1-based term indices."""
    a = analysis or Analysis(d)
    terms = a.terms
    redexes = [s.redex for s in d.steps]
    nodes = set()
    for i, b in enumerate(a.main_branches):
        for p in b:
            u = subterm_at(terms[i], p)
            if u.is_var or u.symbol not in trs.defined:
                continue
            if i == 0 or a.maps[i - 1].parents[p] & a.branch_sets[i - 1] == {redexes[i - 1]}:
                nodes.add((i, p))
    edges = []
    for j, q in sorted(nodes):
        if j == 0:
            continue
        chain = a.progenitor_chain(j, q)
        for i in range(j - 1, -1, -1):
            if i <= j - 2 and chain[i] == redexes[i]:
                break
            if (i, chain[i]) in nodes:
                edges.append(((i + 1, chain[i]), (j + 1, q)))
    out_nodes = tuple(sorted(((i + 1, p) for i, p in nodes), key=_node_sort_key))
    return ProgenitorGraph(out_nodes, tuple(sorted(edges)))


# ---------------------------------------------------------------- implicit DP derivations

@dataclass(frozen=True)
class ImplicitStep:
    kind: str  # "dp", "r" or "eq"
    source: Term
    target: Term
    redex: Optional[tuple] = None
    rule_index: Optional[int] = None


@dataclass(frozen=True)
class ImplicitDerivation:
    initial: Term
    steps: tuple

    @property
    def dpsize(self) -> int:
        return sum(1 for s in self.steps if s.kind == "dp")

    @property
    def terms(self) -> list:
        return [self.initial] + [s.target for s in self.steps]

    def __str__(self):
        arrows = {"dp": "->DP", "r": "->R", "eq": "->="}
        out = str(self.initial)
        for s in self.steps:
            out += f" {arrows[s.kind]} {s.target}"
        return out


def _implicit_step(trs: Trs, problem: DpProblem, step: RewriteStep, p: tuple, q: tuple) -> ImplicitStep:
    s = mark(subterm_at(step.source, p), trs.defined)
    t = mark(subterm_at(step.target, q), trs.defined)
    redex = step.redex
    if p == redex:
        for k, pair in enumerate(problem.pairs):
            sigma = match(pair.lhs, s)
            if sigma is not None and match(pair.rhs, t, dict(sigma)) is not None:
                return ImplicitStep("dp", s, t, (), k)
        raise ChainNotProgenyLinked(f"no dependency pair rewrites {s} to {t}")
    if is_strict_prefix(p, redex):
        rel = redex[len(p):]
        st = rewrite_at(trs, s, rel, step.rule_index)
        if st is None or st.target != t:
            raise ChainNotProgenyLinked(f"{s} does not rewrite to {t} at {pos_str(rel)}")
        return ImplicitStep("r", s, t, rel, step.rule_index)
    if s != t:
        raise ChainNotProgenyLinked(f"expected equal terms, got {s} and {t}")
    return ImplicitStep("eq", s, t)


def implicit_dp_derivation(d: Derivation, trs: Trs, chain: list,
                           problem: Optional[DpProblem] = None) -> ImplicitDerivation:
    """chain: list of (term index, position), 1-based term indices, consecutive."""
    if not chain:
        raise ChainNotProgenyLinked("empty chain")
    problem = problem or dependency_pairs(trs)
    terms = d.terms
    for i, p in chain:
        if not 1 <= i <= len(terms) or not has_position(terms[i - 1], p):
            raise PositionOutOfRange(f"t{i}@{pos_str(p)}")
        u = subterm_at(terms[i - 1], p)
        if u.is_var or u.symbol not in trs.defined:
            raise UndefinedRoot(f"root of t{i}@{pos_str(p)} is not defined")
    steps = []
    for (i, p), (j, q) in zip(chain, chain[1:]):
        if j != i + 1:
            raise ChainNotProgenyLinked(f"chain terms t{i}, t{j} are not consecutive")
        step = d.steps[i - 1]
        if q not in progenies_of_step(step, p):
            raise ChainNotProgenyLinked(f"{pos_str(q)} is not a progeny of {pos_str(p)} in step {i}")
        steps.append(_implicit_step(trs, problem, step, p, q))
    i0, p0 = chain[0]
    return ImplicitDerivation(mark(subterm_at(terms[i0 - 1], p0), trs.defined), tuple(steps))
