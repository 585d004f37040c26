"""First-order terms, positions, rules, rewrite systems and the TRS text format.

Positions are tuples of 1-based argument indices; the root is ``()``.
On the wire they are written as dot-joined integers with the root as the
empty string.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Optional

from .errors import ArityClash, IllFormedRule, PositionOutOfRange, TrsSyntaxError

Position = tuple

MARK = "#"
FRESH_CONSTANT = "⋄"


class Term:
    __slots__ = ()

    is_var = False

    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"<{to_text(self)}>"


class Var(Term):
    __slots__ = ("name", "_hash")

    is_var = True
    size = 1
    depth = 0

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("V", name))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other or (type(other) is Var and other.name == self.name)


class App(Term):
    __slots__ = ("symbol", "args", "_hash", "size", "depth")

    def __init__(self, symbol: str, args=()):
        args = tuple(args)
        self.symbol = symbol
        self.args = args
        self._hash = hash((symbol, args))
        if args:
            self.size = 1 + sum(a.size for a in args)
            self.depth = 1 + max(a.depth for a in args)
        else:
            self.size = 1
            self.depth = 0

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if type(other) is not App or other._hash != self._hash:
            return False
        return self.symbol == other.symbol and self.args == other.args


def app(symbol: str, *args: Term) -> App:
    return App(symbol, args)


def root(t: Term) -> Optional[str]:
    """Root symbol, or None for a variable."""
    return None if t.is_var else t.symbol


# ---------------------------------------------------------------- positions

def pos_str(p: Position) -> str:
    return ".".join(str(i) for i in p)


def parse_pos(text: str) -> Position:
    text = text.strip()
    if text in ("", "ε"):
        return ()
    try:
        p = tuple(int(x) for x in text.split("."))
    except ValueError:
        raise TrsSyntaxError(f"bad position {text!r}") from None
    if any(i < 1 for i in p):
        raise TrsSyntaxError(f"bad position {text!r}")
    return p


def is_prefix(p: Position, q: Position) -> bool:
    """p <= q in the prefix order."""
    return len(p) <= len(q) and q[: len(p)] == p


def is_strict_prefix(p: Position, q: Position) -> bool:
    return len(p) < len(q) and q[: len(p)] == p


def parallel(p: Position, q: Position) -> bool:
    return not is_prefix(p, q) and not is_prefix(q, p)


def positions(t: Term) -> list:
    """All positions in preorder, which is also lexicographic order."""
    out = []

    def walk(u, p):
        out.append(p)
        if not u.is_var:
            for i, a in enumerate(u.args, 1):
                walk(a, p + (i,))

    walk(t, ())
    return out


def fun_positions(t: Term) -> list:
    return [p for p in positions(t) if not subterm_at(t, p).is_var]


def var_positions(t: Term) -> list:
    return [p for p in positions(t) if subterm_at(t, p).is_var]


def subterm_at(t: Term, p: Position) -> Term:
    u = t
    for i in p:
        if u.is_var or not 1 <= i <= len(u.args):
            raise PositionOutOfRange(f"position {pos_str(p)!r} not in {t}")
        u = u.args[i - 1]
    return u


def has_position(t: Term, p: Position) -> bool:
    u = t
    for i in p:
        if u.is_var or not 1 <= i <= len(u.args):
            return False
        u = u.args[i - 1]
    return True


def replace_at(t: Term, p: Position, u: Term) -> Term:
    if not p:
        return u
    if t.is_var or not 1 <= p[0] <= len(t.args):
        raise PositionOutOfRange(f"position {pos_str(p)!r} not in {t}")
    i = p[0] - 1
    args = list(t.args)
    args[i] = replace_at(args[i], p[1:], u)
    return App(t.symbol, args)


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if not t.is_var:
        for a in t.args:
            yield from subterms(a)


def is_subterm(u: Term, t: Term) -> bool:
    if u.size > t.size:
        return False
    return any(s == u for s in subterms(t))


def is_proper_subterm(u: Term, t: Term) -> bool:
    return u.size < t.size and is_subterm(u, t)


def variables(t: Term) -> list:
    """Variables of t in order of first occurrence."""
    seen = {}
    for s in subterms(t):
        if s.is_var:
            seen.setdefault(s.name, s)
    return list(seen.values())


def symbols(t: Term) -> dict:
    out = {}
    for s in subterms(t):
        if not s.is_var:
            out.setdefault(s.symbol, len(s.args))
    return out


# ---------------------------------------------------------------- metrics

@dataclass(frozen=True)
class Metrics:
    size: int
    depth: int
    branches: list


def branches(t: Term) -> list:
    """Root-to-leaf position chains, left to right."""
    out = []

    def walk(u, chain):
        if u.is_var or not u.args:
            out.append(chain)
            return
        for i, a in enumerate(u.args, 1):
            walk(a, chain + [chain[-1] + (i,)])

    walk(t, [()])
    return out


def term_metrics(t: Term) -> Metrics:
    return Metrics(t.size, t.depth, branches(t))


# ---------------------------------------------------------------- substitutions

def match(pattern: Term, subject: Term, subst: Optional[dict] = None) -> Optional[dict]:
    """Syntactic matching; returns the substitution as a name -> Term dict."""
    sigma = {} if subst is None else dict(subst)
    stack = [(pattern, subject)]
    while stack:
        p, s = stack.pop()
        if p.is_var:
            bound = sigma.get(p.name)
            if bound is None:
                sigma[p.name] = s
            elif bound != s:
                return None
        elif s.is_var or p.symbol != s.symbol or len(p.args) != len(s.args):
            return None
        else:
            stack.extend(zip(p.args, s.args))
    return sigma


def apply_subst(t: Term, sigma: Mapping[str, Term]) -> Term:
    if t.is_var:
        return sigma.get(t.name, t)
    if not t.args:
        return t
    return App(t.symbol, [apply_subst(a, sigma) for a in t.args])


# ---------------------------------------------------------------- marking

def mark(t: Term, defined: Iterable[str]) -> Term:
    """t-sharp: mark the root when it is a defined symbol."""
    if not t.is_var and t.symbol in defined:
        return App(t.symbol + MARK, t.args)
    return t


def unmark(t: Term) -> Term:
    if not t.is_var and t.symbol.endswith(MARK):
        return App(t.symbol[: -len(MARK)], t.args)
    return t


def is_marked_symbol(sym: str) -> bool:
    return sym.endswith(MARK)


# ---------------------------------------------------------------- rules and systems

@dataclass(frozen=True)
class Rule:
    lhs: Term
    rhs: Term

    def __post_init__(self):
        if self.lhs.is_var:
            raise IllFormedRule(f"left-hand side {self.lhs} is a variable")
        lvars = {v.name for v in variables(self.lhs)}
        extra = [v.name for v in variables(self.rhs) if v.name not in lvars]
        if extra:
            raise IllFormedRule(f"rule {self}: variables {extra} only on the right")

    def __str__(self):
        return f"{to_text(self.lhs)} -> {to_text(self.rhs)}"


def _collect_signature(terms: Iterable[Term], sig: dict) -> dict:
    for t in terms:
        for s in subterms(t):
            if s.is_var:
                continue
            n = len(s.args)
            old = sig.setdefault(s.symbol, n)
            if old != n:
                raise ArityClash(f"symbol {s.symbol} used with arities {old} and {n}")
    return sig


@dataclass(frozen=True)
class Trs:
    rules: tuple
    signature: Mapping[str, int] = field(compare=False)
    defined: frozenset = field(compare=False)
    constructors: frozenset = field(compare=False)

    @classmethod
    def from_rules(cls, rules: Iterable[Rule], extra_signature: Optional[Mapping[str, int]] = None) -> "Trs":
        rules = tuple(rules)
        sig = dict(extra_signature or {})
        _collect_signature(itertools.chain.from_iterable((r.lhs, r.rhs) for r in rules), sig)
        defined = frozenset(r.lhs.symbol for r in rules if not r.lhs.is_var)
        return cls(rules, sig, defined, frozenset(sig) - defined)

    @property
    def is_srs(self) -> bool:
        return all(n <= 1 for n in self.signature.values())

    @property
    def max_arity(self) -> int:
        return max(self.signature.values(), default=0)

    def with_signature(self, extra: Mapping[str, int]) -> "Trs":
        return Trs.from_rules(self.rules, {**self.signature, **extra})

    def __len__(self):
        return len(self.rules)

    def __str__(self):
        return print_trs(self)


def branching_constant(trs: Trs) -> int:
    return max([2] + [r.rhs.depth for r in trs.rules])


# ---------------------------------------------------------------- ground terms

def ground_signature(sig: Mapping[str, int]) -> dict:
    """Signature usable for ground enumeration; adds a fresh constant if needed."""
    out = dict(sig)
    if not any(n == 0 for n in out.values()):
        out[FRESH_CONSTANT] = 0
    return out


def ground_terms(sig: Mapping[str, int], max_size: int) -> list:
    """All ground terms of size 1..max_size, ordered by size then symbol order."""
    sig = ground_signature(sig)
    items = sorted(sig.items())

    @lru_cache(maxsize=None)
    def of_size(n):
        out = []
        for sym, k in items:
            if k == 0:
                if n == 1:
                    out.append(App(sym))
                continue
            for parts in _compositions(n - 1, k):
                for args in itertools.product(*(of_size(m) for m in parts)):
                    out.append(App(sym, args))
        return tuple(out)

    return [t for n in range(1, max_size + 1) for t in of_size(n)]


def _compositions(n, k):
    if k == 1:
        if n >= 1:
            yield (n,)
        return
    for first in range(1, n - k + 2):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


# ---------------------------------------------------------------- text format

_IDENT = r"(?:[A-Za-z0-9_+'∘#⋄]|-(?!>))+"
_TOKEN = re.compile(rf"\s*(?:(->)|([(),])|({_IDENT}))")


def _tokenize(text: str, allow_marked: bool) -> list:
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise TrsSyntaxError(f"unexpected character {text[pos:pos + 10]!r}")
        tok = m.group(m.lastindex)
        if m.lastindex == 3 and MARK in tok and not allow_marked:
            raise TrsSyntaxError(f"'#' is reserved: {tok!r}")
        toks.append(tok)
        pos = m.end()
    return toks


class _TermParser:
    def __init__(self, tokens, variables):
        self.toks = tokens
        self.i = 0
        self.vars = variables

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None:
            raise TrsSyntaxError("unexpected end of input")
        if expected is not None and tok != expected:
            raise TrsSyntaxError(f"expected {expected!r}, got {tok!r}")
        self.i += 1
        return tok

    def term(self) -> Term:
        name = self.take()
        if name in ("(", ")", ",", "->"):
            raise TrsSyntaxError(f"expected identifier, got {name!r}")
        if self.peek() == "(":
            self.take()
            args = [self.term()]
            while self.peek() == ",":
                self.take()
                args.append(self.term())
            self.take(")")
            if name in self.vars:
                raise ArityClash(f"variable {name} applied to arguments")
            return App(name, args)
        if name in self.vars:
            return Var(name)
        return App(name)


def parse_term(text: str, variables: Iterable[str] = (), allow_marked: bool = False) -> Term:
    p = _TermParser(_tokenize(text, allow_marked), set(variables))
    t = p.term()
    if p.peek() is not None:
        raise TrsSyntaxError(f"trailing input after term: {p.peek()!r}")
    _collect_signature([t], {})
    return t


def _balanced_end(text: str, start: int) -> int:
    """Index just past the paren matching text[start] == '('."""
    depth = 0
    for i in range(start, len(text)):
        c = text[i]
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
            if depth == 0:
                return i + 1
    raise TrsSyntaxError("unbalanced parentheses")


_DECL = re.compile(r"\(\s*(VAR|RULES|COMMENT)\b")


def parse_trs(text: str, allow_marked: bool = False) -> Trs:
    variables: list = []
    rule_chunks: list = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _DECL.match(text, pos)
        if not m:
            raise TrsSyntaxError(f"expected (VAR, (RULES or (COMMENT at {text[pos:pos + 20]!r}")
        end = _balanced_end(text, pos)
        body = text[m.end(): end - 1]
        kind = m.group(1)
        if kind == "VAR":
            for tok in _tokenize(body, allow_marked):
                if tok in ("(", ")", ",", "->"):
                    raise TrsSyntaxError(f"bad variable name {tok!r}")
                variables.append(tok)
        elif kind == "RULES":
            rule_chunks.append(body)
        pos = end
    rules = []
    for body in rule_chunks:
        p = _TermParser(_tokenize(body, allow_marked), set(variables))
        while p.peek() is not None:
            lhs = p.term()
            p.take("->")
            rhs = p.term()
            rules.append(Rule(lhs, rhs))
    return Trs.from_rules(rules)


def to_text(t: Term) -> str:
    if t.is_var:
        return t.name
    if not t.args:
        return t.symbol
    return f"{t.symbol}({','.join(to_text(a) for a in t.args)})"


def print_trs(trs: Trs) -> str:
    names = {}
    for r in trs.rules:
        for v in variables(r.lhs):
            names.setdefault(v.name, None)
    lines = []
    if names:
        lines.append(f"(VAR {' '.join(names)})")
    lines.append("(RULES")
    lines.extend(f"  {r}" for r in trs.rules)
    lines.append(")")
    return "\n".join(lines) + "\n"
