"""Bundled example systems and their recorded derivations."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from .errors import BadParams, DpclabError
from .rewrite import Derivation, parse_trace
from .terms import App, Term, Trs, parse_trs

_SOURCES = {
    "Ra": """(VAR x y z w)
(RULES
  ∘(i(x),∘(y,z)) -> ∘(f(x,i(x)),∘(i(i(y)),z))
  ∘(i(x),∘(y,∘(z,w))) -> ∘(f(x,i(x)),∘(z,∘(y,w)))
  i(x) -> x
  f(x,y) -> x
)""",
    "Rb": """(VAR x)
(RULES
  f(x) -> g(c,x)
  g(x,x) -> h(x,x)
  c -> d
)""",
    "Rnonll": """(VAR x)
(RULES
  f(x,x) -> g(x)
)""",
    "Rd": """(VAR x)
(RULES
  f(s(x)) -> s(f(f(x)))
)""",
    "Re": """(VAR x)
(RULES
  d(s(x)) -> s(s(d(x)))
)""",
    "Rde": """(VAR x)
(RULES
  f(s(x)) -> s(f(f(x)))
  f(x) -> c(x,x)
)""",
    "Rebin": """(VAR x y)
(RULES
  d(0) -> 0
  d(s(x)) -> s(s(d(x)))
  e(0,x) -> x
  e(s(x),y) -> e(x,d(y))
)""",
    "Rack": """(VAR x y z w)
(RULES
  ∘(i(x),∘(y,z)) -> ∘(x,∘(i(i(y)),z))
  ∘(i(x),∘(y,∘(z,w))) -> ∘(x,∘(z,∘(y,w)))
)""",
}

TRACES = {
    "Rb": ["fig1.trace"],
    "Rd": ["ex53.trace"],
    "Re": ["ex56.trace"],
    "Rde": ["rde1.trace", "rde2.trace", "rde3.trace"],
}

NAMES = ("Ra", "Rb", "Rnonll", "Rd", "Re", "Rde", "Rebin", "Rl", "Rack")


def labelled_family_source(level: int) -> str:
    """Text of the labelled Ackermann-style family with symbols ∘1..∘level."""
    if level < 2:
        raise BadParams("the labelled family needs level >= 2")
    rules = []
    for m in range(2, level + 1):
        rules.append(f"  ∘{m}(i(x),∘{m-1}(y,z)) -> ∘{m}(x,∘{m-1}(i(i(y)),z))")
    for m in range(3, level + 1):
        rules.append(f"  ∘{m}(i(x),∘{m-1}(y,∘{m-2}(z,w))) -> ∘{m}(x,∘{m-1}(z,∘{m-2}(y,w)))")
    return "(VAR x y z w)\n(RULES\n" + "\n".join(rules) + "\n)"


def labelled_family_start(m: int, n: int) -> Term:
    """i^(2(n+1))(e) ∘_{m+2} (e ∘_{m+1} (... (e ∘_1 e)))."""
    e = App("e")
    inner = e
    for k in range(1, m + 2):
        inner = App(f"∘{k}", (e, inner))
    left = e
    for _ in range(2 * (n + 1)):
        left = App("i", (left,))
    return App(f"∘{m + 2}", (left, inner))


def example_source(name: str, param: Optional[int] = None) -> str:
    if name == "Rl":
        return labelled_family_source(2 if param is None else param)
    try:
        return _SOURCES[name]
    except KeyError:
        raise DpclabError(f"unknown example {name!r}; choose from {', '.join(NAMES)}") from None


def example(name: str, param: Optional[int] = None) -> Trs:
    return parse_trs(example_source(name, param))


def trace_text(filename: str) -> str:
    return resources.files("dpclab").joinpath("traces", filename).read_text(encoding="utf-8")


def resolve_trace(path: str) -> str:
    """Read a trace from the filesystem, falling back to the bundled traces."""
    p = Path(path)
    if p.exists():
        return p.read_text(encoding="utf-8")
    name = p.name
    try:
        return trace_text(name)
    except FileNotFoundError:
        raise DpclabError(f"trace {path!r} not found") from None


def example_trace(name: str, filename: str) -> Derivation:
    return parse_trace(trace_text(filename), example(name))


@dataclass(frozen=True)
class Example:
    name: str
    trs: Trs
    traces: tuple


def builtin_examples() -> list:
    out = []
    for name in NAMES:
        trs = example(name)
        out.append(Example(name, trs, tuple(example_trace(name, f) for f in TRACES.get(name, ()))))
    return out


# Reduction pairs shipped with the corpus: (interpretations, check mode).
ALGEBRAS = {
    "Rde": ({"f#": "x1", "f": "x1", "s": "x1+1", "c": "0", "0": "0", "c_e#cons": "x1+x2"}, "linear_exact"),
    "Rebin": ({"e#": "2**x1*(x2+1)+1", "d#": "x1", "d": "2*x1", "s": "x1+1", "0": "0",
               "c_e#cons": "x1+x2"}, "sampled"),
}

# Algebras strictly compatible with the whole system, with a dominating p.
DC_ALGEBRAS = {
    "Re": ({"s": "x1+1", "d": "3*x1+2", "0": "0", "⋄": "0"}, "3*x1+2"),
}
