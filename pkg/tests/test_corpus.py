import pytest

from dpclab.corpus import (ALGEBRAS, NAMES, TRACES, builtin_examples, example, labelled_family_start,
                           resolve_trace)
from dpclab.errors import BadParams, DpclabError
from dpclab.rewrite import derivation_height
from dpclab.terms import to_text

RULE_COUNTS = {"Ra": 4, "Rb": 3, "Rnonll": 1, "Rd": 1, "Re": 1, "Rde": 2, "Rebin": 4, "Rl": 1, "Rack": 2}


def test_every_example_parses_with_its_rule_count():
    assert {e.name: len(e.trs) for e in builtin_examples()} == RULE_COUNTS


def test_every_bundled_trace_replays():
    for e in builtin_examples():
        assert len(e.traces) == len(TRACES.get(e.name, ()))
        for d in e.traces:
            assert d.is_valid(e.trs)


def test_rde_traces_have_the_doubling_lengths():
    for n, d in enumerate([e for e in builtin_examples() if e.name == "Rde"][0].traces, start=1):
        assert len(d) == 2 ** n - 1
        assert to_text(d.initial) == "f(" + "s(" * n + "0" + ")" * (n + 1)


def test_labelled_family_levels():
    assert len(example("Rl", 2)) == 1
    assert len(example("Rl", 3)) == 3
    with pytest.raises(BadParams):
        example("Rl", 1)


def test_labelled_family_start_term():
    t = labelled_family_start(0, 1)
    assert to_text(t) == "∘2(i(i(i(i(e)))),∘1(e,e))"
    assert derivation_height(example("Rl", 2), t) >= 2


def test_unknown_example():
    with pytest.raises(DpclabError):
        example("Rzz")
    with pytest.raises(DpclabError):
        resolve_trace("nowhere/missing.trace")


def test_trace_lookup_falls_back_to_bundle():
    assert resolve_trace("traces/fig1.trace").startswith(";") or "f(f(c))" in resolve_trace("traces/fig1.trace")


def test_algebras_name_known_systems():
    assert set(ALGEBRAS) <= set(NAMES)
