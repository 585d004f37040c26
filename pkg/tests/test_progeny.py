import pytest

from dpclab.corpus import example, example_trace
from dpclab.errors import ChainNotProgenyLinked, NotOnMainBranch, PositionOutOfRange, UndefinedRoot
from dpclab.progeny import (Analysis, descendants_of_step, implicit_dp_derivation, main_branches,
                            main_progenitor, main_progeny, progenies_of_derivation, progenies_of_step,
                            progenitor_graph, progenitors_of_step)
from dpclab.rewrite import Derivation, rewrite_at
from dpclab.suites import progeny_report, run_random_suite
from dpclab.terms import parse_pos, parse_term


def P(text):
    return parse_pos(text)


def rb_trace():
    return example_trace("Rb", "fig1.trace")


def test_redex_progenies_in_first_step():
    step = rb_trace().steps[0]
    assert progenies_of_step(step, P("1")) == {P("1"), P("1.1")}
    assert progenies_of_step(step, P("1.1")) == {P("1.2")}


def test_nonlinear_step_has_two_progenitors():
    trs = example("Rnonll")
    step = rewrite_at(trs, parse_term("f(0,0)"), (), 0)
    assert progenitors_of_step(step, P("1")) == {P("1"), P("2")}


def test_descendants_skip_created_positions():
    step = rb_trace().steps[0]
    assert descendants_of_step(step, P("1.1")) == {P("1.2")}
    assert descendants_of_step(step, P("")) == {P("")}


def test_progenies_over_derivations():
    d = rb_trace()
    assert progenies_of_derivation(Derivation(d.initial), P("1.1")) == {P("1.1")}
    two = Derivation(d.initial, d.steps[:2])
    assert progenies_of_derivation(two, P("1.1")) == {P("1.1"), P("1.2")}
    assert progenies_of_derivation(d, P("")) == {P("")}
    with pytest.raises(PositionOutOfRange):
        progenies_of_derivation(d, P("2"))


def test_rb_trace_main_branch_is_the_central_branch():
    assert main_branches(rb_trace()) == [(P(""), P("1"), P("1.1"))] * 4


def test_main_branch_of_empty_derivation():
    d = Derivation(parse_term("f(h(c,d))"))
    assert main_branches(d) == [(P(""), P("1"), P("1.1"))]


def test_rd_final_main_branch_is_the_full_chain():
    d = example_trace("Rd", "ex53.trace")
    final = main_branches(d)[-1]
    assert len(final) == d.final.depth + 1


def test_main_progenitors_in_rb_trace():
    d = rb_trace()
    assert main_progenitor(d, 1, 4, P("1.1")) == P("1")
    assert P("1.1") in Analysis(d).progenitors(0, 3, P("1.1"))
    assert P("1.1") not in Analysis(d).main_progenitors(0, 3, P("1.1"))
    assert main_progeny(d, 1, 4, P("1")) == {P("1"), P("1.1")}
    assert main_progeny(d, 1, 4, P("2")) == frozenset()
    with pytest.raises(NotOnMainBranch):
        main_progenitor(d, 1, 4, P("1.2"))


def nodes_of(g):
    return [(i, str(".".join(map(str, p)))) for i, p in g.nodes]


def test_figure_three_graph():
    g = progenitor_graph(rb_trace(), example("Rb"))
    assert nodes_of(g) == [(1, ""), (1, "1"), (1, "1.1"), (2, "1"), (2, "1.1")]
    assert g.edges == (((1, P("1")), (2, P("1"))), ((1, P("1")), (2, P("1.1"))))


def test_figure_four_graph_is_a_full_binary_tree():
    g = progenitor_graph(example_trace("Rd", "ex53.trace"), example("Rd"))
    assert nodes_of(g) == [(1, ""), (2, "1"), (2, "1.1"), (3, "1.1.1"), (3, "1.1.1.1"), (4, "1.1"), (4, "1.1.1")]
    assert len(g.edges) == 6
    roots = [n for n in g.nodes if not g.predecessors(n)]
    assert roots == [(1, P(""))]
    assert sorted(len(g.successors(n)) for n in g.nodes) == [0, 0, 0, 0, 2, 2, 2]


def test_chain_graph_of_re():
    g = progenitor_graph(example_trace("Re", "ex56.trace"), example("Re"))
    assert nodes_of(g) == [(1, ""), (2, "1.1"), (3, "1.1.1.1")]
    assert g.edges == (((1, P("")), (2, P("1.1"))), ((2, P("1.1")), (3, P("1.1.1.1"))))


def test_graph_serializations():
    g = progenitor_graph(rb_trace(), example("Rb"))
    js = g.to_json()
    assert js["nodes"][0] == [1, ""] and js["edges"] == [[1, 3], [1, 4]]
    dot = g.to_dot()
    assert dot.startswith("digraph") and 't2@1.1' in dot


def test_implicit_derivation_along_a_created_chain():
    d, trs = rb_trace(), example("Rb")
    imp = implicit_dp_derivation(d, trs, [(1, P("1")), (2, P("1.1")), (3, P("1.2"))])
    assert str(imp) == "f#(c) ->DP c# ->= c#"
    assert imp.dpsize == 1


def test_implicit_derivation_along_the_root():
    d, trs = rb_trace(), example("Rb")
    imp = implicit_dp_derivation(d, trs, [(i, P("")) for i in range(1, 5)])
    assert [s.kind for s in imp.steps] == ["r", "r", "r"]
    assert imp.dpsize == 0


def test_implicit_derivation_edge_cases():
    d, trs = rb_trace(), example("Rb")
    single = implicit_dp_derivation(d, trs, [(2, P("1"))])
    assert single.steps == () and single.dpsize == 0
    with pytest.raises(ChainNotProgenyLinked):
        implicit_dp_derivation(d, trs, [(1, P("1")), (2, P(""))])
    with pytest.raises(UndefinedRoot):
        implicit_dp_derivation(d, trs, [(4, P("1"))])


@pytest.mark.parametrize("name", ["Rb", "Rd", "Re", "Rde", "Rebin"])
def test_progeny_properties_on_random_derivations(name):
    trs = example(name)
    res = run_random_suite("progeny", trs, lambda d: progeny_report(trs, d), count=60, seed=11)
    assert len(res.reports) == 60
    assert res.passed, [r.inequalities for r in res.reports if not r.passed][:1]


@pytest.mark.parametrize("name,trace", [("Rb", "fig1.trace"), ("Rd", "ex53.trace"), ("Re", "ex56.trace"),
                                        ("Rde", "rde2.trace"), ("Rde", "rde3.trace")])
def test_progeny_properties_on_recorded_traces(name, trace):
    trs = example(name)
    assert progeny_report(trs, example_trace(name, trace)).passed
