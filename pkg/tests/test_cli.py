import json
import re

import pytest

from dpclab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_dp_lists_nine_pairs(capsys):
    code, out, _ = run(capsys, "dp", "--example", "Ra")
    assert code == 0
    assert len(out.strip().splitlines()) == 9


def test_pgraph_dot_for_rb_trace(capsys):
    code, out, _ = run(capsys, "pgraph", "--example", "Rb", "--trace", "traces/fig1.trace", "--format", "dot")
    assert code == 0
    assert out.startswith("digraph")
    assert len(re.findall(r"^\s+n\d+ \[label=", out, re.M)) == 5
    assert len(re.findall(r"^\s+n\d+ -> n\d+;", out, re.M)) == 2
    assert out.rstrip().endswith("}")


def test_check_progeny_rde(capsys):
    code, out, _ = run(capsys, "check", "progeny", "--example", "Rde", "--random", "200", "--seed", "1")
    assert code == 0
    assert out.count("PASS progeny") == 200


def test_check_csv_rows(capsys):
    code, out, _ = run(capsys, "check", "bounds", "--example", "Rd", "--random", "5", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "check,pass,lhs,rhs" and len(lines) == 6


def test_graph_json_schema(capsys):
    code, out, _ = run(capsys, "graph", "--example", "Rde", "--format", "json")
    data = json.loads(out)
    assert code == 0 and set(data) == {"nodes", "edges", "sccs"}
    assert set(data["sccs"][0]) == {"members", "trivial", "rank"}


def test_report_json_schema(capsys):
    code, out, _ = run(capsys, "check", "algebra", "--example", "Rebin", "--format", "json")
    data = json.loads(out)
    assert code == 0
    assert all(set(r) == {"check", "pass", "lhs", "rhs", "witness"} for r in data)


def test_failed_check_exits_one(capsys, tmp_path):
    trs = tmp_path / "loop.trs"
    trs.write_text("(VAR x) (RULES f(s(x)) -> f(x))")
    code, out, _ = run(capsys, "check", "algebra", str(trs), "--algebra", '{"f#": "x1", "f": "x1", "s": "x1", "c_e#cons": "x1+x2"}')
    assert code == 1 and "FAIL" in out


def test_usage_errors_exit_two(capsys):
    assert run(capsys, "dp")[0] == 2
    assert run(capsys, "dp", "--example", "Ra", "--bogus")[0] == 2
    assert run(capsys, "dp", "--example", "Nope")[0] == 2
    assert run(capsys, "fast", "--d", "2", "--n", "2", "--m", "4")[0] == 2


def test_parse_error_exits_two(capsys, tmp_path):
    bad = tmp_path / "bad.trs"
    bad.write_text("(VAR x y) (RULES x -> y)")
    code, _, err = run(capsys, "parse", str(bad))
    assert code == 2 and "IllFormedRule" in err
    assert len(err.strip().splitlines()) == 1


def test_two_inputs_rejected(capsys, tmp_path):
    f = tmp_path / "a.trs"
    f.write_text("(RULES a -> b)")
    assert run(capsys, "parse", str(f), "--example", "Ra")[0] == 2


@pytest.mark.parametrize("argv", [
    ["parse", "--example", "Rl", "--param", "3"],
    ["filter", "--example", "Ra"],
    ["usable", "--example", "Rebin"],
    ["derive", "--example", "Rd", "--term", "f(s(s(0)))", "--strategy", "lo"],
    ["derive", "--example", "Rb", "--strategy", "trace:fig1.trace"],
    ["ig", "--example", "Rebin", "--term", "e(0,0)"],
    ["measure", "--example", "Rde", "--max-size", "3", "--format", "csv"],
    ["simgen", "--example", "Rb"],
    ["simgen", "--k", "2", "--a", "2", "--C", "2"],
    ["simulate", "--example", "Rb"],
    ["simulate", "--example", "Rb", "--term", "f(c)"],
    ["fast", "--d", "2", "--n", "1", "--m", "1"],
])
def test_verbs_succeed(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    assert out.strip()


def test_fast_value(capsys):
    assert run(capsys, "fast", "--d", "2", "--n", "1", "--m", "1")[1].strip() == "32"


def test_filter_term(capsys):
    code, out, _ = run(capsys, "filter", "--example", "Ra", "--term", "∘(f(x,i(x)),∘(i(i(y)),z))")
    assert out.strip() == "∘(x,∘(i(i(y)),z))"


def test_simgen_emits_parsable_rules(capsys):
    _, out, _ = run(capsys, "simgen", "--example", "Rb", "--format", "json")
    assert len(json.loads(out)["rules"]) == 24


def test_check_all_passes_on_re(capsys):
    code, out, _ = run(capsys, "check", "all", "--example", "Re", "--random", "10")
    assert code == 0 and "FAIL" not in out
