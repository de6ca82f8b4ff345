import csv
import io

import pytest
from hypothesis import given, settings, strategies as st

from liaitp.arith import BoolVar, LinTerm, eq, le, make_vars, modeq
from liaitp.cli import run_cli
from liaitp.formula import (BLit, TOP, atom_formula, ceil_term, ext_le, mk_and, mk_not, mk_or,
                            symbols)
from liaitp.parser import ParseError, parse_formula, parse_problem
from liaitp.printer import print_formula
import cases
from conftest import T

INTRO = """\
(set-logic QF_LIA)
(declare-fun x () Int)
(declare-fun y () Int)
(declare-fun z () Int)
(assert (! (= (+ (* 2 x) (- y) 1) 0) :itp-group A))
(assert (! (= y (* 2 z)) :itp-group B))
(check-sat)
(get-interpolant (A))
"""

SAT = """\
(declare-fun x () Int)
(declare-fun p () Bool)
(assert (and (<= 0 x) (or p (< x 3))))
(check-sat)
"""


def test_intro_problem_structure():
    p = parse_problem(INTRO)
    assert p.names == ["A", "B"] and p.queries == [["A"]] and p.check_sat
    occ = {s.name: g for s, g in p.occurrences().items()}
    assert occ == {"x": {0}, "y": {0, 1}, "z": {1}}


def test_missing_group_uses_last_declared():
    p = parse_problem("(declare-fun x () Int)(assert (! (<= x 0) :itp-group a))(assert (>= x 1))")
    assert p.names == ["a"] and len(p.groups) == 1
    p = parse_problem("(declare-fun x () Int)(assert (! (<= x 0) :itp-group a))(assert (! (<= x 1) :itp-group b))"
                      "(assert (! (<= x 2) :itp-group a))(assert (>= x 3))")
    assert len(p.groups[1].args) == 2
    p = parse_problem("(declare-fun x () Int)(assert (<= x 0))")
    assert p.names == ["g1"]


@pytest.mark.parametrize("text, msg", [
    ("(declare-fun x () Int)\n(assert (<= (* x x) 0))", "nonlinear"),
    ("(declare-fun x () Int)\n(assert (<= (+ x q) 0))", "undeclared"),
    ("(declare-fun x () Int)\n(assert (<= (+ x 1) 0)", "unbalanced"),
])
def test_errors_have_positions(text, msg):
    with pytest.raises(ParseError) as e:
        parse_problem(text)
    assert msg in str(e.value) and e.value.line >= 1 and e.value.col >= 1


def test_operators():
    x, y = make_vars("x y")
    ints = {"x": x, "y": y}
    assert parse_formula("(< x y)", ints) == atom_formula(le(T(x) - T(y) + 1))
    assert parse_formula("(>= (* 3 x) 2)", ints) == atom_formula(le(-3 * T(x) + 2))
    f = parse_formula("(<= (ite (> x 0) x (- x)) 3)", ints)
    assert symbols(f) == {x}
    assert parse_formula("(distinct x y)", ints) == mk_not(atom_formula(eq(T(x) - T(y))))


def test_printed_forms():
    assert print_formula(cases.intro()[2]) == "((_ divisible 2) (+ (* (- 1) y) 1))"
    assert print_formula(TOP) == "true"
    assert print_formula(cases.ceiling_example()[2]) == "(<= (+ (* (- 1) y1) (* 2 (cdiv y1 2))) 0)"


XS = make_vars("x y z")
P, Q = BoolVar("p"), BoolVar("q")
INTS = {v.name: v for v in XS}
BOOLS = {"p": P, "q": Q}

coef = st.integers(-7, 7)


@st.composite
def terms(draw, depth=1):
    parts = [(v, draw(coef)) for v in XS if draw(st.booleans())]
    t = LinTerm(parts, draw(st.integers(-9, 9)))
    if depth and draw(st.booleans()):
        t = t + ceil_term(draw(terms(depth=depth - 1)), draw(st.integers(1, 5))) * draw(st.integers(-3, 3))
    return t


@st.composite
def leaves(draw):
    kind = draw(st.sampled_from(["le", "eq", "mod", "ceil", "bool"]))
    if kind == "bool":
        return BLit(draw(st.sampled_from([P, Q])))
    if kind == "ceil":
        return ext_le(draw(terms()))
    t = draw(terms(depth=0))
    if kind == "le":
        return atom_formula(le(t))
    if kind == "eq":
        return atom_formula(eq(t))
    return atom_formula(modeq(t, draw(st.integers(2, 9))))


formulas = st.recursive(
    leaves(),
    lambda sub: st.one_of(
        st.builds(mk_not, sub),
        st.lists(sub, min_size=2, max_size=3).map(mk_and),
        st.lists(sub, min_size=2, max_size=3).map(mk_or)),
    max_leaves=8)


@settings(max_examples=300, deadline=None)
@given(formulas)
def test_print_parse_round_trip(f):
    text = print_formula(f)
    assert parse_formula(text, INTS, BOOLS) == f
    assert print_formula(parse_formula(text, INTS, BOOLS)) == text


# ---------------------------------------------------------------- CLI

def run(args, capsys):
    code = run_cli(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_intro(tmp_path, capsys):
    f = tmp_path / "intro.smt2"
    f.write_text(INTRO)
    proof = tmp_path / "p.cpf"
    code, out, err = run(["solve", str(f), "--engine", "modeq", "--check", "--dump-proof", str(proof)], capsys)
    assert code == 20
    assert out.splitlines() == ["unsat", "((_ divisible 2) (+ (* (- 1) y) 1))"]
    assert "verified" in err
    code, out, _ = run(["check-proof", str(proof)], capsys)
    assert code == 0 and out.strip() == "Ok"


def test_cli_tampered_proof(tmp_path, capsys):
    f = tmp_path / "intro.smt2"
    f.write_text(INTRO)
    proof = tmp_path / "p.cpf"
    run(["solve", str(f), "--dump-proof", str(proof)], capsys)
    text = proof.read_text()
    lines = [l for l in text.splitlines() if not l.startswith("(input")]
    lines.insert(0, "(input 0 (clause))")
    (tmp_path / "bad.cpf").write_text("\n".join(lines))
    code, out, _ = run(["check-proof", str(tmp_path / "bad.cpf")], capsys)
    assert code == 1 and out.startswith("Invalid")


def test_cli_sat(tmp_path, capsys):
    f = tmp_path / "sat.smt2"
    f.write_text(SAT)
    code, out, _ = run(["solve", str(f)], capsys)
    assert code == 0 and out.strip() == "sat"


def test_cli_seq_and_brute(tmp_path, capsys):
    f = tmp_path / "chain.smt2"
    f.write_text("(declare-fun x () Int)(declare-fun y () Int)"
                 "(assert (! (= x 0) :itp-group g1))(assert (! (= x y) :itp-group g2))"
                 "(assert (! (= y 1) :itp-group g3))")
    code, out, err = run(["solve", str(f), "--seq", "--check-brute", "5", "--stats"], capsys)
    assert code == 20 and len(out.splitlines()) == 3
    assert "; checks:" in err


def test_cli_usage_errors(capsys):
    assert run_cli(["solve"]) == 2
    assert run_cli(["solve", "f", "--engine", "nope"]) == 2
    assert run_cli(["frobnicate"]) == 2
    capsys.readouterr()


def test_cli_parse_error(tmp_path, capsys):
    f = tmp_path / "bad.smt2"
    f.write_text("(declare-fun x () Int)\n(assert (<= (* x x) 0))")
    code, _, err = run(["solve", str(f)], capsys)
    assert code == 1 and "nonlinear" in err


def test_cli_bench(tmp_path, capsys):
    out = tmp_path / "b.csv"
    assert run_cli(["bench", "--seeds", "6", "--out", str(out)]) == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0] == ["seed", "verdict", "itp-size", "solve-time", "verify"]
    assert len(rows) == 7
    for r in rows[1:]:
        assert r[1] in ("sat", "unsat")
        assert (r[4] == "ok") == (r[1] == "unsat")
