from fractions import Fraction

from hypothesis import given, settings, strategies as st

from liaitp.arith import EQ, atom_holds, eq, le, make_vars
from liaitp.dioph import cert_proof, eliminate_and_tighten, solve_eqs
from liaitp.proofs import Comb, Hyp, Strengthen, check_cut_proof
from conftest import T, brute_sat, lin

v1, v2, v3, v4 = make_vars("v1 v2 v3 v4", 1)


def test_inconsistent_equalities_certificate():
    y1, y2, y3, x1, x2, z1 = make_vars("y1 y2 y3 x1 x2 z1", 10)
    eqs = [eq(-T(y1) - T(y2) - 4 * T(y3) + T(x1) + 2), eq(-T(y3) - T(x1) + T(x2)),
           eq(-T(x1) - 2 * T(x2) + 1), eq(7 * T(y1) + 12 * T(y2) + 31 * T(y3) + 10 * T(z1) - 17)]
    r = solve_eqs(eqs)
    assert not r.solved and r.cert.check()
    # stored atoms have a positive leading coefficient, so A-coefficients appear negated
    assert [abs(c) for c, _ in r.cert.items] == [7, 3, 4, 1]
    assert r.cert.root == 5 * T(y2) - 5 * T(x2) + 10 * T(z1) + 1
    assert r.cert.gcd == 5
    assert check_cut_proof(cert_proof(r.cert), eqs)


def test_root_of_two_equations():
    r = solve_eqs([eq(-5 * T(v1) + 5 * T(v2) + T(v3) + 2), eq(T(v3))])
    assert not r.solved
    root = r.cert.root
    assert root == -5 * T(v1) + 5 * T(v2) + 2 or root == 5 * T(v1) - 5 * T(v2) - 2


def test_trivial_substitution():
    r = solve_eqs([eq(T(v1) - T(v2))])
    assert r.solved and r.subst.parametric() == {v1: T(v2)}


def test_elimination_then_tightening():
    E = [eq(2 * T(v1) - 5 * T(v3)), eq(T(v2) - 3 * T(v4))]
    I = [le(-2 * T(v1) - T(v2) - T(v3) + 7), le(2 * T(v1) + T(v2) + T(v3) - 8)]
    t1, t2 = eliminate_and_tighten(E, I)
    assert t1.atom == le(-3 * T(v4) - 12 * T(v1) + 24 * T(v3) + 9)
    assert t2.atom == le(3 * T(v4) + 12 * T(v1) - 24 * T(v3) - 6)
    for t in (t1, t2):
        assert t.k == 2 and isinstance(t.proof, Strengthen) and t.proof.d == 3
        assert t.proof.p.term == t.atom.term - 2
        assert check_cut_proof(t.proof, E + I, refutation=False)
    # the two tightened atoms refute each other
    assert (t1.atom.term + t2.atom.term).const == 3


def test_no_equations_only_tightens():
    (t,) = eliminate_and_tighten([], [le(2 * T(v1) + 1)])
    assert t.k == 1 and isinstance(t.proof, Strengthen) and isinstance(t.proof.p, Hyp)


def test_direct_substitution_without_rounding():
    x, y, z = make_vars("x y z", 20)
    (t,) = eliminate_and_tighten([eq(T(x) - 2 * T(y))], [le(T(x) + T(z))])
    assert t.atom == le(2 * T(y) + T(z)) and t.k == 0
    assert isinstance(t.proof, Comb)


coef = st.integers(-6, 6)


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(coef, coef, coef, st.integers(-8, 8)), min_size=1, max_size=3))
def test_agrees_with_enumeration(rows):
    vs = [v1, v2, v3]
    eqs = [eq(lin(zip(vs, r[:3]), r[3])) for r in rows]
    eqs = [a for a in eqs if a.rel == EQ]
    if not eqs:
        return
    r = solve_eqs(eqs)
    if r.solved:
        sol = r.subst.parametric()
        for a in eqs:
            t = a.term
            for v, s in sol.items():
                t = t.subst(v, s)
            assert r.subst.expand(t).is_const() and r.subst.expand(t).const == 0
        # parameters at zero give an integer solution
        point = {v: Fraction(0) for v in vs}
        for v, s in sol.items():
            if v in point:
                val = s.const
                assert val.denominator == 1
                point[v] = val
        assert all(atom_holds(a, point) for a in eqs)
    else:
        assert r.cert.check()
        assert brute_sat(eqs, vs, 4) is None
