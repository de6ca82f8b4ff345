from fractions import Fraction

from hypothesis import given, settings, strategies as st

from liaitp.arith import atom_holds, eq, le, make_vars
from liaitp.simplex import check_laq
from conftest import T, brute_sat, lin

x, y, z = make_vars("x y z")


def test_rational_solution_found():
    r = check_laq([eq(2 * T(x) - 1)])
    assert r.sat and r.model[x] == Fraction(1, 2)


def test_farkas_certificate():
    # x + y <= 0, -x <= -1, -y <= -1
    atoms = [le(T(x) + T(y)), le(-T(x) + 1), le(-T(y) + 1)]
    r = check_laq(atoms)
    assert not r.sat
    assert r.cert.check()
    assert r.cert.const == 2
    assert sorted(c for c, _ in r.cert.items) == [1, 1, 1]


def test_equality_certificate_with_negative_coefficient():
    atoms = [eq(T(x) - T(y)), le(T(x) - T(y) + 1)]
    r = check_laq(atoms)
    assert not r.sat and r.cert.check()


coef = st.integers(-5, 5)
atom_st = st.tuples(coef, coef, coef, st.integers(-6, 6), st.sampled_from(["le", "eq"]))


def build(rows):
    out = []
    for a, b, c, d, rel in rows:
        t = lin([(x, a), (y, b), (z, c)], d)
        out.append(le(t) if rel == "le" else eq(t))
    return [a for a in out if not a.is_marker()]


@settings(max_examples=200, deadline=None)
@given(st.lists(atom_st, min_size=1, max_size=6))
def test_answers_are_certified(rows):
    atoms = build(rows)
    if not atoms:
        return
    r = check_laq(atoms)
    if r.sat:
        assert all(atom_holds(a, r.model) for a in atoms)
    else:
        assert r.cert.check()
        assert {id(a) for _, a in r.cert.items} <= {id(a) for a in atoms}
        # a rational refutation rules out every integer point too
        assert brute_sat(atoms, [x, y, z], 3) is None
