import pytest

from liaitp.arith import eq, le, make_vars, modeq
from liaitp.formula import BOT, TOP, atom_formula, mk_and, mk_not, symbols
from liaitp.interp import FreshVars
from liaitp.solver import solve_groups
from liaitp.verify import (ResourceLimit, brute_find, brute_force_check, encode_mod,
                           gen_random_problem, verify_interpolant)
import cases
from conftest import T, conj

# unsat count of seeds 0..499 at generator defaults, measured by box enumeration
UNSAT_AT_DEFAULTS = 342


def test_intro_passes_both_checks():
    A, B, I = cases.intro()
    assert verify_interpolant(A, B, I)
    assert brute_force_check(A, B, I, 8)


def test_true_when_b_is_unsat():
    x, = make_vars("x", 5)
    A, B = conj(le(T(x))), conj(le(T(x) - 1), le(-T(x) + 2))
    assert verify_interpolant(A, B, TOP)


def test_symbol_condition():
    A, B, _ = cases.intro()
    z = next(s for s in symbols(B) if s.name == "z")
    bad = conj(le(T(z) - 100))
    rep = verify_interpolant(A, B, bad)
    assert not rep and not rep.symbols_ok and rep.failed == "symbol condition"
    assert z in rep.bad_symbols


def test_wrong_interpolant_has_counterexample():
    A, B, _ = cases.intro()
    y = next(s for s in symbols(A) if s.name == "y")
    rep = verify_interpolant(A, B, conj(le(T(y))))
    assert not rep.a_implies_i and rep.counterexample is not None
    assert brute_force_check(A, B, BOT, 8).failed == "A does not imply I"


def test_consistent_pair_reported():
    x, = make_vars("x", 5)
    rep = brute_force_check(conj(le(T(x))), conj(le(-T(x))), TOP, 4)
    assert not rep and "consistent" in rep.failed


def test_box_limit():
    vs = make_vars("a b c d e f g", 100)
    f = conj(*[le(T(v)) for v in vs])
    with pytest.raises(ResourceLimit):
        brute_find(f, 20)


def test_mod_encoding_is_faithful():
    y, = make_vars("y", 5)
    for g in (2, 3, 5):
        for c in range(g):
            a = atom_formula(modeq(T(y) + c, g))
            for f in (a, mk_not(a)):
                enc = encode_mod(f, FreshVars("_k"))
                for v in range(-6, 7):
                    pin = atom_formula(eq(T(y) - v))
                    want = brute_find(mk_and(f, pin), 6) is not None
                    got = solve_groups([enc, pin]).status == "sat"
                    assert want == got


def test_ceiling_interpolant_brute_force():
    A, B, I = cases.ceiling_example()
    assert brute_force_check(A, B, I, 8)
    assert verify_interpolant(A, B, I)


def test_generator_is_deterministic():
    p1, p2 = gen_random_problem(42), gen_random_problem(42)
    assert p1.groups == p2.groups
    assert len(gen_random_problem(3, nvars=3).ints) == 3


def test_generator_shape():
    for seed in range(30):
        p = gen_random_problem(seed)
        occ = p.occurrences()
        a_local = [s for s, gs in occ.items() if gs == {0}]
        assert a_local, "A must have a local symbol"
        for v in p.ints:
            # every variable is boxed in the group where it first appears
            assert atom_formula(le(T(v) - 8)) in _conjuncts(p.groups[min(occ[v])])


def _conjuncts(f):
    return list(getattr(f, "args", [f]))


def test_unsat_count_at_defaults():
    n = sum(solve_groups(gen_random_problem(s).groups).status == "unsat" for s in range(500))
    assert n == UNSAT_AT_DEFAULTS
