import random
from fractions import Fraction

import pytest

from liaitp.arith import ContractError, LE, atom_holds, eq, le, make_vars
from liaitp.dioph import eliminate_and_tighten
from liaitp.interp import mixed_predicate
from liaitp.laz import (LazConfig, branch_lemma, check_laz, cut_or_split_lemma)
from liaitp.solver import solve_groups
from liaitp.proofs import BnbNode, CutProof, check_bnb, check_cut_proof, max_strengthen_per_branch
from liaitp.verify import gen_random_problem
from conftest import T, brute_sat, conj, lin

NO_INTERNAL = LazConfig(bnb_depth=0, bnb_leaves=0, internal_cuts=False, cut_lemmas=False)

y1, y2, y3, x1, z1 = make_vars("y1 y2 y3 x1 z1")
S = [le(T(y1) + 5 * T(y2) - 5 * T(y3) - 2 * T(x1) + 2), le(-T(y1) - 5 * T(y2) + 5 * T(y3) + 4 * T(z1) - 3),
     le(T(x1)), le(T(y1)), le(-T(y1)), le(-T(y2)), le(T(y2) - 2), le(-T(y3)), le(T(y3) - 1), le(-T(z1))]


def test_elimination_example_unsat():
    v1, v2, v3, v4 = make_vars("v1 v2 v3 v4", 10)
    E = [eq(2 * T(v1) - 5 * T(v3)), eq(T(v2) - 3 * T(v4))]
    I = [le(-2 * T(v1) - T(v2) - T(v3) + 7), le(2 * T(v1) + T(v2) + T(v3) - 8)]
    r = check_laz(E + I)
    assert r.status == "unsat" and isinstance(r.proof, CutProof)
    assert check_cut_proof(r.proof, E + I)
    assert r.proof.term.const == 3


def test_trivial_sat():
    (x,) = make_vars("x", 30)
    r = check_laz([le(T(x)), le(-T(x))])
    assert r.sat and r.model[x] == 0


def test_branch_lemmas_on_demand():
    r = check_laz(S, config=NO_INTERNAL)
    assert r.status == "lemmas"
    got = {tuple(a for a, _ in l.lits) for l in r.lemmas}
    assert (le(T(y3)), le(-T(y3) + 1)) in got
    # once y3 is decided the other fractional variable is split
    r = check_laz(S + [le(-T(y3) + 1)], config=NO_INTERNAL)
    assert {tuple(a for a, _ in l.lits) for l in r.lemmas} == {(le(T(y2)), le(-T(y2) + 1))}


def test_branch_lemma_shape():
    assert [a for a, _ in branch_lemma(y2, Fraction(1, 2)).lits] == [le(T(y2)), le(-T(y2) + 1)]
    assert [a for a, _ in branch_lemma(y2, Fraction(-7, 3)).lits] == [le(T(y2) + 3), le(-T(y2) - 2)]
    with pytest.raises(ContractError):
        branch_lemma(y2, Fraction(2))


def test_cut_from_defining_constraints():
    v1, v2, v3 = make_vars("v1 v2 v3", 10)
    S2 = [le(5 * T(v1) - 5 * T(v2) - T(v3) - 3), le(-5 * T(v1) + 5 * T(v2) + T(v3) + 2), le(T(v3)), le(-T(v3))]
    lem = cut_or_split_lemma(S2, {v1: Fraction(0), v2: Fraction(-2, 5), v3: Fraction(0)})
    assert lem.kind == "cut"
    assert {a for a, _ in lem.lits} == {le(-T(v1) + T(v2) + 1), le(T(v1) - T(v2))}


def test_mixed_cut_becomes_split():
    x, y, z = make_vars("x y z", 20)
    A = [le(T(y) - 2 * T(x)), le(2 * T(x) - T(y))]
    B = [le(T(y) - 2 * T(z) - 1), le(2 * T(z) + 1 - T(y))]
    model = {x: Fraction(0), y: Fraction(0), z: Fraction(-1, 2)}
    plain = cut_or_split_lemma(A + B, model)
    assert {a for a, _ in plain.lits} == {le(T(x) - T(z)), le(-T(x) + T(z) + 1)}
    mixed = mixed_predicate([conj(*A), conj(*B)])
    lem = cut_or_split_lemma(A + B, model, "interpolating", mixed)
    assert lem.kind == "split"
    assert not any(mixed(a.term) for a in lem.atoms())
    split_atom = [a for a, pol in lem.lits if not pol][0]
    assert split_atom in A + B


def test_no_lemma_when_defining_system_solvable():
    (x,) = make_vars("x", 40)
    assert cut_or_split_lemma([le(2 * T(x) - 1), le(-T(x))], {x: Fraction(0)}) is None


def random_system(rng, nv):
    vs = list(make_vars(" ".join(f"w{i}" for i in range(nv)), 50))
    atoms = []
    for _ in range(rng.randint(1, 5)):
        t = lin([(v, rng.randint(-6, 6)) for v in rng.sample(vs, rng.randint(1, nv))], rng.randint(-8, 8))
        atoms.append(eq(t) if rng.random() < 0.25 else le(t))
    for v in vs:
        atoms += [le(T(v) - 3), le(-T(v) - 3)]
    return vs, [a for a in atoms if not a.is_marker()]


def test_agrees_with_enumeration_and_lemmas_are_valid():
    rng = random.Random(2024)
    counts = {"sat": 0, "unsat": 0, "lemmas": 0}
    for _ in range(250):
        vs, atoms = random_system(rng, rng.randint(1, 3))
        r = check_laz(atoms)
        counts[r.status] += 1
        expected = brute_sat(atoms, vs, 3)
        if r.status == "lemmas":
            for lem in r.lemmas:
                for m in _points(vs, 3):
                    assert any(atom_holds(a, m) == pol for a, pol in lem.lits)
        elif r.status == "sat":
            assert all(atom_holds(a, r.model) for a in atoms)
            assert all(q.denominator == 1 for q in r.model.values())
        else:
            assert expected is None
            if isinstance(r.proof, BnbNode):
                assert check_bnb(r.proof, atoms)
            else:
                assert check_cut_proof(r.proof, atoms)
        out = solve_groups([conj(*atoms)])
        assert (out.status == "sat") == (expected is not None)
    assert min(counts.values()) > 0, counts


def _points(vs, box):
    from conftest import box_points
    return box_points(vs, box)


def test_interpolating_mode_single_strengthen_per_branch():
    n = 0
    for seed in range(120):
        p = gen_random_problem(seed, nvars=4, ncons=6)
        atoms = []
        for g in p.groups:
            for a in getattr(g, "args", [g]):
                if hasattr(a, "atom"):
                    atoms.append(a.atom)
        r = check_laz(atoms, "interpolating", mixed=mixed_predicate(p.groups))
        if r.status == "unsat" and isinstance(r.proof, CutProof):
            n += 1
            assert max_strengthen_per_branch(r.proof) <= 1
    assert n > 0
