import itertools
from fractions import Fraction

from liaitp.arith import LinTerm, atom_holds, eq, le, make_vars
from liaitp.formula import atom_formula, mk_and

T = LinTerm.var


def conj(*atoms):
    return mk_and([atom_formula(a) for a in atoms])


def lin(coeffs, const=0):
    return LinTerm(list(coeffs), const)


def box_points(vs, box):
    for vals in itertools.product(range(-box, box + 1), repeat=len(vs)):
        yield {v: Fraction(x) for v, x in zip(vs, vals)}


def brute_sat(atoms, vs, box):
    """First integer point of the box satisfying every atom, or None."""
    for m in box_points(vs, box):
        if all(atom_holds(a, m) for a in atoms):
            return m
    return None
