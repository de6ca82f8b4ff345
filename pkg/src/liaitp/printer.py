"""SMT-LIB style printing of formulas, terms and interpolants."""
from __future__ import annotations

from fractions import Fraction

from .arith import EQ, FALSE_REL, LE, MOD, TRUE_REL, Atom, LinTerm
from .formula import And, BLit, CeilDiv, Const, ExtLe, Formula, Lit, Not, Or


def print_num(c) -> str:
    c = Fraction(c)
    if c.denominator != 1:
        s = f"(/ {abs(c.numerator)} {c.denominator})"
        return f"(- {s})" if c < 0 else s
    return f"(- {-c.numerator})" if c < 0 else str(c.numerator)


def _mono(m) -> str:
    if isinstance(m, CeilDiv):
        return f"(cdiv {print_term(m.inner)} {m.d})"
    return m.name


def print_term(t: LinTerm) -> str:
    parts = []
    for m, c in t.coeffs:
        parts.append(_mono(m) if c == 1 else f"(* {print_num(c)} {_mono(m)})")
    if t.const != 0 or not parts:
        parts.append(print_num(t.const))
    if len(parts) == 1:
        return parts[0]
    return "(+ " + " ".join(parts) + ")"


def print_atom(a: Atom) -> str:
    if a.rel == TRUE_REL:
        return "true"
    if a.rel == FALSE_REL:
        return "false"
    if a.rel == LE:
        return f"(<= {print_term(a.term)} 0)"
    if a.rel == EQ:
        return f"(= {print_term(a.term)} 0)"
    if a.rel == MOD:
        return f"((_ divisible {a.mod}) {print_term(a.term)})"
    raise ValueError(a)


def print_formula(f: Formula) -> str:
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Lit):
        return print_atom(f.atom)
    if isinstance(f, ExtLe):
        return f"(<= {print_term(f.term)} 0)"
    if isinstance(f, BLit):
        return f.var.name
    if isinstance(f, Not):
        return f"(not {print_formula(f.arg)})"
    if isinstance(f, And):
        return "(and " + " ".join(print_formula(a) for a in f.args) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(print_formula(a) for a in f.args) + ")"
    raise ValueError(f)
