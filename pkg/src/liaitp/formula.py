"""Boolean formulas over arithmetic atoms, plus ceiling-extended terms.

Extended terms reuse ``LinTerm`` with ``CeilDiv`` monomials next to plain
variables, so the usual term arithmetic works unchanged.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping

from .arith import (EQ, FALSE_REL, LE, MOD, TRUE_REL, Atom, BoolVar, ContractError,
                    LinTerm, Var, ceil_div, eval_term, fmt_term, negate_le, normalize_atom)


class CeilDiv:
    """The monomial ceil(inner / d) for a positive integer d."""

    __slots__ = ("inner", "d", "_key")

    def __init__(self, inner: LinTerm, d: int):
        if d <= 0:
            raise ContractError("ceiling divisor must be positive")
        self.inner = inner
        self.d = int(d)
        self._key = (fmt_term(inner), self.d)

    def __eq__(self, other):
        return isinstance(other, CeilDiv) and self.d == other.d and self.inner == other.inner

    def __hash__(self):
        return hash((self.inner, self.d))

    # plain variables sort before ceilings
    def __lt__(self, other):
        if isinstance(other, CeilDiv):
            return self._key < other._key
        return False

    def __gt__(self, other):
        if isinstance(other, CeilDiv):
            return self._key > other._key
        return True

    def __le__(self, other):
        return self == other or self < other

    def __ge__(self, other):
        return self == other or self > other

    def __repr__(self):
        return f"ceil(({fmt_term(self.inner)})/{self.d})"


ExtTerm = LinTerm


def has_ceil(t: LinTerm) -> bool:
    return any(isinstance(m, CeilDiv) for m, _ in t.coeffs)


def ceil_term(inner: LinTerm, d: int) -> LinTerm:
    """ceil(inner/d) as an extended term; folds constants and exact multiples."""
    if d == 1:
        return inner
    if inner.is_const():
        return LinTerm.constant(ceil_div(inner.const, d))
    return LinTerm([(CeilDiv(inner, d), 1)])


def term_symbols(t: LinTerm, out=None):
    out = set() if out is None else out
    for m, _ in t.coeffs:
        if isinstance(m, CeilDiv):
            term_symbols(m.inner, out)
        else:
            out.add(m)
    return out


def eval_ext(t: LinTerm, m: Mapping) -> Fraction:
    total = t.const
    for mono, c in t.coeffs:
        if isinstance(mono, CeilDiv):
            total += c * ceil_div(eval_ext(mono.inner, m), mono.d)
        else:
            if mono not in m:
                raise ContractError(f"variable {mono} not assigned")
            total += c * m[mono]
    return total


# ------------------------------------------------------------- formulas

class Formula:
    __slots__ = ("_hash",)

    def _key(self):
        raise NotImplementedError

    def __eq__(self, other):
        if self is other:
            return True
        return type(self) is type(other) and hash(self) == hash(other) and self._key() == other._key()

    def __hash__(self):
        h = self._hash
        if h is None:
            h = self._hash = hash((type(self).__name__, self._key()))
        return h


class Const(Formula):
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self._hash = None
        self.value = bool(value)

    def _key(self):
        return self.value

    def __repr__(self):
        return "true" if self.value else "false"


TOP = Const(True)
BOT = Const(False)


class Lit(Formula):
    """Arithmetic atom (inequality, equality or modular equality)."""

    __slots__ = ("atom",)

    def __init__(self, atom: Atom):
        self._hash = None
        self.atom = atom

    def _key(self):
        return self.atom

    def __repr__(self):
        return repr(self.atom)


class BLit(Formula):
    __slots__ = ("var",)

    def __init__(self, var: BoolVar):
        self._hash = None
        self.var = var

    def _key(self):
        return self.var

    def __repr__(self):
        return self.var.name


class ExtLe(Formula):
    """Extended-term inequality ``term <= 0`` where term may contain ceilings."""

    __slots__ = ("term",)

    def __init__(self, term: LinTerm):
        self._hash = None
        self.term = term

    def _key(self):
        return self.term

    def __repr__(self):
        return f"({fmt_term(self.term)} <= 0)"


class Not(Formula):
    __slots__ = ("arg",)

    def __init__(self, arg: Formula):
        self._hash = None
        self.arg = arg

    def _key(self):
        return self.arg

    def __repr__(self):
        return f"~{self.arg!r}"


class And(Formula):
    __slots__ = ("args",)

    def __init__(self, args: Iterable[Formula]):
        self._hash = None
        self.args = tuple(args)

    def _key(self):
        return self.args

    def __repr__(self):
        return "(" + " & ".join(map(repr, self.args)) + ")"


class Or(Formula):
    __slots__ = ("args",)

    def __init__(self, args: Iterable[Formula]):
        self._hash = None
        self.args = tuple(args)

    def _key(self):
        return self.args

    def __repr__(self):
        return "(" + " | ".join(map(repr, self.args)) + ")"


def atom_formula(a: Atom) -> Formula:
    if a.rel == TRUE_REL:
        return TOP
    if a.rel == FALSE_REL:
        return BOT
    return Lit(a)


def ext_le(t: LinTerm) -> Formula:
    """``t <= 0``; falls back to a plain atom when no ceiling occurs."""
    if has_ceil(t):
        m = t.denom_lcm()
        return ExtLe(t * m if m != 1 else t)
    return atom_formula(normalize_atom(t, "<="))


def _flatten(cls, args):
    out = []
    seen = set()
    for a in args:
        parts = a.args if isinstance(a, cls) else (a,)
        for p in parts:
            if p not in seen:
                seen.add(p)
                out.append(p)
    return out


def mk_and(*args) -> Formula:
    if len(args) == 1 and not isinstance(args[0], Formula):
        args = tuple(args[0])
    if any(a is BOT or a == BOT for a in args):
        return BOT
    items = [a for a in _flatten(And, args) if a != TOP]
    if not items:
        return TOP
    if len(items) == 1:
        return items[0]
    return And(items)


def mk_or(*args) -> Formula:
    if len(args) == 1 and not isinstance(args[0], Formula):
        args = tuple(args[0])
    if any(a == TOP for a in args):
        return TOP
    items = [a for a in _flatten(Or, args) if a != BOT]
    if not items:
        return BOT
    if len(items) == 1:
        return items[0]
    return Or(items)


def mk_not(f: Formula) -> Formula:
    if isinstance(f, Const):
        return BOT if f.value else TOP
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def nnf(f: Formula, neg: bool = False) -> Formula:
    """Push negations to the leaves using integer semantics.

    Negated inequalities flip to ``-t + 1 <= 0``; a negated equality
    becomes ``(t + 1 <= 0) | (-t + 1 <= 0)``.  Negated modular equalities
    and negated Boolean variables stay as ``Not`` leaves.
    """
    if isinstance(f, Const):
        return BOT if f.value == neg else TOP
    if isinstance(f, Not):
        return nnf(f.arg, not neg)
    if isinstance(f, (And, Or)):
        parts = [nnf(a, neg) for a in f.args]
        conj = isinstance(f, And) != neg
        return mk_and(parts) if conj else mk_or(parts)
    if isinstance(f, BLit):
        return Not(f) if neg else f
    if isinstance(f, ExtLe):
        if not neg:
            return f
        return ext_le(-f.term + 1)
    if isinstance(f, Lit):
        a = f.atom
        if not neg:
            return f
        if a.rel == LE:
            return atom_formula(negate_le(a))
        if a.rel == EQ:
            t = a.term
            return mk_or(atom_formula(normalize_atom(t + 1, "<=")),
                         atom_formula(normalize_atom(-t + 1, "<=")))
        return Not(f)
    raise ContractError(f"unsupported formula node {f!r}")


def symbols(f: Formula, out=None):
    """Set of Var / BoolVar occurring in ``f``."""
    out = set() if out is None else out
    stack = [f]
    seen = set()
    while stack:
        g = stack.pop()
        if id(g) in seen:
            continue
        seen.add(id(g))
        if isinstance(g, Lit):
            term_symbols(g.atom.term, out)
        elif isinstance(g, ExtLe):
            term_symbols(g.term, out)
        elif isinstance(g, BLit):
            out.add(g.var)
        elif isinstance(g, Not):
            stack.append(g.arg)
        elif isinstance(g, (And, Or)):
            stack.extend(g.args)
    return out


def atoms_of(f: Formula):
    out = []
    seen = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, (Lit, ExtLe, BLit)):
            if g not in seen:
                seen.add(g)
                out.append(g)
        elif isinstance(g, Not):
            stack.append(g.arg)
        elif isinstance(g, (And, Or)):
            stack.extend(reversed(g.args))
    return out


def evaluate(f: Formula, m: Mapping) -> bool:
    """Truth value under an assignment of integers (and Booleans)."""
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Lit):
        a = f.atom
        v = eval_ext(a.term, m)
        if a.rel == LE:
            return v <= 0
        if a.rel == EQ:
            return v == 0
        if a.rel == MOD:
            return v.denominator == 1 and v.numerator % a.mod == 0
        return a.rel == TRUE_REL
    if isinstance(f, ExtLe):
        return eval_ext(f.term, m) <= 0
    if isinstance(f, BLit):
        return bool(m[f.var])
    if isinstance(f, Not):
        return not evaluate(f.arg, m)
    if isinstance(f, And):
        return all(evaluate(a, m) for a in f.args)
    if isinstance(f, Or):
        return any(evaluate(a, m) for a in f.args)
    raise ContractError(f"cannot evaluate {f!r}")


def dag_size(f: Formula) -> int:
    """Number of distinct nodes, counting formula nodes, term monomials and ceilings."""
    seen = set()

    def term_nodes(t: LinTerm):
        if ("t", t) in seen:
            return
        seen.add(("t", t))
        if t.const != 0:
            seen.add(("c", t.const))
        for m, c in t.coeffs:
            seen.add(("m", m, c))
            if isinstance(m, CeilDiv):
                seen.add(("ceil", m))
                term_nodes(m.inner)
            else:
                seen.add(("v", m))

    stack = [f]
    while stack:
        g = stack.pop()
        if ("f", g) in seen:
            continue
        seen.add(("f", g))
        if isinstance(g, Lit):
            term_nodes(g.atom.term)
        elif isinstance(g, ExtLe):
            term_nodes(g.term)
        elif isinstance(g, Not):
            stack.append(g.arg)
        elif isinstance(g, (And, Or)):
            stack.extend(g.args)
    return len(seen)


def count_mod_disjuncts(f: Formula) -> int:
    """Number of top-level disjuncts that mention a modular equality."""
    parts = f.args if isinstance(f, Or) else (f,)
    n = 0
    for p in parts:
        if any(isinstance(a, Lit) and a.atom.rel == MOD for a in atoms_of(p)):
            n += 1
    return n
