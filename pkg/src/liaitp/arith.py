"""Exact linear terms and integer constraints.

Everything here is immutable.  Coefficients are ``Fraction`` so that
intermediate combinations stay exact; normalized atoms always have
integer coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Dict, Iterable, Mapping, Tuple, Union

Number = Union[int, Fraction]


class ContractError(ValueError):
    """Raised when an operation is called outside its precondition."""


def ceil_div(a: Number, b: Number) -> int:
    """ceil(a / b) computed exactly."""
    q = Fraction(a) / Fraction(b)
    return -((-q.numerator) // q.denominator)


def floor_frac(q: Number) -> int:
    q = Fraction(q)
    return q.numerator // q.denominator


@dataclass(frozen=True, order=True)
class Var:
    """Integer variable.  Ordered by ``idx`` (declaration order), then name."""

    idx: int
    name: str

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class BoolVar:
    name: str

    def __repr__(self) -> str:
        return self.name


def make_vars(names: str, start: int = 0):
    """``make_vars("x y z")`` -> tuple of Vars numbered in the given order."""
    return tuple(Var(start + i, n) for i, n in enumerate(names.split()))


class LinTerm:
    """Sparse linear term sum(c_v * v) + const in canonical form."""

    __slots__ = ("coeffs", "const", "_hash")

    def __init__(self, coeffs: Union[Mapping, Iterable, None] = None, const: Number = 0):
        if coeffs is None:
            items = ()
        else:
            if isinstance(coeffs, Mapping):
                coeffs = coeffs.items()
            acc: Dict = {}
            for v, c in coeffs:
                acc[v] = acc.get(v, 0) + c
            items = tuple(sorted((v, Fraction(c)) for v, c in acc.items() if c != 0))
        self.coeffs: Tuple[Tuple[Var, Fraction], ...] = items
        self.const = Fraction(const)
        self._hash = None

    @classmethod
    def _raw(cls, items, const):
        t = cls.__new__(cls)
        t.coeffs = items
        t.const = const
        t._hash = None
        return t

    @classmethod
    def var(cls, v, c: Number = 1) -> "LinTerm":
        return cls([(v, c)])

    @classmethod
    def constant(cls, c: Number) -> "LinTerm":
        return cls(None, c)

    def get(self, v) -> Fraction:
        for w, c in self.coeffs:
            if w == v:
                return c
        return Fraction(0)

    def as_dict(self) -> Dict:
        return dict(self.coeffs)

    def vars(self):
        return [v for v, _ in self.coeffs]

    def is_const(self) -> bool:
        return not self.coeffs

    def is_integral(self) -> bool:
        return self.const.denominator == 1 and all(c.denominator == 1 for _, c in self.coeffs)

    def var_gcd(self) -> int:
        """GCD of the variable coefficients (0 for a constant term)."""
        g = 0
        for _, c in self.coeffs:
            if c.denominator != 1:
                raise ContractError("var_gcd needs integer coefficients")
            g = gcd(g, c.numerator)
        return g

    def denom_lcm(self) -> int:
        m = self.const.denominator
        for _, c in self.coeffs:
            m = lcm(m, c.denominator)
        return m

    def __add__(self, other):
        if isinstance(other, LinTerm):
            acc = dict(self.coeffs)
            for v, c in other.coeffs:
                acc[v] = acc.get(v, 0) + c
            return LinTerm(acc, self.const + other.const)
        return LinTerm._raw(self.coeffs, self.const + other)

    __radd__ = __add__

    def __neg__(self):
        return LinTerm._raw(tuple((v, -c) for v, c in self.coeffs), -self.const)

    def __sub__(self, other):
        if isinstance(other, LinTerm):
            return self + (-other)
        return LinTerm._raw(self.coeffs, self.const - other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, k):
        k = Fraction(k)
        if k == 0:
            return LinTerm()
        return LinTerm._raw(tuple((v, c * k) for v, c in self.coeffs), self.const * k)

    __rmul__ = __mul__

    def __truediv__(self, k):
        return self * (1 / Fraction(k))

    def __eq__(self, other):
        return isinstance(other, LinTerm) and self.coeffs == other.coeffs and self.const == other.const

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.coeffs, self.const))
        return self._hash

    def subst(self, v, t: "LinTerm") -> "LinTerm":
        c = self.get(v)
        if c == 0:
            return self
        rest = LinTerm._raw(tuple((w, d) for w, d in self.coeffs if w != v), self.const)
        return rest + t * c

    def __repr__(self):
        return fmt_term(self)


def fmt_num(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def fmt_term(t: LinTerm) -> str:
    """Human-readable form such as ``2x - y + 1``."""
    parts = []
    for v, c in t.coeffs:
        mag = abs(c)
        body = str(v) if mag == 1 else f"{fmt_num(mag)}{v}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(("+ " if c > 0 else "- ") + body)
    if t.const != 0 or not parts:
        c = t.const
        if not parts:
            parts.append(fmt_num(c))
        else:
            parts.append(("+ " if c > 0 else "- ") + fmt_num(abs(c)))
    return " ".join(parts)


def lin_comb(c1: Number, t1: LinTerm, c2: Number, t2: LinTerm) -> LinTerm:
    """c1*t1 + c2*t2 with c1, c2 > 0."""
    if c1 <= 0 or c2 <= 0:
        raise ContractError("lin_comb coefficients must be positive")
    return t1 * c1 + t2 * c2


def eval_term(t: LinTerm, m: Mapping) -> Fraction:
    total = t.const
    for v, c in t.coeffs:
        if v not in m:
            raise ContractError(f"variable {v} not assigned")
        total += c * m[v]
    return total


# ---------------------------------------------------------------- atoms

LE = "le"
EQ = "eq"
MOD = "mod"
TRUE_REL = "true"
FALSE_REL = "false"


@dataclass(frozen=True)
class Atom:
    """``term <= 0``, ``term = 0`` or ``term =_mod 0`` (or a constant marker)."""

    term: LinTerm
    rel: str
    mod: int = 0

    def is_marker(self) -> bool:
        return self.rel in (TRUE_REL, FALSE_REL)

    def vars(self):
        return self.term.vars()

    def __repr__(self):
        if self.rel == TRUE_REL:
            return "true"
        if self.rel == FALSE_REL:
            return "false"
        op = {LE: "<=", EQ: "="}.get(self.rel, f"=_{self.mod}")
        return f"({fmt_term(self.term)} {op} 0)"


TRUE = Atom(LinTerm(), TRUE_REL)
FALSE = Atom(LinTerm(), FALSE_REL)


def _integerize(t: LinTerm) -> Tuple[LinTerm, int]:
    m = t.denom_lcm()
    return (t * m if m != 1 else t), m


def normalize_atom(term: LinTerm, rel: str = "<=", negated: bool = False, mod: int = 0) -> Atom:
    """Canonical integer atom for ``term rel 0``.

    rel is one of ``<=``, ``<``, ``=``, ``mod``.  Strict inequalities and
    negated inequalities use integer semantics; negated equalities are
    rejected (they are split into two inequalities at the CNF level).
    """
    t, scale = _integerize(term)
    if rel == "<":
        if negated:          # not (t < 0)  <=>  -t <= 0
            t, rel, negated = -t, "<=", False
        else:
            t, rel = t + 1, "<="
    if rel == "<=":
        if negated:
            t = -t + 1
        if t.is_const():
            return TRUE if t.const <= 0 else FALSE
        return Atom(t, LE)
    if negated:
        raise ContractError("negated equality is split at CNF level")
    if rel == "=":
        if t.is_const():
            return TRUE if t.const == 0 else FALSE
        g = gcd(t.var_gcd(), t.const.numerator)
        if t.coeffs[0][1] < 0:
            g = -g
        if g != 1:
            t = t * Fraction(1, g)
        return Atom(t, EQ)
    if rel == "mod":
        g = abs(int(mod)) * scale
        if g == 0:
            return normalize_atom(t, "=")
        # monomials with coefficients divisible by g do not matter
        t = LinTerm([(v, c) for v, c in t.coeffs if c.numerator % g], t.const)
        if t.is_const():
            return TRUE if t.const.numerator % g == 0 else FALSE
        h = gcd(t.var_gcd(), g)
        if t.const.numerator % h:
            return FALSE
        h = gcd(h, t.const.numerator)
        if h > 1:
            t, g = t * Fraction(1, h), g // h
        if g == 1:
            return TRUE
        return Atom(t, MOD, g)
    raise ContractError(f"unknown relation {rel}")


def le(term: LinTerm) -> Atom:
    return normalize_atom(term, "<=")


def eq(term: LinTerm) -> Atom:
    return normalize_atom(term, "=")


def modeq(term: LinTerm, g: int) -> Atom:
    return normalize_atom(term, "mod", mod=g)


def negate_le(a: Atom) -> Atom:
    """Integer negation of an inequality atom: not(t <= 0) is -t + 1 <= 0."""
    if a.rel != LE:
        raise ContractError("negate_le expects an inequality")
    return normalize_atom(a.term, "<=", negated=True)


def tighten(a: Atom) -> Tuple[Atom, int]:
    """Round the constant up to a multiple of the coefficient GCD."""
    if a.rel != LE or a.term.is_const():
        raise ContractError("tighten expects a non-constant inequality")
    g = a.term.var_gcd()
    c = a.term.const
    k = ceil_div(c, g) * g - c
    if k == 0:
        return a, 0
    return Atom(a.term + k, LE), int(k)


def atom_holds(a: Atom, m: Mapping) -> bool:
    if a.rel == TRUE_REL:
        return True
    if a.rel == FALSE_REL:
        return False
    v = eval_term(a.term, m)
    if a.rel == LE:
        return v <= 0
    if a.rel == EQ:
        return v == 0
    return v.denominator == 1 and v.numerator % a.mod == 0
