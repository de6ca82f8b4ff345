"""General simplex over the rationals with Farkas explanations.

Tableau-based procedure in the style of Dutertre and de Moura: every
distinct linear form gets a slack variable, atoms become bounds, and
``check`` repairs bound violations by pivoting.  Bland's rule (smallest
index first) is used both for the leaving and the entering variable, so
the loop always terminates.  All arithmetic is exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Dict, List, Optional, Sequence, Tuple

from .arith import EQ, LE, Atom, ContractError, LinTerm, eval_term


@dataclass
class FarkasCert:
    """Signed combination of premises whose sum is a positive constant.

    Inequalities carry positive coefficients; an equality may carry a
    coefficient of either sign.
    """

    items: List[Tuple[Fraction, Atom]]
    const: Fraction

    def combination(self) -> LinTerm:
        total = LinTerm()
        for c, a in self.items:
            total = total + a.term * c
        return total

    def check(self) -> bool:
        for c, a in self.items:
            if a.rel == LE and c <= 0:
                return False
            if a.rel not in (LE, EQ) or c == 0:
                return False
        t = self.combination()
        return t.is_const() and t.const > 0 and t.const == self.const


@dataclass
class LaqResult:
    sat: bool
    model: Optional[Dict] = None
    cert: Optional[FarkasCert] = None


def _form_key(t: LinTerm):
    """Split ``t`` as h * f + c with f primitive and its leading coefficient positive."""
    den = t.denom_lcm()
    num = [(v, c * den) for v, c in t.coeffs]
    g = 0
    for _, c in num:
        g = gcd(g, int(c))
    if num[0][1] < 0:
        g = -g
    f = tuple((v, Fraction(int(c) // g)) for v, c in num)
    h = Fraction(g, den)
    return f, h


class Simplex:
    """Incremental tableau.  Bounds are trailed so ``push``/``pop`` restore them."""

    def __init__(self):
        self.names: List[object] = []        # Var for originals, key for slacks
        self.index: Dict[object, int] = {}
        self.vals: List[Fraction] = []
        self.lo: List[Optional[Tuple[Fraction, object, Fraction]]] = []
        self.hi: List[Optional[Tuple[Fraction, object, Fraction]]] = []
        self.rows: Dict[int, Dict[int, Fraction]] = {}
        self.n_orig = 0
        self.trail: List[Tuple[int, bool, object]] = []
        self.marks: List[int] = []
        self.pivots = 0

    # -- construction -------------------------------------------------
    def _new_var(self, key) -> int:
        i = len(self.names)
        self.names.append(key)
        self.index[key] = i
        self.vals.append(Fraction(0))
        self.lo.append(None)
        self.hi.append(None)
        return i

    def var(self, v) -> int:
        i = self.index.get(v)
        if i is None:
            i = self._new_var(v)
            self.n_orig += 1
        return i

    def _slack(self, f) -> int:
        key = ("slack", f)
        i = self.index.get(key)
        if i is not None:
            return i
        cols = [(self.var(v), c) for v, c in f]
        i = self._new_var(key)
        row: Dict[int, Fraction] = {}
        val = Fraction(0)
        for j, c in cols:
            val += c * self.vals[j]
            if j in self.rows:
                for k, d in self.rows[j].items():
                    row[k] = row.get(k, 0) + c * d
            else:
                row[j] = row.get(j, 0) + c
        self.rows[i] = {k: d for k, d in row.items() if d != 0}
        self.vals[i] = val
        return i

    def target(self, t: LinTerm):
        """Variable index, scale h and constant c with t = h * x + c."""
        f, h = _form_key(t)
        if len(f) == 1 and f[0][1] == 1:
            return self.var(f[0][0]), h, t.const
        return self._slack(f), h, t.const

    # -- bounds ---------------------------------------------------------
    def push(self):
        self.marks.append(len(self.trail))

    def pop(self):
        mark = self.marks.pop()
        while len(self.trail) > mark:
            i, upper, old = self.trail.pop()
            if upper:
                self.hi[i] = old
            else:
                self.lo[i] = old

    def _set_bound(self, i, upper, bound):
        self.trail.append((i, upper, self.hi[i] if upper else self.lo[i]))
        if upper:
            self.hi[i] = bound
        else:
            self.lo[i] = bound

    def assert_atom(self, atom: Atom, tag) -> Optional[List[Tuple[Fraction, object]]]:
        """Add the bounds of ``atom``.  Returns an explanation on immediate conflict.

        Each bound stores (value, tag, mult) where ``mult * atom.term``
        equals the bound expression (x - u) or (l - x).
        """
        if atom.rel not in (LE, EQ):
            raise ContractError("simplex handles only <= and = atoms")
        i, h, c = self.target(atom.term)
        val = -c / h
        # t = h*x + c, so t <= 0 reads x <= val for h > 0 and x >= val for h < 0
        dirs = [True, False] if atom.rel == EQ else [h > 0]
        for upper in dirs:
            mult = (1 / h) if upper else (-1 / h)
            conflict = self._bound(i, upper, val, tag, mult)
            if conflict:
                return conflict
        return None

    def _bound(self, i, upper, val, tag, mult):
        if upper:
            cur = self.hi[i]
            if cur is not None and cur[0] <= val:
                return None
            lo = self.lo[i]
            if lo is not None and lo[0] > val:
                return [(mult, tag), (lo[2], lo[1])]
            self._set_bound(i, True, (val, tag, mult))
            if i not in self.rows and self.vals[i] > val:
                self._update(i, val)
        else:
            cur = self.lo[i]
            if cur is not None and cur[0] >= val:
                return None
            hi = self.hi[i]
            if hi is not None and hi[0] < val:
                return [(mult, tag), (hi[2], hi[1])]
            self._set_bound(i, False, (val, tag, mult))
            if i not in self.rows and self.vals[i] < val:
                self._update(i, val)
        return None

    # -- pivoting -------------------------------------------------------
    def _update(self, j, v):
        delta = v - self.vals[j]
        self.vals[j] = v
        for b, row in self.rows.items():
            a = row.get(j)
            if a:
                self.vals[b] += a * delta

    def _pivot(self, b, j):
        row = self.rows.pop(b)
        a = row.pop(j)
        # x_j = (b - sum_k row[k] x_k) / a
        new = {k: -d / a for k, d in row.items()}
        new[b] = 1 / a
        for r, rrow in self.rows.items():
            c = rrow.pop(j, None)
            if c is None:
                continue
            for k, d in new.items():
                nv = rrow.get(k, 0) + c * d
                if nv == 0:
                    rrow.pop(k, None)
                else:
                    rrow[k] = nv
        self.rows[j] = new
        self.pivots += 1

    def check(self) -> Optional[List[Tuple[Fraction, object]]]:
        """Return None when consistent, otherwise a list of (mult, tag)."""
        while True:
            leave = None
            for b in sorted(self.rows):
                v = self.vals[b]
                lo, hi = self.lo[b], self.hi[b]
                if lo is not None and v < lo[0]:
                    leave = (b, True)
                    break
                if hi is not None and v > hi[0]:
                    leave = (b, False)
                    break
            if leave is None:
                return None
            b, increase = leave
            row = self.rows[b]
            enter = None
            for j in sorted(row):
                a = row[j]
                if (a > 0) == increase:
                    hi = self.hi[j]
                    if hi is None or self.vals[j] < hi[0]:
                        enter = j
                        break
                else:
                    lo = self.lo[j]
                    if lo is None or self.vals[j] > lo[0]:
                        enter = j
                        break
            if enter is None:
                return self._explain(b, increase)
            target = self.lo[b][0] if increase else self.hi[b][0]
            a = row[enter]
            theta = (target - self.vals[b]) / a
            self.vals[b] = target
            self.vals[enter] += theta
            for r, rrow in self.rows.items():
                if r != b:
                    c = rrow.get(enter)
                    if c:
                        self.vals[r] += c * theta
            self._pivot(b, enter)

    def _explain(self, b, increase):
        out = []
        bnd = self.lo[b] if increase else self.hi[b]
        out.append((bnd[2], bnd[1]))
        for j, a in self.rows[b].items():
            if (a > 0) == increase:
                hi = self.hi[j]
                out.append((abs(a) * hi[2], hi[1]))
            else:
                lo = self.lo[j]
                out.append((abs(a) * lo[2], lo[1]))
        return out

    def model(self) -> Dict:
        return {self.names[i]: self.vals[i] for i in range(len(self.names))
                if not isinstance(self.names[i], tuple)}


def merge_explanation(expl) -> Dict[object, Fraction]:
    acc: Dict[object, Fraction] = {}
    for mult, tag in expl:
        acc[tag] = acc.get(tag, 0) + mult
    return {t: c for t, c in acc.items() if c != 0}


def integer_coeffs(coeffs: Dict[object, Fraction]) -> Dict[object, Fraction]:
    """Scale a coefficient map to coprime integers."""
    m = 1
    for c in coeffs.values():
        m = lcm(m, c.denominator)
    scaled = {k: c * m for k, c in coeffs.items()}
    g = 0
    for c in scaled.values():
        g = gcd(g, int(c))
    if g > 1:
        scaled = {k: c / g for k, c in scaled.items()}
    return scaled


def laq_solve(atoms: Sequence[Atom]):
    """Check a list of atoms.  Returns (True, model) or (False, {index: coeff})."""
    sx = Simplex()
    for a in atoms:
        for v in a.term.vars():
            sx.var(v)
    for i, a in enumerate(atoms):
        expl = sx.assert_atom(a, i)
        if expl is not None:
            return False, integer_coeffs(merge_explanation(expl))
    expl = sx.check()
    if expl is not None:
        return False, integer_coeffs(merge_explanation(expl))
    model = sx.model()
    return True, model


def check_laq(constraints: Sequence[Atom]) -> LaqResult:
    """Decide rational consistency of normalized <= / = atoms."""
    atoms = list(constraints)
    for a in atoms:
        if a.rel not in (LE, EQ):
            raise ContractError("check_laq expects <= or = atoms")
    ok, data = laq_solve(atoms)
    if ok:
        model = {v: data.get(v, Fraction(0)) for a in atoms for v in a.term.vars()}
        return LaqResult(True, model=model)
    items = [(c, atoms[i]) for i, c in sorted(data.items())]
    cert = FarkasCert(items, Fraction(0))
    cert.const = cert.combination().const
    return LaqResult(False, cert=cert)
