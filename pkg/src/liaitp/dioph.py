"""Linear Diophantine equations: elimination with provenance.

Equations are eliminated one variable at a time.  A unit coefficient is
solved directly; otherwise the Omega-test step introduces an auxiliary
integer variable that shrinks the coefficients.  Every working equation
carries a provenance row (its expression as a rational combination of the
input equations), so an unsatisfiable system yields a certificate by
construction, and an inequality can be rewritten in terms of the input
equations it used.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import floor, gcd, lcm
from typing import Dict, List, Optional, Sequence, Tuple

from .arith import EQ, LE, Atom, ContractError, LinTerm, Var, tighten
from .proofs import Comb, CutProof, Hyp, Strengthen, farkas_chain

AUX_BASE = 10 ** 9

Prov = Dict[int, Fraction]


def _padd(p: Prov, q: Prov, k: Fraction) -> Prov:
    out = dict(p)
    for i, c in q.items():
        v = out.get(i, 0) + k * c
        if v == 0:
            out.pop(i, None)
        else:
            out[i] = v
    return out


def _pscale(p: Prov, k: Fraction) -> Prov:
    return {i: c * k for i, c in p.items()}


def _mod_hat(a: Fraction, m: int) -> Fraction:
    """Symmetric residue a - m * floor(a/m + 1/2)."""
    return a - m * floor(Fraction(a) / m + Fraction(1, 2))


@dataclass
class Step:
    var: Var
    eq_term: LinTerm      # working equation used, contains var with coefficient a
    a: Fraction
    prov: Prov

    @property
    def repl(self) -> LinTerm:
        rest = self.eq_term - LinTerm.var(self.var, self.a)
        return rest * (-1 / self.a)


@dataclass
class Subst:
    """Ordered eliminations; later steps never mention earlier variables."""

    eqs: List[Atom]
    steps: List[Step] = field(default_factory=list)
    aux: Dict[Var, LinTerm] = field(default_factory=dict)

    def items(self):
        return [(s.var, s.repl, s.prov) for s in self.steps]

    def parametric(self) -> Dict[Var, LinTerm]:
        """Eliminated variable -> term over the free parameters."""
        sol: Dict[Var, LinTerm] = {}
        for s in reversed(self.steps):
            t = s.repl
            for v in list(t.vars()):
                if v in sol:
                    t = t.subst(v, sol[v])
            sol[s.var] = t
        return sol

    def apply(self, t: LinTerm) -> Tuple[LinTerm, Prov]:
        """Rewrite t over the parameters; also return the equations used."""
        prov: Prov = {}
        for s in self.steps:
            b = t.get(s.var)
            if b:
                k = b / s.a
                t = t - s.eq_term * k
                prov = _padd(prov, s.prov, -k)
        return t, prov

    def expand(self, t: LinTerm) -> LinTerm:
        """Replace auxiliary variables by their definitions over the inputs."""
        for v in list(t.vars()):
            if v in self.aux:
                t = t.subst(v, self.aux[v])
        return t


@dataclass
class UnsatLinComb:
    """Integer combination of input equations with a gcd-violating root."""

    items: List[Tuple[int, Atom]]

    @property
    def root(self) -> LinTerm:
        total = LinTerm()
        for c, a in self.items:
            total = total + a.term * c
        return total

    @property
    def gcd(self) -> int:
        return self.root.var_gcd()

    def check(self) -> bool:
        if any(a.rel != EQ for _, a in self.items):
            return False
        if any(Fraction(c).denominator != 1 for c, _ in self.items):
            return False
        r = self.root
        if not r.is_integral():
            return False
        g = r.var_gcd()
        if g == 0:
            return r.const != 0
        return r.const.numerator % g != 0


@dataclass
class DiophResult:
    solved: bool
    subst: Optional[Subst] = None
    cert: Optional[UnsatLinComb] = None


def _int_row(prov: Prov) -> Dict[int, int]:
    m = 1
    for c in prov.values():
        m = lcm(m, Fraction(c).denominator)
    return {i: int(c * m) for i, c in prov.items()}


def solve_eqs(eqs: Sequence[Atom]) -> DiophResult:
    eqs = list(eqs)
    for a in eqs:
        if a.rel != EQ or not a.term.is_integral():
            raise ContractError("solve_eqs expects integer equalities")
    work: List[Optional[Tuple[LinTerm, Prov]]] = [(a.term, {i: Fraction(1)}) for i, a in enumerate(eqs)]
    sub = Subst(eqs)
    counter = 0

    def fail(prov):
        row = _int_row(prov)
        cert = UnsatLinComb([(c, eqs[i]) for i, c in sorted(row.items()) if c != 0])
        if not cert.check():
            raise AssertionError("internal error: bad elimination certificate")
        return DiophResult(False, cert=cert)

    while True:
        # normalize and detect conflicts
        for i, w in enumerate(work):
            if w is None:
                continue
            t, p = w
            if t.is_const():
                if t.const != 0:
                    return fail(p)
                work[i] = None
                continue
            g = t.var_gcd()
            if t.const.numerator % g:
                return fail(p)
            if g > 1:
                work[i] = (t / g, _pscale(p, Fraction(1, g)))
        live = [i for i, w in enumerate(work) if w is not None]
        if not live:
            return DiophResult(True, subst=sub)
        best = None
        for i in live:
            for v, c in work[i][0].coeffs:
                key = (abs(c), i, v)
                if best is None or key < best:
                    best = key
        _, ei, xk = best
        e_term, e_prov = work[ei]
        a = e_term.get(xk)
        if abs(a) == 1:
            step = Step(xk, e_term, a, e_prov)
            work[ei] = None
        else:
            m = int(abs(a)) + 1
            counter += 1
            sigma = Var(AUX_BASE + counter, f"_s{counter}")
            # sigma = -sum floor(a_i/m + 1/2) x_i - floor(c/m + 1/2)
            d = LinTerm([(v, -floor(c / m + Fraction(1, 2))) for v, c in e_term.coeffs],
                        -floor(e_term.const / m + Fraction(1, 2)))
            sub.aux[sigma] = sub.expand(d)
            sgn = 1 if a > 0 else -1
            delta = LinTerm([(v, _mod_hat(c, m)) for v, c in e_term.coeffs if v != xk],
                            _mod_hat(e_term.const, m))
            # delta expands back to the equation itself; x_k has coefficient -sgn
            delta = delta + LinTerm.var(sigma, -m) + LinTerm.var(xk, -sgn)
            step = Step(xk, delta, Fraction(-sgn), e_prov)
        sub.steps.append(step)
        for i in live:
            w = work[i]
            if w is None:
                continue
            t, p = w
            b = t.get(xk)
            if b:
                k = b / step.a
                work[i] = (t - step.eq_term * k, _padd(p, step.prov, -k))


@dataclass
class Tightened:
    """Result of rewriting one inequality through the equations."""

    source: Atom
    atom: Atom
    proof: CutProof
    k: int
    changed: bool


def eliminate_and_tighten(eqs: Sequence[Atom], ineqs: Sequence[Atom],
                          result: Optional[DiophResult] = None) -> List[Tightened]:
    """Inline the equations into each inequality, then tighten.

    The proof is Hyp(ineq) combined with each used equation (in order of
    first use, coefficient from provenance) followed by one Strengthen when
    rounding changes the constant.
    """
    eqs = list(eqs)
    res = result or solve_eqs(eqs)
    if not res.solved:
        raise ContractError("equations are unsatisfiable")
    sub = res.subst
    out = []
    for ineq in ineqs:
        if ineq.rel != LE:
            raise ContractError("eliminate_and_tighten expects inequalities")
        order: List[int] = []
        t = ineq.term
        prov: Prov = {}
        for s in sub.steps:
            b = t.get(s.var)
            if b:
                k = b / s.a
                t = t - s.eq_term * k
                prov = _padd(prov, s.prov, -k)
                for i in s.prov:
                    if i not in order:
                        order.append(i)
        order = [i for i in order if prov.get(i)]
        scale = 1
        for c in prov.values():
            scale = lcm(scale, Fraction(c).denominator)
        w = ineq.term * scale
        for i in order:
            w = w + eqs[i].term * (prov[i] * scale)
        if sub.expand(t) * scale != w:
            raise AssertionError("internal error: replay mismatch")
        proof: CutProof = Hyp(ineq)
        first = True
        for i in order:
            lam = prov[i] * scale
            h = Hyp(eqs[i], 1 if lam > 0 else -1)
            if first:
                proof = Comb(abs(lam), h, scale, proof)
                first = False
            else:
                proof = Comb(abs(lam), h, 1, proof)
        if first and scale != 1:
            raise AssertionError("internal error: scaling without equations")
        if w.is_const():
            out.append(Tightened(ineq, Atom(w, LE), proof, 0, bool(order)))
            continue
        tight, k = tighten(Atom(w, LE))
        if k > 0:
            proof = Strengthen(proof, w.var_gcd(), k)
        out.append(Tightened(ineq, tight, proof, k, bool(order) or k > 0))
    return out


def cert_proof(cert: UnsatLinComb) -> CutProof:
    """Cutting-plane refutation of an unsatisfiable equation certificate.

    With root R (oriented so its constant is positive) and g the gcd of its
    variable coefficients: derive R <= 0 and strengthen it to R + k <= 0,
    derive -R <= 0 from the opposite orientations, and add the two.
    """
    if not cert.check():
        raise ContractError("not a valid equation certificate")
    items = list(cert.items)
    if cert.root.const < 0:
        items = [(-c, a) for c, a in items]
    plus = farkas_chain([(abs(c), Hyp(a, 1 if c > 0 else -1)) for c, a in items])
    g = plus.term.var_gcd()
    if g == 0:
        return plus
    minus = farkas_chain([(abs(c), Hyp(a, -1 if c > 0 else 1)) for c, a in items])
    return Comb(1, Strengthen(plus, g), 1, minus)
