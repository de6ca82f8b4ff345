"""Interpolant extraction.

Theory-level engines work on one T-lemma at a time: the conflict set is
split into an A part and a B part and the cutting-plane proof is annotated
bottom-up.  ``bool_combine`` then stitches the per-lemma interpolants into
an interpolant for the whole formula along the resolution refutation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .arith import (EQ, LE, Atom, BoolVar, ContractError, LinTerm, Var, ceil_div, eq, le,
                    modeq)
from .cnf import AtomTable, CnfFormula, TseitinVar
from .dioph import UnsatLinComb, cert_proof
from .formula import (BOT, TOP, BLit, CeilDiv, ExtLe, Formula, Lit, And, Or, Not, Const,
                      atom_formula, ceil_term, ext_le, has_ceil, mk_and, mk_not, mk_or, symbols,
                      term_symbols)
from .proofs import (Comb, CutProof, Division, Hyp, ResLeaf, ResNode, Strengthen,
                     UnsupportedProof, res_walk, walk)


@dataclass(frozen=True)
class Partition:
    """Symbol sets of the two sides."""

    a_syms: frozenset
    b_syms: frozenset

    def a_local(self, s) -> bool:
        return s not in self.b_syms

    def common(self, s) -> bool:
        return s in self.a_syms and s in self.b_syms

    def common_term(self, t: LinTerm) -> bool:
        return all(self.common(s) for s in term_symbols(t))


def lemma_partition(a_atoms: Iterable[Atom], b_atoms: Iterable[Atom]) -> Partition:
    a = set()
    b = set()
    for x in a_atoms:
        term_symbols(x.term, a)
    for x in b_atoms:
        term_symbols(x.term, b)
    return Partition(frozenset(a), frozenset(b))


def _split_local(t: LinTerm, part: Partition):
    """(A-local part, rest) of an extended term."""
    loc = [(v, c) for v, c in t.coeffs if isinstance(v, Var) and part.a_local(v)]
    rest = t - LinTerm(loc)
    return LinTerm(loc), rest


def _exists_local(t: LinTerm, part: Partition) -> Atom:
    """exists (A-local x). t = 0, as a modular equality over the rest."""
    loc, rest = _split_local(t, part)
    g = 0
    for _, c in loc.coeffs:
        if Fraction(c).denominator != 1:
            raise UnsupportedProof("rational coefficient on a local variable")
        g = gcd(g, int(c))
    return modeq(rest, g) if g else eq(rest)


# --------------------------------------------------------- equalities

def itp_equalities(cert: UnsatLinComb, a_side: Iterable[Atom], part: Optional[Partition] = None) -> Formula:
    """Interpolant from an unsatisfiable integer combination of equalities.

    The A-restricted combination is ``common + sum b_j x_j + c`` with x_j
    A-local; the result is ``common + c =_g 0`` with g the gcd of the b_j.
    """
    if not cert.check():
        raise ContractError("not a valid equation certificate")
    a_side = set(a_side)
    b_side = [a for _, a in cert.items if a not in a_side]
    if part is None:
        part = lemma_partition([a for _, a in cert.items if a in a_side], b_side)
    comb = LinTerm()
    for c, a in cert.items:
        if a in a_side:
            comb = comb + a.term * c
    return atom_formula(_exists_local(comb, part))


# ------------------------------------------------------ modular engine

Pair = Tuple[LinTerm, Tuple[Atom, ...]]


def _conj(e1, e2):
    out = list(e1)
    for a in e2:
        if a not in out:
            out.append(a)
    return tuple(out)


@dataclass
class ModEqTrace:
    """Bookkeeping exposed for tests: which Strengthen nodes used the conditional rule."""

    conditional: int = 0
    plain: int = 0
    pairs: Dict[int, List[Pair]] = field(default_factory=dict)


def _side_of(n: Hyp, a_hyps, b_hyps) -> str:
    if n.hyp in b_hyps:
        return "B"
    if n.hyp in a_hyps:
        return "A"
    raise ContractError(f"hypothesis {n.hyp!r} is in neither side")


def annotate_modeq(p: CutProof, a_hyps: Iterable[Atom], b_hyps: Iterable[Atom],
                   part: Optional[Partition] = None, conditional: bool = True,
                   trace: Optional[ModEqTrace] = None) -> Formula:
    """Annotate with sets of <(t_i <= 0), E_i> pairs; return the root disjunction."""
    a_hyps, b_hyps = set(a_hyps), set(b_hyps)
    if part is None:
        part = lemma_partition(a_hyps - b_hyps, b_hyps)
    trace = trace if trace is not None else ModEqTrace()
    ann: Dict[int, List[Pair]] = {}
    for n in walk(p):
        if isinstance(n, Hyp):
            side = _side_of(n, a_hyps, b_hyps)
            ann[id(n)] = [(n.term, ())] if side == "A" else [(LinTerm(), ())]
        elif isinstance(n, Comb):
            out: List[Pair] = []
            for t1, e1 in ann[id(n.p1)]:
                for t2, e2 in ann[id(n.p2)]:
                    pr = (t1 * n.c1 + t2 * n.c2, _conj(e1, e2))
                    if pr not in out:
                        out.append(pr)
            ann[id(n)] = out
        elif isinstance(n, (Strengthen, Division)):
            prem = ann[id(n.p)]
            if len(prem) != 1 or prem[0][1]:
                raise UnsupportedProof("more than one strengthening on a proof branch")
            tp = prem[0][0]
            base = n.p.term
            d = n.d
            k = int(ceil_div(base.const, d) * d - base.const)
            stronger = base + k
            pb = base - tp           # the B combination above this node
            if conditional and k > 0 and part.common_term(stronger) and part.common_term(pb):
                trace.conditional += 1
                negp = -pb + 1
                pairs = [(negp, (le(negp),)), (stronger, ())]
            else:
                trace.plain += 1
                pairs = [(tp + j, (_exists_local(tp + j, part),)) for j in range(k)]
                pairs.append((tp + k, ()))
            if isinstance(n, Division):
                pairs = [(t / d, e) for t, e in pairs]
            ann[id(n)] = pairs
        else:
            raise ContractError(f"unknown proof node {n!r}")
    trace.pairs = ann
    return modeq_formula(ann[id(p)])


def modeq_formula(pairs: Sequence[Pair]) -> Formula:
    """Disjunction of (t_i <= 0) & E_i; contradictory disjuncts are dropped."""
    disj = []
    for t, e in pairs:
        if t.is_const() and t.const > 0:
            continue
        disj.append(mk_and([atom_formula(le(t))] + [atom_formula(a) for a in e]))
    return mk_or(disj)


# ------------------------------------------------------ ceiling engine

def annotate_ceil(p: CutProof, a_hyps: Iterable[Atom], b_hyps: Iterable[Atom],
                  part: Optional[Partition] = None) -> Formula:
    """Annotate with one extended inequality per node; return the root one.

    Strengthen(q, d) is annotated as Division(q, d) scaled back by d.
    """
    a_hyps, b_hyps = set(a_hyps), set(b_hyps)
    if part is None:
        part = lemma_partition(a_hyps - b_hyps, b_hyps)
    return ext_le(ceil_annotation(p, a_hyps, b_hyps, part)[id(p)])


def ceil_annotation(p: CutProof, a_hyps, b_hyps, part: Partition) -> Dict[int, LinTerm]:
    ann: Dict[int, LinTerm] = {}
    for n in walk(p):
        if isinstance(n, Hyp):
            side = _side_of(n, a_hyps, b_hyps)
            ann[id(n)] = n.term if side == "A" else LinTerm()
        elif isinstance(n, Comb):
            ann[id(n)] = ann[id(n.p1)] * n.c1 + ann[id(n.p2)] * n.c2
        elif isinstance(n, (Strengthen, Division)):
            a = ann[id(n.p)]
            loc, rest = _split_local(a, part)
            ploc, _ = _split_local(n.p.term, part)
            if loc != ploc:
                raise AssertionError("internal error: A-local coefficients diverged")
            if any(Fraction(c).denominator != 1 for _, c in rest.coeffs) or Fraction(rest.const).denominator != 1:
                raise UnsupportedProof("ceiling over a non-integral term")
            divided = loc / n.d + ceil_term(rest, n.d)
            ann[id(n)] = divided * n.d if isinstance(n, Strengthen) else divided
        else:
            raise ContractError(f"unknown proof node {n!r}")
    return ann


# ----------------------------------------------- Boolean combination

class ItpContext:
    """Which atoms and symbols belong to the B side for one cut.

    Atoms that occur in the input are classified by occurrence; atoms
    introduced by lemmas are classified by their symbols, with AB-common
    atoms going to B.
    """

    def __init__(self, cnf: CnfFormula, groups: Sequence[Formula], b_groups: Iterable[int],
                 trace: Optional[ModEqTrace] = None):
        self.cnf = cnf
        self.trace = trace
        self.table: AtomTable = cnf.table
        self.b_groups = set(b_groups)
        a_syms, b_syms = set(), set()
        for i, f in enumerate(groups):
            symbols(f, b_syms if i in self.b_groups else a_syms)
        self.part = Partition(frozenset(a_syms), frozenset(b_syms))
        self.occ_a, self.occ_b = set(), set()
        for c in cnf.clauses:
            dst = self.occ_b if c.origin.group in self.b_groups else self.occ_a
            for l in c.lits:
                dst.add(abs(l))
        self._memo: Dict[int, bool] = {}

    def in_b(self, i: int) -> bool:
        i = abs(i)
        r = self._memo.get(i)
        if r is not None:
            return r
        k = self.table.key(i)
        if isinstance(k, TseitinVar):
            r = k.group in self.b_groups
        elif i in self.occ_b:
            r = True
        elif i in self.occ_a:
            r = False
        elif isinstance(k, Atom):
            syms = term_symbols(k.term)
            if not syms <= self.part.b_syms and not syms <= self.part.a_syms:
                raise ContractError(f"lemma atom {k!r} mixes A-local and B-local symbols")
            r = syms <= self.part.b_syms
        else:
            r = k in self.part.b_syms
        self._memo[i] = r
        return r

    def lit_formula(self, lit: int) -> Formula:
        k = self.table.key(lit)
        if isinstance(k, Atom):
            f = atom_formula(k)
        elif isinstance(k, BoolVar):
            f = BLit(k)
        else:
            raise ContractError("Tseitin variable in an interpolant")
        return mk_not(f) if lit < 0 else f


def lemma_interpolant(leaf: ResLeaf, ctx: ItpContext, engine: str) -> Formula:
    """Interpolant of (eta minus B, eta restricted to B) for a T-lemma leaf."""
    o = leaf.origin
    a_part, b_part = [], []
    for l in leaf.clause:
        c = ctx.table.constraint(-l)
        if c is None:
            raise ContractError("T-lemma literal without arithmetic meaning")
        (b_part if ctx.in_b(l) else a_part).append(c)
    b_set = set(b_part)
    a_set = set(a_part) - b_set
    if not b_set:
        return BOT
    if not a_set:
        return TOP
    # globally shared symbols stay shared even when the B side of this
    # lemma does not mention them
    lp = lemma_partition(a_set, b_set)
    part = Partition(lp.a_syms | (lp.b_syms & ctx.part.a_syms), lp.b_syms | (lp.a_syms & ctx.part.b_syms))
    if engine == "modeq" and o.cert is not None:
        return itp_equalities(o.cert, a_set, part)
    proof = o.proof
    if not isinstance(proof, CutProof):
        raise ContractError("T-lemma leaf without a cutting-plane proof")
    if engine == "modeq":
        return annotate_modeq(proof, a_set, b_set, part, trace=ctx.trace)
    if engine == "ceil":
        return annotate_ceil(proof, a_set, b_set, part)
    raise ContractError(f"unknown engine {engine}")


def bool_combine(root, ctx: ItpContext, lemma_itp: Optional[Callable] = None,
                 engine: str = "ceil") -> Formula:
    """Propagate partial interpolants along the resolution refutation."""
    if lemma_itp is None:
        def lemma_itp(leaf):
            return lemma_interpolant(leaf, ctx, engine)
    memo: Dict[int, Formula] = {}
    for n in res_walk(root):
        if isinstance(n, ResLeaf):
            o = n.origin
            if o is None:
                raise ContractError("leaf without origin")
            if o.kind == "group":
                if o.group in ctx.b_groups:
                    memo[id(n)] = TOP
                else:
                    memo[id(n)] = mk_or([ctx.lit_formula(l) for l in n.clause if ctx.in_b(l)])
            elif o.kind == "bnb":
                if all(ctx.in_b(l) for l in n.clause):
                    memo[id(n)] = TOP
                else:
                    memo[id(n)] = mk_or([ctx.lit_formula(l) for l in n.clause if ctx.in_b(l)])
            elif o.kind == "tlemma":
                memo[id(n)] = lemma_itp(n)
            else:
                raise ContractError(f"unknown origin {o.kind}")
        else:
            l, r = memo[id(n.left)], memo[id(n.right)]
            memo[id(n)] = mk_and(l, r) if ctx.in_b(n.pivot) else mk_or(l, r)
    return memo[id(root)]


def interpolant(root, cnf: CnfFormula, groups: Sequence[Formula], n_a: int,
                engine: str = "ceil", trace: Optional[ModEqTrace] = None) -> Formula:
    """Interpolant for (groups[:n_a], groups[n_a:])."""
    ctx = ItpContext(cnf, groups, range(n_a, len(groups)), trace)
    return bool_combine(root, ctx, engine=engine)


def sequence_interpolants(root, cnf: CnfFormula, groups: Sequence[Formula],
                          engine: str = "ceil") -> List[Formula]:
    """I_1 .. I_{n-1} for the prefix partitions, all from the same proof."""
    if root is None:
        raise ContractError("no refutation: the groups are satisfiable")
    return [interpolant(root, cnf, groups, i, engine) for i in range(1, len(groups))]


def mixed_predicate(groups: Sequence[Formula], cuts: Optional[Sequence[int]] = None):
    """Term predicate: mixes A-local and B-local symbols for some prefix cut."""
    n = len(groups)
    cuts = list(cuts) if cuts is not None else list(range(1, n))
    first: Dict[object, int] = {}
    last: Dict[object, int] = {}
    for i, f in enumerate(groups):
        for s in symbols(f):
            first.setdefault(s, i)
            last[s] = i

    def mixed(t: LinTerm) -> bool:
        syms = [s for s in term_symbols(t) if s in first]
        for c in cuts:
            a_loc = any(last[s] < c for s in syms)
            b_loc = any(first[s] >= c for s in syms)
            if a_loc and b_loc:
                return True
        return False

    return mixed


# ------------------------------------------------- ceiling elimination

@dataclass
class CeilAbstraction:
    formula: Formula                      # ceilings replaced by fresh variables
    defs: List[Atom]                      # defining constraints of the fresh variables
    fresh: Dict[CeilDiv, Var]


class FreshVars:
    def __init__(self, prefix: str, start: int = 2 * 10 ** 9):
        self.prefix = prefix
        self.n = start
        self.count = 0

    def new(self) -> Var:
        self.n += 1
        self.count += 1
        return Var(self.n, f"{self.prefix}{self.count}")


def abstract_ceilings(f: Formula, fresh: Optional[FreshVars] = None,
                      table: Optional[Dict[CeilDiv, Var]] = None) -> CeilAbstraction:
    """Replace every ceil(t/d) (innermost first) by a fresh x with d*x - d < t <= d*x."""
    fresh = fresh or FreshVars("_c")
    table = {} if table is None else table
    defs: List[Atom] = []

    def term(t: LinTerm) -> LinTerm:
        out = LinTerm.constant(t.const)
        for m, c in t.coeffs:
            if isinstance(m, CeilDiv):
                inner = term(m.inner)
                key = CeilDiv(inner, m.d)
                if key not in table:
                    if not inner.is_integral():
                        raise ContractError("ceiling over a non-integral term")
                    x = fresh.new()
                    table[key] = x
                    xt = LinTerm.var(x, m.d)
                    defs.append(le(inner - xt))
                    defs.append(le(xt - inner - m.d + 1))
                out = out + LinTerm.var(table[key], c)
            else:
                out = out + LinTerm.var(m, c)
        return out

    def go(g: Formula) -> Formula:
        if isinstance(g, ExtLe):
            return atom_formula(le(term(g.term)))
        if isinstance(g, Lit):
            if has_ceil(g.atom.term):
                a = g.atom
                return atom_formula(Atom(term(a.term), a.rel, a.mod))
            return g
        if isinstance(g, Not):
            return mk_not(go(g.arg))
        if isinstance(g, And):
            return mk_and([go(a) for a in g.args])
        if isinstance(g, Or):
            return mk_or([go(a) for a in g.args])
        return g

    return CeilAbstraction(go(f), defs, table)


def eliminate_ceilings(f: Formula, fresh: Optional[FreshVars] = None):
    """Ceiling-free equisatisfiable formula and the fresh-variable map."""
    ab = abstract_ceilings(f, fresh)
    return mk_and([ab.formula] + [atom_formula(a) for a in ab.defs]), ab.fresh
