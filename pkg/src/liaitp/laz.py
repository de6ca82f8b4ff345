"""Layered LA(Z) theory solver.

Order of the layers: rational relaxation, equality elimination with
tightening, cuts derived from the defining constraints of the current
vertex, a small internal branch and bound, and finally lemmas handed back
to the SAT engine (cuts from proofs, defining-constraint splits, branch
lemmas).  Every unsatisfiable answer carries a proof over the input atoms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import floor, lcm
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .arith import EQ, LE, Atom, ContractError, LinTerm, ceil_div, eq, eval_term, le, negate_le, tighten
from .dioph import UnsatLinComb, cert_proof, eliminate_and_tighten, solve_eqs
from .proofs import (BnbLeaf, BnbNode, Comb, CutProof, Hyp, Strengthen, bnb_hyps, farkas_chain,
                     hyps_of)
from .simplex import laq_solve


@dataclass
class LazConfig:
    bnb_depth: int = 2
    bnb_leaves: int = 16
    internal_cuts: bool = True
    cut_rounds: int = 8
    cut_lemmas: bool = True


@dataclass
class Lemma:
    """Valid clause given as (atom, polarity) pairs."""

    kind: str                      # branch | cut | split
    lits: List[Tuple[Atom, bool]]

    def key(self):
        return (self.kind, frozenset(self.lits))

    def atoms(self):
        return [a for a, _ in self.lits]


@dataclass
class LazResult:
    status: str                    # sat | unsat | lemmas
    model: Optional[Dict] = None
    conflict: Optional[List[Atom]] = None
    proof: object = None           # CutProof or BnbNode
    cert: Optional[UnsatLinComb] = None
    lemmas: List[Lemma] = field(default_factory=list)

    @property
    def sat(self):
        return self.status == "sat"


@dataclass
class LazStats:
    checks: int = 0
    tightened: int = 0
    internal_cuts: int = 0
    bnb_nodes: int = 0
    branch_lemmas: int = 0
    cut_lemmas: int = 0
    split_lemmas: int = 0
    eq_conflicts: int = 0

    def as_dict(self):
        return dict(self.__dict__)


class _Item:
    """A working constraint together with its derivation from the inputs."""

    __slots__ = ("atom", "pos", "neg")

    def __init__(self, atom: Atom, proof: Optional[CutProof] = None):
        self.atom = atom
        if proof is None:
            self.pos = Hyp(atom)
            self.neg = Hyp(atom, -1) if atom.rel == EQ else None
        else:
            self.pos, self.neg = proof, None

    def leaf(self, coeff: Fraction):
        if coeff < 0:
            if self.neg is None:
                raise AssertionError("negative multiplier on an inequality")
            return -coeff, self.neg
        return coeff, self.pos


def _refutation(items: Sequence[_Item], coeffs: Dict[int, Fraction]) -> CutProof:
    return farkas_chain([items[i].leaf(c) for i, c in sorted(coeffs.items())])


def _laq(items: Sequence[_Item]):
    return laq_solve([it.atom for it in items])


def is_integral_model(model: Dict, vars_) -> bool:
    return all(Fraction(model.get(v, 0)).denominator == 1 for v in vars_)


def _frac_dist(q: Fraction) -> Fraction:
    f = q - floor(q)
    return min(f, 1 - f)


def pick_branch_var(model: Dict, vars_):
    """Non-integral variable closest to an integer; ties by variable order."""
    best = None
    for v in sorted(vars_):
        q = Fraction(model.get(v, 0))
        if q.denominator == 1:
            continue
        key = (_frac_dist(q), v)
        if best is None or key < best:
            best = key
    return None if best is None else best[1]


def branch_lemma(v, value) -> Lemma:
    value = Fraction(value)
    if value.denominator == 1:
        raise ContractError("branch lemma needs a non-integral value")
    n = floor(value)
    x = LinTerm.var(v)
    return Lemma("branch", [(le(x - n), True), (le(-x + n + 1), True)])


def _ratio(a: LinTerm, b: LinTerm) -> Fraction:
    """r with a = r * b (terms known to be proportional)."""
    v, c = a.coeffs[0]
    return c / b.get(v)


def defining_constraints(constraints: Sequence[Atom], model: Dict) -> List[Atom]:
    return [a for a in constraints if a.rel in (LE, EQ) and eval_term(a.term, model) == 0]


def _defining_system(D: Sequence[Atom]):
    eqs: List[Atom] = []
    sources: List[List[Atom]] = []
    index: Dict[Atom, int] = {}
    for a in D:
        e = eq(a.term)
        if e.rel != EQ:
            continue
        i = index.get(e)
        if i is None:
            i = index[e] = len(eqs)
            eqs.append(e)
            sources.append([])
        sources[i].append(a)
    return eqs, sources


def _signed_sources(cert: UnsatLinComb, eqs, sources):
    """Pick one source per certificate entry so inequalities share a sign.

    Returns (target, [(coeff on source term, source)]) or None.
    """
    idx = {e: i for i, e in enumerate(eqs)}
    for target in (1, -1):
        picked = []
        for c, e in cert.items:
            i = idx[e]
            choice = None
            for s in sources[i]:
                lam = c * _ratio(e.term, s.term)
                if s.rel == EQ or lam * target > 0:
                    choice = (lam * target, s)
                    if s.rel == EQ:
                        break
            if choice is None:
                break
            picked.append(choice)
        else:
            return target, picked
    return None


def cut_from_defining(constraints: Sequence[Atom], model: Dict) -> Optional[Tuple[Atom, CutProof]]:
    """Cutting plane from an unsat system of defining equations.

    Applies only when all inequalities enter the combination with the same
    sign; the result is a Comb of hypotheses followed by one Strengthen.
    """
    D = defining_constraints(constraints, model)
    eqs, sources = _defining_system(D)
    if not eqs:
        return None
    res = solve_eqs(eqs)
    if res.solved:
        return None
    picked = _signed_sources(res.cert, eqs, sources)
    if picked is None:
        return None
    _, items = picked
    scale = 1
    for lam, _ in items:
        scale = lcm(scale, Fraction(lam).denominator)
    leaves = []
    for lam, src in items:
        lam = lam * scale
        if src.rel == EQ:
            leaves.append((abs(lam), Hyp(src, 1 if lam > 0 else -1)))
        else:
            leaves.append((lam, Hyp(src)))
    proof = farkas_chain(leaves)
    t = proof.term
    if t.is_const():
        return None
    g = t.var_gcd()
    tight, k = tighten(Atom(t, LE))
    if k == 0:
        return None
    return tight, Strengthen(proof, g, k)


def cut_or_split_lemma(constraints: Sequence[Atom], model: Dict, mode: str = "plain",
                       mixed: Optional[Callable[[LinTerm], bool]] = None) -> Optional[Lemma]:
    """Extended branch lemma from the defining constraints, or a split.

    Returns None when the defining equations have an integer solution.
    In interpolating mode an AB-mixed cut is replaced by splitting one
    defining inequality into (t + 1 <= 0) | (t = 0).
    """
    D = defining_constraints(constraints, model)
    eqs, sources = _defining_system(D)
    if not eqs:
        return None
    res = solve_eqs(eqs)
    if res.solved:
        return None
    root = res.cert.root
    g = root.var_gcd()
    if g == 0:
        return None
    t = LinTerm([(v, c / g) for v, c in root.coeffs])
    n = ceil_div(-root.const, g)
    if mode != "interpolating" or mixed is None or not mixed(t):
        # (t <= n - 1) | (n <= t)
        return Lemma("cut", [(le(t - n + 1), True), (le(-t + n), True)])
    used = {e for _, e in res.cert.items}
    cands = [s for i, e in enumerate(eqs) if e in used for s in sources[i] if s.rel == LE]
    if not cands:
        cands = [a for a in D if a.rel == LE]
    if not cands:
        return None
    s = min(cands, key=lambda a: (len(a.term.coeffs), a.term.coeffs, a.term.const))
    return split_lemma(s)


def split_lemma(s: Atom) -> Lemma:
    t = s.term
    return Lemma("split", [(s, False), (le(t + 1), True), (eq(t), True)])


class LazSolver:
    def __init__(self, config: Optional[LazConfig] = None, mode: str = "plain",
                 mixed: Optional[Callable[[LinTerm], bool]] = None, stats: Optional[LazStats] = None):
        self.config = config or LazConfig()
        self.mode = mode
        self.mixed = mixed
        self.stats = stats or LazStats()

    # ------------------------------------------------------------------
    def check(self, constraints: Sequence[Atom], known: Optional[set] = None) -> LazResult:
        st = self.stats
        st.checks += 1
        cons = list(dict.fromkeys(constraints))
        for a in cons:
            if a.rel not in (LE, EQ):
                raise ContractError(f"check_laz expects <= or = atoms, got {a!r}")
        vars_ = sorted({v for a in cons for v in a.term.vars()})
        items = [_Item(a) for a in cons]

        ok, data = _laq(items)
        if not ok:
            return self._unsat(_refutation(items, data))
        if is_integral_model(data, vars_):
            return LazResult("sat", model=self._model(data, vars_))

        # equality elimination and tightening
        eqs = [a for a in cons if a.rel == EQ]
        ineqs = [a for a in cons if a.rel == LE]
        if eqs:
            res = solve_eqs(eqs)
            if not res.solved:
                st.eq_conflicts += 1
                return self._unsat(cert_proof(res.cert), cert=res.cert)
            tightened = eliminate_and_tighten(eqs, ineqs, res)
        else:
            tightened = eliminate_and_tighten([], ineqs)
        added = False
        for tt in tightened:
            if tt.k > 0:
                items.append(_Item(tt.atom, tt.proof))
                st.tightened += 1
                added = True
        if added:
            ok, data = _laq(items)
            if not ok:
                return self._unsat(_refutation(items, data))
            if is_integral_model(data, vars_):
                return LazResult("sat", model=self._model(data, vars_))

        # cuts from the defining constraints of the vertex
        if self.config.internal_cuts:
            for _ in range(self.config.cut_rounds):
                cut = cut_from_defining(cons, self._model(data, vars_))
                if cut is None:
                    break
                atom, proof = cut
                st.internal_cuts += 1
                items.append(_Item(atom, proof))
                ok, data = _laq(items)
                if not ok:
                    return self._unsat(_refutation(items, data))
                if is_integral_model(data, vars_):
                    return LazResult("sat", model=self._model(data, vars_))

        # internal branch and bound
        if self.config.bnb_depth > 0 and self.config.bnb_leaves > 0:
            self._leaves = 0
            out = self._bnb(items, [], 0, vars_)
            if isinstance(out, dict):
                return LazResult("sat", model=self._model(out, vars_))
            if out is not None:
                if isinstance(out, BnbLeaf):
                    return self._unsat(out.proof)
                return LazResult("unsat", conflict=bnb_hyps(out), proof=out)

        # splitting on demand
        model = self._model(data, vars_)
        known = known if known is not None else set()
        lemmas: List[Lemma] = []
        if self.config.cut_lemmas:
            lem = cut_or_split_lemma(cons, model, self.mode, self.mixed)
            if lem is not None and lem.key() not in known:
                lemmas.append(lem)
                if lem.kind == "cut":
                    st.cut_lemmas += 1
                else:
                    st.split_lemmas += 1
        if not lemmas:
            for v in vars_:
                q = Fraction(model.get(v, 0))
                if q.denominator != 1:
                    lem = branch_lemma(v, q)
                    if lem.key() not in known:
                        lemmas.append(lem)
                        st.branch_lemmas += 1
            lemmas.sort(key=lambda l: (_frac_dist(Fraction(model[l.atoms()[0].term.vars()[0]])),
                                       l.atoms()[0].term.vars()[0]))
        if not lemmas:
            raise ContractError("theory solver made no progress")
        return LazResult("lemmas", model=model, lemmas=lemmas)

    # ------------------------------------------------------------------
    def _model(self, data, vars_):
        return {v: Fraction(data.get(v, 0)) for v in vars_}

    def _unsat(self, proof: CutProof, cert=None) -> LazResult:
        return LazResult("unsat", conflict=hyps_of(proof), proof=proof, cert=cert)

    def _bnb(self, items, path, depth, vars_):
        """Returns a model dict, a BnbLeaf/BnbNode, or None when out of budget."""
        self.stats.bnb_nodes += 1
        self._leaves += 1
        work = items + [_Item(a) for a in path]
        ok, data = _laq(work)
        if not ok:
            return BnbLeaf(_refutation(work, data))
        if is_integral_model(data, vars_):
            return data
        if depth >= self.config.bnb_depth or self._leaves >= self.config.bnb_leaves:
            return None
        v = pick_branch_var(data, vars_)
        n = floor(Fraction(data[v]))
        x = LinTerm.var(v)
        a_le, a_ge = le(x - n), le(-x + n + 1)
        left = self._bnb(items, path + [a_le], depth + 1, vars_)
        if left is None or isinstance(left, dict):
            return left
        if a_le not in _tree_hyps(left):
            return left
        right = self._bnb(items, path + [a_ge], depth + 1, vars_)
        if right is None or isinstance(right, dict):
            return right
        if a_ge not in _tree_hyps(right):
            return right
        return BnbNode(v, n, left, right)


def _tree_hyps(p):
    if isinstance(p, BnbLeaf):
        return set(hyps_of(p.proof))
    return set(bnb_hyps(p)) | set()


def check_laz(constraints: Sequence[Atom], mode: str = "plain", config: Optional[LazConfig] = None,
              mixed: Optional[Callable[[LinTerm], bool]] = None, known: Optional[set] = None,
              stats: Optional[LazStats] = None) -> LazResult:
    return LazSolver(config, mode, mixed, stats).check(constraints, known)
