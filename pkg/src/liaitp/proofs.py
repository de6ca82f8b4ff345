"""Cutting-plane proofs, branch-and-bound trees and resolution DAGs.

The checkers here only use term arithmetic from ``arith``; they never look
at solver state.  All proof objects are immutable DAGs and the checkers
memoize by node identity.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .arith import EQ, LE, Atom, ContractError, LinTerm, ceil_div, le, negate_le, normalize_atom


class ProofError(ContractError):
    def __init__(self, node, reason: str):
        super().__init__(reason)
        self.node = node
        self.reason = reason


class UnsupportedProof(ContractError):
    """Proof shape outside what an interpolation engine accepts."""


# ------------------------------------------------------------ cutting planes

class CutProof:
    """Base class.  ``term`` is the derived inequality ``term <= 0``."""

    __slots__ = ("term",)

    @property
    def atom(self) -> Atom:
        return Atom(self.term, LE)


class Hyp(CutProof):
    """Leaf.  For an equality, ``sign`` picks the orientation sign * t <= 0."""

    __slots__ = ("hyp", "sign")

    def __init__(self, hyp: Atom, sign: int = 1):
        if hyp.rel == LE and sign != 1:
            raise ContractError("inequality hypotheses have a fixed orientation")
        if hyp.rel not in (LE, EQ) or sign not in (1, -1):
            raise ContractError(f"bad hypothesis {hyp!r}")
        self.hyp = hyp
        self.sign = sign
        self.term = hyp.term if sign == 1 else -hyp.term

    def __repr__(self):
        return f"Hyp({self.hyp!r}{'' if self.sign == 1 else ', -'})"


class Comb(CutProof):
    __slots__ = ("c1", "p1", "c2", "p2")

    def __init__(self, c1, p1: CutProof, c2, p2: CutProof):
        c1, c2 = Fraction(c1), Fraction(c2)
        if c1 <= 0 or c2 <= 0:
            raise ContractError("Comb coefficients must be positive")
        self.c1, self.p1, self.c2, self.p2 = c1, p1, c2, p2
        self.term = p1.term * c1 + p2.term * c2

    def __repr__(self):
        return f"Comb({self.c1}, {self.p1!r}, {self.c2}, {self.p2!r})"


class Strengthen(CutProof):
    """Round the constant of the premise up to a multiple of ``d``."""

    __slots__ = ("p", "d", "k")

    def __init__(self, p: CutProof, d: int, k: Optional[int] = None):
        t = p.term
        if d <= 0 or any(c.denominator != 1 or c.numerator % d for _, c in t.coeffs):
            raise ContractError("Strengthen divisor must divide every coefficient")
        want = ceil_div(t.const, d) * d - t.const
        if k is None:
            k = want
        self.p, self.d, self.k = p, int(d), Fraction(k)
        self.term = t + self.k

    def __repr__(self):
        return f"Strengthen({self.p!r}, {self.d}, k={self.k})"


class Division(CutProof):
    """Divide the premise by ``d`` and round the constant up."""

    __slots__ = ("p", "d")

    def __init__(self, p: CutProof, d: int):
        t = p.term
        if d <= 0 or any(c.denominator != 1 or c.numerator % d for _, c in t.coeffs):
            raise ContractError("Division divisor must divide every coefficient")
        self.p, self.d = p, int(d)
        self.term = LinTerm([(v, c / d) for v, c in t.coeffs], ceil_div(t.const, d))

    def __repr__(self):
        return f"Division({self.p!r}, {self.d})"


def children(p: CutProof):
    if isinstance(p, Comb):
        return (p.p1, p.p2)
    if isinstance(p, (Strengthen, Division)):
        return (p.p,)
    return ()


def walk(p: CutProof):
    """Nodes of the DAG in post-order, each once."""
    out = []
    seen = set()
    stack = [(p, False)]
    while stack:
        n, done = stack.pop()
        if done:
            out.append(n)
            continue
        if id(n) in seen:
            continue
        seen.add(id(n))
        stack.append((n, True))
        for c in reversed(children(n)):
            stack.append((c, False))
    return out


def hyps_of(p: CutProof) -> List[Atom]:
    out = []
    for n in walk(p):
        if isinstance(n, Hyp) and n.hyp not in out:
            out.append(n.hyp)
    return out


def proof_size(p: CutProof) -> int:
    return len(walk(p))


def max_strengthen_per_branch(p: CutProof) -> int:
    memo: Dict[int, int] = {}
    for n in walk(p):
        best = max((memo[id(c)] for c in children(n)), default=0)
        memo[id(n)] = best + (1 if isinstance(n, (Strengthen, Division)) else 0)
    return memo[id(p)]


def farkas_chain(items: Sequence[Tuple[Fraction, CutProof]]) -> CutProof:
    """Comb(c1, P1, c2, P2), then Comb(1, acc, ci, Pi) for the rest."""
    if not items:
        raise ContractError("empty combination")
    if len(items) == 1:
        # a lone premise already derives the contradiction; scaling is moot
        return items[0][1]
    (c1, p1), (c2, p2) = items[0], items[1]
    acc = Comb(c1, p1, c2, p2)
    for c, p in items[2:]:
        acc = Comb(1, acc, c, p)
    return acc


def hyp_for(atom: Atom, coeff: Fraction) -> Tuple[Fraction, CutProof]:
    """Leaf for a signed certificate entry: equalities absorb the sign."""
    if atom.rel == EQ:
        return abs(coeff), Hyp(atom, 1 if coeff > 0 else -1)
    if coeff <= 0:
        raise ContractError("inequality used with a non-positive coefficient")
    return coeff, Hyp(atom)


def farkas_proof(items: Sequence[Tuple[Fraction, Atom]]) -> CutProof:
    return farkas_chain([hyp_for(a, c) for c, a in items])


@dataclass
class CheckResult:
    ok: bool
    node: object = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def check_cut_proof(p: CutProof, hypotheses: Iterable[Atom], refutation: bool = True) -> CheckResult:
    """Recompute every node.  Equalities may be used in both orientations."""
    hyps = set(hypotheses)
    for n in walk(p):
        if isinstance(n, Hyp):
            if n.hyp not in hyps:
                return CheckResult(False, n, "hypothesis not in premise set")
            if n.hyp.rel == LE and n.sign != 1:
                return CheckResult(False, n, "inequality used with negative orientation")
            want = n.hyp.term * n.sign
        elif isinstance(n, Comb):
            if n.c1 <= 0 or n.c2 <= 0:
                return CheckResult(False, n, "non-positive Comb coefficient")
            want = n.p1.term * n.c1 + n.p2.term * n.c2
        elif isinstance(n, Strengthen):
            t = n.p.term
            if n.d <= 0 or any(c.denominator != 1 or c.numerator % n.d for _, c in t.coeffs):
                return CheckResult(False, n, "divisibility")
            if n.k != ceil_div(t.const, n.d) * n.d - t.const:
                return CheckResult(False, n, "divisibility: wrong rounding constant")
            want = t + n.k
        elif isinstance(n, Division):
            t = n.p.term
            if n.d <= 0 or any(c.denominator != 1 or c.numerator % n.d for _, c in t.coeffs):
                return CheckResult(False, n, "divisibility")
            want = LinTerm([(v, c / n.d) for v, c in t.coeffs], ceil_div(t.const, n.d))
        else:
            return CheckResult(False, n, "unknown node")
        if want != n.term:
            return CheckResult(False, n, "arithmetic mismatch")
    if refutation:
        t = p.term
        if not (t.is_const() and t.const > 0 and t.const.denominator == 1):
            return CheckResult(False, p, "root-not-contradiction")
    return CheckResult(True)


# --------------------------------------------------------- branch and bound

class BnbLeaf:
    __slots__ = ("proof",)

    def __init__(self, proof: CutProof):
        self.proof = proof


class BnbNode:
    """Split on ``var``: left child assumes v - n <= 0, right child -v + n + 1 <= 0."""

    __slots__ = ("var", "n", "le_child", "ge_child")

    def __init__(self, var, n: int, le_child, ge_child):
        self.var, self.n = var, int(n)
        self.le_child, self.ge_child = le_child, ge_child

    @property
    def le_atom(self) -> Atom:
        return le(LinTerm.var(self.var) - self.n)

    @property
    def ge_atom(self) -> Atom:
        return le(-LinTerm.var(self.var) + self.n + 1)


BnbProof = object  # BnbLeaf | BnbNode


def bnb_leaves(p) -> List[BnbLeaf]:
    if isinstance(p, BnbLeaf):
        return [p]
    return bnb_leaves(p.le_child) + bnb_leaves(p.ge_child)


def bnb_hyps(p) -> List[Atom]:
    """Premises of the tree, excluding the branch atoms introduced inside it."""
    out: List[Atom] = []

    def rec(node, path):
        if isinstance(node, BnbLeaf):
            for h in hyps_of(node.proof):
                if h not in path and h not in out:
                    out.append(h)
            return
        rec(node.le_child, path | {node.le_atom})
        rec(node.ge_child, path | {node.ge_atom})

    rec(p, frozenset())
    return out


def check_bnb(p, hypotheses: Iterable[Atom]) -> CheckResult:
    hyps = set(hypotheses)

    def rec(node, extra):
        if isinstance(node, BnbLeaf):
            return check_cut_proof(node.proof, hyps | extra)
        if not isinstance(node, BnbNode):
            return CheckResult(False, node, "malformed tree")
        r = rec(node.le_child, extra | {node.le_atom})
        if not r:
            return r
        return rec(node.ge_child, extra | {node.ge_atom})

    return rec(p, frozenset())


# -------------------------------------------------------------- resolution

@dataclass(frozen=True)
class Origin:
    """Where a leaf clause comes from.

    kind is ``group`` (input clause of group ``group``), ``tlemma`` (theory
    lemma justified by ``proof``) or ``bnb`` (valid branching lemma of
    flavour ``lemma``: branch, cut, split or eqsplit).
    """

    kind: str
    group: Optional[int] = None
    proof: object = None
    cert: object = None
    lemma: Optional[str] = None


class ResLeaf:
    __slots__ = ("clause", "origin")

    def __init__(self, clause: Iterable[int], origin: Optional[Origin]):
        self.clause = norm_clause(clause)
        self.origin = origin

    def __repr__(self):
        return f"Leaf({list(self.clause)}, {self.origin.kind if self.origin else None})"


class ResNode:
    """Resolvent of ``left`` (containing +pivot) and ``right`` (containing -pivot)."""

    __slots__ = ("pivot", "left", "right", "clause")

    def __init__(self, pivot: int, left, right, clause=None):
        self.pivot, self.left, self.right = pivot, left, right
        if clause is None:
            clause = resolvent(left.clause, right.clause, pivot)
        self.clause = norm_clause(clause)


def norm_clause(lits: Iterable[int]) -> Tuple[int, ...]:
    return tuple(sorted(set(lits), key=lambda l: (abs(l), l < 0)))


def resolvent(c1, c2, pivot):
    return [l for l in c1 if l != pivot] + [l for l in c2 if l != -pivot]


def resolve(left, right, pivot: int) -> ResNode:
    """Resolve, swapping the premises if the pivot sits the other way round."""
    if pivot in left.clause and -pivot in right.clause:
        return ResNode(pivot, left, right)
    if -pivot in left.clause and pivot in right.clause:
        return ResNode(pivot, right, left)
    raise ContractError("pivot not found in premises")


def res_walk(root):
    out = []
    seen = set()
    stack = [(root, False)]
    while stack:
        n, done = stack.pop()
        if done:
            out.append(n)
            continue
        if id(n) in seen:
            continue
        seen.add(id(n))
        stack.append((n, True))
        if isinstance(n, ResNode):
            stack.append((n.right, False))
            stack.append((n.left, False))
    return out


def res_leaves(root) -> List[ResLeaf]:
    return [n for n in res_walk(root) if isinstance(n, ResLeaf)]


def branch_lemma_valid(clause, table) -> bool:
    """Syntactic validity of the lemma shapes the solver emits."""
    atoms = []
    for l in clause:
        a = table.constraint(l)
        if a is None:
            return False
        atoms.append(a)
    if len(atoms) == 2 and all(a.rel == LE for a in atoms):
        s = atoms[0].term + atoms[1].term
        return s.is_const() and s.const == 1
    if len(atoms) == 3:
        eqs = [(l, a) for l, a in zip(clause, atoms) if a.rel == EQ]
        les = [(l, a) for l, a in zip(clause, atoms) if a.rel == LE]
        if len(eqs) == 1 and len(les) == 2:
            e = eqs[0][1]
            t1, t2 = les[0][1].term, les[1][1].term
            # t = 0 or t + 1 <= 0 or -t + 1 <= 0 (with t - 1 <= ... from a negated literal)
            for a, b in ((t1, t2), (t2, t1)):
                t = a - 1
                if t.is_const():
                    continue
                if normalize_atom(t, "=") == e and (b == -t + 1):
                    return True
    return False


def check_res_proof(root, table, cnf_clauses=None, refutation: bool = True) -> CheckResult:
    """Check resolvents, leaf origins and the cutting-plane proofs of T-lemmas."""
    allowed = None
    if cnf_clauses is not None:
        allowed = {frozenset(c) for c in cnf_clauses}
    for n in res_walk(root):
        if isinstance(n, ResLeaf):
            o = n.origin
            if o is None:
                return CheckResult(False, n, "leaf without origin")
            if o.kind == "group":
                if allowed is not None and frozenset(n.clause) not in allowed:
                    return CheckResult(False, n, "input leaf not in the formula")
            elif o.kind == "tlemma":
                hyps = []
                for l in n.clause:
                    a = table.constraint(-l)
                    if a is None:
                        return CheckResult(False, n, "T-lemma literal without arithmetic meaning")
                    hyps.append(a)
                proof = o.proof
                if isinstance(proof, CutProof):
                    r = check_cut_proof(proof, hyps)
                elif isinstance(proof, (BnbLeaf, BnbNode)):
                    r = check_bnb(proof, hyps)
                else:
                    return CheckResult(False, n, "T-lemma without proof")
                if not r:
                    return CheckResult(False, n, f"T-lemma proof: {r.reason}")
            elif o.kind == "bnb":
                if not branch_lemma_valid(n.clause, table):
                    return CheckResult(False, n, "branching lemma has an unknown shape")
            else:
                return CheckResult(False, n, f"unknown origin {o.kind}")
        else:
            if n.pivot not in n.left.clause or -n.pivot not in n.right.clause:
                return CheckResult(False, n, "pivot sign mismatch")
            if n.clause != norm_clause(resolvent(n.left.clause, n.right.clause, n.pivot)):
                return CheckResult(False, n, "resolvent mismatch")
    if refutation and root.clause:
        return CheckResult(False, root, "root clause not empty")
    return CheckResult(True)


def bnb_to_resolution(p, table, lit_of=None):
    """Turn a branch-and-bound tree into a resolution DAG.

    Each leaf becomes a T-lemma clause (negation of its premises).  Each
    inner node adds the clause (v - n <= 0) | (-v + n + 1 <= 0) and resolves
    it first with the left subproof on (v - n <= 0) and then with the right
    subproof on (-v + n + 1 <= 0).  A resolution step is skipped when the
    subproof does not use the branch atom.  ``lit_of`` maps a premise atom
    to its literal; the default interns it positively in ``table``.
    """
    if lit_of is None:
        lit_of = table.intern

    def conv(node):
        if isinstance(node, BnbLeaf):
            clause = [-lit_of(h) for h in hyps_of(node.proof)]
            return ResLeaf(clause, Origin("tlemma", proof=node.proof))
        if not isinstance(node, BnbNode):
            raise ContractError("malformed branch-and-bound tree")
        left = conv(node.le_child)
        right = conv(node.ge_child)
        a_le = table.intern(node.le_atom)
        a_ge = table.intern(node.ge_atom)
        if -a_le not in left.clause:
            return left
        lemma = ResLeaf([a_le, a_ge], Origin("bnb", lemma="branch"))
        s = ResNode(a_le, lemma, left)
        if -a_ge not in right.clause:
            return right
        return ResNode(a_ge, s, right)

    return conv(p)
