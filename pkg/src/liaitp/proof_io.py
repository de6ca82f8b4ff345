"""Text format for proofs (``--dump-proof``) and the standalone checker.

A dump is a sequence of S-expressions::

    (declare-fun x () Int)
    (atom 1 (<= (+ x 1) 0))        ; also (bool p) and (tseitin n group)
    (input 0 (clause 1 -2))        ; CNF clause of group 0
    (premise (<= x 0))             ; hypotheses of a bare cutting-plane proof
    (step 4 (hyp (= (+ x (* (- 1) y)) 0) neg))
    (step 5 (comb 1 #3 2 #4))
    (step 6 (strengthen #5 3))     ; rounding constant recomputed
    (step 7 (division #5 3))
    (step 8 (leaf (tlemma #6) (clause -1 -2)))
    (step 9 (res 1 #7 #8))
    (refutation 9)

Nodes are shared through ``#K`` references to earlier steps.  A strengthening
that adds less than the full rounding constant carries it as a third argument.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional

from .arith import Atom, BoolVar, ContractError, Var
from .cnf import AtomTable, TseitinVar
from .formula import Lit
from .parser import ParseError, _Reader, read_sexprs
from .printer import print_atom, print_num
from .proofs import (CheckResult, Comb, CutProof, Division, Hyp, Origin, ResLeaf, ResNode, Strengthen,
                     check_cut_proof, check_res_proof, res_walk, walk)


def _decls(atoms) -> List[str]:
    ints, bools = set(), set()
    for a in atoms:
        if isinstance(a, Atom):
            for v in a.term.vars():
                ints.add(v)
        elif isinstance(a, BoolVar):
            bools.add(a)
    out = [f"(declare-fun {v.name} () Int)" for v in sorted(ints)]
    out += [f"(declare-fun {b.name} () Bool)" for b in sorted(bools)]
    return out


def dump_proof(root, table: Optional[AtomTable] = None, cnf_clauses=None, premises=None) -> str:
    """Serialize a resolution refutation (with its atom table) or a cutting-plane proof."""
    lines: List[str] = []
    ids: Dict[int, int] = {}
    body: List[str] = []

    def ref(n) -> str:
        return f"#{ids[id(n)]}"

    def emit(n, text):
        k = len(ids) + 1
        ids[id(n)] = k
        body.append(f"(step {k} {text})")

    def cut(p: CutProof):
        for n in walk(p):
            if id(n) in ids:
                continue
            if isinstance(n, Hyp):
                emit(n, f"(hyp {print_atom(n.hyp)}{' neg' if n.sign < 0 else ''})")
            elif isinstance(n, Comb):
                emit(n, f"(comb {print_num(n.c1)} {ref(n.p1)} {print_num(n.c2)} {ref(n.p2)})")
            elif isinstance(n, Strengthen):
                k = "" if n.k == Strengthen(n.p, n.d).k else f" {print_num(n.k)}"
                emit(n, f"(strengthen {ref(n.p)} {n.d}{k})")
            elif isinstance(n, Division):
                emit(n, f"(division {ref(n.p)} {n.d})")

    used_atoms = []
    if isinstance(root, CutProof):
        cut(root)
        prem = list(premises or [])
        for n in walk(root):
            if isinstance(n, Hyp):
                used_atoms.append(n.hyp)
                if n.hyp not in prem:
                    prem.append(n.hyp)
        lines += _decls(used_atoms + prem)
        lines += [f"(premise {print_atom(a)})" for a in prem]
    else:
        if table is None:
            raise ContractError("a resolution proof needs its atom table")
        for n in res_walk(root):
            if isinstance(n, ResLeaf):
                o = n.origin
                cl = "(clause " + " ".join(map(str, n.clause)) + ")"
                if o.kind == "group":
                    emit(n, f"(leaf (group {o.group}) {cl})")
                elif o.kind == "bnb":
                    emit(n, f"(leaf (bnb {o.lemma}) {cl})")
                elif o.kind == "tlemma":
                    if not isinstance(o.proof, CutProof):
                        raise ContractError("T-lemma leaves must carry cutting-plane proofs")
                    cut(o.proof)
                    emit(n, f"(leaf (tlemma {ref(o.proof)}) {cl})")
                else:
                    raise ContractError(f"unknown origin {o.kind}")
            else:
                emit(n, f"(res {n.pivot} {ref(n.left)} {ref(n.right)})")
        lines += _decls(table.keys[1:])
        for i, k in enumerate(table.keys[1:], 1):
            if isinstance(k, Atom):
                lines.append(f"(atom {i} {print_atom(k)})")
            elif isinstance(k, BoolVar):
                lines.append(f"(atom {i} (bool {k.name}))")
            elif isinstance(k, TseitinVar):
                lines.append(f"(atom {i} (tseitin {k.n} {k.group}))")
        for g, lits in (cnf_clauses or []):
            lines.append(f"(input {g} (clause " + " ".join(map(str, lits)) + "))")
    lines += body
    lines.append(f"(refutation {ids[id(root)]})")
    return "\n".join(lines) + "\n"


def _num(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(int(x))
    if x[0] == "-" and len(x) == 2:
        return -_num(x[1])
    if x[0] == "/" and len(x) == 3:
        return _num(x[1]) / _num(x[2])
    raise ParseError(f"bad number {x!r}")


class LoadedProof:
    def __init__(self):
        self.root = None
        self.table = AtomTable()
        self.inputs: List[tuple] = []
        self.premises: List[Atom] = []

    def check(self) -> CheckResult:
        if self.root is None:
            return CheckResult(False, None, "no refutation")
        if isinstance(self.root, CutProof):
            return check_cut_proof(self.root, self.premises)
        return check_res_proof(self.root, self.table, [c for _, c in self.inputs] if self.inputs else None)


def load_proof(text: str) -> LoadedProof:
    ints: Dict[str, Var] = {}
    bools: Dict[str, BoolVar] = {}
    rd = _Reader(ints, bools)
    out = LoadedProof()
    steps: Dict[int, object] = {}

    def atom(x) -> Atom:
        f = rd.formula(x)
        if not isinstance(f, Lit):
            raise ParseError(f"not an atom: {x!r}")
        return f.atom

    def get(r):
        if not (isinstance(r, str) and r.startswith("#")):
            raise ParseError(f"expected a step reference, got {r!r}")
        k = int(r[1:])
        if k not in steps:
            raise ParseError(f"reference to unknown step {k}")
        return steps[k]

    def clause(x):
        if not isinstance(x, list) or not x or x[0] != "clause":
            raise ParseError("expected (clause ...)")
        return tuple(int(l) for l in x[1:])

    for cmd in read_sexprs(text):
        head = cmd[0]
        if head == "declare-fun":
            name, sort = cmd[1], cmd[3]
            if sort == "Int":
                ints[name] = Var(len(ints) + len(bools), str(name))
            else:
                bools[name] = BoolVar(str(name))
        elif head == "atom":
            i, desc = int(cmd[1]), cmd[2]
            if isinstance(desc, list) and desc and desc[0] == "bool":
                key = bools[desc[1]]
            elif isinstance(desc, list) and desc and desc[0] == "tseitin":
                key = TseitinVar(int(desc[1]), int(desc[2]))
            else:
                key = atom(desc)
            if out.table.intern(key) != i:
                raise ParseError(f"atom ids must be consecutive (at {i})")
        elif head == "input":
            out.inputs.append((int(cmd[1]), clause(cmd[2])))
        elif head == "premise":
            out.premises.append(atom(cmd[1]))
        elif head == "step":
            k, node = int(cmd[1]), cmd[2]
            kind = node[0]
            if kind == "hyp":
                neg = len(node) > 2 and node[2] == "neg"
                steps[k] = Hyp(atom(node[1]), -1 if neg else 1)
            elif kind == "comb":
                steps[k] = Comb(_num(node[1]), get(node[2]), _num(node[3]), get(node[4]))
            elif kind == "strengthen":
                steps[k] = Strengthen(get(node[1]), int(node[2]), _num(node[3]) if len(node) > 3 else None)
            elif kind == "division":
                steps[k] = Division(get(node[1]), int(node[2]))
            elif kind == "leaf":
                o = node[1]
                cl = clause(node[2])
                if o[0] == "group":
                    origin = Origin("group", group=int(o[1]))
                elif o[0] == "bnb":
                    origin = Origin("bnb", lemma=str(o[1]))
                elif o[0] == "tlemma":
                    origin = Origin("tlemma", proof=get(o[1]))
                else:
                    raise ParseError(f"unknown leaf origin {o[0]}")
                steps[k] = ResLeaf(cl, origin)
            elif kind == "res":
                l, r = get(node[2]), get(node[3])
                steps[k] = ResNode(int(node[1]), l, r)
            else:
                raise ParseError(f"unknown proof step {kind}")
        elif head == "refutation":
            out.root = get("#" + str(cmd[1]))
        else:
            raise ParseError(f"unknown proof command {head}")
    return out
