"""CDCL over abstracted atoms with resolution-proof logging.

Two watched literals, first-UIP learning, VSIDS-style activities with
ties broken by atom id, no restarts.  Every clause carries a proof node:
leaves for input clauses and lemmas, resolution chains for learned
clauses.  When an LA(Z) theory is attached, the solver checks rational
consistency at each propagation fixpoint and runs the full layered check
on total assignments.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .arith import EQ, LE, Atom, ContractError, eq, le
from .cnf import AtomTable, CnfFormula
from .laz import LazSolver, _Item, _refutation
from .proofs import (BnbLeaf, BnbNode, CutProof, Origin, ResLeaf, ResNode, bnb_to_resolution,
                     hyps_of, resolve)
from .simplex import laq_solve


class ResourceLimit(RuntimeError):
    pass


@dataclass
class SatResult:
    sat: bool
    assignment: Optional[Dict[int, bool]] = None
    model: Optional[Dict] = None
    proof: object = None                   # root ResNode / ResLeaf on unsat
    lemmas: List = field(default_factory=list)


class _ClauseRec:
    __slots__ = ("lits", "node", "learnt")

    def __init__(self, lits, node, learnt=False):
        self.lits = lits
        self.node = node
        self.learnt = learnt


class SatSolver:
    def __init__(self, cnf: CnfFormula, theory: Optional[LazSolver] = None,
                 step_limit: int = 200000, partial_checks: bool = True, seed: Optional[int] = None):
        self.cnf = cnf
        self.table: AtomTable = cnf.table
        self.theory = theory
        self.step_limit = step_limit
        self.partial_checks = partial_checks and theory is not None
        self.steps = 0
        self.clauses: List[_ClauseRec] = []
        self.watches: Dict[int, List[int]] = {}
        self.value: Dict[int, bool] = {}
        self.level: Dict[int, int] = {}
        self.reason: Dict[int, Optional[int]] = {}
        self.trail: List[int] = []
        self.trail_lim: List[int] = []
        self.qhead = 0
        self.activity: Dict[int, float] = {}
        self.phase: Dict[int, bool] = {}
        self.inc = 1.0
        self.occurs: set = set()
        self.known_lemmas: set = set()
        self.lemma_log: List = []          # (Lemma, clause leaf)
        self.empty: Optional[object] = None
        self._checked_upto = -1
        for c in cnf.clauses:
            self._add_clause(list(c.lits), ResLeaf(c.lits, c.origin))
        if theory is not None:
            for i, k in enumerate(self.table.keys[1:], 1):
                if isinstance(k, Atom) and k.rel == EQ and i in self.occurs:
                    self._eq_companion(k)
        if seed is not None:
            # small initial activities only reorder the first decisions
            rng = random.Random(seed)
            for v in sorted(self.activity):
                self.activity[v] = rng.random() * 1e-3

    # ----------------------------------------------------------- clauses
    def _lit_val(self, lit):
        v = self.value.get(abs(lit))
        if v is None:
            return None
        return v if lit > 0 else not v

    def _add_clause(self, lits, node, learnt=False) -> Optional[int]:
        lits = list(dict.fromkeys(lits))
        for l in lits:
            self.occurs.add(abs(l))
            self.activity.setdefault(abs(l), 0.0)
        if not lits:
            self.empty = node
            return None
        idx = len(self.clauses)
        self.clauses.append(_ClauseRec(lits, node, learnt))
        if len(lits) >= 2:
            self.watches.setdefault(lits[0], []).append(idx)
            self.watches.setdefault(lits[1], []).append(idx)
        else:
            self.watches.setdefault(lits[0], []).append(idx)
        return idx

    def _eq_companion(self, e: Atom):
        t = e.term
        a = self.table.intern(e)
        b = self.table.intern(le(t + 1))
        c = self.table.intern(le(-t + 1))
        lits = [a, b, c]
        leaf = ResLeaf(lits, Origin("bnb", lemma="eqsplit"))
        key = ("eqsplit", frozenset(lits))
        if key in self.known_lemmas:
            return
        self.known_lemmas.add(key)
        self._add_clause(lits, leaf)

    # ------------------------------------------------------- assignment
    def _assign(self, lit, reason):
        v = abs(lit)
        self.value[v] = lit > 0
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _backtrack(self, lvl):
        if len(self.trail_lim) <= lvl:
            return
        cut = self.trail_lim[lvl]
        for lit in self.trail[cut:]:
            v = abs(lit)
            self.phase[v] = lit > 0
            del self.value[v]
            del self.level[v]
            del self.reason[v]
        del self.trail[cut:]
        del self.trail_lim[lvl:]
        self.qhead = min(self.qhead, len(self.trail))
        self._checked_upto = min(self._checked_upto, len(self.trail) - 1)

    def _propagate(self) -> Optional[int]:
        """Unit propagation.  Returns a conflicting clause index or None."""
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            false_lit = -lit
            ws = self.watches.get(false_lit, [])
            i = 0
            new_ws = []
            conflict = None
            while i < len(ws):
                ci = ws[i]
                i += 1
                c = self.clauses[ci]
                lits = c.lits
                if len(lits) == 1:
                    new_ws.append(ci)
                    if conflict is None:
                        conflict = ci
                    continue
                if lits[0] == false_lit:
                    lits[0], lits[1] = lits[1], lits[0]
                if self._lit_val(lits[0]) is True:
                    new_ws.append(ci)
                    continue
                moved = False
                for k in range(2, len(lits)):
                    if self._lit_val(lits[k]) is not False:
                        lits[1], lits[k] = lits[k], lits[1]
                        self.watches.setdefault(lits[1], []).append(ci)
                        moved = True
                        break
                if moved:
                    continue
                new_ws.append(ci)
                if conflict is not None:
                    continue
                if self._lit_val(lits[0]) is False:
                    conflict = ci
                else:
                    self._assign(lits[0], ci)
            self.watches[false_lit] = new_ws
            if conflict is not None:
                return conflict
        return None

    # ---------------------------------------------------------- analysis
    def _bump(self, v):
        self.activity[v] = self.activity.get(v, 0.0) + self.inc
        if self.activity[v] > 1e100:
            for k in self.activity:
                self.activity[k] *= 1e-100
            self.inc *= 1e-100

    def _analyze(self, ci):
        """First-UIP clause and its resolution proof."""
        cur = len(self.trail_lim)
        clause = set(self.clauses[ci].lits)
        node = self.clauses[ci].node
        for l in clause:
            self._bump(abs(l))

        def count():
            return sum(1 for l in clause if self.level.get(abs(l)) == cur)

        idx = len(self.trail) - 1
        while count() > 1:
            while -self.trail[idx] not in clause:
                idx -= 1
            lit = self.trail[idx]
            idx -= 1
            r = self.reason[abs(lit)]
            rc = self.clauses[r]
            node = resolve(self.clauses[r].node, node, abs(lit)) if lit > 0 else resolve(node, rc.node, abs(lit))
            clause = set(node.clause)
            for l in rc.lits:
                self._bump(abs(l))
        self.inc *= 1.05
        lits = sorted(clause, key=lambda l: -self.level.get(abs(l), 0))
        back = self.level[abs(lits[1])] if len(lits) > 1 else 0
        return lits, node, back

    def _refute(self, ci):
        """Resolve a level-0 conflict down to the empty clause."""
        node = self.clauses[ci].node
        clause = set(node.clause)
        for lit in reversed(self.trail):
            if not clause:
                break
            if -lit in clause:
                r = self.reason[abs(lit)]
                rc = self.clauses[r]
                node = resolve(rc.node, node, abs(lit)) if lit > 0 else resolve(node, rc.node, abs(lit))
                clause = set(node.clause)
        if clause:
            raise AssertionError("internal error: refutation left literals")
        return node

    # ------------------------------------------------------------ theory
    def _constraints(self):
        cons: List[Atom] = []
        lit_of: Dict[Atom, int] = {}
        for lit in self.trail:
            a = self.table.constraint(lit)
            if a is None or a in lit_of:
                continue
            lit_of[a] = lit
            cons.append(a)
        return cons, lit_of

    def _theory_conflict(self, proof, lit_of, cert=None) -> int:
        def lit_for(h):
            l = lit_of.get(h)
            return l if l is not None else self.table.intern(h)

        if isinstance(proof, (BnbNode, BnbLeaf)):
            node = bnb_to_resolution(proof, self.table, lit_of=lit_for)
        else:
            clause = [-lit_of[h] for h in hyps_of(proof)]
            node = ResLeaf(clause, Origin("tlemma", proof=proof, cert=cert))
        for l in node.clause:
            if self._lit_val(l) is not False:
                raise AssertionError("internal error: theory conflict clause not falsified")
        lits = sorted(node.clause, key=lambda l: -self.level[abs(l)])
        ci = self._add_clause(lits, node, learnt=True)
        if ci is None:
            raise AssertionError("internal error: empty theory conflict")
        return ci

    def _partial_check(self) -> Optional[int]:
        if len(self.trail) - 1 == self._checked_upto:
            return None
        self._checked_upto = len(self.trail) - 1
        cons, lit_of = self._constraints()
        if not cons:
            return None
        items = [_Item(a) for a in cons]
        ok, data = laq_solve(cons)
        if ok:
            return None
        proof = _refutation(items, data)
        return self._theory_conflict(proof, lit_of)

    def _add_lemmas(self, lemmas):
        added = False
        for lem in lemmas:
            key = lem.key()
            if key in self.known_lemmas:
                continue
            self.known_lemmas.add(key)
            lits = []
            for a, pol in lem.lits:
                i = self.table.intern(a)
                lits.append(i if pol else -i)
            leaf = ResLeaf(lits, Origin("bnb", lemma=lem.kind))
            self.lemma_log.append((lem, leaf))
            self._add_clause(lits, leaf)
            for a, _ in lem.lits:
                if a.rel == EQ:
                    self._eq_companion(a)
            added = True
        return added

    # -------------------------------------------------------------- main
    def _decide(self) -> Optional[int]:
        best = None
        for v in self.occurs:
            if v in self.value:
                continue
            key = (-self.activity.get(v, 0.0), v)
            if best is None or key < best:
                best = key
        if best is None:
            return None
        v = best[1]
        return v if self.phase.get(v, True) else -v

    def _tick(self):
        self.steps += 1
        if self.steps > self.step_limit:
            raise ResourceLimit("step limit exceeded")

    def _handle_conflict(self, ci) -> Optional[object]:
        """Learn from a conflict; returns a refutation when at level 0."""
        lits = self.clauses[ci].lits
        top = max((self.level[abs(l)] for l in lits), default=0)
        self._backtrack(top)
        if top == 0:
            return self._refute(ci)
        learnt, node, back = self._analyze(ci)
        self._backtrack(back)
        idx = self._add_clause(learnt, node, learnt=True)
        if idx is None:
            return node
        self._assign(learnt[0], idx)
        return None

    def solve(self) -> SatResult:
        if self.empty is not None:
            return SatResult(False, proof=self.empty)
        # initial units
        for i, c in enumerate(self.clauses):
            if len(c.lits) == 1:
                val = self._lit_val(c.lits[0])
                if val is False:
                    return SatResult(False, proof=self._refute(i))
                if val is None:
                    self._assign(c.lits[0], i)
        while True:
            self._tick()
            ci = self._propagate()
            if ci is None and self.partial_checks:
                ci = self._partial_check()
            if ci is not None:
                ref = self._handle_conflict(ci)
                if ref is not None:
                    return SatResult(False, proof=ref, lemmas=self.lemma_log)
                continue
            lit = self._decide()
            if lit is not None:
                self.trail_lim.append(len(self.trail))
                self._assign(lit, None)
                continue
            # total assignment
            model = None
            if self.theory is not None:
                cons, lit_of = self._constraints()
                res = self.theory.check(cons, known=self.known_lemmas)
                if res.status == "unsat":
                    ci = self._theory_conflict(res.proof, lit_of, res.cert)
                    ref = self._handle_conflict(ci)
                    if ref is not None:
                        return SatResult(False, proof=ref, lemmas=self.lemma_log)
                    continue
                if res.status == "lemmas":
                    self._backtrack(0)
                    if not self._add_lemmas(res.lemmas):
                        raise ContractError("theory returned no new lemmas")
                    # rescan so the new clauses see the level-0 assignment
                    self.qhead = 0
                    self._checked_upto = -1
                    continue
                if res.status != "sat":
                    raise ContractError("theory hook returned no verdict")
                model = res.model
            assignment = {v: self.value[v] for v in sorted(self.value)}
            return SatResult(True, assignment=assignment, model=model, lemmas=self.lemma_log)


def solve(cnf: CnfFormula, theory: Optional[LazSolver] = None, **kw) -> SatResult:
    return SatSolver(cnf, theory, **kw).solve()
