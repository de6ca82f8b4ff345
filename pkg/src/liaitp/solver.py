"""Top-level solving: CNF encoding, CDCL with the LA(Z) theory, checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from .arith import BoolVar, ContractError, Var
from .cnf import CnfFormula, cnf_encode
from .formula import Formula, evaluate, symbols
from .interp import interpolant, mixed_predicate, sequence_interpolants
from .laz import LazConfig, LazSolver, LazStats
from .proofs import check_res_proof
from .sat import SatSolver


@dataclass
class SolveOutcome:
    status: str                                  # sat | unsat
    groups: List[Formula]
    cnf: CnfFormula
    model: Optional[Dict] = None
    proof: object = None
    stats: Dict = field(default_factory=dict)
    lemmas: List = field(default_factory=list)

    def interpolant(self, n_a: int, engine: str = "ceil", trace=None) -> Formula:
        if self.status != "unsat":
            raise ContractError("no interpolant: the formula is satisfiable")
        return interpolant(self.proof, self.cnf, self.groups, n_a, engine, trace)

    def sequence(self, engine: str = "ceil") -> List[Formula]:
        if self.status != "unsat":
            raise ContractError("no interpolant: the formula is satisfiable")
        return sequence_interpolants(self.proof, self.cnf, self.groups, engine)


def solve_groups(groups: Sequence[Formula], interpolating: bool = False,
                 config: Optional[LazConfig] = None, step_limit: int = 200000,
                 check: bool = True, seed: Optional[int] = None) -> SolveOutcome:
    """Decide the conjunction of ``groups``.

    In interpolating mode the theory never emits lemmas over terms that mix
    local symbols of two sides of any prefix cut.
    """
    groups = list(groups)
    cnf = cnf_encode(groups)
    stats = LazStats()
    if interpolating:
        theory = LazSolver(config, "interpolating", mixed_predicate(groups), stats)
    else:
        theory = LazSolver(config, "plain", None, stats)
    sat = SatSolver(cnf, theory, step_limit=step_limit, seed=seed)
    res = sat.solve()
    st = stats.as_dict()
    st.update(decisions_and_conflicts=sat.steps, learned=sum(1 for c in sat.clauses if c.learnt),
              lemmas=len(sat.lemma_log))
    if res.sat:
        model = _full_model(groups, res, cnf)
        if check:
            for i, f in enumerate(groups):
                if not evaluate(f, model):
                    raise AssertionError(f"internal error: model violates group {i}")
        return SolveOutcome("sat", groups, cnf, model=model, stats=st, lemmas=res.lemmas)
    if check:
        r = check_res_proof(res.proof, cnf.table, [c.lits for c in cnf.clauses])
        if not r:
            raise AssertionError(f"internal error: bad refutation ({r.reason})")
    return SolveOutcome("unsat", groups, cnf, proof=res.proof, stats=st, lemmas=res.lemmas)


def _full_model(groups, res, cnf) -> Dict:
    model: Dict = {}
    for f in groups:
        for s in symbols(f):
            if isinstance(s, Var):
                model[s] = Fraction(0)
            elif isinstance(s, BoolVar):
                model[s] = False
    for v, q in (res.model or {}).items():
        model[v] = q
    for i, val in (res.assignment or {}).items():
        k = cnf.table.key(i)
        if isinstance(k, BoolVar):
            model[k] = val
    return model
