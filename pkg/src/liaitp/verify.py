"""Independent checks for interpolants and a random problem generator.

``verify_interpolant`` re-runs the solver (interpolation mode off) on
A & ~I and I & B after removing ceilings and modular equalities.
``brute_force_check`` enumerates a bounded box with numpy and evaluates
ceilings and divisibility directly.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np

from .arith import (EQ, LE, MOD, TRUE_REL, Atom, BoolVar, ContractError, LinTerm, Var, eq, le,
                    normalize_atom)
from .formula import (BOT, TOP, And, BLit, CeilDiv, Const, ExtLe, Formula, Lit, Not, Or,
                      atom_formula, evaluate, mk_and, mk_not, mk_or, nnf, symbols)
from .interp import FreshVars, abstract_ceilings
from .problem import InterpolationProblem
from .solver import solve_groups

MAX_POINTS = 10 ** 7


class ResourceLimit(RuntimeError):
    pass


# ------------------------------------------------------------ encoding

def encode_mod(f: Formula, fresh: FreshVars) -> Formula:
    """NNF with modular equalities replaced by linear constraints over fresh k.

    (t =_g 0) becomes t - g*k = 0; its negation becomes 1 <= t - g*k <= g - 1.
    """
    def go(g: Formula) -> Formula:
        if isinstance(g, Lit) and g.atom.rel == MOD:
            k = fresh.new()
            return atom_formula(eq(g.atom.term - LinTerm.var(k, g.atom.mod)))
        if isinstance(g, Not) and isinstance(g.arg, Lit) and g.arg.atom.rel == MOD:
            a = g.arg.atom
            k = fresh.new()
            r = a.term - LinTerm.var(k, a.mod)
            return mk_and(atom_formula(le(-r + 1)), atom_formula(le(r - a.mod + 1)))
        if isinstance(g, And):
            return mk_and([go(x) for x in g.args])
        if isinstance(g, Or):
            return mk_or([go(x) for x in g.args])
        return g

    return go(nnf(f))


def solver_ready(f: Formula, fresh: FreshVars) -> Formula:
    """Remove ceilings (defining constraints conjoined at top level) and modular atoms."""
    ab = abstract_ceilings(f, fresh)
    body = encode_mod(ab.formula, fresh)
    return mk_and([body] + [atom_formula(a) for a in ab.defs])


# ------------------------------------------------------- verification

@dataclass
class VerifyReport:
    a_implies_i: bool
    i_and_b_unsat: bool
    symbols_ok: bool
    counterexample: Optional[Dict] = None
    failed: Optional[str] = None
    bad_symbols: List = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.a_implies_i and self.i_and_b_unsat and self.symbols_ok

    def __bool__(self):
        return self.ok


def _as_formula(x) -> Formula:
    if isinstance(x, Formula):
        return x
    return mk_and(list(x))


def _original(model: Dict, keep) -> Dict:
    return {v: q for v, q in model.items() if v in keep}


def _minimize(model: Dict, fs: Sequence[Formula]) -> Dict:
    """Greedy coordinate descent toward zero keeping all of ``fs`` true."""
    m = dict(model)
    for v in sorted((v for v in m if isinstance(v, Var)), key=lambda v: v.idx):
        while m[v] != 0:
            trial = dict(m)
            trial[v] = m[v] - 1 if m[v] > 0 else m[v] + 1
            if all(evaluate(f, trial) for f in fs):
                m = trial
            else:
                break
    return m


def verify_interpolant(A, B, I: Formula, step_limit: int = 200000) -> VerifyReport:
    A, B = _as_formula(A), _as_formula(B)
    sa, sb = symbols(A), symbols(B)
    bad = sorted((s for s in symbols(I) if not (s in sa and s in sb)), key=repr)
    fresh = FreshVars("_v")
    rep = VerifyReport(True, True, not bad, bad_symbols=bad)
    if bad:
        rep.failed = "symbol condition"
    keep = sa | sb
    out = solve_groups([A, solver_ready(mk_not(I), fresh)], step_limit=step_limit)
    if out.status == "sat":
        rep.a_implies_i = False
        rep.failed = rep.failed or "A does not imply I"
        rep.counterexample = _minimize(_original(out.model, keep), [A, mk_not(I)])
    out = solve_groups([solver_ready(I, fresh), B], step_limit=step_limit)
    if out.status == "sat":
        rep.i_and_b_unsat = False
        rep.failed = rep.failed or "I and B are consistent"
        if rep.counterexample is None:
            rep.counterexample = _minimize(_original(out.model, keep), [I, B])
    return rep


# -------------------------------------------------------- brute force

def _np_term(t: LinTerm, env) -> np.ndarray:
    """Values of t scaled by its denominator lcm (ceilings evaluated exactly)."""
    L = t.denom_lcm()
    total = None
    for m, c in t.coeffs:
        c = int(c * L)
        if isinstance(m, CeilDiv):
            inner = _np_term(m.inner, env)
            li = m.inner.denom_lcm()
            val = -((-inner) // (m.d * li))
        else:
            val = env[m]
        total = c * val if total is None else total + c * val
    const = int(t.const * L)
    if total is None:
        n = len(next(iter(env.values()))) if env else 1
        return np.full(n, const, dtype=np.int64)
    return total + const


def _np_eval(f: Formula, env, n: int) -> np.ndarray:
    if isinstance(f, Const):
        return np.full(n, f.value, dtype=bool)
    if isinstance(f, Lit):
        a = f.atom
        if a.rel == TRUE_REL:
            return np.ones(n, dtype=bool)
        if a.is_marker():
            return np.zeros(n, dtype=bool)
        v = _np_term(a.term, env)
        if a.rel == LE:
            return v <= 0
        if a.rel == EQ:
            return v == 0
        L = a.term.denom_lcm()
        return v % (a.mod * L) == 0
    if isinstance(f, ExtLe):
        return _np_term(f.term, env) <= 0
    if isinstance(f, BLit):
        return env[f.var].astype(bool)
    if isinstance(f, Not):
        return ~_np_eval(f.arg, env, n)
    if isinstance(f, And):
        out = np.ones(n, dtype=bool)
        for a in f.args:
            out &= _np_eval(a, env, n)
        return out
    if isinstance(f, Or):
        out = np.zeros(n, dtype=bool)
        for a in f.args:
            out |= _np_eval(a, env, n)
        return out
    raise ContractError(f"cannot evaluate {f!r}")


def _points(syms, box: int, chunk: int = 1 << 18):
    """Yield (env, n) chunks enumerating [-box, box]^ints x {0,1}^bools."""
    ints = sorted((s for s in syms if isinstance(s, Var)), key=lambda v: v.idx)
    bools = sorted((s for s in syms if isinstance(s, BoolVar)), key=lambda b: b.name)
    sizes = [2 * box + 1] * len(ints) + [2] * len(bools)
    total = 1
    for s in sizes:
        total *= s
    if total > MAX_POINTS:
        raise ResourceLimit(f"box has {total} points (limit {MAX_POINTS})")
    order = ints + bools
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        env = {}
        for s, size in zip(reversed(order), reversed(sizes)):
            idx, r = np.divmod(idx, size)
            env[s] = r - box if isinstance(s, Var) else r
        yield env, len(next(iter(env.values()))) if env else 1, order


def _point(env, order, i) -> Dict:
    out = {}
    for s in order:
        val = int(env[s][i])
        out[s] = bool(val) if isinstance(s, BoolVar) else Fraction(val)
    return out


def brute_find(f: Formula, box: int, syms=None) -> Optional[Dict]:
    """A satisfying point of f inside the box, or None."""
    syms = symbols(f) if syms is None else syms
    if not syms:
        return {} if evaluate(f, {}) else None
    for env, n, order in _points(syms, box):
        hit = np.nonzero(_np_eval(f, env, n))[0]
        if len(hit):
            return _point(env, order, int(hit[0]))
    return None


@dataclass
class BruteReport:
    ok: bool
    failed: Optional[str] = None
    point: Optional[Dict] = None

    def __bool__(self):
        return self.ok


def brute_force_check(A, B, I: Formula, box: int) -> BruteReport:
    """Enumerate the box: no point satisfies A & ~I, and none satisfies I & B."""
    A, B = _as_formula(A), _as_formula(B)
    syms = symbols(A) | symbols(B) | symbols(I)
    if brute_find(mk_and(A, B), box, syms) is not None:
        return BruteReport(False, "A and B are consistent: no interpolant exists",
                           brute_find(mk_and(A, B), box, syms))
    p = brute_find(mk_and(A, mk_not(I)), box, syms)
    if p is not None:
        return BruteReport(False, "A does not imply I", p)
    p = brute_find(mk_and(I, B), box, syms)
    if p is not None:
        return BruteReport(False, "I and B are consistent", p)
    return BruteReport(True)


# ------------------------------------------------------------ random

def gen_random_problem(seed: int, nvars: int = 4, ncons: int = 6, coeff: int = 10, box: int = 8,
                       ngroups: int = 2, p_eq: float = 0.2, p_or: float = 0.15) -> InterpolationProblem:
    """Deterministic random problem; every variable carries explicit box bounds.

    Each variable lives on a span of consecutive groups; a constraint placed
    in group g only uses variables whose span contains g.  The first
    variable is local to the first group, and about 40% of the constraints
    go to the first group when there are two groups.
    """
    if min(nvars, ncons, coeff, box, ngroups) <= 0:
        raise ContractError("parameters must be positive")
    rng = random.Random(seed)
    vs = [Var(i, f"v{i}") for i in range(nvars)]
    spans = []
    for i in range(nvars):
        if i == 0:
            spans.append((0, 0))
            continue
        lo = rng.randrange(ngroups)
        hi = min(ngroups - 1, lo + rng.randrange(2))
        spans.append((lo, hi))
    cons: List[List[Formula]] = [[] for _ in range(ngroups)]

    def pick_group():
        if ngroups == 2:
            return 0 if rng.random() < 0.4 else 1
        return rng.randrange(ngroups)

    def rand_atom(g):
        allowed = [v for v, (lo, hi) in zip(vs, spans) if lo <= g <= hi]
        if not allowed:
            return None
        k = rng.randint(1, min(3, len(allowed)))
        chosen = rng.sample(allowed, k)
        t = LinTerm([(v, rng.choice([c for c in range(-coeff, coeff + 1) if c])) for v in chosen],
                    rng.randint(-coeff, coeff))
        a = normalize_atom(t, "=" if rng.random() < p_eq else "<=")
        return atom_formula(a)

    made = 0
    tries = 0
    while made < ncons and tries < 20 * ncons:
        tries += 1
        g = pick_group()
        f = rand_atom(g)
        if f is None:
            continue
        if rng.random() < p_or:
            h = rand_atom(g)
            if h is not None:
                f = mk_or(f, h)
        cons[g].append(f)
        made += 1
    for v, (lo, hi) in zip(vs, spans):
        x = LinTerm.var(v)
        cons[lo].append(atom_formula(le(x - box)))
        cons[lo].append(atom_formula(le(-x - box)))
    groups = [mk_and(c) for c in cons]
    return InterpolationProblem(ints=vs, groups=groups, names=[f"g{i + 1}" for i in range(ngroups)])
