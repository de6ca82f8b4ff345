"""Acceptance run: one PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -v`` (lines are printed even under
capture) or ``python tests/test_acceptance.py`` for just the summary.
"""
import functools
import os
import random
import sys
import time

sys.path.insert(0, os.path.dirname(__file__))

from liaitp.cli import bench_one
from liaitp.cnf import cnf_encode
from liaitp.formula import BOT, TOP, count_mod_disjuncts, dag_size, mk_and, mk_not, mk_or
from liaitp.interp import FreshVars, ItpContext, ModEqTrace, bool_combine, mixed_predicate
from liaitp.proof_io import dump_proof, load_proof
from liaitp.proofs import ResLeaf, bnb_to_resolution, check_res_proof, resolve
from liaitp.solver import solve_groups
from liaitp.verify import (brute_find, brute_force_check, gen_random_problem, solver_ready,
                           verify_interpolant)
import cases
from conftest import conj

PROPERTY_SEEDS = 500
CHAINS = 50
BENCH_SEEDS = 500
SIZE_NS = (2, 4, 8, 16, 32, 64)


def emit(capsys, name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return ok


def equivalent(f, g, box, syms=None):
    diff = mk_or(mk_and(f, mk_not(g)), mk_and(g, mk_not(f)))
    return brute_find(diff, box, syms) is None


def timed(fn):
    t0 = time.perf_counter()
    ok = fn()
    return bool(ok), time.perf_counter() - t0


def solve_pair(A, B):
    out = solve_groups([A, B], interpolating=True)
    assert out.status == "unsat"
    return out


# ---------------------------------------------------------------- 1

def reg_intro():
    A, B, want = cases.intro()
    out = solve_pair(A, B)
    return all(verify_interpolant(A, B, I) and equivalent(I, want, 8)
               for I in (out.interpolant(1, "modeq"), out.interpolant(1, "ceil")))


def reg_int_equalities():
    A, B, want = cases.int_equalities()
    I = solve_pair(A, B).interpolant(1, "modeq")
    return verify_interpolant(A, B, I) and equivalent(I, want, 2)


def reg_itp_app():
    A, B, _ = cases.itp_app()
    I = solve_pair(A, B).interpolant(1, "modeq")
    return count_mod_disjuncts(I) == 5 and verify_interpolant(A, B, I)


def reg_conditional_strengthen():
    A, B, want = cases.conditional_strengthen()
    tr = ModEqTrace()
    I = solve_pair(A, B).interpolant(1, "modeq", trace=tr)
    return tr.conditional >= 1 and verify_interpolant(A, B, I) and equivalent(I, want, 6)


def reg_ceiling():
    A, B, want = cases.ceiling_example()
    I = solve_pair(A, B).interpolant(1, "ceil")
    return verify_interpolant(A, B, I) and equivalent(I, want, 8)


def reg_bnb():
    groups = [conj(*cases.BNB_A), conj(*cases.BNB_B)]
    cnf = cnf_encode(groups)
    root = bnb_to_resolution(cases.bnb_tree(), cnf.table)
    units = {c.lits[0]: c for c in cnf.clauses if len(c.lits) == 1}
    for l in root.clause:
        c = units[-l]
        root = resolve(ResLeaf(c.lits, c.origin), root, abs(l))
    if root.clause or not check_res_proof(root, cnf.table, [c.lits for c in cnf.clauses]):
        return False
    ctx = ItpContext(cnf, groups, [1])
    want = set(conj(*cases.BNB_WANT).args)
    return all(set(bool_combine(root, ctx, engine=e).args) == want for e in ("ceil", "modeq"))


REGRESSIONS = [("1a intro", reg_intro), ("1b int_equalities", reg_int_equalities),
               ("1c itp_app", reg_itp_app), ("1d conditional strengthen", reg_conditional_strengthen),
               ("1e ceiling", reg_ceiling), ("1f branch-and-bound", reg_bnb)]


def criterion_1(capsys=None):
    ok_all = True
    for name, fn in REGRESSIONS:
        ok, dt = timed(fn)
        ok = ok and dt < 1.0
        ok_all &= emit(capsys, f"criterion {name}", ok, f"{dt:.3f}s")
    return ok_all


# ---------------------------------------------------------------- 2

def criterion_2(capsys=None):
    t0 = time.perf_counter()
    rows, ok = [], True
    for n in SIZE_NS:
        A, B, want = cases.parametric(n)
        out = solve_pair(A, B)
        k = count_mod_disjuncts(out.interpolant(1, "modeq"))
        s = dag_size(out.interpolant(1, "ceil"))
        ok &= k >= n and s <= 25
        rows.append(f"n={n}:{k}/{s}")
    dt = time.perf_counter() - t0
    ok = ok and dt < 10.0
    return emit(capsys, "criterion 2 size separation (modeq disjuncts/ceil dag)", ok,
                " ".join(rows) + f" in {dt:.2f}s")


# ---------------------------------------------------------------- 3 and 5

@functools.lru_cache(maxsize=None)
def property_suite(n_seeds=PROPERTY_SEEDS):
    """Run the random property suite once; criteria 3 and 5 read the result."""
    t0 = time.perf_counter()
    fails, mixed, unsat, lemmas = [], 0, 0, 0
    for seed in range(n_seeds):
        rng = random.Random(seed)
        p = gen_random_problem(seed, nvars=rng.randint(2, 5), ncons=rng.randint(2, 8))
        out = solve_groups(p.groups, interpolating=True)
        model = brute_find(mk_and(p.groups), 8)
        if (out.status == "sat") != (model is not None):
            fails.append((seed, "verdict"))
            continue
        is_mixed = mixed_predicate(p.groups)
        for lem, _ in out.lemmas:
            lemmas += 1
            mixed += sum(1 for a in lem.atoms() if is_mixed(a.term))
        if out.status == "sat":
            continue
        unsat += 1
        inputs = [c.lits for c in out.cnf.clauses]
        if not check_res_proof(out.proof, out.cnf.table, inputs):
            fails.append((seed, "proof"))
        text = dump_proof(out.proof, out.cnf.table, [(c.origin.group, c.lits) for c in out.cnf.clauses])
        if not load_proof(text).check():
            fails.append((seed, "proof file"))
        A, B = p.split(1)
        for engine in ("ceil", "modeq"):
            I = out.interpolant(1, engine)
            if not verify_interpolant(A, B, I):
                fails.append((seed, engine, "verify"))
            if not brute_force_check(A, B, I, 8):
                fails.append((seed, engine, "brute"))
    return dict(fails=fails, mixed=mixed, unsat=unsat, lemmas=lemmas, time=time.perf_counter() - t0)


def criterion_3(capsys=None):
    r = property_suite()
    ok = not r["fails"] and r["time"] < 300
    return emit(capsys, "criterion 3 property suite", ok,
                f"{PROPERTY_SEEDS} instances, {r['unsat']} unsat, failures {r['fails'][:5]} "
                f"in {r['time']:.1f}s")


def criterion_5(capsys=None):
    r = property_suite()
    return emit(capsys, "criterion 5 lemma purity", r["mixed"] == 0,
                f"{r['mixed']} mixed atoms in {r['lemmas']} lemmas")


# ---------------------------------------------------------------- 4

def chain_instances(count=CHAINS):
    """4-group unsat chains where no single group is unsat by itself."""
    seed = 0
    while count:
        p = gen_random_problem(seed, nvars=5, ncons=8, ngroups=4)
        seed += 1
        out = solve_groups(p.groups, interpolating=True)
        if out.status != "unsat" or any(solve_groups([g]).status == "unsat" for g in p.groups):
            continue
        count -= 1
        yield seed - 1, p, out


def criterion_4(capsys=None):
    # default engine only: on some chains the modeq engine yields hundreds of
    # modular disjuncts, which the solver-based check cannot handle
    t0 = time.perf_counter()
    bad, n = [], 0
    for seed, p, out in chain_instances():
        n += 1
        I = [TOP] + out.sequence("ceil") + [BOT]
        for i, g in enumerate(p.groups):
            fresh = FreshVars("_s")
            r = solve_groups([solver_ready(I[i], fresh), g, solver_ready(mk_not(I[i + 1]), fresh)])
            if r.status != "unsat":
                bad.append((seed, i))
    return emit(capsys, "criterion 4 sequence interpolants", n == CHAINS and not bad,
                f"{n} chains, failures {bad[:5]} in {time.perf_counter() - t0:.1f}s")


# ---------------------------------------------------------------- 6

def criterion_6(capsys=None):
    t0 = time.perf_counter()
    params = dict(nvars=4, ncons=6, coeff=10, box=8)
    rows = [bench_one((s, "ceil", 10.0, params)) for s in range(BENCH_SEEDS)]
    timeouts = [r[0] for r in rows if r[1] in ("timeout", "unknown")]
    failed = [r[0] for r in rows if r[4] == "FAIL"]
    slowest = max(float(r[3]) for r in rows)
    return emit(capsys, "criterion 6 bench smoke", not timeouts and not failed,
                f"{BENCH_SEEDS} instances, timeouts {timeouts}, verify failures {failed}, "
                f"slowest {slowest:.2f}s, total {time.perf_counter() - t0:.1f}s")


# ---------------------------------------------------------------- pytest

def test_criterion_1_regressions(capsys):
    assert criterion_1(capsys)


def test_criterion_2_size_separation(capsys):
    assert criterion_2(capsys)


def test_criterion_3_property_suite(capsys):
    assert criterion_3(capsys)


def test_criterion_4_sequence_interpolants(capsys):
    assert criterion_4(capsys)


def test_criterion_5_lemma_purity(capsys):
    assert criterion_5(capsys)


def test_criterion_6_bench_smoke(capsys):
    assert criterion_6(capsys)


if __name__ == "__main__":
    results = [c() for c in (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6)]
    sys.exit(0 if all(results) else 1)
