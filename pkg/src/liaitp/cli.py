"""Command line entry point.

    liaitp solve FILE [--engine ceil|modeq] [--check] [--check-brute N]
                      [--dump-proof FILE] [--dump-cnf FILE] [--seq] [--stats] [--seed N]
    liaitp check-proof FILE
    liaitp bench --seeds N [--engine ceil|modeq] [--jobs J] [--timeout S] [--out FILE]

Exit status: 0 sat (or success), 20 unsat, 1 error or failed check, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import signal
import sys
import time
from multiprocessing import Pool
from typing import List, Optional

from .arith import ContractError
from .formula import dag_size
from .parser import ParseError, parse_problem
from .printer import print_formula
from .proof_io import dump_proof, load_proof
from .sat import ResourceLimit
from .solver import solve_groups
from .verify import ResourceLimit as BoxTooLarge
from .verify import brute_force_check, gen_random_problem, verify_interpolant

EXIT_SAT, EXIT_UNSAT, EXIT_ERROR, EXIT_USAGE = 0, 20, 1, 2
BENCH_COLUMNS = ["seed", "verdict", "itp-size", "solve-time", "verify"]


def _err(msg):
    print(f"error: {msg}", file=sys.stderr)


def _queries(prob, seq: bool):
    """Prefix lengths n_a to answer, in order."""
    if seq:
        return list(range(1, len(prob.groups)))
    return [prob.cut_for(q) for q in prob.queries]


def _check_one(A, B, I, args) -> bool:
    ok = True
    if args.check:
        rep = verify_interpolant(A, B, I)
        if not rep:
            _err(f"interpolant check failed: {rep.failed}"
                 + (f" at {_fmt_point(rep.counterexample)}" if rep.counterexample else ""))
            ok = False
    if args.check_brute is not None:
        try:
            rep = brute_force_check(A, B, I, args.check_brute)
        except BoxTooLarge as e:
            _err(f"brute-force check skipped: {e}")
            return ok
        if not rep:
            _err(f"brute-force check failed: {rep.failed} at {_fmt_point(rep.point)}")
            ok = False
    return ok


def _fmt_point(p) -> str:
    return "{" + ", ".join(f"{k!r}={v}" for k, v in sorted(p.items(), key=lambda kv: repr(kv[0]))) + "}"


def cmd_solve(args) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            prob = parse_problem(fh.read())
    except OSError as e:
        _err(str(e))
        return EXIT_ERROR
    except ParseError as e:
        _err(str(e))
        return EXIT_ERROR
    if not prob.groups:
        _err("no assertions")
        return EXIT_ERROR
    try:
        queries = _queries(prob, args.seq)
    except ValueError as e:
        _err(str(e))
        return EXIT_ERROR
    interpolating = bool(queries) and len(prob.groups) >= 2
    try:
        out = solve_groups(prob.groups, interpolating=interpolating, seed=args.seed)
    except ResourceLimit as e:
        _err(f"resource limit: {e}")
        return EXIT_ERROR
    except ContractError as e:
        _err(str(e))
        return EXIT_ERROR
    if args.dump_cnf:
        with open(args.dump_cnf, "w", encoding="utf-8") as fh:
            fh.write(out.cnf.to_dimacs())
    print(out.status)
    if args.stats:
        for k, v in sorted(out.stats.items()):
            print(f"; {k}: {v}", file=sys.stderr)
    if out.status == "sat":
        return EXIT_SAT
    if args.dump_proof:
        with open(args.dump_proof, "w", encoding="utf-8") as fh:
            fh.write(dump_proof(out.proof, out.cnf.table,
                                [(c.origin.group, c.lits) for c in out.cnf.clauses]))
    ok = True
    for n_a in queries:
        I = out.interpolant(n_a, args.engine)
        print(print_formula(I))
        if args.check or args.check_brute is not None:
            A, B = prob.split(n_a)
            ok = _check_one(A, B, I, args) and ok
    if (args.check or args.check_brute is not None) and queries and ok:
        print("; verified", file=sys.stderr)
    return EXIT_UNSAT if ok else EXIT_ERROR


def cmd_check_proof(args) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            lp = load_proof(fh.read())
    except OSError as e:
        _err(str(e))
        return EXIT_ERROR
    except ContractError as e:
        _err(f"malformed proof: {e}")
        return EXIT_ERROR
    res = lp.check()
    if res:
        print("Ok")
        return 0
    print(f"Invalid: {res.reason}")
    return EXIT_ERROR


class _Timeout(Exception):
    pass


def _alarm(signum, frame):
    raise _Timeout()


def bench_one(job) -> List:
    """One CSV row.  Runs in a worker; the timeout uses SIGALRM."""
    seed, engine, timeout, params = job
    prob = gen_random_problem(seed, **params)
    use_alarm = timeout and hasattr(signal, "setitimer")
    if use_alarm:
        signal.signal(signal.SIGALRM, _alarm)
        signal.setitimer(signal.ITIMER_REAL, timeout)
    t0 = time.perf_counter()
    try:
        out = solve_groups(prob.groups, interpolating=True)
        size, verdict_ok = "", ""
        if out.status == "unsat":
            I = out.interpolant(1, engine)
            size = dag_size(I)
            A, B = prob.split(1)
            elapsed = time.perf_counter() - t0
            verdict_ok = "ok" if verify_interpolant(A, B, I) else "FAIL"
        else:
            elapsed = time.perf_counter() - t0
        return [seed, out.status, size, f"{elapsed:.4f}", verdict_ok]
    except _Timeout:
        return [seed, "timeout", "", f"{time.perf_counter() - t0:.4f}", ""]
    except ResourceLimit:
        return [seed, "unknown", "", f"{time.perf_counter() - t0:.4f}", ""]
    finally:
        if use_alarm:
            signal.setitimer(signal.ITIMER_REAL, 0)


def cmd_bench(args) -> int:
    params = dict(nvars=args.nvars, ncons=args.ncons, coeff=args.coeff, box=args.box)
    jobs = [(args.start + i, args.engine, args.timeout, params) for i in range(args.seeds)]
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(BENCH_COLUMNS)
        if args.jobs > 1:
            with Pool(args.jobs) as pool:
                rows = pool.imap(bench_one, jobs)
                failed = _write_rows(w, rows)
        else:
            failed = _write_rows(w, map(bench_one, jobs))
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_ERROR if failed else 0


def _write_rows(w, rows) -> int:
    failed = 0
    for row in rows:
        w.writerow(row)
        failed += row[4] == "FAIL"
    return failed


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="liaitp", description="LIA solving and Craig interpolation.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("solve", help="decide a problem and answer get-interpolant queries")
    s.add_argument("file")
    s.add_argument("--engine", choices=["ceil", "modeq"], default="ceil")
    s.add_argument("--check", action="store_true", help="verify interpolants with the solver")
    s.add_argument("--check-brute", type=int, metavar="N", help="verify on the box [-N, N]")
    s.add_argument("--dump-proof", metavar="FILE")
    s.add_argument("--dump-cnf", metavar="FILE", help="DIMACS-like dump of the abstracted CNF")
    s.add_argument("--seq", action="store_true", help="print the interpolant of every prefix cut")
    s.add_argument("--stats", action="store_true")
    s.add_argument("--seed", type=int, help="seed for the initial decision order")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("check-proof", help="check a proof written by --dump-proof")
    c.add_argument("file")
    c.set_defaults(func=cmd_check_proof)

    b = sub.add_parser("bench", help="random instances, CSV to stdout")
    b.add_argument("--seeds", type=int, required=True)
    b.add_argument("--start", type=int, default=0, help="first seed")
    b.add_argument("--engine", choices=["ceil", "modeq"], default="ceil")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--timeout", type=float, default=10.0, help="seconds per instance")
    b.add_argument("--nvars", type=int, default=4)
    b.add_argument("--ncons", type=int, default=6)
    b.add_argument("--coeff", type=int, default=10)
    b.add_argument("--box", type=int, default=8)
    b.add_argument("--out", metavar="FILE")
    b.set_defaults(func=cmd_bench)
    return ap


def run_cli(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else 0
    return args.func(args)


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
