"""Clause-level representation: atom table, clauses and Tseitin encoding.

Literals are signed ints; ``abs(lit)`` is an atom id into the table.  An
atom id stands for an arithmetic ``Atom``, a ``BoolVar`` or a Tseitin
definition variable.  Distinct arithmetic atoms always get distinct ids,
even when one is the integer negation of the other; the solver links
them through theory conflicts and lemmas.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

from .arith import EQ, LE, MOD, Atom, BoolVar, ContractError, negate_le
from .formula import (And, BLit, Const, ExtLe, Formula, Lit, Not, Or, nnf)
from .proofs import Origin


@dataclass(frozen=True)
class TseitinVar:
    n: int
    group: int

    def __repr__(self):
        return f"_t{self.n}"


class AtomTable:
    def __init__(self):
        self.keys: List[object] = [None]
        self.index: Dict[object, int] = {}
        self._tseitin = 0

    def intern(self, key) -> int:
        i = self.index.get(key)
        if i is None:
            i = len(self.keys)
            self.keys.append(key)
            self.index[key] = i
        return i

    def lookup(self, key) -> Optional[int]:
        return self.index.get(key)

    def fresh(self, group: int) -> int:
        self._tseitin += 1
        return self.intern(TseitinVar(self._tseitin, group))

    def key(self, i: int):
        return self.keys[abs(i)]

    def __len__(self):
        return len(self.keys) - 1

    def is_arith(self, i: int) -> bool:
        return isinstance(self.keys[abs(i)], Atom)

    def constraint(self, lit: int) -> Optional[Atom]:
        """The arithmetic constraint a true literal asserts, or None.

        Negated equalities are not constraints: the companion clause
        (t = 0) | (t + 1 <= 0) | (-t + 1 <= 0) handles them.
        """
        a = self.keys[abs(lit)]
        if not isinstance(a, Atom):
            return None
        if lit > 0:
            return a if a.rel in (LE, EQ) else None
        if a.rel == LE:
            return negate_le(a)
        return None

    def fmt_lit(self, lit: int) -> str:
        k = self.keys[abs(lit)]
        return ("~" if lit < 0 else "") + repr(k)


@dataclass
class Clause:
    lits: tuple
    origin: Origin

    def __post_init__(self):
        if len(set(self.lits)) != len(self.lits):
            raise ContractError("duplicate literal in clause")
        if self.origin is None:
            raise ContractError("clause without origin")


@dataclass
class CnfFormula:
    clauses: List[Clause] = field(default_factory=list)
    table: AtomTable = field(default_factory=AtomTable)
    ngroups: int = 1

    def to_dimacs(self) -> str:
        lines = [f"p cnf {len(self.table)} {len(self.clauses)}"]
        for i, k in enumerate(self.table.keys[1:], 1):
            lines.append(f"c {i} {k!r}")
        for c in self.clauses:
            lines.append(" ".join(map(str, c.lits)) + " 0")
        return "\n".join(lines) + "\n"


class UnsupportedInput(ContractError):
    pass


def _leaf_lit(f: Formula, table: AtomTable) -> Optional[int]:
    if isinstance(f, Lit):
        if f.atom.rel == MOD:
            raise UnsupportedInput("modular equalities are not accepted by the solver")
        return table.intern(f.atom)
    if isinstance(f, BLit):
        return table.intern(f.var)
    if isinstance(f, Not) and isinstance(f.arg, BLit):
        return -table.intern(f.arg.var)
    if isinstance(f, Not) and isinstance(f.arg, Lit):
        raise UnsupportedInput("negated modular equality in solver input")
    if isinstance(f, ExtLe):
        raise UnsupportedInput("ceiling terms must be eliminated before solving")
    return None


def _add(cnf: CnfFormula, lits, group: int, seen):
    s = set(lits)
    if any(-l in s for l in s):
        return
    key = (frozenset(s), group)
    if key in seen:
        return
    seen.add(key)
    cnf.clauses.append(Clause(tuple(sorted(s, key=lambda l: (abs(l), l < 0))), Origin("group", group=group)))


def cnf_encode(groups: Union[Formula, Sequence[Formula]], table: Optional[AtomTable] = None) -> CnfFormula:
    """Plaisted-Greenbaum style encoding, one origin tag per group."""
    if isinstance(groups, Formula):
        groups = [groups]
    cnf = CnfFormula(table=table or AtomTable(), ngroups=len(groups))
    seen = set()
    for g, f in enumerate(groups):
        cache: Dict[Formula, int] = {}

        def enc(h: Formula) -> int:
            lit = _leaf_lit(h, cnf.table)
            if lit is not None:
                return lit
            if h in cache:
                return cache[h]
            x = cnf.table.fresh(g)
            cache[h] = x
            if isinstance(h, And):
                for a in h.args:
                    _add(cnf, [-x, enc(a)], g, seen)
            elif isinstance(h, Or):
                _add(cnf, [-x] + [enc(a) for a in h.args], g, seen)
            else:
                raise UnsupportedInput(f"cannot encode {h!r}")
            return x

        def top(h: Formula):
            if isinstance(h, Const):
                if not h.value:
                    cnf.clauses.append(Clause((), Origin("group", group=g)))
                return
            if isinstance(h, And):
                for a in h.args:
                    top(a)
                return
            if isinstance(h, Or):
                _add(cnf, [enc(a) for a in h.args], g, seen)
                return
            _add(cnf, [enc(h)], g, seen)

        top(nnf(f))
    return cnf
