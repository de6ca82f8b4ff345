"""Interpolation problems: declarations plus ordered formula groups."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set

from .arith import BoolVar, Var
from .formula import Formula, mk_and, symbols


@dataclass
class InterpolationProblem:
    ints: List[Var] = field(default_factory=list)
    bools: List[BoolVar] = field(default_factory=list)
    groups: List[Formula] = field(default_factory=list)
    names: List[str] = field(default_factory=list)
    queries: List[List[str]] = field(default_factory=list)   # get-interpolant group lists
    check_sat: bool = False

    def occurrences(self) -> Dict[object, Set[int]]:
        occ: Dict[object, Set[int]] = {}
        for i, f in enumerate(self.groups):
            for s in symbols(f):
                occ.setdefault(s, set()).add(i)
        return occ

    def split(self, n_a: int):
        """(A, B) conjunctions for the prefix cut after n_a groups."""
        return mk_and(self.groups[:n_a]), mk_and(self.groups[n_a:])

    def cut_for(self, names: List[str]) -> int:
        """Prefix length for a get-interpolant query; the listed groups must form a prefix."""
        idx = sorted(self.names.index(n) for n in names)
        if idx != list(range(len(idx))):
            raise ValueError("get-interpolant groups must be a prefix of the group order")
        return len(idx)

    def group(self, name: str) -> Optional[Formula]:
        return self.groups[self.names.index(name)] if name in self.names else None
