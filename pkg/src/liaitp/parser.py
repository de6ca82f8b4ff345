"""Reader for the SMT-LIB subset used by the CLI.

Accepted commands: set-logic, set-option, set-info, declare-fun,
declare-const, assert (optionally annotated with ``:itp-group``),
check-sat, get-interpolant, exit.  Terms use + - * <= < >= > = and or not
ite => distinct, integer literals, plus the two interpolant extensions
``(cdiv t d)`` and ``((_ divisible g) t)``.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Tuple, Union

from .arith import BoolVar, ContractError, LinTerm, Var, normalize_atom
from .formula import (BOT, TOP, BLit, Formula, atom_formula, ceil_term, ext_le, has_ceil, mk_and,
                      mk_not, mk_or)
from .problem import InterpolationProblem


class ParseError(ContractError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line, self.col = line, col


class Sym(str):
    """Symbol token with its source position."""

    line = 0
    col = 0


def _tok(text: str, line: int, col: int):
    s = Sym(text)
    s.line, s.col = line, col
    return s


def read_sexprs(text: str) -> List:
    out: List = []
    stack: List[List] = []
    opens: List[Tuple[int, int]] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "(":
            stack.append([])
            opens.append((line, col))
            i += 1
            col += 1
            continue
        if ch == ")":
            if not stack:
                raise ParseError("unbalanced ')'", line, col)
            done = stack.pop()
            opens.pop()
            (stack[-1] if stack else out).append(done)
            i += 1
            col += 1
            continue
        if ch == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise ParseError("unterminated quoted symbol", line, col)
            tok = _tok(text[i + 1:j], line, col)
            col += j + 1 - i
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();":
                j += 1
            tok = _tok(text[i:j], line, col)
            col += j - i
            i = j
        (stack[-1] if stack else out).append(tok)
    if stack:
        ln, cl = opens[-1]
        raise ParseError("unbalanced '('", ln, cl)
    return out


def _pos(x):
    while isinstance(x, list) and x:
        x = x[0]
    return (getattr(x, "line", 0), getattr(x, "col", 0))


def _err(msg, x):
    ln, cl = _pos(x)
    return ParseError(msg, ln, cl)


def _is_int(s) -> bool:
    return isinstance(s, str) and s.isdigit()


Cases = List[Tuple[Formula, LinTerm]]


class _Reader:
    def __init__(self, ints: Dict[str, Var], bools: Dict[str, BoolVar], extended: bool = True):
        self.ints = ints
        self.bools = bools
        self.extended = extended

    # ---------------------------------------------------------- terms
    def term(self, x) -> Cases:
        """Integer term as a list of (condition, linear term) cases (for ite)."""
        if isinstance(x, str):
            if _is_int(x):
                return [(TOP, LinTerm.constant(int(x)))]
            if x in self.ints:
                return [(TOP, LinTerm.var(self.ints[x]))]
            if x in self.bools:
                raise _err(f"Boolean '{x}' used as an integer", x)
            raise _err(f"undeclared symbol '{x}'", x)
        if not x:
            raise _err("empty term", x)
        head = x[0]
        args = x[1:]
        if head == "+":
            return self._fold(args, lambda a, b: a + b)
        if head == "-":
            if len(args) == 1:
                return [(c, -t) for c, t in self.term(args[0])]
            return self._fold(args, lambda a, b: a - b)
        if head == "*":
            return self._fold(args, lambda a, b: self._mul(a, b, x), x)
        if head == "/" and len(args) == 2 and _is_int(args[0]) and _is_int(args[1]):
            return [(TOP, LinTerm.constant(Fraction(int(args[0]), int(args[1]))))]
        if head == "ite":
            if len(args) != 3:
                raise _err("ite takes three arguments", x)
            c = self.formula(args[0])
            return ([(mk_and(c, g), t) for g, t in self.term(args[1])] +
                    [(mk_and(mk_not(c), g), t) for g, t in self.term(args[2])])
        if head == "cdiv" and self.extended:
            if len(args) != 2 or not _is_int(args[1]) or int(args[1]) <= 0:
                raise _err("cdiv takes a term and a positive integer literal", x)
            d = int(args[1])
            return [(c, ceil_term(t, d)) for c, t in self.term(args[0])]
        raise _err(f"unsupported term operator '{head}'", x)

    def _mul(self, a: LinTerm, b: LinTerm, where=None):
        if a.is_const():
            return b * a.const
        if b.is_const():
            return a * b.const
        raise _err("nonlinear multiplication", where)

    def _fold(self, args, op, where=None):
        if not args:
            raise _err("operator needs arguments", where)
        acc = self.term(args[0])
        for a in args[1:]:
            nxt = self.term(a)
            out = []
            for c1, t1 in acc:
                for c2, t2 in nxt:
                    c = mk_and(c1, c2)
                    if c == BOT:
                        continue
                    out.append((c, op(t1, t2)))
            acc = out
        return acc

    # ------------------------------------------------------- formulas
    def _rel(self, t: LinTerm, rel: str) -> Formula:
        """t rel 0 for rel in <=, <, = (ceiling terms allowed)."""
        if has_ceil(t):
            if rel == "<=":
                return ext_le(t)
            if rel == "<":
                m = t.denom_lcm()
                return ext_le(t * m + 1)
            return mk_and(ext_le(t), ext_le(-t))
        return atom_formula(normalize_atom(t, rel))

    def _cmp(self, args, rel, flip, where):
        if len(args) < 2:
            raise _err("comparison needs two arguments", where)
        parts = []
        for a, b in zip(args, args[1:]):
            ca, cb = self.term(a), self.term(b)
            alts = []
            for c1, t1 in ca:
                for c2, t2 in cb:
                    t = (t2 - t1) if flip else (t1 - t2)
                    alts.append(mk_and(c1, c2, self._rel(t, rel)))
            parts.append(mk_or(alts))
        return mk_and(parts)

    def formula(self, x) -> Formula:
        if isinstance(x, str):
            if x == "true":
                return TOP
            if x == "false":
                return BOT
            if x in self.bools:
                return BLit(self.bools[x])
            if x in self.ints:
                raise _err(f"integer '{x}' used as a formula", x)
            raise _err(f"undeclared symbol '{x}'", x)
        if not x:
            raise _err("empty formula", x)
        head = x[0]
        args = x[1:]
        if isinstance(head, list):
            if (len(head) == 3 and head[0] == "_" and head[1] == "divisible" and self.extended
                    and _is_int(head[2]) and len(args) == 1):
                g = int(head[2])
                return mk_or([mk_and(c, atom_formula(normalize_atom(t, "mod", mod=g)))
                              for c, t in self.term(args[0])])
            raise _err("unsupported indexed operator", x)
        if head == "!":
            return self.formula(args[0])
        if head == "and":
            return mk_and([self.formula(a) for a in args])
        if head == "or":
            return mk_or([self.formula(a) for a in args])
        if head == "not":
            if len(args) != 1:
                raise _err("not takes one argument", x)
            return mk_not(self.formula(args[0]))
        if head == "=>":
            fs = [self.formula(a) for a in args]
            out = fs[-1]
            for f in reversed(fs[:-1]):
                out = mk_or(mk_not(f), out)
            return out
        if head == "ite":
            c, a, b = (self.formula(y) for y in args)
            return mk_or(mk_and(c, a), mk_and(mk_not(c), b))
        if head == "<=":
            return self._cmp(args, "<=", False, x)
        if head == "<":
            return self._cmp(args, "<", False, x)
        if head == ">=":
            return self._cmp(args, "<=", True, x)
        if head == ">":
            return self._cmp(args, "<", True, x)
        if head in ("=", "distinct"):
            if self._is_bool(args[0]):
                fs = [self.formula(a) for a in args]
                if head == "distinct":
                    if len(fs) != 2:
                        raise _err("Boolean distinct takes two arguments", x)
                    return mk_or(mk_and(fs[0], mk_not(fs[1])), mk_and(mk_not(fs[0]), fs[1]))
                return mk_and([mk_or(mk_and(a, b), mk_and(mk_not(a), mk_not(b)))
                               for a, b in zip(fs, fs[1:])])
            if head == "=":
                return self._cmp(args, "=", False, x)
            pairs = []
            for i in range(len(args)):
                for j in range(i + 1, len(args)):
                    pairs.append(mk_not(self._cmp([args[i], args[j]], "=", False, x)))
            return mk_and(pairs)
        raise _err(f"unsupported operator '{head}'", x)

    def _is_bool(self, x) -> bool:
        if isinstance(x, str):
            return x in self.bools or x in ("true", "false")
        if not x:
            return False
        h = x[0]
        if isinstance(h, list):
            return True
        if h == "ite":
            return self._is_bool(x[2])
        return h in ("and", "or", "not", "=>", "<=", "<", ">=", ">", "=", "distinct", "!")


def parse_problem(text: str, extended: bool = True) -> InterpolationProblem:
    prob = InterpolationProblem()
    ints: Dict[str, Var] = {}
    bools: Dict[str, BoolVar] = {}
    rd = _Reader(ints, bools, extended)
    groups: Dict[str, List[Formula]] = {}
    order: List[str] = []
    for cmd in read_sexprs(text):
        if not isinstance(cmd, list) or not cmd or not isinstance(cmd[0], str):
            raise _err("expected a command", cmd)
        head = cmd[0]
        if head in ("set-logic", "set-option", "set-info", "exit", "get-model", "get-proof"):
            continue
        if head in ("declare-fun", "declare-const"):
            if head == "declare-fun":
                if len(cmd) != 4 or cmd[2] != []:
                    raise _err("only constants can be declared", cmd)
                name, sort = cmd[1], cmd[3]
            else:
                if len(cmd) != 3:
                    raise _err("malformed declare-const", cmd)
                name, sort = cmd[1], cmd[2]
            if name in ints or name in bools:
                raise _err(f"symbol '{name}' declared twice", cmd)
            if sort == "Int":
                v = Var(len(ints) + len(bools), str(name))
                ints[name] = v
                prob.ints.append(v)
            elif sort == "Bool":
                b = BoolVar(str(name))
                bools[name] = b
                prob.bools.append(b)
            else:
                raise _err(f"unsupported sort {sort}", cmd)
            continue
        if head == "assert":
            if len(cmd) != 2:
                raise _err("assert takes one formula", cmd)
            body = cmd[1]
            gname = None
            if isinstance(body, list) and body and body[0] == "!":
                attrs = body[2:]
                for k, v in zip(attrs[::2], attrs[1::2]):
                    if k == ":itp-group":
                        gname = str(v)
                if len(attrs) % 2:
                    raise _err("malformed annotation", body)
                body = body[1]
            if gname is None:
                gname = order[-1] if order else "g1"
            if gname not in groups:
                groups[gname] = []
                order.append(gname)
            groups[gname].append(rd.formula(body))
            continue
        if head == "check-sat":
            prob.check_sat = True
            continue
        if head == "get-interpolant":
            if len(cmd) != 2 or not isinstance(cmd[1], list):
                raise _err("get-interpolant takes a list of groups", cmd)
            names = [str(g) for g in cmd[1]]
            for g in names:
                if g not in groups:
                    raise _err(f"unknown group '{g}'", cmd)
            prob.queries.append(names)
            continue
        raise _err(f"unsupported command '{head}'", cmd)
    prob.names = order
    prob.groups = [mk_and(groups[g]) for g in order]
    return prob


def parse_formula(text: str, ints: Dict[str, Var], bools: Dict[str, BoolVar] = None) -> Formula:
    """Parse one formula over already-declared symbols."""
    xs = read_sexprs(text)
    if len(xs) != 1:
        raise ParseError("expected exactly one formula")
    return _Reader(ints, bools or {}).formula(xs[0])
