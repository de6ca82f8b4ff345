"""Worked interpolation problems with their published interpolants."""
from liaitp.arith import eq, le, make_vars, modeq
from liaitp.formula import CeilDiv, ext_le, mk_and, mk_or
from liaitp.proofs import BnbLeaf, BnbNode, farkas_proof
from conftest import T, conj

x, y, z = make_vars("x y z")
y1, y2, y3, x1, x2, z1 = make_vars("y1 y2 y3 x1 x2 z1", 10)


def intro():
    A, B = conj(eq(2 * T(x) - T(y) + 1)), conj(eq(T(y) - 2 * T(z)))
    return A, B, conj(modeq(-T(y) + 1, 2))


def int_equalities():
    A = conj(eq(-T(y1) - T(y2) - 4 * T(y3) + T(x1) + 2), eq(-T(y3) - T(x1) + T(x2)), eq(-T(x1) - 2 * T(x2) + 1))
    B = conj(eq(7 * T(y1) + 12 * T(y2) + 31 * T(y3) + 10 * T(z1) - 17))
    return A, B, conj(modeq(-7 * T(y1) - 7 * T(y2) - 31 * T(y3) + 18, 5))


def itp_app():
    A = conj(le(-T(y1) - 10 * T(x1) - 4), le(T(y1) + 10 * T(x1)))
    B = conj(le(-T(y1) - 10 * T(z1) + 1), le(T(y1) + 10 * T(z1) - 5))
    want = mk_or([conj(modeq(T(y1) + j, 10)) for j in range(5)])
    return A, B, want


def conditional_strengthen():
    A = conj(le(-T(y1) - 10 * T(y3) - 4), le(T(y1) + 10 * T(y3)), le(T(y2) + T(x1)))
    B = conj(le(-T(y1) - 10 * T(y2) + 1), le(T(y1) + 10 * T(y2) - 5), le(T(y3) + T(z1)))
    want = mk_or(conj(le(10 * T(y2) - 10 * T(y3) - 4), le(T(y1) + 10 * T(y2))),
                 conj(le(-T(y1) - 10 * T(y2) + 6)))
    return A, B, want


def ceiling_example():
    A, B = conj(eq(T(y1) - 2 * T(x1))), conj(eq(T(y1) - 2 * T(z1) - 1))
    return A, B, ext_le(-T(y1) + 2 * T(CeilDiv(T(y1), 2)))


def parametric(n):
    A = conj(le(-T(y1) - 2 * n * T(x1) - n + 1), le(T(y1) + 2 * n * T(x1)))
    B = conj(le(-T(y1) - 2 * n * T(z1) + 1), le(T(y1) + 2 * n * T(z1) - n))
    want = ext_le(2 * n * T(CeilDiv(T(y1), 2 * n)) - T(y1) - n + 1)
    return A, B, want


# branch-and-bound example: the tree is given explicitly
a1 = le(T(y1) + 5 * T(y2) - 5 * T(y3) - 2 * T(x1) + 2)
b1 = le(-T(y1) - 5 * T(y2) + 5 * T(y3) + 4 * T(z1) - 3)
BNB_A = [a1, le(T(x1)), le(T(y1)), le(T(y2) - 2), le(T(y3) - 1)]
BNB_B = [b1, le(-T(z1)), le(-T(y1)), le(-T(y2)), le(-T(y3))]
BNB_WANT = [le(T(y1)), le(T(y1) + 5 * T(y2) - 5 * T(y3) + 2), le(T(y1) + 5 * T(y2) - 3)]


def bnb_tree():
    P1 = farkas_proof([(1, a1), (2, le(T(x1))), (1, le(-T(y1))), (5, le(-T(y2))), (5, le(T(y3)))])
    P2 = farkas_proof([(1, b1), (4, le(-T(z1))), (1, le(T(y1))), (5, le(-T(y3) + 1)), (5, le(T(y2)))])
    P3 = farkas_proof([(1, a1), (2, le(T(x1))), (1, le(-T(y1))), (5, le(T(y3) - 1)), (5, le(-T(y2) + 1))])
    return BnbNode(y3, 0, BnbLeaf(P1), BnbNode(y2, 0, BnbLeaf(P2), BnbLeaf(P3)))
