"""The Lorentz algebra so(2,1) on R^3.

Vector picture: x = (x^0, x^1, x^2) with invariant pairing
<x, y> = eta_IJ x^I y^J, eta = diag(-1, 1, 1), and bracket
[J_a, J_b]^c = eps_{abd} eta^{dc} with eps_{012} = +1, so

    [J0, J1] = J2,   [J1, J2] = -J0,   [J0, J2] = -J1.

Matrix picture: the same algebra as antisymmetric matrices X^{IJ}
acting on vectors through (X v)^I = X^{IJ} eta_{JK} v^K, with the
eta-twisted commutator as bracket.  The two pictures are isomorphic;
tests drive both routes against each other rather than trusting the
translation table below.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Tuple

__all__ = [
    "ETA",
    "EPS",
    "STRUCT",
    "bracket_vec",
    "pair_vec",
    "vec_to_mat",
    "mat_to_vec",
    "mat_apply",
    "mat_bracket",
]

ETA = (Fraction(-1), Fraction(1), Fraction(1))

# totally antisymmetric, eps_{012} = +1
EPS: Dict[Tuple[int, int, int], int] = {}
for _i, _j, _k, _s in [(0, 1, 2, 1), (1, 2, 0, 1), (2, 0, 1, 1),
                       (0, 2, 1, -1), (2, 1, 0, -1), (1, 0, 2, -1)]:
    EPS[(_i, _j, _k)] = _s


def _build_struct() -> Dict[Tuple[int, int], Dict[int, Fraction]]:
    out: Dict[Tuple[int, int], Dict[int, Fraction]] = {}
    for a in range(3):
        for b in range(3):
            entry: Dict[int, Fraction] = {}
            for c in range(3):
                # eta is diagonal, so eta^{cc} = 1/eta_{cc} = eta_{cc}
                s = EPS.get((a, b, c), 0)
                if s:
                    entry[c] = Fraction(s) * ETA[c]
            if entry:
                out[(a, b)] = entry
    return out


# STRUCT[(a, b)][c] is the J_c coefficient of [J_a, J_b]
STRUCT = _build_struct()


def bracket_vec(x, y) -> List:
    """[x, y] in the vector picture; works for any numeric entries."""
    out = [0 * x[0], 0 * x[0], 0 * x[0]]
    for (a, b), entry in STRUCT.items():
        if x[a] and y[b]:
            prod = x[a] * y[b]
            for c, coeff in entry.items():
                out[c] = out[c] + prod * coeff
    return out


def pair_vec(x, y):
    """Invariant pairing -x0 y0 + x1 y1 + x2 y2."""
    return -(x[0] * y[0]) + x[1] * y[1] + x[2] * y[2]


def vec_to_mat(x) -> List[List]:
    """Antisymmetric matrix with mat_apply(vec_to_mat(x), v) = [x, v]."""
    z = 0 * x[0]
    X = [[z, z, z], [z, z, z], [z, z, z]]
    for a in range(3):
        if not x[a]:
            continue
        for i in range(3):
            for j in range(3):
                s = EPS.get((a, j, i), 0)
                if s:
                    X[i][j] = X[i][j] + x[a] * Fraction(s) * ETA[i] * ETA[j]
    return X


def mat_to_vec(X) -> List:
    """Inverse of vec_to_mat on antisymmetric matrices."""
    # components read off the (2,1), (0,2)... slots fixed by vec_to_mat
    x0 = X[2][1] * ETA[2] * ETA[1] * Fraction(EPS[(0, 1, 2)])
    x1 = X[0][2] * ETA[0] * ETA[2] * Fraction(EPS[(1, 2, 0)])
    x2 = X[1][0] * ETA[1] * ETA[0] * Fraction(EPS[(2, 0, 1)])
    return [x0, x1, x2]


def mat_apply(X, v) -> List:
    """(X v)^I = X^{IJ} eta_{JK} v^K for diagonal eta."""
    return [sum(X[i][j] * ETA[j] * v[j] for j in range(3)) for i in range(3)]


def mat_bracket(X, Y) -> List[List]:
    """eta-twisted commutator [X, Y]^{IJ} = X^{IK} eta_{KK} Y^{KJ} - (X <-> Y)."""
    out = [[0 * X[0][0]] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            acc = 0 * X[0][0]
            for k in range(3):
                acc = acc + (X[i][k] * Y[k][j] - Y[i][k] * X[k][j]) * ETA[k]
            out[i][j] = acc
    return out
