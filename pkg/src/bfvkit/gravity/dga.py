"""Finite surface models.

A surface model replaces the de Rham complex of a closed oriented
surface by a finite-dimensional graded-commutative algebra over Q
with a differential and an integration functional.  The axioms a
model must satisfy are exactly the ones the field-theoretic
constructions consume:

  * associative unital product, graded-commutative,
  * d of degree +1 with d^2 = 0 and the signed Leibniz rule,
  * integral supported in top degree 2 with integral(d x) = 0,
  * nondegenerate pairing (x, y) -> integral(x y) between degrees
    0 and 2 and on degree 1.

``validate_dga`` checks every axiom on every basis pair and triple;
nothing here is trusted by construction.

Two models are provided.  ``torus_h`` is the cohomology of the torus
(four-dimensional, d = 0).  ``torus_fourier`` keeps one circle's
Fourier modes alive so the differential is genuinely nonzero: modes
e^{ikx} are tracked as monomials u^p v^m with u ~ e^{ix}, v ~ e^{-ix}
kept independent, truncated by the ideal (u^{c+1}, v^{c+1}).  The
differential is d = (mode number) a, with a, b the two circle
one-forms, and the integral reads off the balanced top corner
u^c v^c ab, the only monomial whose oscillation cancels.  Because the
truncation is an ideal, associativity is exact; because d preserves
the (p, m) bidegree, Leibniz is exact; and because the balanced
corner has mode number zero, Stokes is exact.  No axiom holds only
approximately.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple

from ..bfv import CheckResult, StructureReport

__all__ = [
    "DgaModel",
    "torus_h",
    "torus_fourier",
    "validate_dga",
    "e_mul",
    "e_d",
    "e_int",
]

Elem = Dict[str, Fraction]


@dataclass
class DgaModel:
    """A finite graded-commutative differential algebra with integral.

    ``mul`` maps ordered basis pairs to their (sparse) product, ``diff``
    maps a basis element to d of it, ``integral`` lists the basis
    elements with nonzero integral.  Missing keys mean zero.
    """

    name: str
    names: List[str]
    degree: Dict[str, int]
    mul: Dict[Tuple[str, str], Elem]
    diff: Dict[str, Elem] = field(default_factory=dict)
    integral: Dict[str, Fraction] = field(default_factory=dict)
    unit: str = "1"
    volume: str = ""

    def basis(self, k: int) -> List[str]:
        return [n for n in self.names if self.degree[n] == k]

    @property
    def dim(self) -> int:
        return len(self.names)

    def __repr__(self):
        return "DgaModel(%r, dim=%d)" % (self.name, self.dim)


def e_mul(M: DgaModel, x: Elem, y: Elem) -> Elem:
    out: Elem = {}
    for nx, cx in x.items():
        for ny, cy in y.items():
            for nz, cz in M.mul.get((nx, ny), {}).items():
                v = out.get(nz, Fraction(0)) + cx * cy * cz
                if v:
                    out[nz] = v
                else:
                    out.pop(nz, None)
    return out


def e_d(M: DgaModel, x: Elem) -> Elem:
    out: Elem = {}
    for nx, cx in x.items():
        for nz, cz in M.diff.get(nx, {}).items():
            v = out.get(nz, Fraction(0)) + cx * cz
            if v:
                out[nz] = v
            else:
                out.pop(nz, None)
    return out


def e_int(M: DgaModel, x: Elem) -> Fraction:
    return sum((c * M.integral.get(n, Fraction(0)) for n, c in x.items()),
               Fraction(0))


def _e_eq(x: Elem, y: Elem) -> bool:
    return {n: c for n, c in x.items() if c} == {n: c for n, c in y.items() if c}


def _e_sub(x: Elem, y: Elem) -> Elem:
    out = dict(x)
    for n, c in y.items():
        v = out.get(n, Fraction(0)) - c
        if v:
            out[n] = v
        else:
            out.pop(n, None)
    return out


def _rank(rows: List[List[Fraction]]) -> int:
    """Row rank by exact Gaussian elimination."""
    rows = [list(r) for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    col = 0
    while rank < len(rows) and col < ncols:
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        lead = rows[rank][col]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                s = rows[i][col] / lead
                rows[i] = [a - s * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def validate_dga(M: DgaModel) -> StructureReport:
    """Check every model axiom exactly, basis element by basis element."""
    checks: List[CheckResult] = []
    one = {M.unit: Fraction(1)}

    def add(name: str, bad: int, total: int, detail: str = ""):
        checks.append(CheckResult(name, bad == 0, float(bad),
                                  detail or "%d of %d instances failed" % (bad, total)
                                  if bad else "%d instances" % total))

    # unit element: degree 0, integral-normalised volume, two-sided identity
    bad = 0
    if M.degree[M.unit] != 0:
        bad += 1
    if e_int(M, {M.volume: Fraction(1)}) != 1:
        bad += 1
    for n in M.names:
        en = {n: Fraction(1)}
        if not _e_eq(e_mul(M, one, en), en) or not _e_eq(e_mul(M, en, one), en):
            bad += 1
    add("unit", bad, M.dim + 2)

    # products land in the right degree and never above top degree
    bad = 0
    for (nx, ny), prod in M.mul.items():
        want = M.degree[nx] + M.degree[ny]
        for nz in prod:
            if M.degree[nz] != want:
                bad += 1
    add("grading", bad, len(M.mul))

    # x y = (-1)^{|x||y|} y x
    bad = 0
    for nx in M.names:
        for ny in M.names:
            sign = Fraction(-1 if (M.degree[nx] % 2) and (M.degree[ny] % 2) else 1)
            flipped = {n: sign * c
                       for n, c in M.mul.get((ny, nx), {}).items()}
            if not _e_eq(M.mul.get((nx, ny), {}), flipped):
                bad += 1
    add("graded-commutative", bad, M.dim ** 2)

    # (x y) z = x (y z) on all basis triples
    bad = 0
    first = ""
    for nx in M.names:
        ex = {nx: Fraction(1)}
        for ny in M.names:
            left = M.mul.get((nx, ny), {})
            for nz in M.names:
                ez = {nz: Fraction(1)}
                lhs = e_mul(M, left, ez)
                rhs = e_mul(M, ex, M.mul.get((ny, nz), {}))
                if not _e_eq(lhs, rhs):
                    bad += 1
                    if not first:
                        first = "(%s,%s,%s)" % (nx, ny, nz)
    add("associative", bad, M.dim ** 3, first and "first failure at " + first)

    # d^2 = 0
    bad = sum(1 for n in M.names if e_d(M, e_d(M, {n: Fraction(1)})))
    add("d-squared", bad, M.dim)

    # d raises degree by one
    bad = 0
    for n, dx in M.diff.items():
        for nz in dx:
            if M.degree[nz] != M.degree[n] + 1:
                bad += 1
    add("d-degree", bad, len(M.diff))

    # d(x y) = dx y + (-1)^{|x|} x dy
    bad = 0
    first = ""
    for nx in M.names:
        ex = {nx: Fraction(1)}
        sx = Fraction(-1 if M.degree[nx] % 2 else 1)
        for ny in M.names:
            ey = {ny: Fraction(1)}
            lhs = e_d(M, e_mul(M, ex, ey))
            rhs = e_mul(M, e_d(M, ex), ey)
            for n, c in e_mul(M, ex, e_d(M, ey)).items():
                v = rhs.get(n, Fraction(0)) + sx * c
                if v:
                    rhs[n] = v
                else:
                    rhs.pop(n, None)
            if not _e_eq(lhs, rhs):
                bad += 1
                if not first:
                    first = "(%s,%s)" % (nx, ny)
    add("leibniz", bad, M.dim ** 2, first and "first failure at " + first)

    # integral vanishes below top degree and on exact forms
    bad = sum(1 for n, c in M.integral.items() if c and M.degree[n] != 2)
    add("integral-degree", bad, len(M.integral))
    bad = 0
    first = ""
    for n in M.basis(1):
        if e_int(M, e_d(M, {n: Fraction(1)})):
            bad += 1
            if not first:
                first = n
    add("stokes", bad, len(M.basis(1)), first and "integral(d %s) != 0" % first)

    # Poincare pairing: deg 0 x deg 2 and deg 1 x deg 1 Gram ranks
    bad = 0
    b0, b1, b2 = M.basis(0), M.basis(1), M.basis(2)
    gram02 = [[e_int(M, M.mul.get((x, y), {})) for y in b2] for x in b0]
    if len(b0) != len(b2) or _rank(gram02) != len(b0):
        bad += 1
    gram11 = [[e_int(M, M.mul.get((x, y), {})) for y in b1] for x in b1]
    if b1 and _rank(gram11) != len(b1):
        bad += 1
    add("pairing", bad, 2)

    return StructureReport(checks)


def torus_h() -> DgaModel:
    """Cohomology of the torus: unit, two circle classes, their product.

    The differential is zero, so every d-term in the field theory
    built on this model degenerates; that is the point of keeping it
    alongside the Fourier-window model.
    """
    one = Fraction(1)
    names = ["1", "a", "b", "ab"]
    degree = {"1": 0, "a": 1, "b": 1, "ab": 2}
    mul: Dict[Tuple[str, str], Elem] = {}
    for n in names:
        mul[("1", n)] = {n: one}
        if n != "1":
            mul[(n, "1")] = {n: one}
    mul[("a", "b")] = {"ab": one}
    mul[("b", "a")] = {"ab": -one}
    return DgaModel(
        name="torus_h",
        names=names,
        degree=degree,
        mul=mul,
        diff={},
        integral={"ab": one},
        unit="1",
        volume="ab",
    )


def torus_fourier(cap: int = 1) -> DgaModel:
    """Fourier-window torus model with nonzero differential.

    Basis monomials are u^p v^m, u^p v^m a, u^p v^m b, u^p v^m ab with
    0 <= p, m <= cap; u and v stand for e^{ix} and e^{-ix} on one of
    the two circles, tracked independently so the window is the ideal
    (u^{cap+1}, v^{cap+1}).  d multiplies by the mode number (p - m)
    and by the one-form a; the integral picks the coefficient of the
    balanced corner u^cap v^cap ab where the oscillation cancels.
    """
    if cap < 1:
        raise ValueError("cap must be at least 1")
    one = Fraction(1)

    def nm(p: int, m: int, form: str) -> str:
        return "u%dv%d%s" % (p, m, form)

    forms = ["", "_a", "_b", "_ab"]
    fdeg = {"": 0, "_a": 1, "_b": 1, "_ab": 2}
    # wedge table for the Lambda(a, b) factor, with Koszul signs
    ftab = {
        ("", ""): ("", 1), ("", "_a"): ("_a", 1), ("", "_b"): ("_b", 1),
        ("", "_ab"): ("_ab", 1), ("_a", ""): ("_a", 1), ("_b", ""): ("_b", 1),
        ("_ab", ""): ("_ab", 1),
        ("_a", "_b"): ("_ab", 1), ("_b", "_a"): ("_ab", -1),
    }

    names: List[str] = []
    degree: Dict[str, int] = {}
    for p in range(cap + 1):
        for m in range(cap + 1):
            for f in forms:
                n = nm(p, m, f)
                names.append(n)
                degree[n] = fdeg[f]

    mul: Dict[Tuple[str, str], Elem] = {}
    for p1 in range(cap + 1):
        for m1 in range(cap + 1):
            for f1 in forms:
                for p2 in range(cap + 1):
                    for m2 in range(cap + 1):
                        if p1 + p2 > cap or m1 + m2 > cap:
                            continue
                        for f2 in forms:
                            hit = ftab.get((f1, f2))
                            if hit is None:
                                continue
                            f3, sgn = hit
                            mul[(nm(p1, m1, f1), nm(p2, m2, f2))] = {
                                nm(p1 + p2, m1 + m2, f3): Fraction(sgn)
                            }

    diff: Dict[str, Elem] = {}
    for p in range(cap + 1):
        for m in range(cap + 1):
            k = p - m
            if k:
                diff[nm(p, m, "")] = {nm(p, m, "_a"): Fraction(k)}
                diff[nm(p, m, "_b")] = {nm(p, m, "_ab"): Fraction(k)}

    return DgaModel(
        name="torus_fourier(%d)" % cap,
        names=names,
        degree=degree,
        mul=mul,
        diff=diff,
        integral={nm(cap, cap, "_ab"): one},
        unit=nm(0, 0, ""),
        volume=nm(cap, cap, "_ab"),
    )
