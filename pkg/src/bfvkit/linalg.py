"""Sparse exact linear algebra over the rationals.

Rows are dicts mapping hashable column keys to nonzero Fractions.
Everything here is plain Gaussian elimination; the matrices coming out
of truncated cohomology windows are small enough that exactness
matters far more than asymptotics.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Hashable, Iterable, List

__all__ = ["RowSpace", "sparse_rank", "nullspace", "poly_to_row"]


class RowSpace:
    """Incrementally built row space with exact membership tests."""

    def __init__(self):
        self.pivots: Dict[Hashable, dict] = {}

    def reduce(self, row: dict) -> dict:
        """Residual of ``row`` after elimination against stored pivots.

        Stored pivot rows are mutually reduced, so eliminating a pivot
        column never reintroduces another pivot column and one pass in
        a stable order is enough.
        """
        row = dict(row)
        for col in sorted(row, key=repr):
            piv = self.pivots.get(col)
            if piv is None or col not in row:
                continue
            factor = row[col]
            for c, v in piv.items():
                nv = row.get(c, Fraction(0)) - factor * v
                if nv:
                    row[c] = nv
                elif c in row:
                    del row[c]
        return row

    def add(self, row: dict) -> bool:
        """Insert a row; True if it enlarged the space."""
        res = self.reduce(row)
        if not res:
            return False
        col = min(res, key=repr)
        inv = Fraction(1) / res[col]
        norm = {c: v * inv for c, v in res.items()}
        # keep stored pivots mutually reduced
        for pcol, prow in list(self.pivots.items()):
            if col in prow:
                factor = prow[col]
                for c, v in norm.items():
                    nv = prow.get(c, Fraction(0)) - factor * v
                    if nv:
                        prow[c] = nv
                    elif c in prow:
                        del prow[c]
        self.pivots[col] = norm
        return True

    def contains(self, row: dict) -> bool:
        return not self.reduce(row)

    @property
    def rank(self) -> int:
        return len(self.pivots)


def sparse_rank(rows: Iterable[dict]) -> int:
    space = RowSpace()
    for row in rows:
        space.add(row)
    return space.rank


def nullspace(rows: Iterable[dict], ncols: int) -> List[Dict[int, Fraction]]:
    """Kernel basis of the map x -> A x, columns indexed 0..ncols-1.

    ``rows`` are the rows of A as {col: Fraction}.  Returns one basis
    vector per free column, each with a unit entry at its free column.
    """
    # full Gauss-Jordan so back substitution is a lookup
    pivots: Dict[int, dict] = {}
    for row in rows:
        row = dict(row)
        for col in sorted(row):
            piv = pivots.get(col)
            if piv is None:
                continue
            factor = row[col]
            for c, v in piv.items():
                nv = row.get(c, Fraction(0)) - factor * v
                if nv:
                    row[c] = nv
                elif c in row:
                    del row[c]
        if not row:
            continue
        col = min(row)
        inv = Fraction(1) / row[col]
        norm = {c: v * inv for c, v in row.items()}
        for pcol, prow in pivots.items():
            if col in prow:
                factor = prow[col]
                for c, v in norm.items():
                    nv = prow.get(c, Fraction(0)) - factor * v
                    if nv:
                        prow[c] = nv
                    elif c in prow:
                        del prow[c]
        pivots[col] = norm
    basis = []
    pivot_cols = set(pivots)
    for free in range(ncols):
        if free in pivot_cols:
            continue
        vec: Dict[int, Fraction] = {free: Fraction(1)}
        for pcol, prow in pivots.items():
            coeff = prow.get(free)
            if coeff:
                vec[pcol] = -coeff
        basis.append(vec)
    return basis


def poly_to_row(p) -> dict:
    """Monomial-indexed rational row from a polynomial; imaginary parts
    are rejected since the classical layers never produce them."""
    row = {}
    for mono, c in p.terms.items():
        if c.im != 0:
            raise ValueError("polynomial has an imaginary coefficient")
        row[mono] = c.re
    return row
