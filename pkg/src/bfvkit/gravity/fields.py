"""Field content of so(2,1) BF theory over a surface model.

The phase space is flattened into an ordinary chart: every component
of every field against the model basis becomes one generator.  The
geometric objects (connection, frame field, ghosts, antifields) are
then *views*: `FieldVec` wraps a surface-form-degree label and a table
of coefficient polynomials, one per (basis element, Lie index) slot,
so curvature, covariant derivative and integral pairings can be
written the way the field theory writes them and compared against
what the resolution machinery produces from the flattened chart.

Sign bookkeeping: a FieldVec is sum_{r,a} X_{r,a} (e_r x J_a) with
the coefficient on the left.  Moving the basis form e_r past a ghost
coefficient costs the Koszul sign (-1)^{|e_r| |coeff|}; that is the
only place the two gradings talk to each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

from ..galg import GradedAlgebra, GradedPoly
from ..phase import PhaseChart
from .dga import DgaModel, e_int, e_mul
from .lie import ETA, STRUCT

__all__ = [
    "FieldVec",
    "BfChart",
    "build_base",
    "field_views",
    "fv_add",
    "fv_scale",
    "fv_bracket",
    "fv_d",
    "fv_pair_int",
    "flow_views",
    "moments",
]

Key = Tuple[str, int]


@dataclass
class FieldVec:
    """A surface-form with values in so(2,1) and ghost coefficients."""

    model: DgaModel
    form_deg: int
    coeffs: Dict[Key, GradedPoly]

    def slot(self, r: str, a: int) -> GradedPoly:
        alg = next(iter(self.coeffs.values())).alg if self.coeffs else None
        got = self.coeffs.get((r, a))
        if got is not None:
            return got
        if alg is None:
            raise KeyError((r, a))
        return alg.zero()

    def __repr__(self):
        return "FieldVec(deg=%d, slots=%d)" % (self.form_deg, len(self.coeffs))


def _gh(p: GradedPoly) -> int:
    d = p.degree()
    if d is None:
        raise ValueError("inhomogeneous coefficient in FieldVec")
    return d % 2


def _put(table: Dict[Key, GradedPoly], key: Key, val: GradedPoly):
    if key in table:
        val = table[key] + val
    if val.is_zero():
        table.pop(key, None)
    else:
        table[key] = val


def fv_add(x: FieldVec, y: FieldVec) -> FieldVec:
    if x.form_deg != y.form_deg:
        raise ValueError("form degrees differ")
    out = dict(x.coeffs)
    for k, v in y.coeffs.items():
        _put(out, k, v)
    return FieldVec(x.model, x.form_deg, out)


def fv_scale(x: FieldVec, c) -> FieldVec:
    return FieldVec(x.model, x.form_deg,
                    {k: v * c for k, v in x.coeffs.items() if not (v * c).is_zero()})


def fv_bracket(x: FieldVec, y: FieldVec) -> FieldVec:
    """[x, y]: wedge on the surface factor, so(2,1) bracket on values."""
    M = x.model
    out: Dict[Key, GradedPoly] = {}
    fpar = x.form_deg % 2
    for (r, a), xc in x.coeffs.items():
        for (s, b), yc in y.coeffs.items():
            struc = STRUCT.get((a, b))
            if struc is None:
                continue
            prod = M.mul.get((r, s))
            if not prod:
                continue
            coeff = xc * yc
            if coeff.is_zero():
                continue
            if fpar and _gh(yc):
                coeff = -coeff
            for t, pv in prod.items():
                for c, cv in struc.items():
                    _put(out, (t, c), coeff * (pv * cv))
    return FieldVec(M, x.form_deg + y.form_deg, out)


def fv_d(x: FieldVec) -> FieldVec:
    """Surface differential; ghost coefficients pass through unsigned."""
    M = x.model
    out: Dict[Key, GradedPoly] = {}
    for (r, a), xc in x.coeffs.items():
        for t, dv in M.diff.get(r, {}).items():
            _put(out, (t, a), xc * dv)
    return FieldVec(M, x.form_deg + 1, out)


def fv_pair_int(x: FieldVec, y: FieldVec) -> GradedPoly:
    """integral of <x, y>: eta on values, wedge-and-integrate on forms."""
    M = x.model
    out = None
    fpar = x.form_deg % 2
    for (r, a), xc in x.coeffs.items():
        for (s, b), yc in y.coeffs.items():
            if a != b:
                continue
            w = e_int(M, M.mul.get((r, s), {})) * ETA[a]
            if not w:
                continue
            coeff = xc * yc
            if fpar and _gh(yc):
                coeff = -coeff
            term = coeff * w
            out = term if out is None else out + term
    if out is None:
        alg = next(iter(x.coeffs.values())).alg if x.coeffs else \
            next(iter(y.coeffs.values())).alg
        return alg.zero()
    return out


@dataclass
class BfChart:
    """The flattened chart of the (B, A) sector plus pairing tables."""

    model: DgaModel
    chart: PhaseChart
    s0: List[str]
    s1: List[str]
    s2: List[str]
    partner1: Dict[str, str]       # deg-1 basis -> its pairing partner
    pint1: Dict[str, Fraction]     # integral(e . partner1(e))
    partner2: Dict[str, str]       # deg-0 basis -> its deg-2 partner
    pint2: Dict[str, Fraction]

    def b_name(self, i: int, a: int) -> str:
        return "B%d_%d" % (i, a)

    def a_name(self, j: int, a: int) -> str:
        return "A%d_%d" % (j, a)

    def ghost_index(self, r: str, a: int) -> int:
        # flat 0-based index of the (r, a) moment slot
        return 3 * self.s0.index(r) + a


def build_base(M: DgaModel) -> BfChart:
    """Chart with one even pair per frame/connection component slot.

    The conjugate of a frame component sits at the Poincare-dual basis
    slot, so the pairing between the two fields is the integral one.
    Requires the model pairing to be a signed permutation in degree 1,
    which both surface models satisfy.
    """
    s0, s1, s2 = M.basis(0), M.basis(1), M.basis(2)
    partner1: Dict[str, str] = {}
    pint1: Dict[str, Fraction] = {}
    for x in s1:
        hits = [(y, e_int(M, e_mul(M, {x: Fraction(1)}, {y: Fraction(1)})))
                for y in s1]
        hits = [(y, v) for y, v in hits if v]
        if len(hits) != 1 or abs(hits[0][1]) != 1:
            raise ValueError("degree-1 pairing is not a signed permutation at %s" % x)
        partner1[x], pint1[x] = hits[0]
    partner2: Dict[str, str] = {}
    pint2: Dict[str, Fraction] = {}
    for x in s0:
        hits = [(y, e_int(M, e_mul(M, {x: Fraction(1)}, {y: Fraction(1)})))
                for y in s2]
        hits = [(y, v) for y, v in hits if v]
        if len(hits) != 1 or abs(hits[0][1]) != 1:
            raise ValueError("degree-0/2 pairing is not a signed permutation at %s" % x)
        partner2[x], pint2[x] = hits[0]

    pair_specs = []
    for i, ei in enumerate(s1):
        j = s1.index(partner1[ei])
        for a in range(3):
            pair_specs.append((("B%d_%d" % (i, a), 0), ("A%d_%d" % (j, a), 0)))
    chart = PhaseChart.build(pair_specs)
    return BfChart(M, chart, s0, s1, s2, partner1, pint1, partner2, pint2)


def field_views(bc: BfChart, alg: GradedAlgebra, layer: int = 0,
                names=None) -> Dict[str, FieldVec]:
    """Geometric views of all fields present at a resolution layer.

    ``alg`` is the chart algebra at that layer (the base algebra for
    layer 0, the one with ghosts for layer 1, with the second
    generation for layer 2); ``names`` carries the ghost name lists of
    the layer (the BfvData for layer 1, the SecondaryData for 2).
    """
    M = bc.model
    out: Dict[str, FieldVec] = {}

    b: Dict[Key, GradedPoly] = {}
    a_: Dict[Key, GradedPoly] = {}
    for j, ej in enumerate(bc.s1):
        sgn = bc.pint1[bc.partner1[ej]]
        for a in range(3):
            b[(ej, a)] = alg.gen(bc.b_name(j, a))
            a_[(ej, a)] = alg.gen(bc.a_name(j, a)) * (sgn * ETA[a])
    out["B"] = FieldVec(M, 1, b)
    out["A"] = FieldVec(M, 1, a_)
    if layer == 0:
        return out

    def zero_form(gen_names) -> FieldVec:
        table: Dict[Key, GradedPoly] = {}
        for r in bc.s0:
            for a in range(3):
                table[(r, a)] = alg.gen(gen_names[bc.ghost_index(r, a)])
        return FieldVec(M, 0, table)

    def two_form(gen_names) -> FieldVec:
        table: Dict[Key, GradedPoly] = {}
        for r in bc.s0:
            t = bc.partner2[r]
            for a in range(3):
                k = bc.ghost_index(r, a)
                table[(t, a)] = alg.gen(gen_names[k]) * (ETA[a] / bc.pint2[r])
        return FieldVec(M, 2, table)

    bfv = names if layer == 1 else names.bfv
    out["chi"] = zero_form(bfv.chi)
    out["tau"] = zero_form(bfv.lam)
    out["Ad"] = two_form(bfv.chid)
    out["Bd"] = two_form(bfv.lamd)
    if layer == 1:
        return out

    sec = names
    out["rho"] = zero_form(sec.rho)
    out["mu"] = zero_form(sec.mu)
    out["rhod"] = two_form(sec.rhod)
    out["mud"] = two_form(sec.mud)
    return out


def flow_views(bc: BfChart, vf, alg: GradedAlgebra, layer: int = 0,
               names=None) -> Dict[str, FieldVec]:
    """The components of a vector field, reassembled as field views.

    Mirrors `field_views` slot for slot, so a flow equation can be
    compared with a geometric formula in the same coordinates: the
    connection and antifield slots carry the same scalings as the
    fields themselves.
    """
    M = bc.model

    def one_form(name_of) -> FieldVec:
        table: Dict[Key, GradedPoly] = {}
        for j, ej in enumerate(bc.s1):
            sgn = bc.pint1[bc.partner1[ej]]
            for a in range(3):
                nm, scaled = name_of(j, a, sgn)
                comp = vf.component(nm)
                table[(ej, a)] = comp * scaled if scaled != 1 else comp
        return FieldVec(M, 1, table)

    def zero_form(gen_names) -> FieldVec:
        table: Dict[Key, GradedPoly] = {}
        for r in bc.s0:
            for a in range(3):
                table[(r, a)] = vf.component(gen_names[bc.ghost_index(r, a)])
        return FieldVec(M, 0, table)

    def two_form(gen_names) -> FieldVec:
        table: Dict[Key, GradedPoly] = {}
        for r in bc.s0:
            t = bc.partner2[r]
            for a in range(3):
                k = bc.ghost_index(r, a)
                table[(t, a)] = vf.component(gen_names[k]) * (ETA[a] / bc.pint2[r])
        return FieldVec(M, 2, table)

    out: Dict[str, FieldVec] = {}
    out["B"] = one_form(lambda j, a, sgn: (bc.b_name(j, a), 1))
    out["A"] = one_form(lambda j, a, sgn: (bc.a_name(j, a), sgn * ETA[a]))
    if layer == 0:
        return out
    bfv = names if layer == 1 else names.bfv
    out["chi"] = zero_form(bfv.chi)
    out["tau"] = zero_form(bfv.lam)
    out["Ad"] = two_form(bfv.chid)
    out["Bd"] = two_form(bfv.lamd)
    if layer == 1:
        return out
    sec = names
    out["rho"] = zero_form(sec.rho)
    out["mu"] = zero_form(sec.mu)
    out["rhod"] = two_form(sec.rhod)
    out["mud"] = two_form(sec.mud)
    return out


def moments(bc: BfChart, x: FieldVec) -> List[GradedPoly]:
    """Lowered moments of a two-form against the degree-0 basis.

    Slot (r, a) integrates x against e_r with the Lie index lowered by
    eta; the result is ordered like the ghost families, so these are
    exactly the constraint components the flattened system carries.
    """
    if x.form_deg != 2:
        raise ValueError("moments need a two-form")
    out: List[GradedPoly] = []
    for r in bc.s0:
        t = bc.partner2[r]
        for a in range(3):
            out.append(x.slot(t, a) * (bc.pint2[r] * ETA[a]))
    return out
