"""Second resolution layer over a built first layer.

``build_double_charge`` assembles the degree-1 charge of the second
layer from the dressed inner constraints, the moment charge and the
rho-trilinear term; its Hamiltonian field is the second-layer
differential.  ``build_extension`` extends the first-layer master
charge to a cocycle of that differential, which is the algebraic core
of the reduction-commutes-with-resolution comparison carried out by
``residual_bfv_compare``: shifting the extension by the differential
of the canonical gauge parameter lands exactly on the master charge
of the residual constraint system.

``flow_reduce_body`` integrates the flow the second-layer differential
induces on ordinary (body-level) field values: the even coordinates
move along the constraint vector fields, the odd first-layer ghosts
are carried as numeric coefficient vectors under the linear action
read off from the differential itself.

Every identity here is checked exactly over the rationals; the
numeric flow is the only floating-point citizen of this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Sequence, Tuple, Union

import numpy as np

from .bfv import (
    BfvData,
    ConstraintSystem,
    SecondaryData,
    StructureReport,
    _poly_check,
    build_bfv,
    build_secondary,
)
from .galg import GradedPoly
from .phase import ham_vf, poisson, VectorFieldRep

__all__ = [
    "DoubleBfvData",
    "BodyState",
    "build_double_charge",
    "build_extension",
    "canonical_gauge",
    "gauge_shift",
    "residual_charge",
    "residual_system",
    "build_double",
    "residual_bfv_compare",
    "flow_reduce_body",
]


# Frozen weights of the second-layer family, fixed by requiring the
# exact master equation and cocycle conditions on every registry
# system simultaneously (the joint linear system has a one-parameter
# solution family; the frozen representative is the one whose leading
# weights are +-1 and whose composite tail is minimal):
#
#   S2  = J^rho + M^mu - 1/2 <[rho,rho]_f, rhod>
#   ext = S - <mu,rhod> - <m(rho,lam),rhod> - <m(mu,lam),mud>
#           - <[chi,rho]_f,rhod> + <[chi,mu]_f,mud>
#           + g_ij^l m_kl^n chi_i lam_j rho_k mud_n
#   Y   = <chi,rhod> + 1/2 <[chi,chi]_f,mud> + <m(chi,lam),mud>
#   res = <lam,psi> - 1/2 <h(lam,lam),lamd> - <m(rho,lam),rhod>
#
# The quartic g.m term in ext is not optional: with g and m active on
# the same index (the nested sl2 system) no cubic extension solves the
# cocycle condition, in any assignment of signs.


def _pairing(sec: SecondaryData, a: List[str], b: List[str]) -> GradedPoly:
    al = sec.chart.alg
    out = al.zero()
    for x, y in zip(a, b):
        out = out + al.gen(x) * al.gen(y)
    return out


def _tensor_term(sec, tensor, a: List[str], b: List[str], c: List[str],
                 weight: Fraction) -> GradedPoly:
    al = sec.chart.alg
    out = al.zero()
    for (i, j, k), v in sorted(tensor.items()):
        out = out + al.gen(a[i]) * al.gen(b[j]) * al.gen(c[k]) * (v * weight)
    return out


def _gm_composite(sec: SecondaryData) -> GradedPoly:
    """g_ij^l m_kl^n chi_i lam_j rho_k mud_n."""
    al = sec.chart.alg
    bfv = sec.bfv
    sysm = bfv.system
    out = al.zero()
    for (i, j, l), gv in sorted(sysm.g.items()):
        for (k, l2, n), mv in sorted(sysm.m.items()):
            if l2 == l:
                out = out + (
                    al.gen(bfv.chi[i]) * al.gen(bfv.lam[j])
                    * al.gen(sec.rho[k]) * al.gen(sec.mud[n]) * (gv * mv)
                )
    return out


def build_double_charge(sec: SecondaryData) -> GradedPoly:
    """Degree-1 charge of the second layer; exact master equation."""
    bfv = sec.bfv
    s2 = sec.charge_j() + sec.charge_m()
    s2 = s2 + _tensor_term(sec, bfv.system.f, sec.rho, sec.rho, sec.rhod,
                           Fraction(-1, 2))
    res = poisson(s2, s2, sec.chart)
    if not res.is_zero():
        raise ValueError("second-layer master equation fails: %s" % res.to_text())
    return s2


def build_extension(sec: SecondaryData, s2: GradedPoly) -> GradedPoly:
    """Extend the first-layer charge to a cocycle of the second layer.

    The extension restricts to the first-layer charge on the zero
    section of the added pairs and satisfies both the cocycle
    condition and the classical master equation; all three are
    verified exactly and any residual raises.
    """
    bfv = sec.bfv
    sysm = bfv.system
    one = Fraction(1)
    ext = sec.s
    ext = ext - _pairing(sec, sec.mu, sec.rhod)
    ext = ext - _tensor_term(sec, sysm.m, sec.rho, bfv.lam, sec.rhod, one)
    ext = ext - _tensor_term(sec, sysm.m, sec.mu, bfv.lam, sec.mud, one)
    ext = ext - _tensor_term(sec, sysm.f, bfv.chi, sec.rho, sec.rhod, one)
    ext = ext + _tensor_term(sec, sysm.f, bfv.chi, sec.mu, sec.mud, one)
    ext = ext + _gm_composite(sec)

    field = ham_vf(s2, sec.chart)
    r1 = field.apply(ext)
    if not r1.is_zero():
        raise ValueError("extension cocycle residual: %s" % r1.to_text())
    r2 = poisson(ext, ext, sec.chart)
    if not r2.is_zero():
        raise ValueError("extension master equation residual: %s" % r2.to_text())
    zero = {name: sec.chart.alg.zero()
            for name in sec.rho + sec.rhod + sec.mu + sec.mud}
    r3 = ext.substitute(zero) - sec.s
    if not r3.is_zero():
        raise ValueError("extension moves the zero section: %s" % r3.to_text())
    return ext


def canonical_gauge(sec: SecondaryData) -> GradedPoly:
    """The degree-0 parameter whose shift lands on the residual charge."""
    bfv = sec.bfv
    sysm = bfv.system
    y = _pairing(sec, bfv.chi, sec.rhod)
    y = y + _tensor_term(sec, sysm.f, bfv.chi, bfv.chi, sec.mud, Fraction(1, 2))
    y = y + _tensor_term(sec, sysm.m, bfv.chi, bfv.lam, sec.mud, Fraction(1))
    return y


def gauge_shift(field: VectorFieldRep, ext: GradedPoly, y: GradedPoly) -> GradedPoly:
    """Shift a charge by the differential of a degree-0 parameter."""
    if y.degree() not in (0, None):
        raise ValueError("gauge parameter must have degree 0")
    return ext + field.apply(y)


def residual_charge(sec: SecondaryData) -> GradedPoly:
    """Pullback form of the residual master charge on the double chart."""
    bfv = sec.bfv
    sysm = bfv.system
    al = sec.chart.alg
    out = al.zero()
    for j, psi in enumerate(sysm.psi):
        out = out + al.gen(bfv.lam[j]) * sec.chart.lift(bfv.chart.lift(psi))
    out = out + _tensor_term(sec, sysm.h, bfv.lam, bfv.lam, bfv.lamd,
                             Fraction(-1, 2))
    out = out - _tensor_term(sec, sysm.m, sec.rho, bfv.lam, sec.rhod,
                             Fraction(1))
    return out


def residual_system(sys: ConstraintSystem) -> ConstraintSystem:
    """The outer family alone, as a single-layer constraint system."""
    return ConstraintSystem(
        name=sys.name + "_residual",
        chart=sys.chart,
        phi=[],
        psi=list(sys.psi),
        h=dict(sys.h),
    )


@dataclass
class DoubleBfvData:
    """A second layer built over a first, with all charges assembled."""

    sec: SecondaryData
    s: GradedPoly              # second-layer charge
    q: VectorFieldRep          # its Hamiltonian field
    extension: GradedPoly
    gauge: GradedPoly
    residual: GradedPoly

    @property
    def chart(self):
        return self.sec.chart

    def verify(self) -> StructureReport:
        """All exact identities of the layer, one named row each."""
        sec = self.sec
        chart = sec.chart
        checks = [
            _poly_check("double-cme", poisson(self.s, self.s, chart)),
            _poly_check("extension-cocycle", self.q.apply(self.extension)),
            _poly_check("extension-cme",
                        poisson(self.extension, self.extension, chart)),
            _poly_check("total-cme",
                        poisson(self.extension + self.s,
                                self.extension + self.s, chart)),
        ]
        zero = {name: chart.alg.zero()
                for name in sec.rho + sec.rhod + sec.mu + sec.mud}
        checks.append(_poly_check(
            "zero-section", self.extension.substitute(zero) - sec.s))
        shifted = gauge_shift(self.q, self.extension, self.gauge)
        checks.append(_poly_check("residual-shift", shifted - self.residual))
        # the shift cannot leave the cocycle class
        checks.append(_poly_check("shifted-cocycle", self.q.apply(shifted)))
        # residual charge with the added pairs removed = residual theory
        res_bfv = build_bfv(residual_system(sec.bfv.system))
        lifted = chart.lift(res_bfv.s)
        checks.append(_poly_check(
            "residual-reduction", self.residual.substitute(zero) - lifted))
        return StructureReport(checks)


def build_double(bfv: BfvData) -> DoubleBfvData:
    sec = build_secondary(bfv)
    s2 = build_double_charge(sec)
    return DoubleBfvData(
        sec=sec,
        s=s2,
        q=ham_vf(s2, sec.chart),
        extension=build_extension(sec, s2),
        gauge=canonical_gauge(sec),
        residual=residual_charge(sec),
    )


def residual_bfv_compare(double: DoubleBfvData) -> StructureReport:
    """Reduction of the shifted extension against the residual theory."""
    rep = double.verify()
    keep = ("residual-shift", "residual-reduction", "shifted-cocycle")
    return StructureReport([c for c in rep.checks if c.name in keep])


# ---------------------------------------------------------------------------
# body-level reduction flows


@dataclass
class BodyState:
    """Numeric field values: even coordinates plus odd coefficient vectors."""

    q: np.ndarray
    p: np.ndarray
    lam: np.ndarray
    lamd: np.ndarray

    @classmethod
    def make(cls, q, p, lam=(), lamd=()):
        return cls(
            q=np.asarray(q, dtype=float),
            p=np.asarray(p, dtype=float),
            lam=np.asarray(lam, dtype=float),
            lamd=np.asarray(lamd, dtype=float),
        )

    def copy(self) -> "BodyState":
        return BodyState(self.q.copy(), self.p.copy(),
                         self.lam.copy(), self.lamd.copy())


class _BodyField:
    """Compiled body-level restriction of the second-layer differential.

    Each component polynomial is linear in rho and in at most one of
    (lam, lamd); terms touching any other odd generator vanish on the
    body slice and are dropped at compile time.
    """

    def __init__(self, double: DoubleBfvData):
        sec = double.sec
        base = sec.bfv.system.chart
        self.qnames = [qn for (qn, _pn) in base.pairs]
        self.pnames = [pn for (_qn, pn) in base.pairs]
        rho_slot = {n: i for i, n in enumerate(sec.rho)}
        lam_slot = {n: i for i, n in enumerate(sec.bfv.lam)}
        lamd_slot = {n: i for i, n in enumerate(sec.bfv.lamd)}
        even_base = set(self.qnames) | set(self.pnames)

        def compile_component(poly):
            # terms: (rho slot, odd kind or None, [(even name, exp)], coeff)
            terms = []
            for coeff, mono in poly.iter_terms():
                rho = None
                odd = None
                evens = []
                ok = True
                for name, e in mono:
                    if name in rho_slot:
                        ok = ok and rho is None
                        rho = rho_slot[name]
                    elif name in lam_slot:
                        ok = ok and odd is None
                        odd = ("lam", lam_slot[name])
                    elif name in lamd_slot:
                        ok = ok and odd is None
                        odd = ("lamd", lamd_slot[name])
                    elif name in even_base:
                        evens.append((name, e))
                    else:
                        ok = False  # chi, mu, ... : zero on the body slice
                    if not ok:
                        break
                if ok and rho is not None:
                    if coeff.im != 0:
                        raise ValueError("complex coefficient in flow field")
                    terms.append((rho, odd, evens, float(coeff.re)))
            return terms

        self.comp: Dict[Tuple[str, int], list] = {}
        for i, name in enumerate(self.qnames):
            self.comp[("q", i)] = compile_component(double.q.component(name))
        for i, name in enumerate(self.pnames):
            self.comp[("p", i)] = compile_component(double.q.component(name))
        for i, name in enumerate(sec.bfv.lam):
            self.comp[("lam", i)] = compile_component(double.q.component(name))
        for i, name in enumerate(sec.bfv.lamd):
            self.comp[("lamd", i)] = compile_component(double.q.component(name))

    def rate(self, state: BodyState, rho_bar: np.ndarray) -> BodyState:
        env = {}
        for i, n in enumerate(self.qnames):
            env[n] = state.q[i]
        for i, n in enumerate(self.pnames):
            env[n] = state.p[i]
        out = BodyState(
            np.zeros_like(state.q), np.zeros_like(state.p),
            np.zeros_like(state.lam), np.zeros_like(state.lamd))
        arrays = {"q": out.q, "p": out.p, "lam": out.lam, "lamd": out.lamd}
        srcs = {"lam": state.lam, "lamd": state.lamd}
        for (kind, slot), terms in self.comp.items():
            acc = 0.0
            for rho_slot, odd, evens, coeff in terms:
                val = coeff * rho_bar[rho_slot]
                for name, e in evens:
                    val *= env[name] ** e
                if odd is not None:
                    val *= srcs[odd[0]][odd[1]]
                acc += val
            arrays[kind][slot] = acc
        return out


def _as_path(rho_bar, n1: int) -> Callable[[float], np.ndarray]:
    if callable(rho_bar):
        return lambda t: np.asarray(rho_bar(t), dtype=float)
    arr = np.asarray(rho_bar, dtype=float)
    if arr.ndim == 1 and arr.shape[0] == n1:
        return lambda t: arr
    raise ValueError("rho path must be a callable or a vector of length %d" % n1)


def flow_reduce_body(
    double: DoubleBfvData,
    state: BodyState,
    rho_bar,
    t_total: float,
    step: float,
) -> BodyState:
    """Integrate the body-level reduction flow with classical RK4.

    ``rho_bar`` is an even parameter standing in for the odd flow
    direction: a constant vector, a callable of time, or a list of
    (duration, vector) pieces which are integrated in sequence (their
    durations then define the total time and ``t_total`` is ignored).
    """
    if step <= 0:
        raise ValueError("step must be positive")
    n1 = double.sec.bfv.system.n1
    if isinstance(rho_bar, (list, tuple)) and rho_bar and isinstance(rho_bar[0], tuple):
        cur = state
        for dur, vec in rho_bar:
            cur = flow_reduce_body(double, cur, np.asarray(vec, dtype=float),
                                   dur, step)
        return cur

    path = _as_path(rho_bar, n1)
    field = _BodyField(double)
    cur = state.copy()
    t = 0.0
    remaining = float(t_total)
    while remaining > 1e-15:
        h = min(step, remaining)

        def add(s: BodyState, k: BodyState, w: float) -> BodyState:
            return BodyState(s.q + w * k.q, s.p + w * k.p,
                             s.lam + w * k.lam, s.lamd + w * k.lamd)

        k1 = field.rate(cur, path(t))
        k2 = field.rate(add(cur, k1, h / 2), path(t + h / 2))
        k3 = field.rate(add(cur, k2, h / 2), path(t + h / 2))
        k4 = field.rate(add(cur, k3, h), path(t + h))
        cur = BodyState(
            cur.q + h / 6 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q),
            cur.p + h / 6 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p),
            cur.lam + h / 6 * (k1.lam + 2 * k2.lam + 2 * k3.lam + k4.lam),
            cur.lamd + h / 6 * (k1.lamd + 2 * k2.lamd + 2 * k3.lamd + k4.lamd),
        )
        for arr in (cur.q, cur.p, cur.lam, cur.lamd):
            if not np.all(np.isfinite(arr)):
                raise ValueError("flow produced non-finite values")
        t += h
        remaining -= h
    return cur
