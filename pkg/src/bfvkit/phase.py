"""Graded Darboux charts and the exact Poisson bracket.

A chart is a list of conjugate generator pairs (q_i, p_i) with
deg q_i + deg p_i = 0, so the bracket has ghost degree 0.  The bracket
convention is fixed once and used everywhere:

    {f, g} = sum_i (-1)^(a_i |f|) [ (-1)^(a_i) (d_{q_i} f)(d_{p_i} g)
                                    - (d_{p_i} f)(d_{q_i} g) ]

with left derivatives, a_i the parity of the pair and |f| the parity
of f (mixed f is split first).  This normalisation gives {q, p} = 1
for every pair regardless of parity, and {p, q} = -(-1)^(a) likewise.
Graded antisymmetry, Leibniz and Jacobi hold exactly; the test suite
exercises them on random data rather than trusting the algebra here.
"""

from __future__ import annotations

import warnings
from typing import Iterable, Mapping, Optional

from .galg import GradedAlgebra, GradedPoly

__all__ = [
    "PhaseChart",
    "VectorFieldRep",
    "poisson",
    "ham_vf",
    "check_cme",
    "check_nilpotent",
]


class PhaseChart:
    """A graded symplectic chart: an algebra plus its conjugate pairs.

    Generators not claimed by any pair are central for the bracket
    (formal parameters such as hbar, or spectator coordinates).
    """

    def __init__(self, alg: GradedAlgebra, pairs: Iterable):
        self.alg = alg
        self.pairs = [tuple(p) for p in pairs]
        self._conj: dict = {}
        self._alpha: dict = {}
        self._is_q: dict = {}
        seen = set()
        for qname, pname in self.pairs:
            gq = alg.by_name[qname]
            gp = alg.by_name[pname]
            if gq.degree + gp.degree != 0:
                raise ValueError(
                    "pair (%s, %s) has degrees %d + %d != 0"
                    % (qname, pname, gq.degree, gp.degree)
                )
            if qname in seen or pname in seen or qname == pname:
                raise ValueError("generator reused across pairs")
            seen.update((qname, pname))
            self._conj[qname] = pname
            self._conj[pname] = qname
            a = gq.parity
            self._alpha[qname] = a
            self._alpha[pname] = a
            self._is_q[qname] = True
            self._is_q[pname] = False

    @classmethod
    def build(cls, pair_specs: Iterable, extra_gens: Iterable = ()):
        """Create algebra and chart together.

        ``pair_specs`` is an iterable of ((qname, qdeg), (pname, pdeg));
        generators are declared in pair order, extras at the end.
        """
        gens = []
        pairs = []
        for (qn, qd), (pn, pd) in pair_specs:
            gens.append((qn, qd))
            gens.append((pn, pd))
            pairs.append((qn, pn))
        gens.extend(extra_gens)
        return cls(GradedAlgebra(gens), pairs)

    def pair_specs(self):
        out = []
        for qn, pn in self.pairs:
            out.append(
                ((qn, self.alg.by_name[qn].degree), (pn, self.alg.by_name[pn].degree))
            )
        return out

    def extra_gen_specs(self):
        claimed = set(self._conj)
        return [
            (g.name, g.degree) for g in self.alg.gens if g.name not in claimed
        ]

    def extend(self, new_pairs: Iterable = (), new_extras: Iterable = ()):
        """A larger chart containing this one; polys lift by name."""
        return PhaseChart.build(
            self.pair_specs() + [tuple(p) for p in new_pairs],
            self.extra_gen_specs() + list(new_extras),
        )

    def lift(self, p: GradedPoly) -> GradedPoly:
        """Reinterpret a polynomial from a smaller chart in this one."""
        return p.alg.transfer(p, self.alg)

    def conj(self, name: str) -> str:
        return self._conj[name]

    def alpha(self, name: str) -> int:
        return self._alpha[name]

    def is_position(self, name: str) -> bool:
        return self._is_q[name]

    def pair_names(self):
        for qn, pn in self.pairs:
            yield qn
            yield pn

    def __repr__(self):
        return "PhaseChart(%d pairs)" % len(self.pairs)


def _poisson_homogeneous(f: GradedPoly, g: GradedPoly, chart: PhaseChart,
                         f_parity: int) -> GradedPoly:
    out = chart.alg.zero()
    for qn, pn in chart.pairs:
        a = chart.alpha(qn)
        fq = f.partial(qn)
        fp = f.partial(pn)
        if fq.is_zero() and fp.is_zero():
            continue
        term = chart.alg.zero()
        if not fq.is_zero():
            gp = g.partial(pn)
            if not gp.is_zero():
                t = fq * gp
                if a:
                    t = -t
                term = term + t
        if not fp.is_zero():
            gq = g.partial(qn)
            if not gq.is_zero():
                term = term - fp * gq
        if a and f_parity:
            term = -term
        out = out + term
    return out


def poisson(f: GradedPoly, g: GradedPoly, chart: PhaseChart) -> GradedPoly:
    """Exact graded Poisson bracket {f, g} in the chart's convention."""
    ev, od = f.parity_parts()
    out = chart.alg.zero()
    if not ev.is_zero():
        out = out + _poisson_homogeneous(ev, g, chart, 0)
    if not od.is_zero():
        out = out + _poisson_homogeneous(od, g, chart, 1)
    return out


class VectorFieldRep:
    """An odd or even derivation given by its generator components.

    Acts on polynomials as F -> sum_z X^z * (d_z F), components
    multiplying from the left.  For X = ham_vf(H) this reproduces
    {H, F} exactly.
    """

    def __init__(self, chart: PhaseChart, components: Mapping[str, GradedPoly],
                 degree: Optional[int] = None, source: Optional[GradedPoly] = None):
        self.chart = chart
        self.components = {
            name: comp for name, comp in components.items() if not comp.is_zero()
        }
        self.degree = degree
        self.source = source
        if degree is not None:
            for name, comp in self.components.items():
                zdeg = chart.alg.by_name[name].degree
                if comp.degree() is not None and comp.degree() != zdeg + degree:
                    raise ValueError(
                        "component for %r has degree %r, expected %d"
                        % (name, comp.degree(), zdeg + degree)
                    )

    def apply(self, f: GradedPoly) -> GradedPoly:
        out = self.chart.alg.zero()
        for name, comp in self.components.items():
            df = f.partial(name)
            if not df.is_zero():
                out = out + comp * df
        return out

    def component(self, name: str) -> GradedPoly:
        return self.components.get(name, self.chart.alg.zero())

    def __repr__(self):
        return "VectorFieldRep(degree=%r, %d components)" % (
            self.degree,
            len(self.components),
        )


def ham_vf(h: GradedPoly, chart: PhaseChart) -> VectorFieldRep:
    """Hamiltonian vector field X_H with components X^z = {H, z}."""
    comps = {}
    for name in chart.pair_names():
        comps[name] = poisson(h, chart.alg.gen(name), chart)
    return VectorFieldRep(chart, comps, degree=h.degree(), source=h)


def check_cme(s: GradedPoly, chart: PhaseChart) -> GradedPoly:
    """Residual of the classical master equation, the exact {S, S}.

    A zero result certifies the master equation.  S of ghost degree
    other than 1 is unusual but legal; it only triggers a warning.
    """
    if s.degree() != 1:
        warnings.warn(
            "master charge is not homogeneous of ghost degree 1 (degree %r)"
            % (s.degree(),),
            stacklevel=2,
        )
    return poisson(s, s, chart)


def check_nilpotent(q: VectorFieldRep) -> dict:
    """Q^2 on every chart generator; empty dict means nilpotent."""
    out = {}
    for name in q.chart.pair_names():
        r = q.apply(q.apply(q.chart.alg.gen(name)))
        if not r.is_zero():
            out[name] = r
    return out
