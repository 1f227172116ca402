"""Built-in finite-dimensional constraint systems.

Each factory returns a fresh ConstraintSystem on its own chart, with
the closure tensors written out explicitly; validate_structure is the
authority on whether the numbers are right, not this file.
"""

from __future__ import annotations

from fractions import Fraction

from .bfv import ConstraintSystem
from .phase import PhaseChart

__all__ = ["REGISTRY", "get_system", "system_names"]


def _chart(n: int) -> PhaseChart:
    return PhaseChart.build(
        [(("q%d" % (i + 1), 0), ("p%d" % (i + 1), 0)) for i in range(n)]
    )


def make_abelian() -> ConstraintSystem:
    """Two commuting momentum constraints on T*R^2, nested one in one."""
    chart = _chart(2)
    al = chart.alg
    return ConstraintSystem(
        name="abelian",
        chart=chart,
        phi=[al.gen("p1")],
        psi=[al.gen("p2")],
    )


def make_se2_nested() -> ConstraintSystem:
    """Rotation charge nested in the translations, on a flat chart of
    the cotangent bundle of the euclidean group.

    phi = (J), psi = (p1, p2) with J = q1 p2 - q2 p1 + p3.  The p3
    part matters: without it J lies in the ideal generated by p1, p2
    and the constraint set is reducible, which is outside the scope of
    a one-ghost-per-constraint resolution.  With it the three
    constraints form a regular sequence and the reduction is a point.
    J still rotates the translations into each other, so only the g
    tensor is populated.
    """
    chart = _chart(3)
    al = chart.alg
    j = (
        al.gen("q1") * al.gen("p2")
        - al.gen("q2") * al.gen("p1")
        + al.gen("p3")
    )
    return ConstraintSystem(
        name="se2_nested",
        chart=chart,
        phi=[j],
        psi=[al.gen("p1"), al.gen("p2")],
        g={(0, 0, 1): Fraction(1), (0, 1, 0): Fraction(-1)},
    )


def make_so3() -> ConstraintSystem:
    """The three rotation charges on T*R^3; psi is empty.

    {J_a, J_b} = eps_abc J_c, so f is the alternating tensor.
    """
    chart = _chart(3)
    al = chart.alg
    q = [al.gen("q%d" % i) for i in (1, 2, 3)]
    p = [al.gen("p%d" % i) for i in (1, 2, 3)]
    js = [
        q[1] * p[2] - q[2] * p[1],
        q[2] * p[0] - q[0] * p[2],
        q[0] * p[1] - q[1] * p[0],
    ]
    eps = {}
    for (i, j, k), v in (
        ((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1),
        ((1, 0, 2), -1), ((2, 1, 0), -1), ((0, 2, 1), -1),
    ):
        eps[(i, j, k)] = Fraction(v)
    return ConstraintSystem(name="so3", chart=chart, phi=js, psi=[], f=eps)


def make_sl2_nested() -> ConstraintSystem:
    """A raising generator inside a Borel-plus action on T*R^2.

    phi = (p1 q2), psi = (p1 q1 - p2 q2, p2 q1): the momentum map of
    the defining sl2 action restricted to (e) nested in (h, f).  This
    is the one stock system where h and m are both nonzero.
    """
    chart = _chart(2)
    al = chart.alg
    q1, p1 = al.gen("q1"), al.gen("p1")
    q2, p2 = al.gen("q2"), al.gen("p2")
    return ConstraintSystem(
        name="sl2_nested",
        chart=chart,
        phi=[p1 * q2],
        psi=[p1 * q1 - p2 * q2, p2 * q1],
        h={(0, 1, 1): Fraction(-2), (1, 0, 1): Fraction(2)},
        m={(0, 0, 0): Fraction(-2)},
        g={(0, 1, 0): Fraction(1)},
    )


def make_iso3() -> ConstraintSystem:
    """Rotations nested in the translations of R^3, on T*R^3.

    phi = (J_1, J_2, J_3), psi = (p_1, p_2, p_3): the euclidean-group
    moment map split into its factors.  Both f and g are alternating,
    which is the stock case where those two tensors share indices.
    """
    so3 = make_so3()
    al = so3.chart.alg
    eps = dict(so3.f)
    return ConstraintSystem(
        name="iso3",
        chart=so3.chart,
        phi=so3.phi,
        psi=[al.gen("p%d" % i) for i in (1, 2, 3)],
        f=dict(so3.f),
        g=eps,
    )


def make_sl2_scaled() -> ConstraintSystem:
    """The full sl2 triple nested in a one-dimensional scaling charge.

    phi = (p1 q2, p1 q1 - p2 q2, p2 q1), psi = (p1 q1): the raising
    and lowering generators scale under psi with opposite weights, so
    f and m are simultaneously nonzero with shared indices.
    """
    chart = _chart(2)
    al = chart.alg
    q1, p1 = al.gen("q1"), al.gen("p1")
    q2, p2 = al.gen("q2"), al.gen("p2")
    f = {
        (0, 1, 0): Fraction(-2), (1, 0, 0): Fraction(2),
        (0, 2, 1): Fraction(1), (2, 0, 1): Fraction(-1),
        (1, 2, 2): Fraction(-2), (2, 1, 2): Fraction(2),
    }
    return ConstraintSystem(
        name="sl2_scaled",
        chart=chart,
        phi=[p1 * q2, p1 * q1 - p2 * q2, p2 * q1],
        psi=[p1 * q1],
        f=f,
        m={(0, 0, 0): Fraction(-1), (2, 0, 2): Fraction(1)},
    )


def make_bf_torus_h() -> ConstraintSystem:
    """so(2,1) BF theory on the four-dimensional torus cohomology model.

    The smallest surface instance of the field theory: the Gauss and
    curvature moments on the flattened (frame, connection) chart.  The
    geometric layer lives in the `gravity` subpackage; registering the
    flattened system here lets the generic drivers treat it like any
    other finite-dimensional input.
    """
    from .gravity.dga import torus_h
    from .gravity.theory import build_bf_theory

    return build_bf_theory(torus_h()).system


REGISTRY = {
    "abelian": make_abelian,
    "se2_nested": make_se2_nested,
    "so3": make_so3,
    "sl2_nested": make_sl2_nested,
    "iso3": make_iso3,
    "sl2_scaled": make_sl2_scaled,
    "bf_torus_h": make_bf_torus_h,
}


def get_system(name: str) -> ConstraintSystem:
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise KeyError(
            "unknown system %r (have: %s)" % (name, ", ".join(sorted(REGISTRY)))
        ) from None
    return factory()


def system_names():
    return sorted(REGISTRY)
