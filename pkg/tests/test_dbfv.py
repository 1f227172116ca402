"""Second resolution layer: charges, extension, gauge shift, flows."""

import numpy as np
import pytest

from bfvkit.bfv import build_bfv
from bfvkit.dbfv import (
    BodyState,
    build_double,
    canonical_gauge,
    flow_reduce_body,
    gauge_shift,
    residual_bfv_compare,
    residual_system,
)
from bfvkit.registry import REGISTRY, get_system

ALL_SYSTEMS = sorted(REGISTRY)


def _double(name):
    return build_double(build_bfv(get_system(name)))


# ---------------------------------------------------------------------------
# exact identities


class TestDoubleLayer:
    @pytest.mark.parametrize("name", ALL_SYSTEMS)
    def test_all_identities_exact(self, name):
        rep = _double(name).verify()
        bad = [(c.name, c.detail) for c in rep.checks if not c.ok]
        assert rep.ok, bad

    def test_report_rows_are_named(self):
        rep = _double("se2_nested").verify()
        names = [c.name for c in rep.checks]
        for want in (
            "double-cme",
            "extension-cocycle",
            "extension-cme",
            "total-cme",
            "zero-section",
            "residual-shift",
            "shifted-cocycle",
            "residual-reduction",
        ):
            assert want in names

    def test_residual_compare_is_the_reduction_slice(self):
        rep = residual_bfv_compare(_double("sl2_nested"))
        assert {c.name for c in rep.checks} == {
            "residual-shift",
            "shifted-cocycle",
            "residual-reduction",
        }
        assert rep.ok


class TestFrozenCharges:
    def test_abelian_second_charge_literal(self):
        dbl = _double("abelian")
        want = dbl.chart.alg.parse("rho1 p1 + mu1 chid1")
        assert (dbl.s - want).is_zero()

    def test_se2_second_charge_literal(self):
        # the dressed constraint enters with the frozen minus on the
        # g lam lamd tail, mirroring the first-layer charge
        dbl = _double("se2_nested")
        want = dbl.chart.alg.parse(
            "rho1 (q1 p2 - q2 p1 + p3)"
            " - rho1 lam1 lamd2 + rho1 lam2 lamd1 + mu1 chid1"
        )
        assert (dbl.s - want).is_zero()

    def test_abelian_extension_literal(self):
        dbl = _double("abelian")
        want = dbl.chart.alg.parse("chi1 p1 + lam1 p2 - mu1 rhod1")
        assert (dbl.extension - want).is_zero()

    def test_se2_extension_literal(self):
        # f = m = 0 for se2, so only the mu rhod transport term dresses
        # the first-layer charge
        dbl = _double("se2_nested")
        want = dbl.chart.alg.parse(
            "chi1 (q1 p2 - q2 p1 + p3) + lam1 p1 + lam2 p2"
            " - chi1 lam1 lamd2 + chi1 lam2 lamd1 - mu1 rhod1"
        )
        assert (dbl.extension - want).is_zero()

    def test_abelian_gauge_and_residual_literals(self):
        dbl = _double("abelian")
        assert (dbl.gauge - dbl.chart.alg.parse("chi1 rhod1")).is_zero()
        assert (dbl.residual - dbl.chart.alg.parse("lam1 p2")).is_zero()

    def test_se2_residual_literal(self):
        dbl = _double("se2_nested")
        want = dbl.chart.alg.parse("lam1 p1 + lam2 p2")
        assert (dbl.residual - want).is_zero()

    def test_gauge_parameter_degree_zero(self):
        for name in ALL_SYSTEMS:
            assert canonical_gauge(_double(name).sec).degree() in (0, None)

    def test_quartic_tail_is_load_bearing(self):
        # with g and m active on the same index the extension needs its
        # composite quartic term: the cubic truncation is not a cocycle
        dbl = _double("sl2_nested")
        cubic = dbl.extension.truncate(3)
        tail = dbl.extension - cubic
        assert not tail.is_zero()
        assert tail.max_word_length() == 4
        assert not dbl.q.apply(cubic).is_zero()

    def test_gauge_shift_rejects_wrong_degree(self):
        dbl = _double("abelian")
        with pytest.raises(ValueError, match="degree 0"):
            gauge_shift(dbl.q, dbl.extension, dbl.chart.alg.gen("chi1"))


class TestResidualSystem:
    def test_residual_keeps_outer_family_only(self):
        sys = get_system("se2_nested")
        red = residual_system(sys)
        assert red.phi == []
        assert len(red.psi) == len(sys.psi)
        assert red.h == sys.h
        assert red.name.endswith("_residual")

    def test_residual_builds_standalone(self):
        red = build_bfv(residual_system(get_system("sl2_nested")))
        assert red.cme_residual.is_zero()


# ---------------------------------------------------------------------------
# body-level flows


class TestReductionFlow:
    def se2_state(self):
        return BodyState.make(
            q=[0.3, -0.7, 0.2],
            p=[1.1, 0.4, -0.5],
            lam=[0.8, -0.6],
            lamd=[0.25, 0.75],
        )

    def test_se2_conserves_norm_and_pairing(self):
        dbl = _double("se2_nested")
        st = self.se2_state()
        out = flow_reduce_body(dbl, st, [1.0], 1.0, 1e-3)
        assert abs(np.linalg.norm(out.lam) - np.linalg.norm(st.lam)) < 1e-10
        assert abs(np.dot(out.lam, out.lamd) - np.dot(st.lam, st.lamd)) < 1e-10
        # the inner charge generates a rotation in the (1,2) plane
        assert abs(np.hypot(out.p[0], out.p[1])
                   - np.hypot(st.p[0], st.p[1])) < 1e-10

    def test_so3_conserves_momentum_norm(self):
        dbl = _double("so3")
        st = BodyState.make(q=[0.2, 0.5, -0.1], p=[0.7, -0.3, 0.9])
        out = flow_reduce_body(dbl, st, [0.5, -1.0, 0.25], 1.0, 1e-3)
        assert abs(np.linalg.norm(out.p) - np.linalg.norm(st.p)) < 1e-10
        assert abs(np.dot(out.q, out.p) - np.dot(st.q, st.p)) < 1e-10

    def test_piecewise_pieces_compose(self):
        dbl = _double("se2_nested")
        st = self.se2_state()
        pieces = flow_reduce_body(
            dbl, st, [(0.4, [0.9]), (0.6, [-0.3])], 0.0, 1e-3)
        manual = flow_reduce_body(
            dbl, flow_reduce_body(dbl, st, [0.9], 0.4, 1e-3),
            [-0.3], 0.6, 1e-3)
        for a, b in ((pieces.q, manual.q), (pieces.p, manual.p),
                     (pieces.lam, manual.lam), (pieces.lamd, manual.lamd)):
            assert np.max(np.abs(a - b)) < 1e-8

    def test_zero_parameter_is_the_identity(self):
        dbl = _double("se2_nested")
        st = self.se2_state()
        out = flow_reduce_body(dbl, st, [0.0], 1.0, 1e-3)
        assert np.array_equal(out.q, st.q)
        assert np.array_equal(out.p, st.p)
        assert np.array_equal(out.lam, st.lam)

    def test_time_dependent_parameter(self):
        dbl = _double("se2_nested")
        st = self.se2_state()
        out = flow_reduce_body(dbl, st, lambda t: [np.sin(t)], 1.0, 1e-3)
        assert abs(np.linalg.norm(out.lam) - np.linalg.norm(st.lam)) < 1e-10

    def test_step_must_be_positive(self):
        dbl = _double("abelian")
        st = BodyState.make(q=[0.0], p=[0.0], lam=[0.0], lamd=[0.0])
        with pytest.raises(ValueError, match="positive"):
            flow_reduce_body(dbl, st, [1.0], 1.0, 0.0)

    def test_wrong_parameter_shape_rejected(self):
        dbl = _double("se2_nested")
        with pytest.raises(ValueError, match="length 1"):
            flow_reduce_body(dbl, self.se2_state(), [1.0, 2.0], 1.0, 1e-3)

    def test_state_copy_is_deep(self):
        st = self.se2_state()
        cp = st.copy()
        cp.q[0] = 99.0
        assert st.q[0] == 0.3
