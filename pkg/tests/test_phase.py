import random
import warnings
from fractions import Fraction

import pytest

from bfvkit.phase import PhaseChart, check_cme, check_nilpotent, ham_vf, poisson
from helpers import random_homogeneous, random_poly


@pytest.fixture
def chart():
    # one pair of every parity flavour that shows up downstream
    return PhaseChart.build(
        [
            (("q1", 0), ("p1", 0)),
            (("q2", 0), ("p2", 0)),
            (("chi", 1), ("chid", -1)),
            (("lam", 1), ("lamd", -1)),
            (("mu", 2), ("mud", -2)),
        ],
        extra_gens=[("t", 0)],
    )


def par(p):
    return p.degree() % 2


class TestCanonicalRelations:
    def test_q_p_is_one_for_every_parity(self, chart):
        al = chart.alg
        for qn, pn in chart.pairs:
            assert poisson(al.gen(qn), al.gen(pn), chart) == al.one()

    def test_conjugate_orientation(self, chart):
        al = chart.alg
        # even pair: {p, q} = -1; odd pair: {p, q} = +1
        assert poisson(al.gen("p1"), al.gen("q1"), chart) == -al.one()
        assert poisson(al.gen("chid"), al.gen("chi"), chart) == al.one()
        assert poisson(al.gen("mud"), al.gen("mu"), chart) == -al.one()

    def test_unrelated_generators_commute(self, chart):
        al = chart.alg
        assert poisson(al.gen("q1"), al.gen("p2"), chart).is_zero()
        assert poisson(al.gen("chi"), al.gen("lamd"), chart).is_zero()

    def test_frozen_spot_values(self, chart):
        al = chart.alg
        mu, chid, chi = al.gen("mu"), al.gen("chid"), al.gen("chi")
        assert poisson(mu * chid, chi, chart) == mu
        h = al.gen("p1") * al.gen("p1") * Fraction(1, 2)
        assert poisson(h, al.gen("q1"), chart) == -al.gen("p1")

    def test_central_extra_generator(self, chart):
        al = chart.alg
        t = al.gen("t")
        assert poisson(t, al.gen("p1"), chart).is_zero()
        assert poisson(t * al.gen("q1"), al.gen("p1"), chart) == t


class TestBracketLaws:
    def test_degree(self, chart):
        rng = random.Random(21)
        for _ in range(40):
            f = random_homogeneous(chart.alg, rng)
            g = random_homogeneous(chart.alg, rng)
            br = poisson(f, g, chart)
            if f.is_zero() or g.is_zero() or br.is_zero():
                continue
            assert br.degree() == f.degree() + g.degree()

    def test_graded_antisymmetry(self, chart):
        rng = random.Random(22)
        for _ in range(40):
            f = random_homogeneous(chart.alg, rng)
            g = random_homogeneous(chart.alg, rng)
            if f.is_zero() or g.is_zero():
                continue
            sign = -1 if not (par(f) and par(g)) else 1
            assert poisson(f, g, chart) == poisson(g, f, chart) * sign

    def test_leibniz(self, chart):
        rng = random.Random(23)
        for _ in range(30):
            f = random_homogeneous(chart.alg, rng)
            g = random_homogeneous(chart.alg, rng)
            h = random_poly(chart.alg, rng)
            if f.is_zero() or g.is_zero():
                continue
            sign = -1 if (par(f) and par(g)) else 1
            lhs = poisson(f, g * h, chart)
            rhs = poisson(f, g, chart) * h + (g * poisson(f, h, chart)) * sign
            assert lhs == rhs

    def test_jacobi(self, chart):
        rng = random.Random(24)
        for _ in range(30):
            f = random_homogeneous(chart.alg, rng, nterms=4, max_len=2)
            g = random_homogeneous(chart.alg, rng, nterms=4, max_len=2)
            h = random_poly(chart.alg, rng, nterms=4, max_len=2)
            if f.is_zero() or g.is_zero():
                continue
            sign = -1 if (par(f) and par(g)) else 1
            lhs = poisson(f, poisson(g, h, chart), chart)
            rhs = poisson(poisson(f, g, chart), h, chart) + poisson(
                g, poisson(f, h, chart), chart
            ) * sign
            assert lhs == rhs


class TestVectorFields:
    def test_ham_vf_reproduces_bracket(self, chart):
        rng = random.Random(25)
        for _ in range(30):
            h = random_poly(chart.alg, rng)
            f = random_poly(chart.alg, rng)
            x = ham_vf(h, chart)
            assert x.apply(f) == poisson(h, f, chart)

    def test_component_degrees(self, chart):
        al = chart.alg
        s = al.gen("chi") * al.gen("p1")
        q = ham_vf(s, chart)
        assert q.degree == 1
        assert q.component("chid") == al.gen("p1")

    def test_nilpotency_abelian(self, chart):
        al = chart.alg
        s = al.gen("chi") * al.gen("p1") + al.gen("lam") * al.gen("p2")
        q = ham_vf(s, chart)
        assert check_nilpotent(q) == {}

    def test_nilpotency_failure_detected(self, chart):
        al = chart.alg
        # {s, s} != 0 here, so Q^2 must leak on some generator
        s = al.gen("chi") * al.gen("p1") + al.gen("lam") * al.gen("q1")
        q = ham_vf(s, chart)
        assert check_nilpotent(q) != {}


class TestMasterEquation:
    def test_cme_zero_for_abelian_charge(self, chart):
        al = chart.alg
        s = al.gen("chi") * al.gen("p1")
        assert check_cme(s, chart).is_zero()

    def test_cme_degree_warning(self, chart):
        al = chart.alg
        with pytest.warns(UserWarning):
            check_cme(al.gen("q1"), chart)

    def test_cme_residual_nonzero(self, chart):
        al = chart.alg
        s = al.gen("chi") * al.gen("p1") + al.gen("lam") * al.gen("q1")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            r = check_cme(s, chart)
        assert not r.is_zero()


class TestChartPlumbing:
    def test_degree_pairing_enforced(self):
        with pytest.raises(ValueError):
            PhaseChart.build([(("a", 1), ("b", 1))])

    def test_extend_and_lift(self, chart):
        rng = random.Random(26)
        bigger = chart.extend([(("rho", 1), ("rhod", -1))])
        p = random_poly(chart.alg, rng)
        q = bigger.lift(p)
        assert q.to_text() == p.to_text()
        al = bigger.alg
        assert poisson(al.gen("rho"), al.gen("rhod"), bigger) == al.one()
        # old relations survive the extension
        assert poisson(al.gen("q1"), al.gen("p1"), bigger) == al.one()
