"""Surface models and the so(2,1) tables, each checked by two routes."""

import copy
from fractions import Fraction

import pytest

from bfvkit.gravity import dga
from bfvkit.gravity import lie
from bfvkit.gravity.dga import e_d, e_int, e_mul, torus_fourier, torus_h, validate_dga


ONE = Fraction(1)


@pytest.fixture(scope="module")
def mh():
    return torus_h()


@pytest.fixture(scope="module")
def mf():
    return torus_fourier(1)


class TestModels:
    def test_torus_h_passes(self, mh):
        rep = validate_dga(mh)
        assert rep.ok, [c for c in rep.checks if not c.ok]

    def test_torus_fourier_passes(self, mf):
        rep = validate_dga(mf)
        assert rep.ok, [c for c in rep.checks if not c.ok]

    def test_torus_fourier_cap2_passes(self):
        rep = validate_dga(torus_fourier(2))
        assert rep.ok, [c for c in rep.checks if not c.ok]

    def test_dimensions(self, mh, mf):
        assert mh.dim == 4
        assert mf.dim == 16
        assert len(mf.basis(0)) == 4
        assert len(mf.basis(1)) == 8
        assert len(mf.basis(2)) == 4

    def test_torus_h_differential_vanishes(self, mh):
        for n in mh.names:
            assert e_d(mh, {n: ONE}) == {}

    def test_fourier_differential_active(self, mf):
        # d(u) = u a, mode number +1
        assert e_d(mf, {"u1v0": ONE}) == {"u1v0_a": ONE}
        assert e_d(mf, {"u0v1": ONE}) == {"u0v1_a": -ONE}
        # the balanced mode is closed
        assert e_d(mf, {"u1v1": ONE}) == {}

    def test_fourier_integral_balanced_corner(self, mf):
        assert e_int(mf, {"u1v1_ab": ONE}) == 1
        assert e_int(mf, {"u1v0_ab": ONE}) == 0
        prod = e_mul(mf, {"u1v0_a": ONE}, {"u0v1_b": ONE})
        assert e_int(mf, prod) == 1

    def test_fourier_window_is_ideal(self, mf):
        # u * u leaves the window, so both association orders agree at 0
        uu = e_mul(mf, {"u1v0": ONE}, {"u1v0": ONE})
        assert uu == {}
        lhs = e_mul(mf, uu, {"u0v1": ONE})
        rhs = e_mul(mf, {"u1v0": ONE}, e_mul(mf, {"u1v0": ONE}, {"u0v1": ONE}))
        assert lhs == rhs == {}


class TestMutations:
    def test_broken_stokes_flagged(self, mf):
        # an integral leaking onto an unbalanced corner sees d-images
        bad = copy.deepcopy(mf)
        bad.integral["u1v0_ab"] = ONE
        rep = validate_dga(bad)
        assert not rep["stokes"].ok
        assert rep["stokes"].residual >= 1

    def test_broken_truncation_flagged(self, mf):
        # dropping one product entry breaks associativity or Leibniz
        bad = copy.deepcopy(mf)
        del bad.mul[("u1v0", "u0v1")]
        rep = validate_dga(bad)
        assert not rep.ok
        assert not (rep["associative"].ok and rep["leibniz"].ok)

    def test_broken_sign_flagged(self, mh):
        bad = copy.deepcopy(mh)
        bad.mul[("b", "a")] = {"ab": ONE}
        rep = validate_dga(bad)
        assert not rep["graded-commutative"].ok

    def test_broken_volume_flagged(self, mh):
        bad = copy.deepcopy(mh)
        bad.integral["ab"] = Fraction(2)
        rep = validate_dga(bad)
        assert not rep["unit"].ok


class TestLie:
    def test_bracket_table(self):
        j0, j1, j2 = [ONE, 0, 0], [0, ONE, 0], [0, 0, ONE]
        assert lie.bracket_vec(j0, j1) == [0, 0, ONE]
        assert lie.bracket_vec(j1, j2) == [-ONE, 0, 0]
        assert lie.bracket_vec(j0, j2) == [0, -ONE, 0]

    def test_antisymmetry_and_jacobi(self):
        basis = [[ONE, 0, 0], [0, ONE, 0], [0, 0, ONE]]
        for x in basis:
            for y in basis:
                xy = lie.bracket_vec(x, y)
                yx = lie.bracket_vec(y, x)
                assert all(p + q == 0 for p, q in zip(xy, yx))
                for z in basis:
                    jac = [
                        p + q + r
                        for p, q, r in zip(
                            lie.bracket_vec(x, lie.bracket_vec(y, z)),
                            lie.bracket_vec(y, lie.bracket_vec(z, x)),
                            lie.bracket_vec(z, lie.bracket_vec(x, y)),
                        )
                    ]
                    assert jac == [0, 0, 0]

    def test_pairing_invariance(self):
        basis = [[ONE, 0, 0], [0, ONE, 0], [0, 0, ONE]]
        for x in basis:
            for y in basis:
                for z in basis:
                    lhs = lie.pair_vec(lie.bracket_vec(x, y), z)
                    rhs = lie.pair_vec(y, lie.bracket_vec(x, z))
                    assert lhs + rhs == 0

    def test_matrix_route_matches_vector_route(self):
        vecs = [
            [Fraction(1), Fraction(2), Fraction(-1)],
            [Fraction(0), Fraction(1), Fraction(3)],
            [Fraction(-2), Fraction(5), Fraction(1)],
        ]
        for x in vecs:
            X = lie.vec_to_mat(x)
            # antisymmetric and faithfully invertible
            for i in range(3):
                for j in range(3):
                    assert X[i][j] + X[j][i] == 0
            assert lie.mat_to_vec(X) == x
            for y in vecs:
                # the matrix action is the bracket
                assert lie.mat_apply(X, y) == lie.bracket_vec(x, y)
                # the eta-twisted commutator is the bracket
                Z = lie.mat_bracket(X, lie.vec_to_mat(y))
                assert lie.mat_to_vec(Z) == lie.bracket_vec(x, y)
