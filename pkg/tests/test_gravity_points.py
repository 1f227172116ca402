"""Pointwise frame data: the vector/matrix dictionary, the torsion
solve and the metric-variable map.

The float helpers are checked against the exact rational Lie module on
integer data, the solver against direct residual evaluation, and the
metric map on frames where every output is known in closed form.
"""

from fractions import Fraction

import numpy as np
import pytest

from bfvkit.gravity.lie import bracket_vec, mat_bracket, mat_to_vec, vec_to_mat
from bfvkit.gravity.points import (
    EhPoint,
    FramePoint,
    act,
    bf_to_eh,
    extrinsic,
    lbr,
    mat_of_vec,
    matbr,
    solve_torsion,
    torsion,
    vec_of_mat,
)


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(11)


def test_dictionary_matches_exact_route(rng):
    # same iso and brackets as the rational module, on integer points
    for _ in range(20):
        x = rng.integers(-5, 6, 3)
        y = rng.integers(-5, 6, 3)
        xf = [Fraction(int(v)) for v in x]
        yf = [Fraction(int(v)) for v in y]
        assert np.array_equal(mat_of_vec(x),
                              np.array(vec_to_mat(xf), dtype=float))
        assert np.array_equal(lbr(x, y),
                              np.array(bracket_vec(xf, yf), dtype=float))
        assert np.array_equal(vec_of_mat(mat_of_vec(x)), x.astype(float))
        assert [Fraction(v) for v in vec_of_mat(mat_of_vec(x))] == \
            mat_to_vec(vec_to_mat(xf))


def test_action_and_commutator_close(rng):
    for _ in range(10):
        x = rng.uniform(-2, 2, 3)
        y = rng.uniform(-2, 2, 3)
        v = rng.uniform(-2, 2, 3)
        assert np.allclose(act(mat_of_vec(x), v), lbr(x, v), atol=1e-13)
        assert np.allclose(matbr(mat_of_vec(x), mat_of_vec(y)),
                           mat_of_vec(lbr(x, y)), atol=1e-13)


def test_frame_point_validation(rng):
    pt = FramePoint.random(rng)
    back = FramePoint.unpack(pt.pack())
    assert np.array_equal(back.pack(), pt.pack())
    with pytest.raises(ValueError, match="shape"):
        FramePoint(np.zeros((3, 3)), pt.db, pt.a, pt.ca, pt.tau, pt.bd, pt.chi)
    bad = pt.a.copy()
    bad[0, 0, 0] = 1.0
    with pytest.raises(ValueError, match="antisymmetric"):
        FramePoint(pt.b, pt.db, bad, pt.ca, pt.tau, pt.bd, pt.chi)


def test_solve_torsion_random(rng):
    for _ in range(30):
        b = rng.uniform(-2, 2, (2, 3))
        db = rng.uniform(-2, 2, (2, 2, 3))
        tau = rng.uniform(-2, 2, 3)
        bd = mat_of_vec(rng.uniform(-2, 2, 3))
        k = rng.uniform(-2, 2, (2, 2))
        k = 0.5 * (k + k.T)
        a = solve_torsion(b, db, tau, bd, k)
        pt = FramePoint(b, db, a, np.zeros((3, 3)), tau, bd, np.zeros(3))
        assert np.max(np.abs(torsion(pt))) < 1e-12
        assert np.max(np.abs(extrinsic(pt) - k)) < 1e-12


def test_solve_torsion_flat_frame_is_flat():
    # B the standard spatial diad with no other data: the connection
    # vanishes identically and so do all metric momenta
    b = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    a = solve_torsion(b, np.zeros((2, 2, 3)), np.zeros(3), np.zeros((3, 3)),
                      np.zeros((2, 2)))
    assert np.max(np.abs(a)) == 0.0
    pt = FramePoint(b, np.zeros((2, 2, 3)), a, np.zeros((3, 3)),
                    np.zeros(3), np.zeros((3, 3)), np.zeros(3))
    eh = bf_to_eh(pt)
    assert np.array_equal(eh.g, np.eye(2))
    assert np.max(np.abs(eh.pi)) == 0.0
    assert eh.xin == 0.0 and eh.phin == 0.0
    assert np.max(np.abs(eh.xi)) == 0.0 and np.max(np.abs(eh.phi)) == 0.0


def test_solve_torsion_singular_minor():
    # parallel spatial rows leave the extrinsic block rank-deficient
    b = np.array([[0.0, 1.0, 0.0], [0.0, 2.0, 0.0]])
    with pytest.raises(ValueError, match="singular spatial minor"):
        solve_torsion(b, np.zeros((2, 2, 3)), np.zeros(3), np.zeros((3, 3)),
                      np.zeros((2, 2)))


def test_torsion_responds_to_frame_perturbation(rng):
    b = rng.uniform(-2, 2, (2, 3))
    db = rng.uniform(-2, 2, (2, 2, 3))
    tau = rng.uniform(-2, 2, 3)
    bd = mat_of_vec(rng.uniform(-2, 2, 3))
    a = solve_torsion(b, db, tau, bd, np.zeros((2, 2)))
    b2 = b + rng.uniform(-1e-3, 1e-3, (2, 3))
    pt = FramePoint(b2, db, a, np.zeros((3, 3)), tau, bd, np.zeros(3))
    r = np.max(np.abs(torsion(pt)))
    assert 1e-5 < r < 1e-1


def test_metric_scaling(rng):
    pt = FramePoint.random(rng)
    if np.linalg.det(pt.b[:, 1:] @ pt.b[:, 1:].T) <= 0:
        pt.b[:, 1:] = np.eye(2) + 0.1 * pt.b[:, 1:]
    scaled = pt.copy()
    scaled.b = 3.0 * pt.b
    g1 = bf_to_eh(pt).g
    g9 = bf_to_eh(scaled).g
    assert np.max(np.abs(g9 - 9.0 * g1)) < 1e-12


def test_lapse_and_shift_extraction(rng):
    for _ in range(10):
        pt = FramePoint.random(rng)
        m = pt.b[:, 1:]
        if abs(np.linalg.det(m)) < 0.1:
            continue
        if np.linalg.det(m @ m.T) <= 0:
            continue
        eh = bf_to_eh(pt)
        assert eh.xin == pt.tau[0]
        # the shift contracts the spatial diad back onto tau
        assert np.allclose(m.T @ eh.xi, pt.tau[1:], atol=1e-12)
        assert abs(eh.phin - 4.0 * pt.bd[1, 2]) < 1e-13


def test_degenerate_metric_raises(rng):
    pt = FramePoint.random(rng)
    pt.b[:, 1:] = 0.0
    with pytest.raises(ValueError, match="degenerate spatial metric"):
        bf_to_eh(pt)


def test_eh_point_deviation(rng):
    pt = FramePoint.random(rng)
    if np.linalg.det(pt.b[:, 1:] @ pt.b[:, 1:].T) <= 0:
        pt.b[:, 1:] = np.eye(2) + 0.1 * pt.b[:, 1:]
    eh = bf_to_eh(pt)
    assert eh.deviation(eh) == 0.0
    other = EhPoint(eh.g + 0.25, eh.pi, eh.xin, eh.xi, eh.phin, eh.phi)
    assert abs(eh.deviation(other) - 0.25) < 1e-15
