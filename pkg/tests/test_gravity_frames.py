"""Gauge fixing, constraint flows and the reduced slice structure.

The stage closed forms are checked against integrating the rotation
generator, the flow law against transporting the torsion as its own
observable, and the gauge fixing against orbit independence of the
metric variables.  The reduced pairing and the constraint density are
compared with the exact engine on the constant-coefficient model.
"""

import numpy as np
import pytest

from bfvkit.gravity.frames import (
    STAGES,
    check_on_slice,
    constraint_flow_invariance,
    embed_slice,
    lorentz_flow,
    lorentz_rhs,
    normalize_frame,
    omega_bf,
    random_euclidean_gauge,
    reduced_pattern,
    reduced_structure_check,
    residual_bridge,
    residual_density,
    resolve_dependents,
    rotate_point,
    slice_coords,
    slice_tangent,
    stage_angle,
    stage_transform,
)
from bfvkit.gravity.points import FramePoint, bf_to_eh, lbr, torsion


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(11)


@pytest.fixture(scope="module")
def bridge():
    return residual_bridge()


def _euclid_rhs(pt, plane, theta, dtheta):
    # generator of the one-parameter rotation family, for the flow route
    p, q = plane
    P = np.zeros((3, 3))
    P[p, q] = 1.0
    P[q, p] = -1.0
    b = theta * pt.b @ P.T
    db = np.stack([
        np.stack([theta * P @ pt.db[mu, nu] + dtheta[mu] * P @ pt.b[nu]
                  for nu in range(2)])
        for mu in range(2)])
    a = np.stack([theta * (P @ pt.a[nu] - pt.a[nu] @ P) + dtheta[nu] * P
                  for nu in range(2)])
    ca = (theta * (P @ pt.ca - pt.ca @ P)
          + dtheta[0] * (P @ pt.a[1] - pt.a[1] @ P)
          - dtheta[1] * (P @ pt.a[0] - pt.a[0] @ P))
    return FramePoint(b, db, a, ca, theta * P @ pt.tau,
                      theta * (P @ pt.bd - pt.bd @ P), theta * P @ pt.chi)


def test_stages_zero_the_pivots(rng):
    pt = FramePoint.random(rng)
    for k in range(3):
        pt = stage_transform(pt, k)
    assert abs(pt.b[0, 0]) < 1e-13
    assert abs(pt.b[1, 0]) < 1e-13
    assert abs(pt.b[1, 1]) < 1e-13
    assert pt.b[0, 1] > 0 and pt.b[1, 2] > 0


def test_stage_closed_form_matches_flow(rng):
    # integrate the rotation generator to time 1 and compare with the
    # closed-form transform at the same angle data
    for k in range(3):
        pt = FramePoint.random(rng)
        theta, dtheta, _ = stage_angle(pt, k)
        closed = rotate_point(pt, STAGES[k][0], theta, dtheta)
        y = pt.pack()
        n = 600
        h = 1.0 / n

        def f(v):
            return _euclid_rhs(FramePoint.unpack(v), STAGES[k][0],
                               theta, dtheta).pack()

        for _ in range(n):
            k1 = f(y)
            k2 = f(y + 0.5 * h * k1)
            k3 = f(y + 0.5 * h * k2)
            k4 = f(y + h * k3)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        assert np.max(np.abs(y - closed.pack())) < 1e-10


def test_rotations_compose_in_plane(rng):
    pt = FramePoint.random(rng)
    th1, th2 = 0.7, -0.4
    dth1 = rng.uniform(-1, 1, 2)
    dth2 = rng.uniform(-1, 1, 2)
    one = rotate_point(rotate_point(pt, (0, 2), th1, dth1), (0, 2), th2, dth2)
    two = rotate_point(pt, (0, 2), th1 + th2, dth1 + dth2)
    assert np.max(np.abs(one.pack() - two.pack())) < 1e-12


def test_vanishing_pivot_raises():
    pt = FramePoint(np.zeros((2, 3)), np.zeros((2, 2, 3)), np.zeros((2, 3, 3)),
                    np.zeros((3, 3)), np.zeros(3), np.zeros((3, 3)), np.zeros(3))
    with pytest.raises(ValueError, match="vanishing pivot"):
        stage_angle(pt, 0)


def test_resolve_dependents_restores_constraint(rng):
    pt = FramePoint.random(rng)
    out = resolve_dependents(pt)
    assert np.max(np.abs(torsion(out))) < 1e-12
    # free components and every other field untouched
    for nu, i, j in ((0, 0, 1), (1, 0, 1), (1, 0, 2)):
        assert out.a[nu][i, j] == pt.a[nu][i, j]
    for name in ("b", "db", "ca", "tau", "bd", "chi"):
        assert np.array_equal(getattr(out, name), getattr(pt, name))


def test_torsion_transports_along_flow(rng):
    # the observable route: integrate the point, integrate the torsion
    # as a Lorentz vector, meet in the middle
    pt = FramePoint.random(rng)
    rho = rng.uniform(-1, 1, 3)
    drho = rng.uniform(-1, 1, (2, 3))
    steps = 400
    h = 1.0 / steps
    t = torsion(pt)
    for _ in range(steps):
        k1 = lbr(t, rho)
        k2 = lbr(t + 0.5 * h * k1, rho)
        k3 = lbr(t + 0.5 * h * k2, rho)
        k4 = lbr(t + h * k3, rho)
        t = t + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    end = lorentz_flow(pt, rho, drho, steps=steps)
    assert np.max(np.abs(torsion(end) - t)) < 1e-9


def test_flipped_curl_breaks_covariance(rng):
    # same transport with the curl orientation reversed: the jet terms
    # no longer cancel, so this is the negative control for the sign
    def flipped(p):
        curl = p.db[0, 1] - p.db[1, 0]
        return torsion(p) - 2.0 * curl

    pt = FramePoint.random(rng)
    rho = rng.uniform(-1, 1, 3)
    drho = rng.uniform(-1, 1, (2, 3))
    steps = 400
    h = 1.0 / steps
    t = flipped(pt)
    for _ in range(steps):
        k1 = lbr(t, rho)
        k2 = lbr(t + 0.5 * h * k1, rho)
        k3 = lbr(t + 0.5 * h * k2, rho)
        k4 = lbr(t + h * k3, rho)
        t = t + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    end = lorentz_flow(pt, rho, drho, steps=steps)
    assert np.max(np.abs(flipped(end) - t)) > 0.1


def test_compact_direction_flow_is_a_rotation(rng):
    # on the rotation subgroup the Lorentz and Euclidean actions agree,
    # which pins the flow normalisation on every field at once
    pt = FramePoint.random(rng)
    r = 0.8
    end = lorentz_flow(pt, np.array([r, 0.0, 0.0]), steps=300)
    closed = rotate_point(pt, (1, 2), r, np.zeros(2))
    assert np.max(np.abs(end.pack() - closed.pack())) < 1e-9


def test_normalize_lands_on_slice(rng):
    pt = FramePoint.random(rng)
    npt, log = normalize_frame(pt)
    check_on_slice(npt, tol=1e-10)
    assert np.max(np.abs(npt.chi)) == 0.0
    assert np.array_equal(log["mu"], -pt.chi)
    assert len(log["angles"]) == 3
    assert min(log["pivots"]) > 0


def test_normalize_idempotent(rng):
    pt = FramePoint.random(rng)
    npt, _ = normalize_frame(pt)
    again, log = normalize_frame(npt)
    assert max(abs(a) for a in log["angles"]) < 1e-12
    assert np.max(np.abs(again.pack() - npt.pack())) < 1e-10


def test_gauge_orbit_has_one_slice_point(rng):
    # normalization after an arbitrary internal rotation with jets gives
    # the same slice point and the same metric variables
    for _ in range(5):
        pt = FramePoint.random(rng)
        npt, _ = normalize_frame(pt)
        moved = random_euclidean_gauge(pt, rng)
        nmoved, _ = normalize_frame(moved)
        assert np.max(np.abs(nmoved.pack() - npt.pack())) < 1e-8
        assert bf_to_eh(nmoved).deviation(bf_to_eh(npt)) < 1e-8


def test_metric_map_needs_the_quotient(rng):
    # negative control: the raw map is not orbit-constant, only its
    # composition with the gauge fixing is
    pt = FramePoint.random(rng)
    if np.linalg.det(pt.b[:, 1:] @ pt.b[:, 1:].T) <= 0:
        pt.b[:, 1:] = np.eye(2) + 0.1 * pt.b[:, 1:]
    moved = random_euclidean_gauge(pt, rng)
    try:
        dev = bf_to_eh(moved).deviation(bf_to_eh(pt))
    except ValueError:
        dev = np.inf
    assert dev > 0.1


def test_drift_rotation_direction(rng):
    pt = FramePoint.random(rng)
    npt, _ = normalize_frame(pt)
    rep = constraint_flow_invariance(npt, np.array([0.7, 0.0, 0.0]), steps=400)
    assert rep["max_drift"] < 1e-6
    assert rep["torsion_max"] < 1e-8


def test_drift_rotation_with_jet(rng):
    pt = FramePoint.random(rng)
    npt, _ = normalize_frame(pt)
    drho = np.array([[0.3, 0.0, 0.0], [-0.2, 0.0, 0.0]])
    rep = constraint_flow_invariance(npt, np.array([0.7, 0.0, 0.0]),
                                     drho=drho, steps=400)
    assert rep["max_drift"] < 1e-6


def test_drift_boost_direction_moves_the_metric(rng):
    pt = FramePoint.random(rng)
    npt, _ = normalize_frame(pt)
    rep = constraint_flow_invariance(npt, np.array([0.0, 0.5, 0.0]), steps=400)
    assert rep["max_drift"] > 0.1
    assert rep["torsion_max"] < 1e-8


def test_flow_requires_constraint_surface(rng):
    pt = FramePoint.random(rng)
    with pytest.raises(ValueError, match="off the constraint surface"):
        constraint_flow_invariance(pt, np.array([0.7, 0.0, 0.0]), steps=10)


def test_omega_antisymmetric(rng):
    u = FramePoint.random(rng)
    v = FramePoint.random(rng)
    assert abs(omega_bf(u, v) + omega_bf(v, u)) < 1e-13
    assert omega_bf(u, u) == 0.0


def test_reduced_pairing_pattern(rng, bridge):
    for _ in range(5):
        pt = FramePoint.random(rng)
        npt, _ = normalize_frame(pt)
        rep = reduced_structure_check(npt, bridge=bridge)
        assert rep["pairing_dev"] < 1e-12
        assert abs(abs(rep["pairing_det"]) - 1.0) < 1e-12
        assert rep["action_dev"] < 1e-12


def test_reduced_check_rejects_mutated_point(rng, bridge):
    pt = FramePoint.random(rng)
    npt, _ = normalize_frame(pt)
    npt.b[1, 0] = 0.5
    with pytest.raises(ValueError, match="not on the gauge-fixed slice"):
        reduced_structure_check(npt, bridge=bridge)


def test_embedding_round_trip(rng):
    pt = FramePoint.random(rng)
    npt, _ = normalize_frame(pt)
    z = slice_coords(npt)
    back = embed_slice(npt, z)
    assert np.max(np.abs(back.pack() - npt.pack())) < 1e-12
    # a coordinate tangent moves exactly its own slice coordinate
    u = slice_tangent(npt, 4)
    assert abs(slice_coords(u)[4] - 1.0) < 1e-12
    assert np.max(np.abs(np.delete(slice_coords(u), 4))) < 1e-12


def test_pattern_matrix_shape():
    w = reduced_pattern()
    assert w.shape == (12, 12)
    assert np.array_equal(w, -w.T)
    assert abs(abs(np.linalg.det(w)) - 1.0) < 1e-12


def test_residual_density_matches_engine_on_curved_input(rng, bridge):
    # the engine sees no curl on the constant model; with the curl
    # contribution removed the exact polynomial value and the pointwise
    # density agree to float rounding
    for _ in range(5):
        pt = FramePoint.random(rng)
        flat = pt.copy()
        flat.ca = np.zeros((3, 3))
        assert abs(bridge.value(flat) - residual_density(flat)) < 1e-12
