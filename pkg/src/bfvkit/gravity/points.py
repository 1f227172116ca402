"""Pointwise frame data on a 2d slice and the map to metric variables.

The symbolic layer works with finitely many surface modes; this module
works with the value-and-first-jet data of the fields at a single point
of the slice.  A `FramePoint` carries the triad rows B_mu^I, their
spatial derivatives, the spin connection as antisymmetric matrices, its
curl, and the (tau, B-dagger, chi) multiplet, with two-index objects
stored both ways through the same vector/matrix dictionary as the exact
Lie module.

`solve_torsion` inverts the torsion constraint for the connection with
the symmetric extrinsic tensor K as the free data, and `bf_to_eh`
evaluates the ADM-style variables (spatial metric, momentum, shift and
lapse contractions) out of a frame point.  The contraction pattern of
the torsion was pinned against the engine's Gauss charge written in
field components and is frozen here; the curl term carries the same
slot orientation as the bracket term, which is the unique choice
covariant under the connection-shift flow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ETA = np.array([-1.0, 1.0, 1.0])
ETAD = np.diag(ETA)

# spatial Levi-Civita on internal indices {1,2}, eps_12 = +1; the slice
# orientation uses the same convention on coordinate indices.
EPS2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def mat_of_vec(x):
    """Antisymmetric matrix of a vector under the canonical so(2,1) dictionary."""
    return np.array([[0.0, x[2], -x[1]],
                     [-x[2], 0.0, -x[0]],
                     [x[1], x[0], 0.0]])


def vec_of_mat(X):
    return np.array([-X[1, 2], -X[0, 2], X[0, 1]])


def act(X, v):
    """Matrix action on a vector, metric indices lowered with eta."""
    return X @ (ETA * v)


def matbr(X, Y):
    """Commutator with the eta twist; image of the vector bracket."""
    return X @ ETAD @ Y - Y @ ETAD @ X


def lbr(x, y):
    """so(2,1) bracket in vector components."""
    return ETA * np.cross(x, y)


FIELD_SHAPES = {
    "b": (2, 3), "db": (2, 2, 3), "a": (2, 3, 3), "ca": (3, 3),
    "tau": (3,), "bd": (3, 3), "chi": (3,),
}
FIELD_ORDER = ["b", "db", "a", "ca", "tau", "bd", "chi"]


@dataclass
class FramePoint:
    """Value-and-jet data of the BF fields at one point of the slice.

    b[nu, I] is the one-form row B_nu^I; db[mu, nu, I] its mu-derivative;
    a[nu] the antisymmetric connection matrix A_nu^{IJ}; ca the curl
    d_1 A_2 - d_2 A_1; bd the two-form top coefficient of B-dagger.
    """

    b: np.ndarray
    db: np.ndarray
    a: np.ndarray
    ca: np.ndarray
    tau: np.ndarray
    bd: np.ndarray
    chi: np.ndarray

    def __post_init__(self):
        for name, shape in FIELD_SHAPES.items():
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ValueError("field %s must have shape %s" % (name, shape))
            setattr(self, name, arr)
        for nu in range(2):
            if not np.allclose(self.a[nu], -self.a[nu].T, atol=1e-12):
                raise ValueError("connection slot %d is not antisymmetric" % nu)
        for X in (self.ca, self.bd):
            if not np.allclose(X, -X.T, atol=1e-12):
                raise ValueError("two-index field is not antisymmetric")

    def copy(self) -> "FramePoint":
        return FramePoint(*(getattr(self, k).copy() for k in FIELD_ORDER))

    def pack(self) -> np.ndarray:
        return np.concatenate([getattr(self, k).ravel() for k in FIELD_ORDER])

    @classmethod
    def unpack(cls, v: np.ndarray) -> "FramePoint":
        vals = []
        i = 0
        for k in FIELD_ORDER:
            n = int(np.prod(FIELD_SHAPES[k]))
            vals.append(v[i:i + n].reshape(FIELD_SHAPES[k]))
            i += n
        return cls(*vals)

    @classmethod
    def random(cls, rng, scale=2.0, jets=True) -> "FramePoint":
        b = rng.uniform(-scale, scale, (2, 3))
        db = rng.uniform(-scale, scale, (2, 2, 3)) if jets else np.zeros((2, 2, 3))
        a = np.stack([mat_of_vec(rng.uniform(-scale, scale, 3)) for _ in range(2)])
        ca = mat_of_vec(rng.uniform(-scale, scale, 3)) if jets else np.zeros((3, 3))
        return cls(b, db, a, ca,
                   rng.uniform(-scale, scale, 3),
                   mat_of_vec(rng.uniform(-scale, scale, 3)),
                   rng.uniform(-scale, scale, 3))

    def a_vec(self, nu) -> np.ndarray:
        return vec_of_mat(self.a[nu])

    def bd_vec(self) -> np.ndarray:
        return vec_of_mat(self.bd)


def torsion(pt: FramePoint) -> np.ndarray:
    """Torsion residual T^I; the constraint surface is T = 0.

    Frozen contraction: curl B + [a_1, B_2] - [a_2, B_1] + [bd, tau],
    everything in vector components of the canonical dictionary.
    """
    curl = pt.db[0, 1] - pt.db[1, 0]
    return (curl + lbr(pt.a_vec(0), pt.b[1]) - lbr(pt.a_vec(1), pt.b[0])
            + lbr(pt.bd_vec(), pt.tau))


def extrinsic(pt: FramePoint) -> np.ndarray:
    """Symmetric tensor K_{mu nu} = B_(mu^a A_nu)^{0b} delta_ab, spatial a, b."""
    K = np.zeros((2, 2))
    for mu in range(2):
        for nu in range(2):
            K[mu, nu] = 0.5 * sum(
                pt.b[mu, b] * pt.a[nu][0, b] + pt.b[nu, b] * pt.a[mu][0, b]
                for b in (1, 2))
    return K


# connection slots: the three components kept as free data on the reduced
# slice and the three fixed by the torsion constraint.
FREE_SLOTS = [(0, 0, 1), (1, 0, 1), (1, 0, 2)]
DEP_SLOTS = [(0, 0, 2), (0, 1, 2), (1, 1, 2)]
ALL_SLOTS = [(0, 0, 1), (0, 0, 2), (0, 1, 2), (1, 0, 1), (1, 0, 2), (1, 1, 2)]


def connection_from(x, slots, base=None) -> np.ndarray:
    A = np.zeros((2, 3, 3)) if base is None else base.copy()
    for v, (nu, i, j) in zip(x, slots):
        A[nu][i, j] = v
        A[nu][j, i] = -v
    return A


def solve_torsion(b, db, tau, bd, k) -> np.ndarray:
    """Connection matrices solving T = 0 with prescribed symmetric K.

    Six unknowns against the three torsion components and the three
    independent entries of K; the system is linear and generically
    invertible, degenerate spatial data raises ValueError.
    """
    b = np.asarray(b, dtype=float)
    db = np.asarray(db, dtype=float)
    tau = np.asarray(tau, dtype=float)
    bd = np.asarray(bd, dtype=float)
    k = np.asarray(k, dtype=float)

    def eqs(x):
        pt = FramePoint(b, db, connection_from(x, ALL_SLOTS), np.zeros((3, 3)),
                        tau, bd, np.zeros(3))
        t = torsion(pt)
        K = extrinsic(pt)
        return np.array([t[0], t[1], t[2], K[0, 0], K[1, 1], K[0, 1]])

    r0 = eqs(np.zeros(6))
    L = np.zeros((6, 6))
    for i in range(6):
        e = np.zeros(6)
        e[i] = 1.0
        L[:, i] = eqs(e) - r0
    if np.linalg.cond(L) > 1e10:
        raise ValueError("singular spatial minor in torsion solve")
    target = np.array([0.0, 0.0, 0.0, k[0, 0], k[1, 1], k[0, 1]])
    return connection_from(np.linalg.solve(L, target - r0), ALL_SLOTS)


@dataclass
class EhPoint:
    """Metric-side data: spatial metric, momentum, shift/lapse and the
    constraint contractions, all evaluated at the point."""

    g: np.ndarray
    pi: np.ndarray
    xin: float
    xi: np.ndarray
    phin: float
    phi: np.ndarray

    def fields(self):
        return {"g": self.g, "pi": self.pi, "xin": np.array([self.xin]),
                "xi": self.xi, "phin": np.array([self.phin]), "phi": self.phi}

    def deviation(self, other: "EhPoint") -> float:
        a, b = self.fields(), other.fields()
        return max(float(np.max(np.abs(a[k] - b[k]))) for k in a)


def bf_to_eh(pt: FramePoint) -> EhPoint:
    """Evaluate the metric variables of a frame point.

    The spatial diad is the i = 1,2 block of B; its Gram matrix must be
    nondegenerate with positive determinant, otherwise ValueError.
    """
    M = pt.b[:, 1:]
    g = M @ M.T
    dg = float(np.linalg.det(g))
    if dg <= 0:
        raise ValueError("degenerate spatial metric")
    K = extrinsic(pt)
    trK = float(np.trace(np.linalg.solve(g, K)))
    pi = 0.5 * np.sqrt(dg) * (K - g * trK)
    # quarter term: B B (eps delta + eps delta) tau contracted with the
    # two-form coefficient of B-dagger, slice orientation eps^{12} = +1.
    for mu in range(2):
        for nu in range(2):
            s = 0.0
            for i in range(2):
                for j in range(2):
                    for kk in range(2):
                        for l in range(2):
                            s += pt.b[mu, 1 + i] * pt.b[nu, 1 + j] * (
                                EPS2[i, kk] * (j == l) + EPS2[j, kk] * (i == l)
                            ) * pt.tau[1 + l] * 2.0 * pt.bd[0, 1 + kk]
            pi[mu, nu] -= 0.25 * s
    xi = np.linalg.solve(M.T, pt.tau[1:])
    phin = 2.0 * float(sum(pt.bd[1 + i, 1 + j] * EPS2[i, j]
                           for i in range(2) for j in range(2)))
    phi = np.array([
        float(sum(2.0 * pt.bd[0, 1 + i] * pt.b[mu, 1 + j] * EPS2[i, j]
                  for i in range(2) for j in range(2)))
        for mu in range(2)])
    return EhPoint(g, pi, float(pt.tau[0]), xi, phin, phi)
