"""
Randomised check of the algebraic identities of the generalized cross product.

Each identity is evaluated through the public functions of
:mod:`gencross.algebra` on ``trials`` seeded standard-normal draws and
summarised by its worst relative residual

    max over trials of  max|lhs - rhs| / scale,

where ``scale`` is the product of operand norms matching the degree of the
identity (so identities with a zero right-hand side are measured the same way).

Cost per trial grows like N^2 n with N = n(n-1)/2; n = 10 with 1000 trials
takes a few seconds, n = 64 minutes.
"""

import numpy as np

from .algebra import (cross, cross_dim, cross_matrix, cross_oracle, cross_right, dyad_from_room,
                      grassmann_triple, jacobi_sum, room_product, sandwich,
                      simultaneous_cross, skew, skew_from_vec, sym, vec_from_skew)
from .errors import DomainError

DEFAULT_SEED = 20240115

IDENTITY_NAMES = (
    "lagrange", "area", "grassmann_dot", "grassmann_skew", "jacobi", "room",
    "room_equal", "room_trace", "converse_dyad", "commutator", "cross_skew",
    "dyadic_cross", "dyadic_cross_self", "dyadic_cross_transfer",
    "simultaneous_symmetry", "sandwich_identity", "sandwich_symmetry",
)


def _res(lhs, rhs, scale):
    lhs, rhs = np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float)
    return float(np.max(np.abs(lhs - rhs))) / float(max(scale, np.finfo(float).tiny))


def _trial(n, a, b, c, d, m, P, Q):
    nrm = np.linalg.norm
    na, nb, nc, nd = nrm(a), nrm(b), nrm(c), nrm(d)
    eye = np.eye(n)
    ab, bc = cross(a, b), cross(b, c)
    A = skew_from_vec
    out = {}
    out["lagrange"] = _res(cross(a, b) @ cross(c, d),
                           (a @ c) * (b @ d) - (a @ d) * (b @ c), na * nb * nc * nd)
    out["area"] = _res(ab @ ab, (a @ a) * (b @ b) - (a @ b) ** 2, na ** 2 * nb ** 2)
    triple = grassmann_triple(a, bc)
    out["grassmann_dot"] = _res(triple, (a @ b) * c - (a @ c) * b, na * nb * nc)
    out["grassmann_skew"] = _res(triple, -A(bc).to_array() @ a, na * nb * nc)
    out["jacobi"] = _res(jacobi_sum(a, b, c), 0.0, na * nb * nc)

    R = room_product(a, b)
    out["room"] = _res(R, (b @ a) * eye - np.outer(b, a), na * nb)
    out["room_equal"] = _res(room_product(b, b), (b @ b) * eye - np.outer(b, b), nb ** 2)
    out["room_trace"] = _res(np.trace(R), (n - 1) * (a @ b), na * nb)
    out["converse_dyad"] = _res(dyad_from_room(a, b), np.outer(b, a), na * nb)
    out["commutator"] = _res(R - room_product(b, a), A(ab).to_array(), na * nb)
    out["cross_skew"] = _res(A(ab).to_array(), np.outer(a, b) - np.outer(b, a), na * nb)

    nm = nrm(m)
    out["dyadic_cross"] = _res(cross_right(np.outer(m, b), c), np.outer(m, bc), nm * nb * nc)
    out["dyadic_cross_self"] = _res(cross_right(np.outer(m, b), b), 0.0, nm * nb ** 2)
    lhs = cross_right(np.outer(b, a), b)
    ab_dyad = np.outer(a, b)
    out["dyadic_cross_transfer"] = max(
        _res(lhs, 2 * cross_right(sym(ab_dyad), b), na * nb ** 2),
        _res(lhs, -2 * cross_right(skew(ab_dyad), b), na * nb ** 2),
        _res(lhs, np.outer(b, ab), na * nb ** 2),
        _res(lhs, 2 * np.outer(b, vec_from_skew(skew(ab_dyad))), na * nb ** 2))

    nP = nrm(P)
    full = simultaneous_cross(b, P)
    out["simultaneous_symmetry"] = max(
        _res(simultaneous_cross(b, sym(P)), sym(full), nb ** 2 * nP),
        _res(simultaneous_cross(b, skew(P)), skew(full), nb ** 2 * nP))
    N = cross_dim(n)
    out["sandwich_identity"] = _res(sandwich(b, np.eye(N)), (b @ b) * eye - np.outer(b, b),
                                    nb ** 2)
    nQ = nrm(Q)
    sQ = sandwich(b, Q)
    out["sandwich_symmetry"] = max(
        _res(sandwich(b, sym(Q)), sym(sQ), nb ** 2 * nQ),
        _res(sandwich(b, skew(Q)), skew(sQ), nb ** 2 * nQ))
    return out


def identity_residuals(n, trials=1000, seed=DEFAULT_SEED):
    """
    Worst relative residual of every identity in :data:`IDENTITY_NAMES`.

    Parameters
    ----------
    n : int
        Dimension, at least 2.
    trials : int
        Number of random draws.
    seed : int
        Seed for ``numpy.random.default_rng``; the report is a pure function
        of ``(n, trials, seed)``.

    Returns
    -------
    dict
        ``name -> residual`` in :data:`IDENTITY_NAMES` order.
    """
    if int(n) != n or n < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {n}")
    if int(trials) != trials or trials < 1:
        raise DomainError(f"trials must be a positive integer, got {trials}")
    n, N = int(n), cross_dim(int(n))
    rng = np.random.default_rng(seed)
    worst = dict.fromkeys(IDENTITY_NAMES, 0.0)
    for _ in range(int(trials)):
        a, b, c, d = rng.standard_normal((4, n))
        m = rng.standard_normal(3)
        P = rng.standard_normal((n, n))
        Q = rng.standard_normal((N, N))
        for name, r in _trial(n, a, b, c, d, m, P, Q).items():
            worst[name] = max(worst[name], r)
    return worst


def oracle_residual(n, trials=1000, seed=DEFAULT_SEED):
    """
    Worst relative gap between ``cross``, ``cross_oracle`` and ``cross_matrix(a) @ b``.

    Returns ``(cross vs oracle, matrix vs cross, matrix vs oracle)``.
    """
    rng = np.random.default_rng(seed)
    gaps = [0.0, 0.0, 0.0]
    for _ in range(int(trials)):
        a, b = rng.standard_normal((2, n))
        scale = np.linalg.norm(a) * np.linalg.norm(b)
        x, o, mb = cross(a, b), cross_oracle(a, b), cross_matrix(a) @ b
        gaps[0] = max(gaps[0], _res(x, o, scale))
        gaps[1] = max(gaps[1], _res(mb, x, scale))
        gaps[2] = max(gaps[2], _res(mb, o, scale))
    return tuple(gaps)
