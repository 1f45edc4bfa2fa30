"""
Vector calculus built on the generalized cross product.

Every operator here is a sparse pattern of partial derivatives read off the
matrix ``cross_matrix(b)`` with ``b`` replaced by the nabla operator:

* ``curl_n(a)``        = [[nabla]] a,        pair (i, j) -> d_i a_j - d_j a_i
* ``adjoint_curl(c)``  = [[nabla]]^T c,      the formal adjoint (up to sign) of curl_n
* ``matrix_curl(P)``   = P [[nabla]]^T,      row-wise curl_n
* ``inc_n(P)``         = -[[nabla]] P [[nabla]]^T

Operators accept :class:`~gencross.fields.Field` objects and a ``backend``
("spectral" by default, or "central2").
"""

from dataclasses import dataclass

import numpy as np

from .algebra import anti, cross_dim, cross_matrix, pair_table, skew_cross_lift
from .errors import DomainError
from .fields import Field, Grid, get_backend


def _require(field, kind, components=None, name="field"):
    if not isinstance(field, Field):
        raise DomainError(f"{name} must be a Field, got {type(field).__name__}")
    if field.kind != kind:
        raise DomainError(f"{name} must be a {kind} field, got {field.kind}")
    if components is not None and field.component_shape != tuple(components):
        raise DomainError(
            f"{name} must have components {tuple(components)}, got {field.component_shape}")


def _jac(data, grid, backend):
    return get_backend(grid, backend).jacobian(data)


def _pick(J, first, second, n):
    """``J[..., first[k], second[k], <grid>]`` stacked over k."""
    return J[(Ellipsis, first, second) + (slice(None),) * n]


def _curl_data(data, grid, backend):
    # data: (..., n, *grid); J[..., j, i] = d_i a_j
    n = grid.n
    I, J_ = pair_table(n)
    Jac = _jac(data, grid, backend)
    return _pick(Jac, J_, I, n) - _pick(Jac, I, J_, n)


def _adjoint_curl_data(data, grid, backend):
    # data: (..., N, *grid); output (..., n, *grid)
    n = grid.n
    I, J_ = pair_table(n)
    lead = data.ndim - n - 1
    Jac = _jac(data, grid, backend)
    k = np.arange(I.shape[0])
    minus = _pick(Jac, k, J_, n)  # d_j c_k, lands in slot i
    plus = _pick(Jac, k, I, n)    # d_i c_k, lands in slot j
    scatter_i = np.eye(n)[:, I]
    scatter_j = np.eye(n)[:, J_]
    out = (np.tensordot(scatter_j, plus, axes=([1], [lead]))
           - np.tensordot(scatter_i, minus, axes=([1], [lead])))
    return np.moveaxis(out, 0, lead)


def _swap_rows_cols(data):
    return np.swapaxes(data, 0, 1)


# --------------------------------------------------------------------------
# first-order operators


def derivative(a, backend="spectral"):
    """``Da`` with ``Da[i, j] = d_j a_i`` (an m x n matrix field)."""
    _require(a, "vector", name="a")
    return Field.matrix(a.grid, _jac(a.data, a.grid, backend))


def grad(f, backend="spectral"):
    _require(f, "scalar", name="f")
    return Field.vector(f.grid, _jac(f.data, f.grid, backend))


def div(a, backend="spectral"):
    """sum_i d_i a_i."""
    _require(a, "vector", (a.grid.n,), name="a")
    Jac = _jac(a.data, a.grid, backend)
    return Field.scalar(a.grid, np.einsum("ii...->...", Jac))


def curl_n(a, backend="spectral"):
    """Generalized curl; component at pair (i, j) is d_i a_j - d_j a_i."""
    _require(a, "vector", (a.grid.n,), name="a")
    return Field.cross(a.grid, _curl_data(a.data, a.grid, backend))


def adjoint_curl(c, backend="spectral"):
    """
    ``[[nabla]]^T c`` for a cross field ``c``.

    For n = 3: (-d2 c1 - d3 c2, d1 c1 - d3 c3, d1 c2 + d2 c3). Its image is
    divergence free.
    """
    _require(c, "cross", name="c")
    return Field.vector(c.grid, _adjoint_curl_data(c.data, c.grid, backend))


def matrix_div(P, backend="spectral"):
    """Row-wise divergence ``P nabla``."""
    _require(P, "matrix", name="P")
    if P.cols != P.grid.n:
        raise DomainError(f"P needs {P.grid.n} columns, got {P.cols}")
    Jac = _jac(P.data, P.grid, backend)
    return Field.vector(P.grid, np.einsum("rii...->r...", Jac))


def matrix_curl(P, backend="spectral"):
    """Row-wise generalized curl ``P [[nabla]]^T`` (m x N)."""
    _require(P, "matrix", name="P")
    if P.cols != P.grid.n:
        raise DomainError(f"P needs {P.grid.n} columns, got {P.cols}")
    return Field.matrix(P.grid, _curl_data(P.data, P.grid, backend))


def matrix_adjoint_curl(Q, backend="spectral"):
    """Row-wise ``Q [[nabla]]`` for an m x N matrix field (result m x n)."""
    _require(Q, "matrix", name="Q")
    if Q.cols != cross_dim(Q.grid.n):
        raise DomainError(f"Q needs {cross_dim(Q.grid.n)} columns, got {Q.cols}")
    return Field.matrix(Q.grid, _adjoint_curl_data(Q.data, Q.grid, backend))


def column_curl(B, backend="spectral"):
    """Column-wise ``[[nabla]] B`` for an n x m matrix field, i.e. ``(Curl_n B^T)^T``."""
    _require(B, "matrix", name="B")
    if B.rows != B.grid.n:
        raise DomainError(f"B needs {B.grid.n} rows, got {B.rows}")
    return Field.matrix(B.grid, _swap_rows_cols(
        _curl_data(_swap_rows_cols(B.data), B.grid, backend)))


def laplacian(f, backend="spectral"):
    """Componentwise Laplacian of any field kind."""
    return Field(f.grid, f.kind, get_backend(f.grid, backend).laplacian(f.data))


def hessian(zeta, backend="spectral"):
    _require(zeta, "scalar", name="zeta")
    return Field.matrix(zeta.grid, _jac(_jac(zeta.data, zeta.grid, backend),
                                        zeta.grid, backend))


# --------------------------------------------------------------------------
# second-order operators


def inc_n(P, backend="spectral"):
    """
    Generalized incompatibility ``-[[nabla]] P [[nabla]]^T`` of a square field.

    Computed as ``-(Curl_n((Curl_n P)^T))^T``; the N x N result commutes with
    sym/skew and vanishes on gradients ``Da``.
    """
    _require(P, "matrix", (P.grid.n, P.grid.n), name="P")
    C = _curl_data(P.data, P.grid, backend)
    return Field.matrix(P.grid, -_swap_rows_cols(
        _curl_data(_swap_rows_cols(C), P.grid, backend)))


def adjoint_sandwich(Q, backend="spectral"):
    """``[[nabla]]^T Q [[nabla]]`` for an N x N matrix field (result n x n)."""
    N = cross_dim(Q.grid.n)
    _require(Q, "matrix", (N, N), name="Q")
    rows = _adjoint_curl_data(Q.data, Q.grid, backend)  # Q [[nabla]], N x n
    return Field.matrix(Q.grid, _swap_rows_cols(
        _adjoint_curl_data(_swap_rows_cols(rows), Q.grid, backend)))


def inc_sandwich_scalar(zeta, backend="spectral"):
    """``[[nabla]]^T (zeta Id_N) [[nabla]]``; equals ``lap(zeta) Id - Hess(zeta)``."""
    _require(zeta, "scalar", name="zeta")
    N = cross_dim(zeta.grid.n)
    Q = np.eye(N).reshape((N, N) + (1,) * zeta.grid.n) * zeta.data
    return adjoint_sandwich(Field.matrix(zeta.grid, Q), backend)


@dataclass(frozen=True)
class LaplacianSplit:
    gradient_div: Field
    adjoint_curl_curl: Field
    residual: float


def vector_laplacian_decomposition(a, backend="spectral"):
    """
    ``lap(a) = grad div a + [[nabla]]^T curl_n a``.

    Returns both terms and the max-norm residual of the identity.
    """
    _require(a, "vector", (a.grid.n,), name="a")
    gd = grad(div(a, backend), backend)
    cc = adjoint_curl(curl_n(a, backend), backend)
    residual = (laplacian(a, backend) - gd - cc).norm_inf()
    return LaplacianSplit(gd, cc, residual)


def matrix_laplacian_decomposition(P, backend="spectral"):
    """Max-norm residual of ``lap(P) = D Div P + (Curl_n P) [[nabla]]``."""
    _require(P, "matrix", name="P")
    DdivP = derivative(matrix_div(P, backend), backend)
    curl_term = matrix_adjoint_curl(matrix_curl(P, backend), backend)
    return (laplacian(P, backend) - DdivP - curl_term).norm_inf()


def curl_adjoint_curl_identity_residual(a, backend="spectral"):
    """Max-norm residual of ``curl_n [[nabla]]^T curl_n a = lap(curl_n a)``."""
    c = curl_n(a, backend)
    return (curl_n(adjoint_curl(c, backend), backend) - laplacian(c, backend)).norm_inf()


def integration_by_parts_residual(a, c, backend="spectral"):
    """``|int <curl_n a, c> + <a, [[nabla]]^T c> dx|`` over the torus."""
    _require(a, "vector", (a.grid.n,), name="a")
    _require(c, "cross", name="c")
    g = a.grid
    val = g.integrate(np.sum(curl_n(a, backend).data * c.data, axis=0)
                      + np.sum(a.data * adjoint_curl(c, backend).data, axis=0))
    return abs(float(val))


def integration_by_parts_residual_matrix(P, Q, backend="spectral"):
    """Matrix version: ``|int <Curl_n P, Q> + <P, Q [[nabla]]> dx|``."""
    _require(P, "matrix", name="P")
    _require(Q, "matrix", (P.rows, cross_dim(P.grid.n)), name="Q")
    val = P.grid.integrate(
        np.sum(matrix_curl(P, backend).data * Q.data, axis=(0, 1))
        + np.sum(P.data * matrix_adjoint_curl(Q, backend).data, axis=(0, 1)))
    return abs(float(val))


def smooth_test_field(grid):
    """
    Deterministic trigonometric vector field with modes |k_i| <= 3.

    Unlike :func:`~gencross.fields.band_limited` it is the same continuous
    field on every grid, which is what a refinement study needs.
    """
    x = grid.coords()
    n = grid.n
    comps = []
    for i in range(n):
        c = np.zeros(grid.shape)
        for j in range(n):
            c = c + np.sin((1 + (i + j) % 3) * x[j] + 0.3 * i) * np.cos((1 + (i + 2 * j) % 2) * x[(j + 1) % n])
        comps.append(c)
    return Field.vector(grid, np.array(comps))


def laplacian_refinement_ratio(shape=32, n=2, backend="central2"):
    """
    Vector Laplacian decomposition residual on ``shape^n`` and ``(2 shape)^n``.

    Returns ``(coarse, fine, coarse / fine)``; a consistent second-order
    scheme gives a ratio near 4.
    """
    coarse = vector_laplacian_decomposition(
        smooth_test_field(Grid((shape,) * n)), backend).residual
    fine = vector_laplacian_decomposition(
        smooth_test_field(Grid((2 * shape,) * n)), backend).residual
    return coarse, fine, coarse / fine


# --------------------------------------------------------------------------
# Nye formulas (n = 3) and linear determinacy (general n)


def classical_matrix_curl(P, backend="spectral"):
    """Row-wise classical 3D curl of a 3 x 3 matrix field."""
    _require(P, "matrix", name="P")
    if P.grid.n != 3 or P.cols != 3:
        raise DomainError("the classical matrix curl needs n = 3 and 3 columns")
    Jac = _jac(P.data, P.grid, backend)  # Jac[r, i, j] = d_j P_ri
    out = np.stack([Jac[:, 2, 1] - Jac[:, 1, 2],
                    Jac[:, 0, 2] - Jac[:, 2, 0],
                    Jac[:, 1, 0] - Jac[:, 0, 1]], axis=1)
    return Field.matrix(P.grid, out)


def anti_field(a):
    """Skew matrix field Anti(a) of a 3D vector field."""
    _require(a, "vector", (3,), name="a")
    if a.grid.n != 3:
        raise DomainError("Anti() needs n = 3")
    return Field.matrix(a.grid, anti(a.data))


def nye_curl_of_skew_3d(a, backend="spectral"):
    """``Curl(Anti(a))``; by Nye's formula equal to ``div a Id - (Da)^T``."""
    return classical_matrix_curl(anti_field(a), backend)


def nye_recover_gradient_3d(C):
    """``Da = tr(C)/2 Id - C^T`` for ``C = Curl(Anti(a))``."""
    _require(C, "matrix", (3, 3), name="C")
    tr = np.einsum("ii...->...", C.data)
    return Field.matrix(C.grid, 0.5 * tr * np.eye(3).reshape(3, 3, *[1] * C.grid.n)
                        - _swap_rows_cols(C.data))


@dataclass(frozen=True)
class DeterminacyReport:
    n: int
    rank: int
    full_rank: bool
    consistency_residual: float
    recovery_error: float
    modes: int


def skew_curl_determinacy(v, backend="spectral", rcond=1e-12):
    """
    Check that ``D a_n(A)`` is a fixed linear function of ``Curl_n A``.

    ``A = skew_from_vec(v)`` pointwise. Per Fourier mode k the coefficient of
    ``Curl_n A`` is ``-T(coef of D v)`` with T the dyadic lift of
    ``(v, b) -> A x_n b``. Every nonzero mode is solved by least squares with
    the same matrix; both the least-squares residual and the distance to the
    true coefficient of ``D v`` are reported relative to the largest curl
    coefficient.
    """
    _require(v, "cross", name="v")
    g = v.grid
    n = g.n
    N = cross_dim(n)
    I, J_ = pair_table(n)
    A = np.zeros((n, n) + g.shape)
    A[I, J_] = v.data
    A[J_, I] = -v.data
    curl = _curl_data(A, g, backend)            # (n, N, *grid)
    Dv = _jac(v.data, g, backend)               # (N, n, *grid)
    spec = get_backend(g, "spectral")
    C_hat = spec.fft(curl).reshape(n * N, -1)
    D_hat = spec.fft(Dv).reshape(N * n, -1)
    nonzero = np.ones(C_hat.shape[1], dtype=bool)
    nonzero[0] = False
    C_hat, D_hat = C_hat[:, nonzero], D_hat[:, nonzero]
    L = skew_cross_lift(n)
    rank = int(np.linalg.matrix_rank(L))
    x, *_ = np.linalg.lstsq(L.astype(complex), -C_hat, rcond=rcond)
    scale = max(float(np.max(np.abs(C_hat), initial=0.0)), np.finfo(float).tiny)
    consistency = float(np.max(np.abs(L @ x + C_hat), initial=0.0)) / scale
    recovery = float(np.max(np.abs(x - D_hat), initial=0.0)) / scale
    return DeterminacyReport(n, rank, rank == L.shape[1], consistency, recovery,
                             int(C_hat.shape[1]))


# --------------------------------------------------------------------------
# symbols and ellipticity

OPERATORS = ("curl_n", "adjoint_curl", "grad", "div")


def symbol(b, operator):
    """Symbol matrix of a first-order operator at frequency ``b``."""
    b = np.asarray(b, dtype=float)
    if b.ndim != 1 or b.shape[0] < 2:
        raise DomainError(f"b must be a vector with n >= 2, got shape {b.shape}")
    if not np.any(b):
        raise DomainError("symbol requested at b = 0")
    if operator == "curl_n":
        return cross_matrix(b)
    if operator == "adjoint_curl":
        return cross_matrix(b).T
    if operator == "grad":
        return b[:, None]
    if operator == "div":
        return b[None, :]
    raise DomainError(f"unknown operator {operator!r}; choose from {OPERATORS}")


def adjoint_curl_kernel_witness_3d(b):
    """(b3, -b2, b1): annihilated by ``cross_matrix(b).T`` for n = 3."""
    b = np.asarray(b, dtype=float)
    if b.shape != (3,):
        raise DomainError("witness is defined for n = 3")
    return np.array([b[2], -b[1], b[0]])


@dataclass(frozen=True)
class EllipticityReport:
    operator: str
    n: int
    trials: int
    min_singular_value: float
    elliptic: bool
    witness_frequency: np.ndarray
    kernel_witness: np.ndarray


def ellipticity_report(operator, n, trials=1000, seed=0, tol=1e-10):
    """
    Smallest singular value of the symbol over random unit frequencies.

    The operator is elliptic when its symbol is injective for every b != 0,
    i.e. has rank equal to its column count. When the worst case is singular
    ``kernel_witness`` is a unit kernel vector of the symbol there (otherwise
    an empty array).
    """
    rng = np.random.default_rng(seed)
    worst = np.inf
    worst_b = worst_v = None
    for _ in range(trials):
        b = rng.standard_normal(n)
        b /= np.linalg.norm(b)
        S = symbol(b, operator)
        _, s, Vt = np.linalg.svd(S)
        sigma = s[-1] if S.shape[0] >= S.shape[1] else 0.0
        if sigma < worst:
            worst, worst_b, worst_v = sigma, b, Vt[-1]
    elliptic = bool(worst > tol)
    return EllipticityReport(operator, n, trials, float(worst), elliptic, worst_b,
                             np.empty(0) if elliptic else worst_v)
