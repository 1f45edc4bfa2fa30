import numpy as np
import pytest

from gencross import calculus as calc
from gencross.algebra import cross_dim, cross_matrix, skew_from_vec, vec_from_skew
from gencross.errors import DomainError
from gencross.fields import Field, Grid, band_limited, from_function

SHAPES = {2: 32, 3: 16, 4: 8, 5: 6}
EYE3 = np.eye(3).reshape(3, 3, 1, 1, 1)


def grid(n, points=None):
    return Grid((points or SHAPES[n],) * n)


def partials(field):
    """d_l of every component, stacked on a new leading axis l."""
    J = calc.derivative(Field.vector(field.grid, field.data.reshape(
        (-1,) + field.grid.shape))).data
    n = field.grid.n
    return np.moveaxis(J, 1, 0).reshape((n,) + field.data.shape)


def unit(n, l):
    return np.eye(n)[l]


# --------------------------------------------------------------------------
# analytic examples


def test_grad_and_div_of_trig():
    g = grid(2)
    x1, x2 = g.coords()
    f = Field.scalar(g, np.sin(x1))
    np.testing.assert_allclose(calc.grad(f).data, [np.cos(x1), 0 * x1], atol=1e-12)
    assert calc.grad(Field.scalar(g, np.full(g.shape, 3.0))).norm_inf() < 1e-14
    a = Field.vector(g, [np.sin(x1), 0 * x1])
    np.testing.assert_allclose(calc.div(a).data, np.cos(x1), atol=1e-12)
    b = Field.vector(g, [np.sin(x2), 0 * x1])
    assert calc.div(b).norm_inf() < 1e-12


def test_curl_two_dimensions():
    g = grid(2)
    x1, x2 = g.coords()
    a = Field.vector(g, [-np.sin(x2), 0 * x1])
    np.testing.assert_allclose(calc.curl_n(a).data[0], np.cos(x2), atol=1e-12)


def test_curl_three_dimensional_formula():
    g = grid(3)
    a = band_limited(g, "vector", seed=1)
    d = calc.derivative(a).data  # d[i, j] = d_j a_i
    expected = [d[1, 0] - d[0, 1], d[2, 0] - d[0, 2], d[2, 1] - d[1, 2]]
    np.testing.assert_allclose(calc.curl_n(a).data, expected, atol=1e-13)


def test_curl_permutes_classical_curl():
    g = grid(3)
    a = band_limited(g, "vector", seed=2)
    d = calc.derivative(a).data
    classical = [d[2, 1] - d[1, 2], d[0, 2] - d[2, 0], d[1, 0] - d[0, 1]]
    c = calc.curl_n(a).data
    np.testing.assert_allclose(c, [classical[2], -classical[1], classical[0]], atol=1e-13)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_curl_is_twice_skew_part_of_transposed_gradient(n):
    a = band_limited(grid(n), "vector", seed=3)
    D = calc.derivative(a).data
    W = 0.5 * (np.swapaxes(D, 0, 1) - D)
    I, J = np.triu_indices(n, 1)
    order = np.lexsort((I, J))
    np.testing.assert_allclose(calc.curl_n(a).data, 2 * W[I[order], J[order]], atol=1e-13)


def test_adjoint_curl_three_dimensional_formula():
    g = grid(3)
    c = band_limited(g, "cross", seed=4)
    d = partials(c)  # d[l, k] = d_l c_k
    expected = [-d[1, 0] - d[2, 1], d[0, 0] - d[2, 2], d[0, 1] + d[1, 2]]
    np.testing.assert_allclose(calc.adjoint_curl(c).data, expected, atol=1e-13)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_operators_match_assembly_from_cross_matrix(n):
    """[[nabla]] = sum_l d_l [[e_l]], assembled entrywise from cross_matrix."""
    g = grid(n)
    a = band_limited(g, "vector", seed=5)
    c = band_limited(g, "cross", seed=6)
    da, dc = partials(a), partials(c)
    curl = sum(np.einsum("kn,n...->k...", cross_matrix(unit(n, l)), da[l]) for l in range(n))
    adj = sum(np.einsum("kn,k...->n...", cross_matrix(unit(n, l)), dc[l]) for l in range(n))
    np.testing.assert_allclose(calc.curl_n(a).data, curl, atol=1e-13)
    np.testing.assert_allclose(calc.adjoint_curl(c).data, adj, atol=1e-13)


def test_constant_fields_are_annihilated():
    g = grid(3)
    c = Field.cross(g, np.ones((3,) + g.shape))
    assert calc.adjoint_curl(c).norm_inf() < 1e-14
    P = Field.matrix(g, np.ones((3, 3) + g.shape))
    assert calc.matrix_curl(P).norm_inf() < 1e-14
    assert calc.inc_n(P).norm_inf() < 1e-14
    assert calc.matrix_div(P).norm_inf() < 1e-14


def test_matrix_div_rowwise_oracle():
    g = grid(3)
    P = band_limited(g, "matrix", seed=7, rows=2, cols=3)
    rows = [calc.div(Field.vector(g, P.data[r])).data for r in range(2)]
    np.testing.assert_allclose(calc.matrix_div(P).data, rows, atol=1e-13)
    a = band_limited(g, "vector", seed=8)
    np.testing.assert_allclose(calc.matrix_div(calc.derivative(a)).data,
                               calc.laplacian(a).data, atol=1e-12)


def test_matrix_curl_rowwise_oracle():
    g = grid(4)
    P = band_limited(g, "matrix", seed=9, rows=2, cols=4)
    rows = [calc.curl_n(Field.vector(g, P.data[r])).data for r in range(2)]
    np.testing.assert_allclose(calc.matrix_curl(P).data, rows, atol=1e-13)


def test_shape_errors():
    g = grid(3)
    with pytest.raises(DomainError):
        calc.div(Field.vector(g, np.zeros((2,) + g.shape)))
    with pytest.raises(DomainError):
        calc.matrix_curl(band_limited(g, "matrix", seed=0, rows=3, cols=2))
    with pytest.raises(DomainError):
        calc.inc_n(band_limited(g, "matrix", seed=0, rows=2, cols=3))
    with pytest.raises(DomainError):
        calc.curl_n(band_limited(g, "scalar", seed=0))


# --------------------------------------------------------------------------
# kernel identities


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("backend", ["spectral", "central2"])
def test_kernel_identities(n, backend):
    g = grid(n)
    f = band_limited(g, "scalar", seed=10)
    a = band_limited(g, "vector", seed=11)
    c = band_limited(g, "cross", seed=12)
    Da = calc.derivative(a, backend)
    assert calc.curl_n(calc.grad(f, backend), backend).norm_inf() <= 1e-10
    assert calc.div(calc.adjoint_curl(c, backend), backend).norm_inf() <= 1e-10
    assert calc.matrix_curl(Da, backend).norm_inf() <= 1e-10
    assert calc.inc_n(Da, backend).norm_inf() <= 1e-10


def test_curl_of_grad_trig_three_dimensions():
    g = grid(3)
    f = from_function(g, "scalar", lambda x, y, z: np.sin(x) * np.sin(y) * np.sin(z))
    assert calc.curl_n(calc.grad(f)).norm_inf() <= 1e-12


def test_div_of_adjoint_curl_five_dimensions():
    c = band_limited(grid(5), "cross", seed=13)
    assert calc.div(calc.adjoint_curl(c)).norm_inf() <= 1e-12


def test_inc_commutes_with_sym_and_skew():
    g = grid(3)
    P = band_limited(g, "matrix", seed=14)
    T = np.swapaxes(P.data, 0, 1)
    sym = Field.matrix(g, 0.5 * (P.data + T))
    skw = Field.matrix(g, 0.5 * (P.data - T))
    full = calc.inc_n(P).data
    fT = np.swapaxes(full, 0, 1)
    np.testing.assert_allclose(calc.inc_n(sym).data, 0.5 * (full + fT), atol=1e-12)
    np.testing.assert_allclose(calc.inc_n(skw).data, 0.5 * (full - fT), atol=1e-12)


def test_inc_sandwich_scalar_examples():
    g = grid(2)
    x1, _ = g.coords()
    S = calc.inc_sandwich_scalar(Field.scalar(g, np.sin(x1))).data
    np.testing.assert_allclose(S, [[0 * x1, 0 * x1], [0 * x1, -np.sin(x1)]], atol=1e-12)
    assert calc.inc_sandwich_scalar(Field.scalar(g, np.ones(g.shape))).norm_inf() < 1e-14


def test_inc_sandwich_scalar_matches_classical_inc():
    g = grid(3)
    z = band_limited(g, "scalar", seed=15)
    C = calc.classical_matrix_curl(Field.matrix(g, EYE3 * z.data))
    classical = calc.classical_matrix_curl(Field.matrix(g, np.swapaxes(C.data, 0, 1)))
    np.testing.assert_allclose(calc.inc_sandwich_scalar(z).data, classical.data, atol=1e-12)


# --------------------------------------------------------------------------
# Laplacian splits and integration by parts


def test_vector_laplacian_example():
    g = grid(2)
    x1, _ = g.coords()
    split = calc.vector_laplacian_decomposition(Field.vector(g, [np.sin(x1), 0 * x1]))
    np.testing.assert_allclose(split.gradient_div.data, [-np.sin(x1), 0 * x1], atol=1e-12)
    assert split.adjoint_curl_curl.norm_inf() < 1e-12
    assert split.residual < 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_laplacian_identities(n):
    g = grid(n)
    a = band_limited(g, "vector", seed=16)
    P = band_limited(g, "matrix", seed=17)
    assert calc.vector_laplacian_decomposition(a).residual <= 1e-10
    assert calc.matrix_laplacian_decomposition(P) <= 1e-10
    assert calc.curl_adjoint_curl_identity_residual(a) <= 1e-10


def test_matrix_laplacian_rectangular():
    P = band_limited(grid(3), "matrix", seed=18, rows=2, cols=3)
    assert calc.matrix_laplacian_decomposition(P) <= 1e-10


def test_curl_adjoint_curl_five_dimensions():
    a = band_limited(Grid((8,) * 5), "vector", seed=19)
    assert calc.curl_adjoint_curl_identity_residual(a) <= 1e-9


def test_integration_by_parts():
    g = Grid((32,) * 3)
    a = band_limited(g, "vector", seed=20)
    c = band_limited(g, "cross", seed=21)
    assert calc.integration_by_parts_residual(a, c) <= 1e-10
    assert calc.integration_by_parts_residual(Field.zeros(g, "vector"), c) == 0.0
    g = grid(3)
    P = band_limited(g, "matrix", seed=22, rows=2, cols=3)
    Q = band_limited(g, "matrix", seed=23, rows=2, cols=cross_dim(3))
    assert calc.integration_by_parts_residual_matrix(P, Q) <= 1e-10


def test_central_refinement_ratio():
    coarse, fine, ratio = calc.laplacian_refinement_ratio(32, 2)
    assert coarse > fine > 0
    assert 3.5 <= ratio <= 4.5


# --------------------------------------------------------------------------
# Nye formulas and determinacy


def test_nye_analytic_example():
    g = grid(3)
    x1, x2, x3 = g.coords()
    a = Field.vector(g, [np.sin(x2), 0 * x1, 0 * x1])
    C = calc.nye_curl_of_skew_3d(a).data
    DaT = np.swapaxes(calc.derivative(a).data, 0, 1)
    np.testing.assert_allclose(C, -DaT, atol=1e-12)
    assert np.max(np.abs(C[1, 0] + np.cos(x2))) < 1e-12


def test_nye_formula_and_roundtrip():
    g = grid(3)
    a = band_limited(g, "vector", seed=24)
    Da = calc.derivative(a).data
    C = calc.nye_curl_of_skew_3d(a)
    div = np.einsum("ii...->...", Da)
    np.testing.assert_allclose(C.data, div * EYE3 - np.swapaxes(Da, 0, 1), atol=1e-12)
    np.testing.assert_allclose(calc.nye_recover_gradient_3d(C).data, Da, atol=1e-10)
    const = Field.vector(g, np.ones((3,) + g.shape))
    assert calc.nye_curl_of_skew_3d(const).norm_inf() < 1e-14


def test_classical_curl_is_permuted_generalized_curl():
    g = grid(3)
    P = band_limited(g, "matrix", seed=25)
    Q = np.array([[0, 0, 1], [0, -1, 0], [1, 0, 0]])
    generalized = np.einsum("rk...,kl->rl...", calc.matrix_curl(P).data, Q)
    np.testing.assert_allclose(calc.classical_matrix_curl(P).data, generalized, atol=1e-13)


def test_nye_needs_three_dimensions():
    with pytest.raises(DomainError):
        calc.nye_curl_of_skew_3d(band_limited(grid(2), "vector", seed=0))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_skew_curl_determinacy(n):
    v = band_limited(Grid((8,) * n), "cross", seed=26)
    rep = calc.skew_curl_determinacy(v)
    assert rep.full_rank
    assert rep.consistency_residual <= 1e-8
    assert rep.recovery_error <= 1e-8


def test_skew_matrix_helpers_consistent_with_curl():
    # skew_from_vec and vec_from_skew agree with the pair order used by curl_n
    a = band_limited(grid(3), "vector", seed=27)
    D = calc.derivative(a).data[..., 0, 0, 0]
    W = D.T - D
    np.testing.assert_allclose(skew_from_vec(vec_from_skew(W)).to_array(), W)
    np.testing.assert_allclose(vec_from_skew(W), calc.curl_n(a).data[:, 0, 0, 0], atol=1e-13)


# --------------------------------------------------------------------------
# symbols and ellipticity


def test_symbols():
    b = np.array([0.6, 0.8])
    np.testing.assert_array_equal(calc.symbol(b, "adjoint_curl"), [[-0.8], [0.6]])
    b3 = np.array([1.0, -2.0, 0.5])
    w = calc.adjoint_curl_kernel_witness_3d(b3)
    np.testing.assert_array_equal(w, [0.5, 2.0, 1.0])
    assert np.max(np.abs(calc.symbol(b3, "adjoint_curl") @ w)) <= 1e-14
    for n in (2, 3, 5):
        b = np.arange(1.0, n + 1)
        np.testing.assert_array_equal(calc.symbol(b, "curl_n") @ b, 0)
    with pytest.raises(DomainError):
        calc.symbol(np.zeros(3), "grad")
    with pytest.raises(DomainError):
        calc.symbol(np.ones(3), "laplace")


def test_adjoint_curl_elliptic_only_in_two_dimensions():
    rep = calc.ellipticity_report("adjoint_curl", 2, trials=200, seed=1)
    assert rep.elliptic and rep.min_singular_value >= 1 - 1e-12
    for n in (3, 4, 5):
        rep = calc.ellipticity_report("adjoint_curl", n, trials=200, seed=1)
        assert not rep.elliptic
        S = calc.symbol(rep.witness_frequency, "adjoint_curl")
        assert np.max(np.abs(S @ rep.kernel_witness)) <= 1e-12


def test_grad_elliptic_curl_not():
    assert calc.ellipticity_report("grad", 4, trials=50).elliptic
    assert not calc.ellipticity_report("curl_n", 3, trials=50).elliptic
    assert not calc.ellipticity_report("div", 3, trials=50).elliptic
