import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from gencross.calculus import curl_n, div, grad
from gencross.errors import ConfigurationError, DomainError, PreconditionError
from gencross.fields import Field, Grid, band_limited, get_backend
from gencross.helmholtz import (
    bump_field, green_function, green_gradient, projector_completeness,
    relative_l2_deviation, riesz_decompose, spectral_decompose, support_violation,
    unit_ball_volume,
)


def test_unit_ball_volume():
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)
    assert unit_ball_volume(4) == pytest.approx(math.pi ** 2 / 2)


def test_green_gradient_examples():
    np.testing.assert_allclose(green_gradient(2, [1.0, 0.0], [0.0, 0.0]),
                               [1 / (2 * math.pi), 0.0])
    np.testing.assert_allclose(green_gradient(3, [0.0, 0.0, 2.0], [0.0, 0.0, 0.0]),
                               [0.0, 0.0, 1 / (16 * math.pi)])
    with pytest.raises(DomainError):
        green_gradient(3, [1.0, 2.0, 3.0], [1.0, 2.0, 3.0])


@settings(max_examples=40)
@given(st.integers(2, 6).flatmap(lambda n: st.tuples(
    *[arrays(np.float64, n, elements=st.floats(-5, 5)) for _ in range(2)])))
def test_green_gradient_antisymmetric(xy):
    x, y = xy
    if np.linalg.norm(x - y) < 1e-3:
        return
    n = len(x)
    np.testing.assert_allclose(green_gradient(n, x, y), -green_gradient(n, y, x), rtol=1e-14)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_green_gradient_is_gradient_of_green_function(n):
    rng = np.random.default_rng(n)
    x, y = rng.standard_normal((2, n))
    h = 1e-6
    fd = [(green_function(n, x + h * e, y) - green_function(n, x - h * e, y)) / (2 * h)
          for e in np.eye(n)]
    np.testing.assert_allclose(green_gradient(n, x, y), fd, rtol=1e-6)


@pytest.mark.parametrize("n", [2, 3, 4, 7])
def test_projector_completeness(n):
    rng = np.random.default_rng(n)
    for _ in range(50):
        assert projector_completeness(rng.integers(-8, 9, n) + 0.5) <= 1e-14


# --------------------------------------------------------------------------
# spectral route


def test_spectral_gradient_field():
    g = Grid((32, 32))
    x1, x2 = g.coords()
    a = grad(Field.scalar(g, np.sin(x1) * np.sin(x2)))
    r = spectral_decompose(a)
    np.testing.assert_allclose(r.a_curlfree.data, a.data, atol=1e-12)
    assert r.a_divfree.norm_inf() <= 1e-12


def test_spectral_divergence_free_field():
    g = Grid((32, 32))
    x1, x2 = g.coords()
    a = Field.vector(g, [np.sin(x2), 0 * x1])
    r = spectral_decompose(a)
    np.testing.assert_allclose(r.a_divfree.data, a.data, atol=1e-12)
    assert r.a_curlfree.norm_inf() <= 1e-12


@pytest.mark.parametrize("n, points", [(2, 32), (3, 16), (4, 8)])
def test_spectral_invariants(n, points):
    g = Grid((points,) * n)
    a = band_limited(g, "vector", seed=n)
    r = spectral_decompose(a)
    assert r.diagnostics["sum_residual"] <= 1e-12
    assert div(r.a_divfree).norm_inf() <= 1e-11
    assert curl_n(r.a_curlfree).norm_inf() <= 1e-11
    np.testing.assert_allclose(r.mean_mode, a.mean())
    # idempotence
    again = spectral_decompose(r.a_curlfree)
    assert (again.a_curlfree - r.a_curlfree).norm_inf() <= 1e-10
    assert again.a_divfree.norm_inf() <= 1e-10
    again = spectral_decompose(r.a_divfree)
    assert (again.a_divfree - r.a_divfree).norm_inf() <= 1e-10
    # L2 orthogonality
    inner = g.integrate(np.sum(r.a_curlfree.data * r.a_divfree.data, axis=0))
    assert abs(inner) <= 1e-10


def test_projector_completeness_on_wavevector_grid():
    g = Grid((8, 8, 8))
    k = get_backend(g, "spectral").wavevector_grid(odd=False).reshape(3, -1).T
    assert max(projector_completeness(kk) for kk in k[1:]) <= 1e-14


def test_records_are_key_value_lines():
    r = spectral_decompose(band_limited(Grid((8, 8)), "vector", seed=0))
    lines = r.records().splitlines()
    assert all("=" in line for line in lines)
    assert lines[-1].startswith("mean_mode=")


# --------------------------------------------------------------------------
# Riesz quadrature


@pytest.mark.parametrize("kind", ["gradient", "divfree"])
def test_riesz_matches_spectral(kind):
    g = Grid((64, 64))
    a = bump_field(g, kind)
    r = riesz_decompose(a)
    s = spectral_decompose(a)
    assert relative_l2_deviation(r, s, a) <= 5e-2
    keep, drop = ((r.a_curlfree, r.a_divfree) if kind == "gradient"
                  else (r.a_divfree, r.a_curlfree))
    assert (keep - a).norm_l2() / a.norm_l2() <= 5e-2
    assert drop.norm_l2() / a.norm_l2() <= 5e-2


def test_riesz_fft_and_direct_sums_agree():
    a = bump_field(Grid((32, 32)), "gradient")
    f = riesz_decompose(a, method="fft")
    d = riesz_decompose(a, method="direct")
    assert (f.a_curlfree - d.a_curlfree).norm_inf() <= 1e-12
    assert (f.a_divfree - d.a_divfree).norm_inf() <= 1e-12


def test_riesz_zero_field():
    g = Grid((16, 16))
    r = riesz_decompose(Field.zeros(g, "vector"))
    assert r.a_curlfree.norm_inf() == 0.0 and r.a_divfree.norm_inf() == 0.0


def test_riesz_three_dimensions():
    # 32^3 has the resolution of the 32^2 case (deviation about 0.08 there)
    a = bump_field(Grid((32, 32, 32)), "divfree")
    assert support_violation(a) <= 1e-4
    r = riesz_decompose(a)
    assert relative_l2_deviation(r, spectral_decompose(a), a) <= 0.15


def test_riesz_preconditions():
    with pytest.raises(PreconditionError):
        riesz_decompose(band_limited(Grid((16, 16)), "vector", seed=1))
    with pytest.raises(ConfigurationError):
        riesz_decompose(Field.zeros(Grid((8,) * 4), "vector"))
    with pytest.raises(ConfigurationError):
        riesz_decompose(Field.zeros(Grid((8, 8)), "vector"), method="fmm")
