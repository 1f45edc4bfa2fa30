"""
Numerical illustration of the div-curl lemma on the torus.

Two oscillating families are built around base fields u, v:

    u^k = u + A sin(k x_axis) e_p      (p != axis, so div u^k = div u)
    v^k = v + A sin(k x_axis) e_axis   (a pure gradient, so curl_n v^k = curl_n v)

The oscillations are orthogonal pointwise, and the remaining cross terms
average out against a smooth test function, so the weak pairing
int phi <u^k, v^k> approaches int phi <u, v> as k grows.
"""

from dataclasses import dataclass

import numpy as np

from .calculus import _require, adjoint_curl, curl_n, div, grad
from .errors import DomainError, PreconditionError
from .fields import Field, Grid, get_backend, require_mean_zero


# deviations below this (relative to the pairing size) are treated as round-off
NOISE_FLOOR = 1e-12


@dataclass(frozen=True)
class OscillatoryFamily:
    """``base + amplitude * sin(k x_axis) e_direction`` for k in ``k_values``."""

    base: Field
    axis: int
    direction: int
    amplitude: float
    k_values: tuple
    constraint: str

    def oscillation(self, k):
        x = self.base.grid.coords()[self.axis - 1]
        data = np.zeros(self.base.data.shape)
        data[self.direction - 1] = self.amplitude * np.sin(k * x)
        return Field.vector(self.base.grid, data)

    def member(self, k):
        return self.base + self.oscillation(k)

    def constraint_drift(self, backend="spectral"):
        """max_k ||C(member(k)) - C(base)||_inf for the preserved operator C."""
        op = div if self.constraint == "div" else curl_n
        ref = op(self.base, backend)
        return max((op(self.member(k), backend) - ref).norm_inf() for k in self.k_values)


def build_families(u, v, axis, amplitude, k_values):
    """
    Oscillating families with k-independent div (u side) and curl_n (v side).

    ``axis`` is 1-based. The u-oscillation points along the next axis
    (cyclically), the v-oscillation along ``axis`` itself.
    """
    _require(u, "vector", (u.grid.n,), name="u")
    _require(v, "vector", (v.grid.n,), name="v")
    if u.grid != v.grid:
        raise DomainError("u and v live on different grids")
    n = u.grid.n
    if int(axis) != axis or not 1 <= axis <= n:
        raise DomainError(f"axis must be in 1..{n}, got {axis}")
    ks = tuple(int(k) for k in k_values)
    if not ks or any(k <= 0 for k in ks) or any(b <= a for a, b in zip(ks, ks[1:])):
        raise DomainError(f"k_values must be strictly increasing positive integers, got {k_values}")
    p = axis % n + 1
    return (OscillatoryFamily(u, axis, p, float(amplitude), ks, "div"),
            OscillatoryFamily(v, axis, axis, float(amplitude), ks, "curl_n"))


def fit_decay_exponent(k_values, deviations, floor=0.0):
    """
    Least-squares slope of log(deviation) against log(k).

    Deviations are clamped from below at ``floor`` (at least the smallest
    normal float), so values lost in round-off count as converged instead of
    adding noise to the fit. All deviations at or below the floor give ``-inf``.
    """
    k = np.asarray(k_values, dtype=float)
    d = np.asarray(deviations, dtype=float)
    if k.size < 3:
        raise PreconditionError("decay fit needs at least 3 k-values")
    floor = max(float(floor), np.finfo(float).tiny)
    if not np.any(d > floor):
        return float("-inf")
    y = np.log(np.maximum(d, floor))
    slope, _ = np.polyfit(np.log(k), y, 1)
    return float(slope)


@dataclass(frozen=True)
class WeakPairingReport:
    k_values: tuple
    pairing_values: tuple
    limit_value: float
    deviations: tuple
    decay_exponent: float

    def monotone_from(self, k0):
        """True if deviations never increase for k >= k0."""
        d = [dv for k, dv in zip(self.k_values, self.deviations) if k >= k0]
        return all(b <= a for a, b in zip(d, d[1:]))

    def records(self):
        lines = [f"limit={self.limit_value:.12e}"]
        for k, p, d in zip(self.k_values, self.pairing_values, self.deviations):
            lines.append(f"k={k} pairing={p:.12e} deviation={d:.6e}")
        lines.append(f"decay_exponent={self.decay_exponent:.6f}")
        return "\n".join(lines) + "\n"


def weak_pairing(fam_u, fam_v, phi):
    """Evaluate int phi <u^k, v^k> dx for every k and compare with the limit."""
    _require(phi, "scalar", name="phi")
    g = phi.grid
    if fam_u.base.grid != g or fam_v.base.grid != g:
        raise DomainError("phi lives on a different grid")
    if fam_u.k_values != fam_v.k_values or fam_u.axis != fam_v.axis:
        raise DomainError("families disagree on k_values or axis")
    limit_k = g.shape[fam_u.axis - 1] // 4
    bad = [k for k in fam_u.k_values if k > limit_k]
    if bad:
        raise PreconditionError(
            f"k = {bad} not resolved: need k <= shape/4 = {limit_k} along axis {fam_u.axis}")

    def pairing(a, b):
        return float(g.integrate(phi.data * np.sum(a.data * b.data, axis=0)))

    limit = pairing(fam_u.base, fam_v.base)
    values = tuple(pairing(fam_u.member(k), fam_v.member(k)) for k in fam_u.k_values)
    devs = tuple(abs(val - limit) for val in values)
    floor = NOISE_FLOOR * max(1.0, abs(limit), *(abs(val) for val in values))
    return WeakPairingReport(fam_u.k_values, values, limit, devs,
                             fit_decay_exponent(fam_u.k_values, devs, floor))


def default_demo(shape=128, amplitude=1.0, k_values=(4, 8, 16, 32)):
    """
    Default n = 2 family and test function.

    The base fields carry the odd cubic w(x) = x(x - pi)(x - 2 pi)/pi^3 in x_1,
    whose sine coefficients fall off like 1/m^3; the pairing deviation then
    decays algebraically instead of dropping to round-off at once.
    phi = 1 + cos x_1.
    """
    g = Grid((shape, shape))
    x1, x2 = g.coords()
    w = x1 * (x1 - np.pi) * (x1 - 2 * np.pi) / np.pi ** 3
    u = Field.vector(g, [w * (1 + 0.5 * np.cos(x2)), np.sin(x2)])
    v = Field.vector(g, [np.cos(x1) * np.sin(x2), w])
    phi = Field.scalar(g, 1 + np.cos(x1))
    fam_u, fam_v = build_families(u, v, 1, amplitude, k_values)
    return fam_u, fam_v, phi


# --------------------------------------------------------------------------
# inverse Laplacian and the commutation identities


def inverse_laplacian(f):
    """Spectral inverse Laplacian of a mean-zero field of any kind."""
    require_mean_zero(f)
    spec = get_backend(f.grid, "spectral")
    k = spec.wavevector_grid(odd=False)
    k2 = np.sum(k ** 2, axis=0)
    k2[(0,) * f.grid.n] = np.inf
    return Field(f.grid, f.kind, spec.ifft(spec.fft(f.data) / -k2))


def commutation_residuals(f):
    """(||lap^-1 div f - div lap^-1 f||, ||lap^-1 curl_n f - curl_n lap^-1 f||) in max norm."""
    _require(f, "vector", (f.grid.n,), name="f")
    require_mean_zero(f)
    w = inverse_laplacian(f)
    r_div = (inverse_laplacian(div(f)) - div(w)).norm_inf()
    r_curl = (inverse_laplacian(curl_n(f)) - curl_n(w)).norm_inf()
    return r_div, r_curl


def potential_split_residual(u):
    """
    Rebuild a mean-zero ``u`` from psi = div lap^-1 u and g = curl_n lap^-1 u.

    Returns ||grad psi + [[nabla]]^T g - u||_inf.
    """
    _require(u, "vector", (u.grid.n,), name="u")
    w = inverse_laplacian(u)
    return (grad(div(w)) + adjoint_curl(curl_n(w)) - u).norm_inf()
