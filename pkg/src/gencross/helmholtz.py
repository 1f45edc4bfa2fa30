"""
Helmholtz decomposition a = a_curlfree + a_divfree in any dimension n >= 2.

Two routes:

* :func:`spectral_decompose` projects each Fourier mode k != 0 with
  ``k k^T / |k|^2`` and ``[[k]]^T [[k]] / |k|^2``; by Room's identity the two
  projectors sum to the identity. The k = 0 mode is returned separately.
* :func:`riesz_decompose` evaluates the full-space representation with the
  gradient of the Laplace Green function (Riesz potentials of order 1) by
  midpoint quadrature, the singular cell being left out.
"""

from dataclasses import dataclass, field
import math

import numpy as np
import scipy.fft
import scipy.signal

from .algebra import cross, cross_dim, grassmann_triple, pair_table, room_product
from .calculus import _require, adjoint_curl, curl_n, div, grad
from .errors import ConfigurationError, DomainError, PreconditionError
from .fields import Field, get_backend


def unit_ball_volume(n):
    """pi^(n/2) / Gamma(n/2 + 1)."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def green_function(n, x, y):
    """Fundamental solution of the Laplacian on R^n (log for n = 2)."""
    r = np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    if r == 0:
        raise DomainError("Green function is singular at x = y")
    if n == 2:
        return math.log(r) / (2 * math.pi)
    return r ** (2 - n) / (n * (2 - n) * unit_ball_volume(n))


def green_gradient(n, x, y):
    """Gradient in x of the Green function: (x - y) / (n w_n |x - y|^n)."""
    z = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    if z.shape != (n,):
        raise DomainError(f"x and y must be {n}-vectors")
    r = np.linalg.norm(z)
    if r == 0:
        raise DomainError("Green gradient is singular at x = y")
    return z / (n * unit_ball_volume(n) * r ** n)


@dataclass
class HelmholtzResult:
    a_curlfree: Field
    a_divfree: Field
    mean_mode: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def records(self):
        """Diagnostics as ``key=value`` lines."""
        lines = [f"{k}={v:.6e}" if isinstance(v, float) else f"{k}={v}"
                 for k, v in self.diagnostics.items()]
        lines.append("mean_mode=" + ",".join(f"{m:.6e}" for m in self.mean_mode))
        return "\n".join(lines) + "\n"


def _diagnose(a, curlfree, divfree, mean, backend="spectral"):
    mean_field = mean.reshape((-1,) + (1,) * a.grid.n)
    return {
        "sum_residual": float(np.max(np.abs(a.data - curlfree.data - divfree.data - mean_field))),
        "div_divfree": div(divfree, backend).norm_inf(),
        "curl_curlfree": curl_n(curlfree, backend).norm_inf(),
    }


def spectral_decompose(a):
    """Fourier-projector Helmholtz split on the torus."""
    _require(a, "vector", (a.grid.n,), name="a")
    g = a.grid
    spec = get_backend(g, "spectral")
    a_hat = spec.fft(a.data)
    k = spec.wavevector_grid(odd=False)
    k2 = np.sum(k ** 2, axis=0)
    k2[(0,) * g.n] = 1.0
    # [[k]]^T [[k]] a_hat computed as a Grassmann triple of k and k x a_hat
    div_hat = grassmann_triple(k, cross(k, a_hat)) / k2
    curl_hat = k * (np.sum(k * a_hat, axis=0) / k2)
    mean = a.mean()
    curlfree = Field.vector(g, spec.ifft(curl_hat))
    divfree = Field.vector(g, spec.ifft(div_hat))
    result = HelmholtzResult(curlfree, divfree, mean)
    result.diagnostics.update(_diagnose(a, curlfree, divfree, mean))
    return result


def projector_completeness(k):
    """Max deviation of (k k^T + [[k]]^T [[k]]) / |k|^2 from the identity."""
    k = np.asarray(k, dtype=float)
    P = (np.outer(k, k) + room_product(k, k)) / (k @ k)
    return float(np.max(np.abs(P - np.eye(k.shape[0]))))


def _kernels(grid):
    """Riesz kernels z_l / (n w_n |z|^n) on the (2s-1)^n lattice of offsets, K(0) = 0."""
    n = grid.n
    offs = [np.arange(-(s - 1), s) * h for s, h in zip(grid.shape, grid.spacing)]
    Z = np.stack(np.meshgrid(*offs, indexing="ij"))
    r = np.sqrt(np.sum(Z ** 2, axis=0))
    centre = tuple(s - 1 for s in grid.shape)
    r[centre] = 1.0
    K = Z / (n * unit_ball_volume(n) * r ** n)
    K[(slice(None),) + centre] = 0.0
    return K


def _convolve(kernel, f, grid, method):
    """sum_y K(x - y) f(y) dV for x on the grid (full-space, no wrap-around)."""
    dv = grid.cell_volume
    s = grid.shape
    if method == "fft":
        full = scipy.signal.fftconvolve(f, kernel, mode="full")
        core = tuple(slice(si - 1, 2 * si - 1) for si in s)
        return full[core] * dv
    # direct sum, fixed order per output point
    out = np.empty(s)
    fl = f.ravel()
    idx = np.stack(np.unravel_index(np.arange(fl.size), s), axis=1)
    centre = np.array(s) - 1
    for p, x in enumerate(idx):
        offs = x - idx + centre
        out.flat[p] = np.dot(kernel[tuple(offs.T)], fl)
    return out * dv


def support_violation(a, margin=0.25):
    """Largest |a| in the outer ``margin`` band of the box, relative to max |a|."""
    g = a.grid
    mag = np.sqrt(np.sum(a.data.reshape((-1,) + g.shape) ** 2, axis=0))
    inner = np.zeros(g.shape, dtype=bool)
    inner[tuple(slice(int(math.ceil(margin * s)), s - int(math.ceil(margin * s)))
                for s in g.shape)] = True
    peak = float(np.max(mag))
    if peak == 0:
        return 0.0
    return float(np.max(mag[~inner], initial=0.0)) / peak


def riesz_decompose(a, support_check=1e-4, margin=0.25, dims=(2, 3), method="fft"):
    """
    Full-space Helmholtz split by Riesz-potential quadrature.

    a_curlfree(x) = sum_y K(x - y) div a(y) dV,
    a_divfree(x)  = sum_y [[K(x - y)]]^T curl_n a(y) dV,
    with K(z) = z / (n w_n |z|^n) and the y = x cell dropped. div and curl_n
    of ``a`` are taken spectrally. ``method="direct"`` sums point by point;
    ``"fft"`` evaluates the same discrete sums as zero-padded convolutions.

    Raises
    ------
    PreconditionError
        if ``a`` is not numerically supported away from the box boundary.
    ConfigurationError
        if n is outside ``dims`` or ``method`` is unknown.
    """
    _require(a, "vector", (a.grid.n,), name="a")
    g = a.grid
    if g.n not in dims:
        raise ConfigurationError(f"Riesz quadrature configured for n in {dims}, got {g.n}")
    if method not in ("fft", "direct"):
        raise ConfigurationError(f"unknown quadrature method {method!r}")
    violation = support_violation(a, margin)
    if violation > support_check:
        raise PreconditionError(
            f"field is not supported inside the central box: |a| reaches {violation:.3e} "
            f"of its peak within the {margin:.0%} margin (limit {support_check:.1e})")
    n = g.n
    K = _kernels(g)
    d = div(a).data
    c = curl_n(a).data
    conv_div = [_convolve(K[l], d, g, method) for l in range(n)]
    curlfree = np.stack(conv_div)
    # [[z]]^T c: pair (i, j) feeds -z_j c_k into slot i and z_i c_k into slot j
    I, J_ = pair_table(n)
    divfree = np.zeros((n,) + g.shape)
    for k in range(cross_dim(n)):
        i, j = I[k], J_[k]
        divfree[i] -= _convolve(K[j], c[k], g, method)
        divfree[j] += _convolve(K[i], c[k], g, method)
    cf = Field.vector(g, curlfree)
    df = Field.vector(g, divfree)
    mean = np.zeros(n)
    result = HelmholtzResult(cf, df, mean)
    result.diagnostics.update(_diagnose(a, cf, df, mean))
    result.diagnostics["support_violation"] = violation
    return result


def relative_l2_deviation(first, second, reference):
    """L2 distance between two decompositions, relative to ``|reference|``."""
    num = ((first.a_curlfree - second.a_curlfree).norm_l2() ** 2
           + (first.a_divfree - second.a_divfree).norm_l2() ** 2)
    return math.sqrt(num) / reference.norm_l2()


def bump_field(grid, kind="gradient", sigma=0.3):
    """
    Compactly concentrated test fields centred in the box.

    ``"gradient"`` is grad g and ``"divfree"`` is [[nabla]]^T (g, ..., g) for
    the Gaussian g = exp(-|x - c|^2 / (2 sigma^2)), c the box centre. Both
    are small enough at the boundary for :func:`riesz_decompose` when
    sigma <= 0.3.
    """
    x = grid.coords()
    r2 = sum((xi - math.pi) ** 2 for xi in x)
    g = np.exp(-r2 / (2 * sigma ** 2))
    if kind == "gradient":
        return grad(Field.scalar(grid, g))
    if kind == "divfree":
        return adjoint_curl(Field.cross(grid, np.broadcast_to(g, (cross_dim(grid.n),) + grid.shape)))
    raise DomainError(f"unknown bump kind {kind!r}")
