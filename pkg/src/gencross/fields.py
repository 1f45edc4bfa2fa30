"""
Sampled fields on the periodic grid [0, 2*pi)^n and their derivative backends.

Field data is component-major: a vector field with m components over a grid of
shape (32, 32) is stored as an array of shape (m, 32, 32); a matrix field as
(rows, cols, 32, 32); a scalar field as (32, 32).
"""

from dataclasses import dataclass
import functools
import os

import numpy as np
import scipy.fft

from .algebra import cross_dim
from .errors import ConfigurationError, DomainError, FieldFormatError, PreconditionError

DEFAULT_SAMPLE_BUDGET = 2 ** 24

KINDS = ("scalar", "vector", "cross", "matrix")


def fft_workers():
    """Worker count for scipy.fft, taken from ``GENCROSS_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("GENCROSS_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid over [0, 2*pi)^n."""

    shape: tuple
    budget: int = DEFAULT_SAMPLE_BUDGET

    def __post_init__(self):
        shape = tuple(int(s) for s in self.shape)
        object.__setattr__(self, "shape", shape)
        if len(shape) < 2:
            raise ConfigurationError("grid needs at least 2 axes")
        if any(s < 3 for s in shape):
            raise ConfigurationError(f"every axis needs >= 3 points, got {shape}")
        if self.size > self.budget:
            raise ConfigurationError(
                f"grid {shape} has {self.size} samples, budget is {self.budget}")

    @classmethod
    def cube(cls, n, points, **kwargs):
        return cls((points,) * n, **kwargs)

    @property
    def n(self):
        return len(self.shape)

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def spacing(self):
        return tuple(2 * np.pi / s for s in self.shape)

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    def coords(self):
        """Coordinate arrays x_1..x_n, each of the grid shape."""
        axes = [np.arange(s) * h for s, h in zip(self.shape, self.spacing)]
        return np.meshgrid(*axes, indexing="ij")

    def integrate(self, data):
        """Rectangle rule over the torus (spectrally accurate for periodic data)."""
        data = np.asarray(data)
        axes = tuple(range(data.ndim - self.n, data.ndim))
        return np.sum(data, axis=axes) * self.cell_volume


class Field:
    """
    A scalar, vector, cross or matrix field sampled on a :class:`Grid`.

    ``kind`` fixes how the leading axes of ``data`` are read:

    * ``scalar``: data.shape == grid.shape
    * ``vector``: (m, *grid.shape); m is usually n
    * ``cross``:  (n(n-1)/2, *grid.shape)
    * ``matrix``: (rows, cols, *grid.shape)
    """

    __slots__ = ("grid", "kind", "data")

    def __init__(self, grid, kind, data):
        if kind not in KINDS:
            raise DomainError(f"unknown field kind {kind!r}")
        data = np.array(data, dtype=float)
        rank = {"scalar": 0, "vector": 1, "cross": 1, "matrix": 2}[kind]
        if data.shape[rank:] != grid.shape or data.ndim != rank + grid.n:
            raise DomainError(
                f"{kind} field on grid {grid.shape} cannot have data of shape {data.shape}")
        if kind == "cross" and data.shape[0] != cross_dim(grid.n):
            raise DomainError(
                f"cross field on a {grid.n}-d grid needs {cross_dim(grid.n)} components")
        if not np.all(np.isfinite(data)):
            raise DomainError("field samples must be finite")
        data.flags.writeable = False
        self.grid = grid
        self.kind = kind
        self.data = data

    @classmethod
    def scalar(cls, grid, data):
        return cls(grid, "scalar", data)

    @classmethod
    def vector(cls, grid, data):
        return cls(grid, "vector", data)

    @classmethod
    def cross(cls, grid, data):
        return cls(grid, "cross", data)

    @classmethod
    def matrix(cls, grid, data):
        return cls(grid, "matrix", data)

    @classmethod
    def zeros(cls, grid, kind, rows=None, cols=None):
        return cls(grid, kind, np.zeros(component_shape(grid, kind, rows, cols) + grid.shape))

    @property
    def component_shape(self):
        return self.data.shape[: self.data.ndim - self.grid.n]

    @property
    def rows(self):
        cs = self.component_shape
        return cs[0] if cs else 1

    @property
    def cols(self):
        cs = self.component_shape
        return cs[1] if len(cs) == 2 else 1

    def _like(self, data):
        return Field(self.grid, self.kind, data)

    def _check_compatible(self, other):
        if not isinstance(other, Field):
            return NotImplemented
        if other.grid != self.grid or other.kind != self.kind or other.data.shape != self.data.shape:
            raise DomainError("fields differ in grid, kind or shape")
        return other

    def __add__(self, other):
        other = self._check_compatible(other)
        return other if other is NotImplemented else self._like(self.data + other.data)

    def __sub__(self, other):
        other = self._check_compatible(other)
        return other if other is NotImplemented else self._like(self.data - other.data)

    def __neg__(self):
        return self._like(-self.data)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return self._like(self.data * scalar)

    __rmul__ = __mul__

    def norm_inf(self):
        return float(np.max(np.abs(self.data), initial=0.0))

    def norm_l2(self):
        return float(np.sqrt(self.grid.integrate(np.sum(
            self.data.reshape((-1,) + self.grid.shape) ** 2, axis=0))))

    def mean(self):
        """Grid average per component (the zero Fourier mode)."""
        axes = tuple(range(self.data.ndim - self.grid.n, self.data.ndim))
        return np.mean(self.data, axis=axes)

    def __repr__(self):
        return f"Field({self.kind}, components={self.component_shape}, grid={self.grid.shape})"


def component_shape(grid, kind, rows=None, cols=None):
    if kind == "scalar":
        return ()
    if kind == "vector":
        return (grid.n if rows is None else rows,)
    if kind == "cross":
        return (cross_dim(grid.n),)
    if kind == "matrix":
        return (grid.n if rows is None else rows, grid.n if cols is None else cols)
    raise DomainError(f"unknown field kind {kind!r}")


# --------------------------------------------------------------------------
# derivative backends


class SpectralBackend:
    """
    Fourier differentiation on the torus.

    First derivatives zero the Nyquist wavenumber on even axes so real data stays
    real and d/dx stays skew-adjoint; second derivatives along one axis use the
    full -k^2.
    """

    kind = "spectral"

    def __init__(self, grid):
        if any(s % 2 or s < 4 for s in grid.shape):
            raise ConfigurationError(
                f"spectral backend needs even axes with >= 4 points, got {grid.shape}")
        self.grid = grid
        self.wavenumbers = tuple(np.fft.fftfreq(s, 1.0 / s) for s in grid.shape)
        odd = []
        for k, s in zip(self.wavenumbers, grid.shape):
            k = k.copy()
            k[s // 2] = 0.0
            odd.append(k)
        self.odd_wavenumbers = tuple(odd)

    def _axes(self, data):
        return tuple(range(data.ndim - self.grid.n, data.ndim))

    def _broadcast(self, k, axis):
        shape = [1] * self.grid.n
        shape[axis] = k.shape[0]
        return k.reshape(shape)

    def fft(self, data):
        return scipy.fft.fftn(data, axes=self._axes(data), workers=fft_workers())

    def ifft(self, data):
        return scipy.fft.ifftn(data, axes=self._axes(data), workers=fft_workers()).real

    def wavevector_grid(self, odd=True):
        """k as an (n, *shape) array; ``odd`` selects the Nyquist-zeroed table."""
        table = self.odd_wavenumbers if odd else self.wavenumbers
        return np.stack(np.meshgrid(*table, indexing="ij"))

    def jacobian(self, data):
        """All first partials; the derivative index is appended after the component axes."""
        c = self.fft(data)
        out = np.empty(data.shape[: data.ndim - self.grid.n] + (self.grid.n,) + self.grid.shape)
        for j in range(self.grid.n):
            out[(Ellipsis, j) + (slice(None),) * self.grid.n] = self.ifft(
                1j * self._broadcast(self.odd_wavenumbers[j], j) * c)
        return out

    def laplacian(self, data):
        c = self.fft(data)
        k2 = sum(self._broadcast(k ** 2, j) for j, k in enumerate(self.wavenumbers))
        return self.ifft(-k2 * c)


class CentralBackend:
    """Second-order central differences on the periodic grid."""

    kind = "central2"

    def __init__(self, grid):
        self.grid = grid

    def jacobian(self, data):
        n = self.grid.n
        lead = data.ndim - n
        out = np.empty(data.shape[:lead] + (n,) + self.grid.shape)
        for j, h in enumerate(self.grid.spacing):
            ax = lead + j
            out[(Ellipsis, j) + (slice(None),) * n] = (
                np.roll(data, -1, axis=ax) - np.roll(data, 1, axis=ax)) / (2 * h)
        return out

    def laplacian(self, data):
        n = self.grid.n
        lead = data.ndim - n
        out = np.zeros_like(data)
        for j, h in enumerate(self.grid.spacing):
            ax = lead + j
            out += (np.roll(data, -1, axis=ax) - 2 * data + np.roll(data, 1, axis=ax)) / h ** 2
        return out


BACKENDS = {"spectral": SpectralBackend, "central2": CentralBackend}


@functools.lru_cache(maxsize=32)
def _cached_backend(grid, kind):
    return BACKENDS[kind](grid)


def get_backend(grid, backend="spectral"):
    """Resolve a backend name (or pass through an instance) for ``grid``."""
    if isinstance(backend, (SpectralBackend, CentralBackend)):
        if backend.grid != grid:
            raise ConfigurationError("backend was built for a different grid")
        return backend
    if backend not in BACKENDS:
        raise ConfigurationError(f"unknown backend {backend!r}; choose from {sorted(BACKENDS)}")
    return _cached_backend(grid, backend)


# --------------------------------------------------------------------------
# sample fields


def band_limited(grid, kind="vector", seed=0, rows=None, cols=None, zero_mean=False,
                 bandwidth=None):
    """
    Random field with Fourier support |k_i| <= shape_i/4, scaled to max-norm 1.

    ``bandwidth`` lowers the cut-off to |k_i| <= min(bandwidth, shape_i/4).

    Coefficients are complex Gaussians; taking the real part of the inverse
    transform is the Hermitian symmetrization.
    """
    rng = np.random.default_rng(seed)
    comp = component_shape(grid, kind, rows, cols)
    mask = np.ones(grid.shape, dtype=bool)
    for j, s in enumerate(grid.shape):
        k = np.abs(np.fft.fftfreq(s, 1.0 / s))
        shape = [1] * grid.n
        shape[j] = s
        cut = s // 4 if bandwidth is None else min(bandwidth, s // 4)
        mask = mask & (k <= cut).reshape(shape)
    if zero_mean:
        mask[(0,) * grid.n] = False
    full = comp + grid.shape
    coef = (rng.standard_normal(full) + 1j * rng.standard_normal(full)) * mask
    data = scipy.fft.ifftn(coef, axes=tuple(range(len(comp), len(full)))).real
    scale = np.max(np.abs(data))
    return Field(grid, kind, data / scale if scale > 0 else data)


def from_function(grid, kind, func):
    """Sample ``func(*coords)`` on the grid.

    ``func`` returns an array (scalar kind), a list of arrays/numbers (vector,
    cross) or a list of such lists (matrix).
    """
    values = func(*grid.coords())
    if kind == "scalar":
        data = np.broadcast_to(values, grid.shape)
    elif kind == "matrix":
        data = [[np.broadcast_to(v, grid.shape) for v in row] for row in values]
    else:
        data = [np.broadcast_to(v, grid.shape) for v in values]
    return Field(grid, kind, np.array(data, dtype=float))


# --------------------------------------------------------------------------
# field file format


def _header(field):
    meta = {
        "version": "1",
        "kind": field.kind,
        "n": str(field.grid.n),
        "shape": ",".join(str(s) for s in field.grid.shape),
        "rows": str(field.rows),
        "cols": str(field.cols),
        "dtype": "f64le",
        "layout": "component-major",
    }
    return (" ".join(f"{k}={v}" for k, v in meta.items()) + "\n").encode("ascii")


def dumps_field(field):
    return _header(field) + np.ascontiguousarray(field.data, dtype="<f8").tobytes()


def write_field(path, field):
    with open(path, "wb") as fh:
        fh.write(dumps_field(field))


def loads_field(blob, budget=DEFAULT_SAMPLE_BUDGET):
    """Parse the bytes produced by :func:`dumps_field`."""
    end = blob.find(b"\n")
    if end < 0:
        raise FieldFormatError("missing header terminator (newline) at byte offset 0")
    try:
        text = blob[:end].decode("ascii")
        meta = dict(item.split("=", 1) for item in text.split())
    except (UnicodeDecodeError, ValueError) as exc:
        raise FieldFormatError(f"unreadable header at byte offset 0: {exc}") from None
    required = ("version", "kind", "n", "shape", "rows", "cols", "dtype", "layout")
    missing = [k for k in required if k not in meta]
    if missing:
        raise FieldFormatError(f"header lacks keys {missing}")
    if meta["version"] != "1" or meta["dtype"] != "f64le" or meta["layout"] != "component-major":
        raise FieldFormatError(
            f"unsupported version/dtype/layout: {meta['version']}/{meta['dtype']}/{meta['layout']}")
    try:
        n = int(meta["n"])
        shape = tuple(int(s) for s in meta["shape"].split(","))
        rows, cols = int(meta["rows"]), int(meta["cols"])
    except ValueError as exc:
        raise FieldFormatError(f"bad numeric header value: {exc}") from None
    kind = meta["kind"]
    if kind not in KINDS or len(shape) != n:
        raise FieldFormatError(f"inconsistent header: kind={kind}, n={n}, shape={shape}")
    try:
        grid = Grid(shape, budget=budget)
    except ConfigurationError as exc:
        raise FieldFormatError(str(exc)) from None
    comp = {"scalar": (), "vector": (rows,), "cross": (rows,), "matrix": (rows, cols)}[kind]
    count = int(np.prod(comp + shape))
    offset = end + 1
    have = len(blob) - offset
    if have != 8 * count:
        raise FieldFormatError(
            f"expected {8 * count} data bytes after header ending at byte offset {offset}, "
            f"found {have} (file ends at byte offset {len(blob)})")
    data = np.frombuffer(blob, dtype="<f8", count=count, offset=offset).reshape(comp + shape)
    try:
        return Field(grid, kind, data)
    except DomainError as exc:
        raise FieldFormatError(str(exc)) from None


def read_field(path, budget=DEFAULT_SAMPLE_BUDGET):
    with open(path, "rb") as fh:
        return loads_field(fh.read(), budget=budget)


def require_mean_zero(field, rtol=1e-12):
    """Raise unless every component has (numerically) zero grid mean."""
    scale = max(field.norm_inf(), 1.0)
    if np.max(np.abs(field.mean()), initial=0.0) > rtol * scale:
        raise PreconditionError("field has a nonzero mean; the inverse Laplacian is undefined on constants")
