"""
Generalized cross product on R^n and its matrix representation.

For a, b in R^n the product ``cross(a, b)`` lives in R^N with N = n(n-1)/2 and
collects every 2x2 minor a_i b_j - a_j b_i (i < j) in the pair order

    (1,2), (1,3), (2,3), (1,4), (2,4), (3,4), ...

The linear map ``b -> cross(a, b)`` is represented by the N x n matrix
``cross_matrix(a)``; almost every identity in this module is a statement about
products of such matrices.

Indices in the public pair API (``pair_to_index``/``index_to_pair``) are
1-based. Everything else uses ordinary 0-based numpy indexing.

``cross``, ``cross_oracle``, ``cross_matrix`` and ``grassmann_triple`` accept
arrays with trailing batch axes (component axis first, e.g. shape (n, 32, 32)),
which is how the field operators evaluate symbols on a wavenumber grid.
"""

from dataclasses import dataclass
import functools
import math

import numpy as np
import scipy.sparse as sp

from .errors import DomainError

#: Above this dimension prefer ``cross_matrix_sparse``; the dense N x n matrix
#: has only 2 nonzeros per row.
SPARSE_CROSSOVER = 64


def cross_dim(n):
    """Length n(n-1)/2 of the generalized cross product on R^n."""
    if int(n) != n or n < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {n!r}")
    n = int(n)
    return n * (n - 1) // 2


def dim_from_cross_dim(N):
    """Inverse of :func:`cross_dim`; raises if ``N`` is not triangular."""
    n = (1 + math.isqrt(1 + 8 * N)) // 2
    if N < 1 or n * (n - 1) // 2 != N:
        raise DomainError(f"length {N} is not of the form n(n-1)/2 with n >= 2")
    return n


def pair_to_index(n, i, j):
    """Position (1-based) of the minor (i, j), 1 <= i < j <= n."""
    cross_dim(n)
    if not (1 <= i < j <= n):
        raise DomainError(f"need 1 <= i < j <= {n}, got (i, j) = ({i}, {j})")
    return (j - 1) * (j - 2) // 2 + i


def index_to_pair(n, k):
    """Inverse of :func:`pair_to_index`."""
    N = cross_dim(n)
    if not (1 <= k <= N):
        raise DomainError(f"index {k} outside 1..{N}")
    # t = j - 1 is the smallest t with t(t+1)/2 >= k
    t = (math.isqrt(8 * k + 1) - 1) // 2
    if t * (t + 1) // 2 < k:
        t += 1
    return k - t * (t - 1) // 2, t + 1


@functools.lru_cache(maxsize=None)
def pair_table(n):
    """0-based index arrays ``(I, J)`` with ``(I[k], J[k])`` the k-th pair."""
    N = cross_dim(n)
    I = np.empty(N, dtype=np.intp)
    J = np.empty(N, dtype=np.intp)
    k = 0
    for j in range(1, n):
        for i in range(j):
            I[k], J[k] = i, j
            k += 1
    I.flags.writeable = False
    J.flags.writeable = False
    return I, J


def _vector(a, name="a"):
    a = np.asarray(a)
    if not np.issubdtype(a.dtype, np.inexact):
        a = a.astype(float)
    if a.ndim < 1 or a.shape[0] < 2:
        raise DomainError(f"{name} must have at least 2 components, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} has non-finite entries")
    return a


def _same_dim(*vectors):
    n = vectors[0].shape[0]
    for v in vectors[1:]:
        if v.shape[0] != n:
            raise DomainError(
                f"dimension mismatch: {n} vs {v.shape[0]}")
    return n


def cross(a, b):
    """
    Generalized cross product ``a x_n b``.

    Evaluated by the inductive rule with the recursion unrolled: the block
    contributed when passing from dimension m to m+1 is
    ``b[m] * a[:m] - a[m] * b[:m]``, stacked below the product of the leading
    m-vectors. The m = 1 block is the scalar a_1 b_2 - a_2 b_1.

    Parameters
    ----------
    a, b : array_like, shape (n, ...)
        Vectors (or batches of vectors along trailing axes), n >= 2.

    Returns
    -------
    ndarray, shape (n(n-1)/2, ...)
    """
    a = _vector(a)
    b = _vector(b, "b")
    n = _same_dim(a, b)
    return np.concatenate([b[m] * a[:m] - a[m] * b[:m] for m in range(1, n)],
                          axis=0)


def cross_oracle(a, b):
    """Coordinate formula: entry ``pair_to_index(n, i, j)`` is a_i b_j - a_j b_i.

    Independent of :func:`cross`; used to check it.
    """
    a = _vector(a)
    b = _vector(b, "b")
    n = _same_dim(a, b)
    out = np.empty((cross_dim(n),) + np.broadcast_shapes(a.shape[1:], b.shape[1:]),
                   dtype=np.result_type(a, b))
    for j in range(2, n + 1):
        for i in range(1, j):
            out[pair_to_index(n, i, j) - 1] = a[i - 1] * b[j - 1] - a[j - 1] * b[i - 1]
    return out


@dataclass(frozen=True, eq=False)
class SkewMatrix:
    """
    Skew-symmetric n x n matrix stored as its strict upper triangle.

    ``upper`` holds the entries alpha_ij, i < j, in pair order, so it *is* the
    image under the map so(n) -> R^N. ``to_array()`` materializes the dense
    matrix; ``np.asarray(S)`` does the same.
    """

    n: int
    upper: np.ndarray

    def __post_init__(self):
        upper = np.array(self.upper, dtype=float)
        if upper.shape != (cross_dim(self.n),):
            raise DomainError(
                f"so({self.n}) needs {cross_dim(self.n)} entries, got shape {upper.shape}")
        upper.flags.writeable = False
        object.__setattr__(self, "upper", upper)

    def to_array(self):
        I, J = pair_table(self.n)
        A = np.zeros((self.n, self.n))
        A[I, J] = self.upper
        A[J, I] = -self.upper
        return A

    def __array__(self, dtype=None, copy=None):
        A = self.to_array()
        return A if dtype is None else A.astype(dtype)

    @classmethod
    def from_array(cls, A, atol=0.0):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DomainError(f"expected a square matrix, got shape {A.shape}")
        if np.max(np.abs(A + A.T), initial=0.0) > atol:
            raise DomainError("matrix is not skew-symmetric")
        I, J = pair_table(A.shape[0])
        return cls(A.shape[0], A[I, J])


def vec_from_skew(A):
    """Read the strict upper triangle of a skew matrix in pair order."""
    if not isinstance(A, SkewMatrix):
        A = SkewMatrix.from_array(A)
    return A.upper.copy()


def skew_from_vec(v):
    """Skew matrix whose strict upper triangle (in pair order) is ``v``."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DomainError(f"expected a 1-D vector, got shape {v.shape}")
    return SkewMatrix(dim_from_cross_dim(v.shape[0]), v)


def cross_matrix(a):
    """
    The N x n matrix ``[[a]]_n`` with ``cross_matrix(a) @ b == cross(a, b)``.

    Built level by level from the block form: the matrix for the leading
    m-vector sits in the top-left corner (zero last column) and the new rows
    are ``[-a[m] * I_m | a[:m]]``. For n = 2 this is the 1 x 2 row
    ``(-a_2, a_1)``.

    Trailing batch axes of ``a`` are carried along: the result has shape
    (N, n, ...).
    """
    a = _vector(a)
    n = a.shape[0]
    rest = a.shape[1:]
    M = np.zeros((cross_dim(n), n) + rest, dtype=a.dtype)
    pad = (1,) * len(rest)
    for m in range(1, n):
        rows = slice(m * (m - 1) // 2, m * (m + 1) // 2)
        M[rows, :m] = -a[m] * np.eye(m).reshape((m, m) + pad)
        M[rows, m] = a[:m]
    return M


def cross_matrix_sparse(a):
    """CSR version of :func:`cross_matrix` for large n (2 nonzeros per row)."""
    a = _vector(a)
    if a.ndim != 1:
        raise DomainError("sparse cross matrix needs a single vector")
    n = a.shape[0]
    I, J = pair_table(n)
    N = I.shape[0]
    rows = np.repeat(np.arange(N), 2)
    cols = np.column_stack([I, J]).ravel()
    data = np.column_stack([-a[J], a[I]]).ravel()
    return sp.csr_matrix((data, (rows, cols)), shape=(N, n))


def grassmann_triple(a, bc):
    """
    ``cross_matrix(a).T @ bc``.

    For ``bc = cross(b, c)`` this equals ``<a,b> c - <a,c> b``. Batched like
    :func:`cross`.
    """
    a = _vector(a)
    bc = np.asarray(bc)
    if bc.shape[0] != cross_dim(a.shape[0]):
        raise DomainError(
            f"cross vector of length {bc.shape[0]} does not match n = {a.shape[0]}")
    return np.einsum("kn...,k...->n...", cross_matrix(a), bc)


def jacobi_sum(a, b, c):
    """Cyclic sum of Grassmann triples; vanishes identically."""
    a, b, c = _vector(a), _vector(b, "b"), _vector(c, "c")
    _same_dim(a, b, c)
    return (grassmann_triple(a, cross(b, c)) + grassmann_triple(b, cross(c, a))
            + grassmann_triple(c, cross(a, b)))


def _vec1(a, name="a"):
    a = _vector(a, name)
    if a.ndim != 1:
        raise DomainError(f"{name} must be a 1-D vector, got shape {a.shape}")
    return a


def _matrix(P, name="P"):
    P = np.asarray(P, dtype=float)
    if P.ndim != 2:
        raise DomainError(f"{name} must be 2-D, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise DomainError(f"{name} has non-finite entries")
    return P


def room_product(a, b):
    """``[[a]]^T [[b]]``, equal to ``<b,a> I - b (x) a``."""
    a, b = _vec1(a), _vec1(b, "b")
    _same_dim(a, b)
    return cross_matrix(a).T @ cross_matrix(b)


def dyad_from_room(a, b):
    """Recover ``b (x) a`` from ``R = [[a]]^T [[b]]`` as ``tr(R)/(n-1) I - R``."""
    R = room_product(a, b)
    n = R.shape[0]
    return np.trace(R) / (n - 1) * np.eye(n) - R


def cross_right(P, b):
    """Row-wise product ``P x_n b = P [[-b]]^T`` (m x N)."""
    P, b = _matrix(P), _vec1(b, "b")
    if P.shape[1] != b.shape[0]:
        raise DomainError(f"P has {P.shape[1]} columns, b has {b.shape[0]} entries")
    return P @ cross_matrix(-b).T


def cross_left(b, B):
    """Column-wise product ``b x_n B = [[b]] B`` (N x m)."""
    b, B = _vec1(b, "b"), _matrix(B, "B")
    if B.shape[0] != b.shape[0]:
        raise DomainError(f"B has {B.shape[0]} rows, b has {b.shape[0]} entries")
    return cross_matrix(b) @ B


def matrix_cross_block(a, b):
    """``[[a]] x_n b = [[a]] [[-b]]^T`` (N x N)."""
    a, b = _vec1(a), _vec1(b, "b")
    _same_dim(a, b)
    return cross_matrix(a) @ cross_matrix(-b).T


def simultaneous_cross(b, P):
    """``b x_n P x_n b = [[b]] P [[-b]]^T`` for square ``P``."""
    b, P = _vec1(b, "b"), _matrix(P)
    n = b.shape[0]
    if P.shape != (n, n):
        raise DomainError(f"P must be {n}x{n}, got {P.shape}")
    return cross_matrix(b) @ P @ cross_matrix(-b).T


def sandwich(b, Q):
    """``[[b]]^T Q [[b]]`` for an N x N matrix ``Q``."""
    b, Q = _vec1(b, "b"), _matrix(Q, "Q")
    N = cross_dim(b.shape[0])
    if Q.shape != (N, N):
        raise DomainError(f"Q must be {N}x{N}, got {Q.shape}")
    M = cross_matrix(b)
    return M.T @ Q @ M


def sym(P):
    P = np.asarray(P)
    return 0.5 * (P + P.T)


def skew(P):
    P = np.asarray(P)
    return 0.5 * (P - P.T)


def anti(a):
    """Classical 3D cross product matrix: ``anti(a) @ b == np.cross(a, b)``."""
    a = _vector(a)
    if a.shape[0] != 3:
        raise DomainError("anti() is only defined for n = 3")
    z = np.zeros_like(a[0])
    return np.array([[z, -a[2], a[1]],
                     [a[2], z, -a[0]],
                     [-a[1], a[0], z]])


def dyadic_lift(bilinear, p, q):
    """
    Matrix of the linear map on R^{p x q} induced by a bilinear map.

    Any bilinear ``B(x, y)`` factors through the dyad ``x (x) y``; the returned
    matrix ``L`` satisfies ``B(x, y).ravel() == L @ np.outer(x, y).ravel()``.
    ``B`` is recoverable from its values, i.e. ``x (x) y`` is a linear function
    of ``B(x, y)``, exactly when ``L`` has full column rank p*q.
    """
    cols = []
    for s in range(p):
        for t in range(q):
            cols.append(np.ravel(bilinear(np.eye(p)[s], np.eye(q)[t])))
    return np.column_stack(cols)


def skew_cross_lift(n):
    """Lift of ``(v, b) -> A x_n b`` with ``A = skew_from_vec(v)`` (N*n x N*n)."""
    return dyadic_lift(lambda v, b: cross_right(skew_from_vec(v).to_array(), b),
                       cross_dim(n), n)


def matrix_cross_lift(n):
    """Lift of ``(a, b) -> [[a]] x_n b`` (N*N x n*n)."""
    return dyadic_lift(matrix_cross_block, n, n)
