"""Finite-dimensional Hilbert-space primitives: points and dense operators."""
import threading

import numpy as np

from . import kernels
from .errors import NumericalFailureError, RejectedInputError

__all__ = [
    "DEFAULT_NORM_TOL",
    "POWER_MAX_ITER",
    "LinearOperator",
    "as_point",
    "inner",
    "norm",
    "apply",
    "adjoint_apply",
    "operator_norm",
]

DEFAULT_NORM_TOL = 1e-10
POWER_MAX_ITER = 10_000


def as_point(v, dim=None, name="point"):
    """Return ``v`` as a finite 1-D float64 array, optionally checking its size."""
    arr = np.atleast_1d(np.asarray(v, dtype=np.float64))
    if arr.ndim != 1 or arr.size == 0:
        raise RejectedInputError(f"{name} must be a non-empty vector, got shape {arr.shape}")
    if dim is not None and arr.size != dim:
        raise RejectedInputError(f"{name} has dimension {arr.size}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise RejectedInputError(f"{name} has a non-finite coordinate at index {bad}")
    return arr


def inner(x, y):
    return float(np.dot(x, y))


def norm(x):
    return float(np.linalg.norm(x))


class LinearOperator:
    """Dense real matrix ``D : R^cols -> R^rows`` with adjoint ``D^T``.

    The spectral norm is computed lazily by power iteration on ``D^T D`` and
    cached. Two threads racing on the cache both compute the same value, so
    the lock only guards the write.
    """

    __slots__ = ("_matrix", "_norm_cache", "_lock", "_adjoint")

    def __init__(self, matrix, cached_norm=None):
        m = np.array(matrix, dtype=np.float64)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        elif m.ndim == 1:
            m = m.reshape(1, -1)
        if m.ndim != 2 or m.size == 0:
            raise RejectedInputError(f"operator matrix must be 2-D and non-empty, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise RejectedInputError("operator matrix has non-finite entries")
        m.setflags(write=False)
        self._matrix = m
        self._norm_cache = None
        if cached_norm is not None:
            if cached_norm < 0:
                raise RejectedInputError("cached_norm must be nonnegative")
            self._norm_cache = (0.0, float(cached_norm))
        self._lock = threading.Lock()
        self._adjoint = None

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n), cached_norm=1.0)

    @classmethod
    def scalar(cls, c):
        return cls([[c]], cached_norm=abs(float(c)))

    @property
    def matrix(self):
        return self._matrix

    @property
    def shape(self):
        return self._matrix.shape

    @property
    def domain_dim(self):
        return self._matrix.shape[1]

    @property
    def codomain_dim(self):
        return self._matrix.shape[0]

    @property
    def cached_norm(self):
        return None if self._norm_cache is None else self._norm_cache[1]

    def adjoint(self):
        # Memoized so adjoint().adjoint() is self.
        if self._adjoint is None:
            adj = LinearOperator(self._matrix.T)
            adj._norm_cache = self._norm_cache
            adj._adjoint = self
            self._adjoint = adj
        return self._adjoint

    @property
    def T(self):
        return self.adjoint()

    def apply(self, v):
        v = as_point(v, self.domain_dim, "operator input")
        return self._matrix @ v

    def adjoint_apply(self, v):
        v = as_point(v, self.codomain_dim, "adjoint input")
        return self._matrix.T @ v

    __call__ = apply

    def norm(self, tol=DEFAULT_NORM_TOL):
        return operator_norm(self, tol)

    def __eq__(self, other):
        if not isinstance(other, LinearOperator):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._matrix, other._matrix))

    def __hash__(self):
        return hash((self.shape, self._matrix.tobytes()))

    def __repr__(self):
        return f"LinearOperator(shape={self.shape})"


def apply(op, v):
    """Matrix-vector product ``D v``."""
    return op.apply(v)


def adjoint_apply(op, v):
    """Transpose-vector product ``D^T v``."""
    return op.adjoint_apply(v)


def _power(M, v0, tol):
    rq, iters, converged = kernels.power_iteration(M, v0, tol, POWER_MAX_ITER)
    return float(rq), int(iters), bool(converged)


def operator_norm(op, tol=DEFAULT_NORM_TOL):
    """Spectral norm ``||D||`` by power iteration on ``D^T D``.

    Starts from the normalized all-ones vector and stops once two successive
    Rayleigh quotients differ by less than ``tol`` times the current one.
    A result is cached on the operator and reused for any request whose
    ``tol`` is no tighter than the cached one.

    Raises
    ------
    NumericalFailureError
        If the cap of ``POWER_MAX_ITER`` iterations is reached; ``estimate``
        holds the last norm estimate.
    """
    if not tol > 0:
        raise RejectedInputError(f"tol must be positive, got {tol}")
    cache = op._norm_cache
    if cache is not None and cache[0] <= tol:
        return cache[1]
    M = np.ascontiguousarray(op.matrix)
    n = M.shape[1]
    if not np.any(M):
        value = 0.0
    else:
        rq, _, converged = _power(M, np.full(n, 1.0 / np.sqrt(n)), tol)
        if rq == 0.0:
            # all-ones start fell in the null space; restart on the largest column
            j = int(np.argmax(np.sum(M * M, axis=0)))
            e = np.zeros(n)
            e[j] = 1.0
            rq, _, converged = _power(M, e, tol)
        value = float(np.sqrt(max(rq, 0.0)))
        if not converged:
            raise NumericalFailureError(
                f"power iteration did not converge in {POWER_MAX_ITER} iterations",
                estimate=value,
                quantity="operator_norm",
            )
    with op._lock:
        op._norm_cache = (float(tol), value)
    return value
