"""Dense complex-matrix arithmetic.

Matrices are ``numpy.ndarray`` objects of dtype ``complex128``, 2-D, C-ordered
and read-only once they pass through :func:`as_matrix`. The heavy lifting is
delegated to the kernel backend chosen in :mod:`qaut._backend`.
"""

from __future__ import annotations

import numpy as np

from ._backend import kernels
from .errors import DimensionMismatch, NonFiniteEntry, NotHermitian

DEFAULT_TOL = 1e-9

# Above this size BLAS beats the typed loops of the compiled kernels.
SMALL = 8


def as_matrix(value, *, copy: bool = False) -> np.ndarray:
    """Coerce ``value`` to a frozen complex128 matrix.

    One-dimensional input becomes a column vector. Raises
    :class:`NonFiniteEntry` for NaN/inf entries.
    """
    arr = np.array(value, dtype=np.complex128, order="C", copy=True if copy else None)
    if arr is value and arr.flags.writeable:
        arr = arr.copy()
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DimensionMismatch(f"expected a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteEntry("matrix contains NaN or infinite entries")
    arr.flags.writeable = False
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.complex128)
    arr.flags.writeable = False
    return arr


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}")
    if max(a.shape + b.shape) > SMALL:
        return _frozen(a @ b)
    return _frozen(kernels.matmul(a, b))


def kron(a, b) -> np.ndarray:
    return _frozen(kernels.kron(as_matrix(a), as_matrix(b)))


def adjoint(a) -> np.ndarray:
    return _frozen(kernels.adjoint(as_matrix(a)))


def identity(n: int) -> np.ndarray:
    return _frozen(np.eye(n, dtype=np.complex128))


def zeros(rows: int, cols: int) -> np.ndarray:
    return _frozen(np.zeros((rows, cols), dtype=np.complex128))


def trace(a) -> complex:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"trace of non-square {a.shape[0]}x{a.shape[1]} matrix")
    return complex(np.trace(a))


def max_abs_diff(a, b) -> float:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a - b)))


def hermitian_deviation(a) -> float:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"non-square {a.shape[0]}x{a.shape[1]} matrix")
    return float(np.max(np.abs(a - a.conj().T)))


def hermitian_eigenvalues(a, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix in ascending order.

    Uses cyclic Jacobi rotations, iterating until the off-diagonal Frobenius
    mass is at most ``tol``. Raises :class:`NotHermitian` when
    ``max|a - a*| > tol``.
    """
    a = as_matrix(a)
    dev = hermitian_deviation(a)
    if dev > tol:
        raise NotHermitian(dev)
    # symmetrise so rotations act on an exactly Hermitian matrix
    h = np.ascontiguousarray((a + a.conj().T) / 2)
    vals, _sweeps, _off = kernels.jacobi_eigvalsh(h, tol * 1e-3 if tol > 0 else 0.0)
    return vals


def sandwich(k, rho) -> np.ndarray:
    """``k @ rho @ k*`` computed in one kernel call."""
    k, rho = as_matrix(k), as_matrix(rho)
    if max(k.shape) > SMALL and k.shape[1] == rho.shape[0] == rho.shape[1]:
        return _frozen(k @ rho @ k.conj().T)
    return _frozen(kernels.sandwich(k, rho))


def sandwich_trace(k, rho) -> float:
    """Real part of ``tr(k @ rho @ k*)``, equal to ``tr(rho k* k)``."""
    return float(kernels.sandwich_trace(as_matrix(k), as_matrix(rho)))


def basis_vector(n: int, index: int) -> np.ndarray:
    v = np.zeros((n, 1), dtype=np.complex128)
    v[index, 0] = 1.0
    return _frozen(v)


def outer(u, v) -> np.ndarray:
    """``|u><v|`` for column vectors ``u`` and ``v``."""
    u, v = as_matrix(u), as_matrix(v)
    return matmul(u, adjoint(v))
