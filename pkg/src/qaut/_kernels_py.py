"""Pure-Python/numpy twin of the compiled ``_kernels`` extension.

Used when the extension is not built or when ``QAUT_PURE_PYTHON`` is set.
Signatures and results match ``_kernels.pyx``.
"""

import math

import numpy as np


def matmul(a, b):
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}")
    return a @ b


def kron(a, b):
    return np.kron(a, b)


def adjoint(a):
    return np.ascontiguousarray(a.conj().T)


def sandwich(k, rho):
    """Return ``k @ rho @ k^H``."""
    n = k.shape[1]
    if rho.shape != (n, n):
        raise ValueError(f"operator is {k.shape[0]}x{n} but state is {rho.shape[0]}x{rho.shape[1]}")
    return k @ rho @ k.conj().T


def sandwich_trace(k, rho):
    n = k.shape[1]
    if rho.shape != (n, n):
        raise ValueError(f"operator is {k.shape[0]}x{n} but state is {rho.shape[0]}x{rho.shape[1]}")
    return float(np.einsum("is,st,it->", k, rho, k.conj()).real)


def _offdiag(w):
    mask = ~np.eye(w.shape[0], dtype=bool)
    return math.sqrt(float(np.sum(np.abs(w[mask]) ** 2)))


def jacobi_eigvalsh(a, tol, max_sweeps=100):
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError("matrix is not square")
    w = np.array(a, dtype=np.complex128, copy=True)
    sweep = 0
    off = _offdiag(w)
    while off > tol and sweep < max_sweeps:
        for p in range(n - 1):
            for q in range(p + 1, n):
                mag = abs(w[p, q])
                g = 100.0 * mag
                if mag == 0.0 or (
                    abs(w[p, p].real) + g == abs(w[p, p].real) and abs(w[q, q].real) + g == abs(w[q, q].real)
                ):
                    w[p, q] = w[q, p] = 0.0
                    continue
                ph = w[p, q] / mag
                wqq = w[q, q]
                w[:, q] *= ph.conjugate()
                w[q, :] *= ph
                w[q, q] = wqq
                w[p, q] = w[q, p] = mag
                theta = (w[q, q].real - w[p, p].real) / (2.0 * mag)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                colp, colq = w[:, p].copy(), w[:, q].copy()
                w[:, p] = c * colp - s * colq
                w[:, q] = s * colp + c * colq
                rowp, rowq = w[p, :].copy(), w[q, :].copy()
                w[p, :] = c * rowp - s * rowq
                w[q, :] = s * rowp + c * rowq
                w[p, q] = w[q, p] = 0.0
        sweep += 1
        off = _offdiag(w)
    vals = np.sort(np.diag(w).real.copy())
    return vals, sweep, off
