# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for small dense complex matrices.

Every function takes C-contiguous ``complex128`` 2-D arrays and returns new
arrays; inputs are never modified. The pure-Python twin lives in
``_kernels_py`` and must stay numerically interchangeable with this file.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, hypot

cnp.import_array()

ctypedef double complex cplx


def matmul(const cplx[:, ::1] a, const cplx[:, ::1] b):
    cdef Py_ssize_t n = a.shape[0], m = a.shape[1], p = b.shape[1]
    cdef Py_ssize_t i, j, k
    cdef cplx aik
    if m != b.shape[0]:
        raise ValueError(f"cannot multiply {n}x{m} by {b.shape[0]}x{p}")
    out = np.zeros((n, p), dtype=np.complex128)
    cdef cplx[:, ::1] c = out
    for i in range(n):
        for k in range(m):
            aik = a[i, k]
            if aik == 0:
                continue
            for j in range(p):
                c[i, j] = c[i, j] + aik * b[k, j]
    return out


def kron(const cplx[:, ::1] a, const cplx[:, ::1] b):
    cdef Py_ssize_t ar = a.shape[0], ac = a.shape[1]
    cdef Py_ssize_t br = b.shape[0], bc = b.shape[1]
    cdef Py_ssize_t i, j, k, l
    cdef cplx aij
    out = np.zeros((ar * br, ac * bc), dtype=np.complex128)
    cdef cplx[:, ::1] c = out
    for i in range(ar):
        for j in range(ac):
            aij = a[i, j]
            for k in range(br):
                for l in range(bc):
                    c[i * br + k, j * bc + l] = aij * b[k, l]
    return out


def adjoint(const cplx[:, ::1] a):
    cdef Py_ssize_t n = a.shape[0], m = a.shape[1], i, j
    out = np.empty((m, n), dtype=np.complex128)
    cdef cplx[:, ::1] c = out
    for i in range(n):
        for j in range(m):
            c[j, i] = a[i, j].conjugate()
    return out


def sandwich(const cplx[:, ::1] k, const cplx[:, ::1] rho):
    """Return ``k @ rho @ k^H`` without materialising ``k^H``."""
    cdef Py_ssize_t r = k.shape[0], n = k.shape[1], i, j, s, t
    cdef cplx acc
    if rho.shape[0] != n or rho.shape[1] != n:
        raise ValueError(f"operator is {r}x{n} but state is {rho.shape[0]}x{rho.shape[1]}")
    tmp = np.zeros((r, n), dtype=np.complex128)
    cdef cplx[:, ::1] kr = tmp
    for i in range(r):
        for s in range(n):
            if k[i, s] == 0:
                continue
            for t in range(n):
                kr[i, t] = kr[i, t] + k[i, s] * rho[s, t]
    out = np.empty((r, r), dtype=np.complex128)
    cdef cplx[:, ::1] c = out
    for i in range(r):
        for j in range(r):
            acc = 0
            for t in range(n):
                acc = acc + kr[i, t] * k[j, t].conjugate()
            c[i, j] = acc
    return out


def sandwich_trace(const cplx[:, ::1] k, const cplx[:, ::1] rho):
    """Return the real part of ``tr(k @ rho @ k^H)``."""
    cdef Py_ssize_t r = k.shape[0], n = k.shape[1], i, s, t
    cdef cplx acc = 0, row
    if rho.shape[0] != n or rho.shape[1] != n:
        raise ValueError(f"operator is {r}x{n} but state is {rho.shape[0]}x{rho.shape[1]}")
    for i in range(r):
        for t in range(n):
            if k[i, t] == 0:
                continue
            row = 0
            for s in range(n):
                row = row + k[i, s] * rho[s, t]
            acc = acc + row * k[i, t].conjugate()
    return acc.real


def jacobi_eigvalsh(const cplx[:, ::1] a, double tol, int max_sweeps=100):
    """Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.

    Each rotation first removes the phase of the pivot ``a[p, q]`` with a
    diagonal unitary and then applies a real Givens rotation. Iteration stops
    once the Frobenius norm of the off-diagonal part is at most ``tol``.
    Returns ``(eigenvalues ascending, sweeps used, final off-diagonal norm)``.
    """
    cdef Py_ssize_t n = a.shape[0], p, q, k
    cdef int sweep = 0
    cdef double off, mag, g, theta, t, c, s
    cdef cplx ph, akp, akq, apk, aqk
    if a.shape[1] != n:
        raise ValueError("matrix is not square")
    work = np.array(a, dtype=np.complex128, order="C", copy=True)
    cdef cplx[:, ::1] w = work
    off = _offdiag(w, n)
    while off > tol and sweep < max_sweeps:
        for p in range(n - 1):
            for q in range(p + 1, n):
                mag = hypot(w[p, q].real, w[p, q].imag)
                g = 100.0 * mag
                if mag == 0.0 or (
                    fabs(w[p, p].real) + g == fabs(w[p, p].real)
                    and fabs(w[q, q].real) + g == fabs(w[q, q].real)
                ):
                    w[p, q] = 0
                    w[q, p] = 0
                    continue
                ph = w[p, q] / mag
                for k in range(n):
                    if k != q:
                        w[k, q] = w[k, q] * ph.conjugate()
                        w[q, k] = w[q, k] * ph
                w[p, q] = mag
                w[q, p] = mag
                theta = (w[q, q].real - w[p, p].real) / (2.0 * mag)
                if fabs(theta) > 1e150:
                    t = 0.5 / theta
                elif theta >= 0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = w[k, p]
                    akq = w[k, q]
                    w[k, p] = c * akp - s * akq
                    w[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = w[p, k]
                    aqk = w[q, k]
                    w[p, k] = c * apk - s * aqk
                    w[q, k] = s * apk + c * aqk
                w[p, q] = 0
                w[q, p] = 0
        sweep += 1
        off = _offdiag(w, n)
    vals = np.empty(n, dtype=np.float64)
    cdef double[::1] v = vals
    for k in range(n):
        v[k] = w[k, k].real
    vals.sort()
    return vals, sweep, off


cdef double _offdiag(cplx[:, ::1] w, Py_ssize_t n):
    cdef double acc = 0.0, re, im
    cdef Py_ssize_t i, j
    for i in range(n):
        for j in range(n):
            if i != j:
                re = w[i, j].real
                im = w[i, j].imag
                acc += re * re + im * im
    return sqrt(acc)
