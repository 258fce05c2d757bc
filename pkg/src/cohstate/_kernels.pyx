# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping kernels for the hot trajectory loops.

Mirrors ``_kernels_py.py``; dimensions are tiny (d <= ~10) so plain nested
loops beat BLAS dispatch overhead by a wide margin.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def unitary_steps(cnp.ndarray[cnp.complex128_t, ndim=2] u,
                  cnp.ndarray[cnp.complex128_t, ndim=1] psi0,
                  Py_ssize_t n_steps):
    """Iterate psi_{k+1} = U psi_k and return the whole (n_steps+1, d) path."""
    cdef Py_ssize_t d = psi0.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.empty(
        (n_steps + 1, d), dtype=np.complex128)
    cdef double complex[:, :] um = u
    cdef double complex[:, :] om = out
    cdef double complex acc
    cdef Py_ssize_t k, i, jj

    for i in range(d):
        om[0, i] = psi0[i]
    for k in range(n_steps):
        for i in range(d):
            acc = 0
            for jj in range(d):
                acc = acc + um[i, jj] * om[k, jj]
            om[k + 1, i] = acc
    return out


def rk4_linear_steps(cnp.ndarray[cnp.float64_t, ndim=2] a,
                     cnp.ndarray[cnp.float64_t, ndim=1] x0,
                     double dt,
                     Py_ssize_t n_steps):
    """Classic RK4 for the linear flow xdot = A x, fixed step, full path."""
    cdef Py_ssize_t n = x0.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty(
        (n_steps + 1, n), dtype=np.float64)
    cdef double[:, :] am = a
    cdef double[:, :] om = out
    cdef double[::1] k1 = np.empty(n)
    cdef double[::1] k2 = np.empty(n)
    cdef double[::1] k3 = np.empty(n)
    cdef double[::1] k4 = np.empty(n)
    cdef double[::1] tmp = np.empty(n)
    cdef double acc
    cdef Py_ssize_t step, i, jj

    for i in range(n):
        om[0, i] = x0[i]
    for step in range(n_steps):
        for i in range(n):
            acc = 0
            for jj in range(n):
                acc = acc + am[i, jj] * om[step, jj]
            k1[i] = acc
        for i in range(n):
            tmp[i] = om[step, i] + 0.5 * dt * k1[i]
        for i in range(n):
            acc = 0
            for jj in range(n):
                acc = acc + am[i, jj] * tmp[jj]
            k2[i] = acc
        for i in range(n):
            tmp[i] = om[step, i] + 0.5 * dt * k2[i]
        for i in range(n):
            acc = 0
            for jj in range(n):
                acc = acc + am[i, jj] * tmp[jj]
            k3[i] = acc
        for i in range(n):
            tmp[i] = om[step, i] + dt * k3[i]
        for i in range(n):
            acc = 0
            for jj in range(n):
                acc = acc + am[i, jj] * tmp[jj]
            k4[i] = acc
        for i in range(n):
            om[step + 1, i] = om[step, i] + (dt / 6.0) * (
                k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return out
