# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled kernels: compact stencils, weighted history sums, batched Thomas solves.

Floating-point behaviour must match ``py_backend.py`` exactly (same expressions,
same order, compiled with FMA contraction disabled).
"""

import numpy as np

from libc.math cimport fabs, isfinite

DEF PIVOT_RTOL = 1e-14


cdef void _compact_x_into(const double[:, ::1] v, double[:, ::1] out) noexcept:
    cdef Py_ssize_t nx = v.shape[0], ny = v.shape[1], i, j
    for j in range(ny):
        out[0, j] = v[0, j]
        out[nx - 1, j] = v[nx - 1, j]
    for i in range(1, nx - 1):
        for j in range(ny):
            out[i, j] = (v[i - 1, j] + 10.0 * v[i, j] + v[i + 1, j]) / 12.0


cdef void _compact_y_into(const double[:, ::1] v, double[:, ::1] out) noexcept:
    cdef Py_ssize_t nx = v.shape[0], ny = v.shape[1], i, j
    for i in range(nx):
        out[i, 0] = v[i, 0]
        out[i, ny - 1] = v[i, ny - 1]
        for j in range(1, ny - 1):
            out[i, j] = (v[i, j - 1] + 10.0 * v[i, j] + v[i, j + 1]) / 12.0


def compact_x(const double[:, ::1] v):
    out_arr = np.empty((v.shape[0], v.shape[1]))
    cdef double[:, ::1] out = out_arr
    _compact_x_into(v, out)
    return out_arr


def compact_y(const double[:, ::1] v):
    out_arr = np.empty((v.shape[0], v.shape[1]))
    cdef double[:, ::1] out = out_arr
    _compact_y_into(v, out)
    return out_arr


def second_diff_x(const double[:, ::1] v, double hx):
    cdef Py_ssize_t nx = v.shape[0], ny = v.shape[1], i, j
    cdef double h2 = hx * hx
    out_arr = np.empty((nx, ny))
    cdef double[:, ::1] out = out_arr
    for j in range(ny):
        out[0, j] = 0.0
        out[nx - 1, j] = 0.0
    for i in range(1, nx - 1):
        for j in range(ny):
            out[i, j] = (v[i + 1, j] - 2.0 * v[i, j] + v[i - 1, j]) / h2
    return out_arr


def second_diff_y(const double[:, ::1] v, double hy):
    cdef Py_ssize_t nx = v.shape[0], ny = v.shape[1], i, j
    cdef double h2 = hy * hy
    out_arr = np.empty((nx, ny))
    cdef double[:, ::1] out = out_arr
    for i in range(nx):
        out[i, 0] = 0.0
        out[i, ny - 1] = 0.0
        for j in range(1, ny - 1):
            out[i, j] = (v[i, j + 1] - 2.0 * v[i, j] + v[i, j - 1]) / h2
    return out_arr


def weighted_compact_sum(list fields, const double[::1] coeffs):
    cdef Py_ssize_t nk = coeffs.shape[0]
    cdef const double[:, ::1] f0 = fields[0]
    cdef Py_ssize_t nx = f0.shape[0], ny = f0.shape[1], i, j, k
    total_arr = np.zeros((nx, ny))
    cdef double[:, ::1] total = total_arr
    cdef double[:, ::1] comp = np.zeros((nx, ny))
    cdef double[:, ::1] buf1 = np.empty((nx, ny))
    cdef double[:, ::1] buf2 = np.empty((nx, ny))
    cdef const double[:, ::1] f
    cdef double ck, term, y, t
    for k in range(nk):
        f = fields[k]
        _compact_x_into(f, buf1)
        _compact_y_into(buf1, buf2)
        ck = coeffs[k]
        for i in range(nx):
            for j in range(ny):
                term = ck * buf2[i, j]
                y = term - comp[i, j]
                t = total[i, j] + y
                comp[i, j] = (t - total[i, j]) - y
                total[i, j] = t
    return total_arr


def thomas_solve_many(const double[::1] sub, const double[::1] diag,
                      const double[::1] sup, const double[:, ::1] rhs):
    cdef Py_ssize_t n = diag.shape[0], m = rhs.shape[1], j, q
    cdef double den, scale
    cp_arr = np.empty(n - 1 if n > 1 else 0)
    dp_arr = np.empty((n, m))
    cdef double[::1] cp = cp_arr
    cdef double[:, ::1] dp = dp_arr

    den = diag[0]
    scale = fabs(diag[0]) + (fabs(sup[0]) if n > 1 else 0.0)
    if not isfinite(den) or fabs(den) <= PIVOT_RTOL * scale:
        raise ZeroDivisionError(f"near-zero pivot at row 0: {den!r}")
    if n > 1:
        cp[0] = sup[0] / den
    for q in range(m):
        dp[0, q] = rhs[0, q] / den
    for j in range(1, n):
        den = diag[j] - sub[j - 1] * cp[j - 1]
        scale = fabs(diag[j]) + fabs(sub[j - 1]) + (fabs(sup[j]) if j < n - 1 else 0.0)
        if not isfinite(den) or fabs(den) <= PIVOT_RTOL * scale:
            raise ZeroDivisionError(f"near-zero pivot at row {j}: {den!r}")
        if j < n - 1:
            cp[j] = sup[j] / den
        for q in range(m):
            dp[j, q] = (rhs[j, q] - sub[j - 1] * dp[j - 1, q]) / den
    for j in range(n - 2, -1, -1):
        for q in range(m):
            dp[j, q] = dp[j, q] - cp[j] * dp[j + 1, q]
    return dp_arr
