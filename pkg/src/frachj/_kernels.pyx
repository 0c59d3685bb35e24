# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled history-sum kernels (see ``_kernels_py`` for the reference)."""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport pow, log1p, expm1, fabs, sqrt, tgamma

cnp.import_array()

BACKEND = "cython"

cdef int _num_threads = 1


def set_num_threads(int n):
    global _num_threads
    _num_threads = n if n > 0 else 1


cdef inline double _cell_weight(double tj, double left, double right,
                                double alpha, double g2a) nogil:
    cdef double s0 = tj - left
    cdef double s1 = tj - right
    cdef double h = right - left
    cdef double num
    if s1 <= 0.0:
        num = pow(s0, 1.0 - alpha)
    else:
        num = pow(s0, 1.0 - alpha) * -expm1((1.0 - alpha) * log1p(-h / s0))
    return num / (g2a * h)


def l1_weights_row(const double[::1] nodes, Py_ssize_t j, double alpha):
    cdef double g2a = tgamma(2.0 - alpha)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(j)
    cdef double[::1] w = out
    cdef Py_ssize_t i
    for i in range(j):
        w[i] = _cell_weight(nodes[j], nodes[i], nodes[i + 1], alpha, g2a)
    return out


def ordered_dot(const double[::1] w, const double[::1] x):
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(w.shape[0]):
        acc += w[i] * x[i]
    return acc


def l1_apply_all(nodes_in, values_in, double alpha):
    cdef const double[::1] nodes = np.ascontiguousarray(nodes_in, dtype=np.float64)
    cdef const double[::1] vals = np.ascontiguousarray(values_in, dtype=np.float64)
    cdef Py_ssize_t n = nodes.shape[0]
    cdef double g2a = tgamma(2.0 - alpha)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_arr = np.zeros(n)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double acc
    for j in range(1, n):
        acc = 0.0
        for i in range(j):
            acc += _cell_weight(nodes[j], nodes[i], nodes[i + 1], alpha, g2a) \
                * (vals[i + 1] - vals[i])
        out[j] = acc
    return out_arr


def l1_history(const double[::1] nodes, Py_ssize_t j, double alpha, increments):
    """``sum_{i < j-1} w[j, i] * increments[i]`` (all but the last cell)."""
    shape = increments.shape[1:]
    cdef Py_ssize_t K = increments.shape[0]
    cdef const double[:, ::1] inc = np.ascontiguousarray(increments, dtype=np.float64).reshape(K, -1)
    cdef Py_ssize_t n = inc.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_arr = np.zeros(n)
    cdef double[::1] out = out_arr
    if j < 2:
        return out_arr.reshape(shape)
    cdef double g2a = tgamma(2.0 - alpha)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w_arr = np.empty(j - 1)
    cdef double[::1] w = w_arr
    cdef Py_ssize_t i, x, blk, x0, x1
    cdef Py_ssize_t nblk = (n + 63) // 64
    for i in range(j - 1):
        w[i] = _cell_weight(nodes[j], nodes[i], nodes[i + 1], alpha, g2a)
    # row-major traversal in column blocks; per-column order stays i = 0, 1, ...
    for blk in prange(nblk, nogil=True, num_threads=_num_threads, schedule="static"):
        x0 = blk * 64
        x1 = x0 + 64
        if x1 > n:
            x1 = n
        for i in range(j - 1):
            for x in range(x0, x1):
                out[x] += w[i] * inc[i, x]
    return out_arr.reshape(shape)


cdef inline void _abel_pq(double t, double left, double right, double alpha,
                          double* p, double* q) nogil:
    cdef double s0 = t - left
    cdef double h = right - left
    cdef double a0, a1, lr, qq
    if t - right <= 0.0:
        a0 = 1.0 / alpha
        a1 = 1.0 / (alpha + 1.0)
    else:
        lr = log1p(-h / s0)
        a0 = -expm1(alpha * lr) / alpha
        a1 = -expm1((alpha + 1.0) * lr) / (alpha + 1.0)
    qq = pow(s0, alpha + 1.0) * (a0 - a1) / h
    p[0] = pow(s0, alpha) * a0 - qq
    q[0] = qq


cdef double _abel_end(const double[::1] z, const double[::1] fz,
                      Py_ssize_t end, double alpha) nogil:
    cdef double acc = 0.0
    cdef double p, q
    cdef Py_ssize_t i
    for i in range(end):
        _abel_pq(z[end], z[i], z[i + 1], alpha, &p, &q)
        acc += p * fz[i] + q * fz[i + 1]
    return acc


def abel_at_end(z_in, fz_in, double alpha):
    cdef const double[::1] z = np.ascontiguousarray(z_in, dtype=np.float64)
    cdef const double[::1] fz = np.ascontiguousarray(fz_in, dtype=np.float64)
    if z.shape[0] < 2:
        return 0.0
    return _abel_end(z, fz, z.shape[0] - 1, alpha)


def abel_all(nodes_in, fvals_in, double alpha):
    cdef const double[::1] z = np.ascontiguousarray(nodes_in, dtype=np.float64)
    cdef const double[::1] fz = np.ascontiguousarray(fvals_in, dtype=np.float64)
    cdef Py_ssize_t n = z.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_arr = np.zeros(n)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t j
    for j in prange(1, n, nogil=True, num_threads=_num_threads, schedule="dynamic"):
        out[j] = _abel_end(z, fz, j, alpha)
    return out_arr


cdef inline double _local_1d(double r, double d, double a, double m, double h,
                             double nmin) nogil:
    cdef double u = r / d
    cdef double p, phi, dphi, u_new
    cdef int it
    if u <= nmin:
        return u
    if m == 1.0:
        return (r + a * nmin / h) / (d + a / h)
    for it in range(100):
        p = (u - nmin) / h
        phi = d * u + a * pow(p, m) - r
        dphi = d + a * m * pow(p, m - 1.0) / h
        u_new = u - phi / dphi
        if u_new <= nmin:
            u_new = 0.5 * (u + nmin)
        if fabs(u_new - u) <= 1e-15 * (1.0 + fabs(u)):
            return u_new
        u = u_new
    return u


def sweep_1d(const double[::1] rhs, double d, const double[::1] a, double m,
             double h, double[::1] u, double tol, int max_sweeps):
    """Gauss-Seidel sweeps for ``d u + a ((u - min nbr)^+ / h)^m = rhs``."""
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t k, i
    cdef int sweep
    cdef double change, left, right, nmin, new, diff
    for sweep in range(1, max_sweeps + 1):
        change = 0.0
        for k in range(n):
            i = k if sweep % 2 == 1 else n - 1 - k
            left = u[i - 1] if i > 0 else u[n - 1]
            right = u[i + 1] if i < n - 1 else u[0]
            nmin = left if left < right else right
            new = _local_1d(rhs[i], d, a[i], m, h, nmin)
            diff = fabs(new - u[i])
            if diff > change:
                change = diff
            u[i] = new
        if change <= tol:
            return sweep
    return -1


cdef inline double _local_2d(double r, double d, double a, double m, double h,
                             double nx, double ny) nogil:
    cdef double u = r / d
    cdef double lo = nx if nx < ny else ny
    cdef double px, py, g, phi, dphi, dg, u_new
    cdef int it
    if u <= lo:
        return u
    for it in range(200):
        px = (u - nx) / h if u > nx else 0.0
        py = (u - ny) / h if u > ny else 0.0
        g = sqrt(px * px + py * py)
        phi = d * u + a * pow(g, m) - r
        if g > 0.0:
            dg = (px + py) / (h * g)
            dphi = d + a * m * pow(g, m - 1.0) * dg
        else:
            dphi = d
        u_new = u - phi / dphi
        if u_new <= lo:
            u_new = 0.5 * (u + lo)
        if fabs(u_new - u) <= 1e-15 * (1.0 + fabs(u)):
            return u_new
        u = u_new
    return u


def sweep_2d(const double[:, ::1] rhs, double d, const double[:, ::1] a, double m,
             double h, double[:, ::1] u, double tol, int max_sweeps):
    cdef Py_ssize_t n0 = u.shape[0]
    cdef Py_ssize_t n1 = u.shape[1]
    cdef Py_ssize_t ki, kj, i, j, im, ip, jm, jp
    cdef int sweep, mode
    cdef double change, nx, ny, new, diff
    for sweep in range(1, max_sweeps + 1):
        change = 0.0
        mode = (sweep - 1) % 4
        for ki in range(n0):
            i = ki if (mode == 0 or mode == 3) else n0 - 1 - ki
            im = i - 1 if i > 0 else n0 - 1
            ip = i + 1 if i < n0 - 1 else 0
            for kj in range(n1):
                j = kj if (mode == 0 or mode == 2) else n1 - 1 - kj
                jm = j - 1 if j > 0 else n1 - 1
                jp = j + 1 if j < n1 - 1 else 0
                nx = u[im, j] if u[im, j] < u[ip, j] else u[ip, j]
                ny = u[i, jm] if u[i, jm] < u[i, jp] else u[i, jp]
                new = _local_2d(rhs[i, j], d, a[i, j], m, h, nx, ny)
                diff = fabs(new - u[i, j])
                if diff > change:
                    change = diff
                u[i, j] = new
        if change <= tol:
            return sweep
    return -1


def holder_max(states, const double[::1] nodes, double alpha):
    """``max_{p<q, x} |U[q, x] - U[p, x]| / (t_q - t_p)^alpha``."""
    cdef Py_ssize_t K = states.shape[0]
    cdef const double[:, ::1] U = np.ascontiguousarray(states, dtype=np.float64).reshape(K, -1)
    cdef Py_ssize_t n = U.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] best_arr = np.zeros(K)
    cdef double[::1] best = best_arr
    cdef Py_ssize_t p, q, x
    cdef double mx, diff, ratio, b
    for p in prange(K - 1, nogil=True, num_threads=_num_threads, schedule="dynamic"):
        b = 0.0
        for q in range(p + 1, K):
            mx = 0.0
            for x in range(n):
                diff = fabs(U[q, x] - U[p, x])
                if diff > mx:
                    mx = diff
            ratio = mx / pow(nodes[q] - nodes[p], alpha)
            if ratio > b:
                b = ratio
        best[p] = b
    return float(best_arr.max()) if K > 1 else 0.0
