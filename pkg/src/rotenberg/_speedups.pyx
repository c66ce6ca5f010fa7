# cython: language_level=3
"""Compiled grid kernels (hot inner loops of the extension sweep, the
transport evaluation and the adjoint steps).

The numpy twin in ``_kernels_py`` is the reference implementation; both
expose identical signatures and accumulate source terms in the same order
so results agree to rounding.  Points within one strip level and grid
columns are independent, so the outer loops run under OpenMP.
"""

import numpy as np

cimport cython
cimport numpy as cnp
cimport openmp
from cython.parallel cimport prange
from libc.math cimport floor, isnan

BACKEND_NAME = "compiled"


cdef inline void _set_threads(int num_threads) noexcept:
    if num_threads > 0:
        openmp.omp_set_num_threads(num_threads)


cdef inline double _interp_clamped(const double* col, Py_ssize_t n, double pos) noexcept nogil:
    cdef Py_ssize_t i0
    cdef double th
    if pos <= 0.0:
        return col[0]
    if pos >= n - 1:
        return col[n - 1]
    i0 = <Py_ssize_t>floor(pos)
    th = pos - i0
    return col[i0] + th * (col[i0 + 1] - col[i0])


cdef inline double _ext_read_masked(const double* ecol, const int* scol, Py_ssize_t m,
                                    double pos, int level) noexcept nogil:
    # reads during the sweep: strips >= level are not data yet; clamp to the
    # right bracket, which is always one strip shallower than the target
    cdef Py_ssize_t r0
    cdef double th
    if pos >= m - 1:
        return ecol[m - 1]
    if pos <= 0.0:
        r0 = 0
        th = 0.0
    else:
        r0 = <Py_ssize_t>floor(pos)
        th = pos - r0
    if scol[r0] > level - 1:
        return ecol[r0 + 1]
    return ecol[r0] + th * (ecol[r0 + 1] - ecol[r0])


cdef inline double _ext_read_nan(const double* ecol, Py_ssize_t m, double pos) noexcept nogil:
    # post-construction reads: NaN marks cells outside the computed region
    cdef Py_ssize_t r0
    cdef double th, left, right
    if pos <= 0.0:
        r0 = 0
        th = 0.0
    elif pos >= m - 1:
        r0 = m - 2
        th = 1.0
    else:
        r0 = <Py_ssize_t>floor(pos)
        th = pos - r0
    left = ecol[r0]
    right = ecol[r0 + 1]
    if isnan(left):
        return right
    if isnan(right):
        return left
    return left + th * (right - left)


@cython.boundscheck(False)
@cython.wraparound(False)
def sweep_level(const double[:, ::1] omega, double[:, ::1] ext, const int[:, ::1] strip,
                double dx, long level, const cnp.intp_t[:] cc, const cnp.intp_t[:] rr,
                const double[:] nodes, coef_obj, double q, int num_threads=0):
    cdef Py_ssize_t npts = cc.shape[0]
    cdef Py_ssize_t n_v = omega.shape[0]
    cdef Py_ssize_t n_x = omega.shape[1]
    cdef Py_ssize_t m = ext.shape[1]
    cdef bint have_p = coef_obj is not None
    cdef const double[:, ::1] coef = coef_obj if have_p else omega
    cdef Py_ssize_t k, j, c, r
    cdef int lev = <int>level
    cdef double x, v, acc, y, val, xm05
    xm05 = (m - 0.5) * dx
    _set_threads(num_threads)
    with nogil:
        for k in prange(npts, schedule='static'):
            c = cc[k]
            r = rr[k]
            x = -(m - r - 0.5) * dx
            v = nodes[c]
            acc = 0.0
            if q != 0.0:
                y = 1.0 + x
                if y > 0.0:
                    acc = acc + q * _interp_clamped(&omega[c, 0], n_x, y / dx - 0.5)
                else:
                    acc = acc + q * _ext_read_masked(&ext[c, 0], &strip[c, 0], m,
                                                     (y + xm05) / dx, lev)
            if have_p:
                for j in range(n_v):
                    y = 1.0 + x * nodes[j] / v
                    if y > 0.0:
                        val = _interp_clamped(&omega[j, 0], n_x, y / dx - 0.5)
                    else:
                        val = _ext_read_masked(&ext[j, 0], &strip[j, 0], m,
                                               (y + xm05) / dx, lev)
                    acc = acc + coef[j, c] * val
            ext[c, r] = acc


@cython.boundscheck(False)
@cython.wraparound(False)
def eval_blocks(const double[:, ::1] omega, const double[:, ::1] ext, double dx,
                y_obj, cols_obj, int num_threads=0):
    y_arr = np.ascontiguousarray(np.asarray(y_obj, dtype=np.float64).ravel())
    cols_arr = np.ascontiguousarray(np.asarray(cols_obj).ravel().astype(np.intp))
    cdef double[::1] y = y_arr
    cdef cnp.intp_t[::1] cols = cols_arr
    cdef Py_ssize_t npts = y.shape[0]
    cdef Py_ssize_t n_x = omega.shape[1]
    cdef Py_ssize_t m = ext.shape[1]
    out_arr = np.empty(npts)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t k, c
    cdef double yy, xm05
    xm05 = (m - 0.5) * dx
    _set_threads(num_threads)
    with nogil:
        for k in prange(npts, schedule='static'):
            yy = y[k]
            c = cols[k]
            if yy > 0.0:
                out[k] = _interp_clamped(&omega[c, 0], n_x, yy / dx - 0.5)
            else:
                out[k] = _ext_read_nan(&ext[c, 0], m, (yy + xm05) / dx)
    return out_arr.reshape(np.shape(y_obj))


@cython.boundscheck(False)
@cython.wraparound(False)
def transport_apply(const double[:, ::1] omega, const double[:, ::1] ext, double dx,
                    double t, const double[:] nodes, int num_threads=0):
    cdef Py_ssize_t n_v = omega.shape[0]
    cdef Py_ssize_t n_x = omega.shape[1]
    cdef Py_ssize_t m = ext.shape[1]
    out_arr = np.empty((n_v, n_x))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t c, i
    cdef double y, xm05
    xm05 = (m - 0.5) * dx
    _set_threads(num_threads)
    with nogil:
        for c in prange(n_v, schedule='static'):
            for i in range(n_x):
                y = (i + 0.5) * dx - t * nodes[c]
                if y > 0.0:
                    out[c, i] = _interp_clamped(&omega[c, 0], n_x, y / dx - 0.5)
                else:
                    out[c, i] = _ext_read_nan(&ext[c, 0], m, (y + xm05) / dx)
    return out_arr


@cython.boundscheck(False)
@cython.wraparound(False)
def small_t_apply(const double[:, ::1] omega, double dx, double t, const double[:] nodes,
                  const double[:] weights, const double[:, ::1] kmat, double p, double q,
                  int num_threads=0):
    cdef Py_ssize_t n_v = omega.shape[0]
    cdef Py_ssize_t n_x = omega.shape[1]
    out_arr = np.empty((n_v, n_x))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t c, i, j
    cdef double x, v, y0, acc, ym
    _set_threads(num_threads)
    with nogil:
        for c in prange(n_v, schedule='dynamic'):
            v = nodes[c]
            for i in range(n_x):
                x = (i + 0.5) * dx
                y0 = x - t * v
                if y0 > 0.0:
                    out[c, i] = _interp_clamped(&omega[c, 0], n_x, y0 / dx - 0.5)
                else:
                    acc = 0.0
                    if q != 0.0:
                        acc = acc + q * _interp_clamped(&omega[c, 0], n_x,
                                                        (1.0 + y0) / dx - 0.5)
                    if p != 0.0:
                        for j in range(n_v):
                            ym = 1.0 + (x / v - t) * nodes[j]
                            acc = acc + (p * weights[j] * nodes[j]) * kmat[j, c] / v * \
                                _interp_clamped(&omega[j, 0], n_x, ym / dx - 0.5)
                    out[c, i] = acc
    return out_arr


@cython.boundscheck(False)
@cython.wraparound(False)
def dual_small_step(const double[:, ::1] phi, double dx, double t, const double[:] nodes,
                    const double[:] weights, const double[:, ::1] kmat, double p, double q,
                    int num_threads=0):
    cdef Py_ssize_t n_v = phi.shape[0]
    cdef Py_ssize_t n_x = phi.shape[1]
    out_arr = np.empty((n_v, n_x))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t c, i, j
    cdef double v, z, zz, acc
    _set_threads(num_threads)
    with nogil:
        for c in prange(n_v, schedule='dynamic'):
            v = nodes[c]
            for i in range(n_x):
                z = (i + 0.5) * dx + t * v
                if z < 1.0:
                    out[c, i] = _interp_clamped(&phi[c, 0], n_x, z / dx - 0.5)
                else:
                    zz = z - 1.0
                    acc = 0.0
                    if q != 0.0:
                        acc = acc + q * _interp_clamped(&phi[c, 0], n_x, zz / dx - 0.5)
                    if p != 0.0:
                        for j in range(n_v):
                            acc = acc + (p * weights[j]) * kmat[c, j] * \
                                _interp_clamped(&phi[j, 0], n_x,
                                                (zz / v) * nodes[j] / dx - 0.5)
                    out[c, i] = acc
    return out_arr
