# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled quasi-triangular Sylvester back-substitution.

Identical recurrence to ``sylvester_py.solve_sylvester_quasi_triangular``;
the per-block 1x1..4x4 systems are solved with partial-pivot Gaussian
elimination in C instead of numpy calls.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs

from ..errors import SpectrumClash

cnp.import_array()

DEF EPS = 2.220446049250313e-16


cdef int _gauss_solve(double* k, double* b, int nn, double clash_scale) except -1:
    """In-place partial-pivot solve of the nn x nn block system."""
    cdef int col, row, piv, j
    cdef double amax, tmp, f
    for col in range(nn):
        piv = col
        amax = fabs(k[col * nn + col])
        for row in range(col + 1, nn):
            if fabs(k[row * nn + col]) > amax:
                amax = fabs(k[row * nn + col])
                piv = row
        if amax <= 1e4 * EPS * clash_scale:
            raise SpectrumClash(
                "coefficient matrices have (near-)opposite eigenvalue pairs; "
                "block system pivot %.3e" % amax
            )
        if piv != col:
            for j in range(nn):
                tmp = k[col * nn + j]
                k[col * nn + j] = k[piv * nn + j]
                k[piv * nn + j] = tmp
            tmp = b[col]
            b[col] = b[piv]
            b[piv] = tmp
        for row in range(col + 1, nn):
            f = k[row * nn + col] / k[col * nn + col]
            if f != 0.0:
                for j in range(col + 1, nn):
                    k[row * nn + j] -= f * k[col * nn + j]
                b[row] -= f * b[col]
    for col in range(nn - 1, -1, -1):
        tmp = b[col]
        for j in range(col + 1, nn):
            tmp -= k[col * nn + j] * b[j]
        b[col] = tmp / k[col * nn + col]
    return 0


def solve_sylvester_quasi_triangular(ta_in, tb_in, c_in, transa=False,
                                     transb=False, sign=1):
    """Back-substitution solve of op(TA) X + sign X op(TB) = C."""
    cdef double[:, ::1] ta = np.ascontiguousarray(ta_in, dtype=np.float64)
    cdef double[:, ::1] tb = np.ascontiguousarray(tb_in, dtype=np.float64)
    cdef Py_ssize_t m = ta.shape[0]
    cdef Py_ssize_t n = tb.shape[0]
    x_arr = np.zeros((m, n))
    if m == 0 or n == 0:
        return x_arr
    cdef double[:, ::1] c = np.ascontiguousarray(c_in, dtype=np.float64)
    cdef double[:, ::1] x = x_arr
    cdef bint ta_t = bool(transa)
    cdef bint tb_t = bool(transb)
    cdef double sgn = 1.0 if sign >= 0 else -1.0

    cdef Py_ssize_t i
    cdef list row_list = []
    i = 0
    while i < m:
        row_list.append(i)
        i += 2 if (i + 1 < m and ta[i + 1, i] != 0.0) else 1
    cdef list col_list = []
    i = 0
    while i < n:
        col_list.append(i)
        i += 2 if (i + 1 < n and tb[i + 1, i] != 0.0) else 1

    cdef long[::1] rows = np.array(row_list + [m], dtype=np.int_)
    cdef long[::1] cols = np.array(col_list + [n], dtype=np.int_)
    cdef Py_ssize_t nrb = len(row_list)
    cdef Py_ssize_t ncb = len(col_list)

    cdef double clash_scale = 1.0
    cdef Py_ssize_t p, q
    for p in range(m):
        for q in range(m):
            if fabs(ta[p, q]) > clash_scale:
                clash_scale = fabs(ta[p, q])
    for p in range(n):
        for q in range(n):
            if fabs(tb[p, q]) > clash_scale:
                clash_scale = fabs(tb[p, q])

    cdef double[16] kmat
    cdef double[4] rhs
    cdef Py_ssize_t ib, jb, i0, i1, j0, j1, ni, nj, r, s, r2, s2, kk, ll, nn
    cdef double acc, aval, bval

    for ib in range(nrb):
        if ta_t:
            i0 = rows[ib]
            i1 = rows[ib + 1]
        else:
            i0 = rows[nrb - 1 - ib]
            i1 = rows[nrb - ib]
        ni = i1 - i0
        for jb in range(ncb):
            if tb_t:
                j0 = cols[ncb - 1 - jb]
                j1 = cols[ncb - jb]
            else:
                j0 = cols[jb]
                j1 = cols[jb + 1]
            nj = j1 - j0
            nn = ni * nj
            # rhs = C block minus already-solved couplings
            for s in range(nj):
                for r in range(ni):
                    acc = c[i0 + r, j0 + s]
                    if ta_t:
                        for kk in range(i0):
                            acc -= ta[kk, i0 + r] * x[kk, j0 + s]
                    else:
                        for kk in range(i1, m):
                            acc -= ta[i0 + r, kk] * x[kk, j0 + s]
                    if tb_t:
                        for ll in range(j1, n):
                            acc -= sgn * x[i0 + r, ll] * tb[j0 + s, ll]
                    else:
                        for ll in range(j0):
                            acc -= sgn * x[i0 + r, ll] * tb[ll, j0 + s]
                    rhs[s * ni + r] = acc
            # block system: (I (x) a_op + sign * b_op^T (x) I) vec(Y) = rhs
            for s in range(nj):
                for r in range(ni):
                    for s2 in range(nj):
                        for r2 in range(ni):
                            aval = 0.0
                            if s2 == s:
                                aval = ta[i0 + r2, i0 + r] if ta_t else ta[i0 + r, i0 + r2]
                            bval = 0.0
                            if r2 == r:
                                bval = tb[j0 + s, j0 + s2] if tb_t else tb[j0 + s2, j0 + s]
                            kmat[(s * ni + r) * nn + (s2 * ni + r2)] = aval + sgn * bval
            _gauss_solve(&kmat[0], &rhs[0], nn, clash_scale)
            for s in range(nj):
                for r in range(ni):
                    x[i0 + r, j0 + s] = rhs[s * ni + r]
    return x_arr
