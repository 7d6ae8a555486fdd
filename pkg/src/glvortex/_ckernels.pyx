# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: assignment with duals and max-min evaluation of zeta.

The pure-Python twins live in ``_pykernels``; both must return identical
results up to floating-point summation order.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


def hungarian(double[:, ::1] cost):
    """Min-cost perfect matching on a square matrix by shortest augmenting paths.

    Args:
        cost: (n, n) C-contiguous cost matrix.

    Returns:
        col_of_row: (n,) int64 array, row ``i`` is matched to column ``col_of_row[i]``.
        u: (n,) row potentials.
        v: (n,) column potentials, with ``cost[i, j] - u[i] - v[j] >= 0`` and
            equality on matched pairs.
    """
    cdef Py_ssize_t n = cost.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] u_arr = np.zeros(n + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v_arr = np.zeros(n + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] minv_arr = np.empty(n + 1)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] p_arr = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] way_arr = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] used_arr = np.zeros(n + 1, dtype=np.uint8)
    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr
    cdef double[::1] minv = minv_arr
    cdef cnp.int64_t[::1] p = p_arr
    cdef cnp.int64_t[::1] way = way_arr
    cdef unsigned char[::1] used = used_arr
    cdef Py_ssize_t i, j, j0, j1, i0
    cdef double delta, cur
    if cost.shape[1] != n:
        raise ValueError("cost matrix must be square")
    with nogil:
        for i in range(1, n + 1):
            p[0] = i
            j0 = 0
            for j in range(n + 1):
                minv[j] = INFINITY
                used[j] = 0
            while True:
                used[j0] = 1
                i0 = p[j0]
                delta = INFINITY
                j1 = 0
                for j in range(1, n + 1):
                    if not used[j]:
                        cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                        if cur < minv[j]:
                            minv[j] = cur
                            way[j] = j0
                        if minv[j] < delta:
                            delta = minv[j]
                            j1 = j
                for j in range(n + 1):
                    if used[j]:
                        u[p[j]] += delta
                        v[j] -= delta
                    else:
                        minv[j] -= delta
                j0 = j1
                if p[j0] == 0:
                    break
            while True:
                j1 = way[j0]
                p[j0] = p[j1]
                j0 = j1
                if j0 == 0:
                    break
    col_of_row = np.empty(n, dtype=np.int64)
    for j in range(1, n + 1):
        col_of_row[p_arr[j] - 1] = j - 1
    return col_of_row, u_arr[1:].copy(), v_arr[1:].copy()


cdef inline void _zeta_point(double x0, double x1, double x2,
                             double[:, ::1] P, double[:, :, ::1] nu,
                             double[::1] zstar, double[::1] dp, double dx,
                             int boundary, double* val, Py_ssize_t* ai,
                             Py_ssize_t* aj, int* branch) noexcept nogil:
    cdef Py_ssize_t k = P.shape[0]
    cdef Py_ssize_t m = nu.shape[1]
    cdef Py_ssize_t i, j, bj
    cdef double best = -INFINITY
    cdef double mx, d, di, r0, r1, r2
    cdef int br
    for i in range(k):
        r0 = P[i, 0] - x0
        r1 = P[i, 1] - x1
        r2 = P[i, 2] - x2
        mx = -INFINITY
        bj = 0
        for j in range(m):
            d = r0 * nu[i, j, 0] + r1 * nu[i, j, 1] + r2 * nu[i, j, 2]
            if d > mx:
                mx = d
                bj = j
        di = mx
        br = 0
        if boundary:
            if dp[i] - dx > di:
                di = dp[i] - dx
                br = 1
            if dp[i] + dx < di:
                di = dp[i] + dx
                br = 2
        if zstar[i] - di > best:
            best = zstar[i] - di
            ai[0] = i
            aj[0] = bj
            branch[0] = br
    val[0] = best


def zeta_eval(double[:, ::1] x, double[:, ::1] P, double[:, :, ::1] nu,
              double[::1] zstar, double[::1] dp, double[::1] dx, int boundary):
    """Evaluate the max-min function zeta and its active piece.

    Args:
        x: (N, 3) query points.
        P: (k, 3) positive points.
        nu: (k, m, 3) unit directions (zero rows where p_i equals a_j).
        zstar: (k,) potentials at the positive points.
        dp: (k,) boundary distances of the positive points (boundary variant).
        dx: (N,) boundary distances of the query points (boundary variant).
        boundary: 1 for the boundary variant, 0 for the Euclidean one.

    Returns:
        values (N,), active i (N,), active j (N,), branch code (N,).
    """
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t q
    vals = np.empty(n)
    ai_arr = np.zeros(n, dtype=np.int64)
    aj_arr = np.zeros(n, dtype=np.int64)
    br_arr = np.zeros(n, dtype=np.int32)
    cdef double[::1] vv = vals
    cdef cnp.int64_t[::1] ia = ai_arr
    cdef cnp.int64_t[::1] ja = aj_arr
    cdef int[::1] bb = br_arr
    cdef double val, dxq
    cdef Py_ssize_t i_act = 0, j_act = 0
    cdef int br = 0
    with nogil:
        for q in range(n):
            dxq = dx[q] if boundary else 0.0
            _zeta_point(x[q, 0], x[q, 1], x[q, 2], P, nu, zstar, dp, dxq,
                        boundary, &val, &i_act, &j_act, &br)
            vv[q] = val
            ia[q] = i_act
            ja[q] = j_act
            bb[q] = br
    return vals, ai_arr, aj_arr, br_arr


def zeta_smooth(double[:, ::1] x, double[:, ::1] offs, double[::1] w,
                double[:, ::1] gw, double[:, ::1] P, double[:, :, ::1] nu,
                double[::1] zstar, int want_hess):
    """Quadrature of the mollified Euclidean zeta, its gradient and Hessian.

    The value is ``sum_q w_q zeta(x - offs_q)``, the gradient
    ``sum_q w_q grad zeta(x - offs_q)`` and the Hessian
    ``sum_q gw_q (outer) grad zeta(x - offs_q)``.
    """
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t nq = offs.shape[0]
    cdef Py_ssize_t s, q, a, b
    vals = np.zeros(n)
    grads = np.zeros((n, 3))
    cdef Py_ssize_t nh = n if want_hess else 0
    hess = np.zeros((nh, 3, 3))
    cdef double[::1] vv = vals
    cdef double[:, ::1] gg = grads
    cdef double[:, :, ::1] hh = hess
    cdef double[::1] empty = np.zeros(max(P.shape[0], 1))
    cdef double val
    cdef Py_ssize_t i_act = 0, j_act = 0
    cdef int br = 0
    cdef double g0, g1, g2
    with nogil:
        for s in range(n):
            for q in range(nq):
                _zeta_point(x[s, 0] - offs[q, 0], x[s, 1] - offs[q, 1],
                            x[s, 2] - offs[q, 2], P, nu, zstar, empty, 0.0, 0,
                            &val, &i_act, &j_act, &br)
                vv[s] += w[q] * val
                g0 = nu[i_act, j_act, 0]
                g1 = nu[i_act, j_act, 1]
                g2 = nu[i_act, j_act, 2]
                gg[s, 0] += w[q] * g0
                gg[s, 1] += w[q] * g1
                gg[s, 2] += w[q] * g2
                if want_hess:
                    for a in range(3):
                        hh[s, a, 0] += gw[q, a] * g0
                        hh[s, a, 1] += gw[q, a] * g1
                        hh[s, a, 2] += gw[q, a] * g2
    return vals, grads, hess
