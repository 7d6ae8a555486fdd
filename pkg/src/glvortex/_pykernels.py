"""Pure-Python/NumPy twins of the compiled kernels in ``_ckernels``."""
from __future__ import annotations

import numpy as np


def hungarian(cost: np.ndarray):
    """Min-cost perfect matching with dual potentials (see ``_ckernels.hungarian``)."""
    a = np.ascontiguousarray(cost, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("cost matrix must be square")
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used[1:]
            cur = a[i0 - 1] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            masked = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(masked)) + 1
            delta = masked[j1 - 1]
            used_idx = np.nonzero(used)[0]
            u[p[used_idx]] += delta
            v[used_idx] -= delta
            minv[~used] -= delta
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
    col_of_row[p[1:] - 1] = np.arange(n)
    return col_of_row, u[1:].copy(), v[1:].copy()


def zeta_eval(x, P, nu, zstar, dp, dx, boundary):
    """Evaluate zeta and its active piece (see ``_ckernels.zeta_eval``)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    k = P.shape[0]
    vals = np.full(n, -np.inf)
    ai = np.zeros(n, dtype=np.int64)
    aj = np.zeros(n, dtype=np.int64)
    br = np.zeros(n, dtype=np.int32)
    for i in range(k):
        d = np.einsum("nc,mc->nm", P[i][None, :] - x, nu[i])
        bj = np.argmax(d, axis=1)
        di = d[np.arange(n), bj]
        b = np.zeros(n, dtype=np.int32)
        if boundary:
            alt = dp[i] - dx
            m1 = alt > di
            di = np.where(m1, alt, di)
            b[m1] = 1
            alt = dp[i] + dx
            m2 = alt < di
            di = np.where(m2, alt, di)
            b[m2] = 2
        cand = zstar[i] - di
        win = cand > vals
        vals = np.where(win, cand, vals)
        ai[win] = i
        aj[win] = bj[win]
        br[win] = b[win]
    return vals, ai, aj, br


def zeta_smooth(x, offs, w, gw, P, nu, zstar, want_hess):
    """Quadrature of the mollified Euclidean zeta (see ``_ckernels.zeta_smooth``)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    vals = np.zeros(n)
    grads = np.zeros((n, 3))
    hess = np.zeros((n, 3, 3) if want_hess else (0, 3, 3))
    empty = np.zeros(max(P.shape[0], 1))
    dx = np.zeros(n)
    for q in range(offs.shape[0]):
        val, ai, aj, _ = zeta_eval(x - offs[q], P, nu, zstar, empty, dx, 0)
        g = nu[ai, aj]
        vals += w[q] * val
        grads += w[q] * g
        if want_hess:
            hess += gw[q][None, :, None] * g[:, None, :]
    return vals, grads, hess
