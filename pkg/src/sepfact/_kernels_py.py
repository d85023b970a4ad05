"""Pure-numpy kernels, used when the compiled extension is unavailable.

``rank1_search`` looks for product vectors inside a subspace by alternating
projections: reshape the current vector to an ``m x n`` matrix, replace it by
its best rank-one approximation ``s u (x) conj(w)`` (one warm-started power
step per sweep), then project back onto the subspace.  A restart has
converged when the rank-one point is within ``tol`` of the subspace.  All
restarts are advanced together as one batch.
"""
import numpy as np


def rank1_search(basis, m, n, starts, max_iter=2000, tol=1e-12):
    basis = np.ascontiguousarray(basis, dtype=np.complex128)
    starts = np.ascontiguousarray(starts, dtype=np.complex128)
    mn, d = basis.shape
    if mn != m * n:
        raise ValueError("basis rows must equal m * n")
    if starts.shape[1] != d:
        raise ValueError("starts must have one coefficient per basis vector")
    restarts = starts.shape[0]
    bh = basis.conj().T

    v = starts @ basis.T
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    mats = v.reshape(restarts, m, n)
    heaviest = np.argmax(np.sum(np.abs(mats) ** 2, axis=1), axis=1)
    u = mats[np.arange(restarts), :, heaviest]
    u = u / np.linalg.norm(u, axis=1, keepdims=True)
    w = np.einsum("rij,ri->rj", mats.conj(), u)

    e_out = np.zeros((restarts, m), dtype=np.complex128)
    f_out = np.zeros((restarts, n), dtype=np.complex128)
    res_out = np.full(restarts, np.inf)
    it_out = np.zeros(restarts, dtype=np.int64)
    active = np.ones(restarts, dtype=bool)

    for it in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        mats = v[idx].reshape(idx.size, m, n)
        uu = np.einsum("rij,rj->ri", mats, w[idx])
        uu /= np.linalg.norm(uu, axis=1, keepdims=True)
        ww = np.einsum("rij,ri->rj", mats.conj(), uu)
        sigma = np.linalg.norm(ww, axis=1)
        ww /= sigma[:, None]
        x = (sigma[:, None, None] * uu[:, :, None] * ww.conj()[:, None, :]).reshape(idx.size, mn)
        vv = (x @ bh.T) @ basis.T
        res = np.linalg.norm(x - vv, axis=1) / sigma

        u[idx], w[idx] = uu, ww
        res_out[idx] = res
        it_out[idx] = it + 1
        e_out[idx] = uu
        f_out[idx] = ww.conj()
        v[idx] = vv / np.linalg.norm(vv, axis=1, keepdims=True)
        active[idx[res < tol]] = False

    return e_out, f_out, res_out, it_out
