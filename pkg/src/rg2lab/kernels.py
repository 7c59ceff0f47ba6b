"""Batched curvature kernels for grid-scale work.

The grid flow evaluates Christoffel/Ricci/Rm^2 at every node of a
periodic grid each Runge-Kutta stage, which dominates runtime.  Two
interchangeable implementations are provided: a numba @njit kernel and
a pure-numpy einsum path.  Selection:

    RG2LAB_BACKEND=numba   (default when numba imports)
    RG2LAB_BACKEND=numpy   force the fallback

Both return (gamma, riem_low, ricci, rm_sq) for inputs flattened over
nodes; ``benchmarks/bench_kernels.py`` compares them.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit, prange

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a normal dependency
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap

    prange = range


def curvature_batch_numpy(g, dg, d2g):
    """Vectorized curvature for a batch of metric 2-jets.

    g: (B, n, n); dg: (B, n, n, n); d2g: (B, n, n, n, n).
    Returns gamma (B,n,n,n), riem_low (B,n,n,n,n), ricci (B,n,n),
    rm_sq (B,n,n); riem_low uses the R_1212 = +K convention.
    """
    ginv = np.linalg.inv(g)
    term = dg.transpose(0, 3, 1, 2) + dg.transpose(0, 2, 3, 1) - dg
    gamma = 0.5 * np.einsum("bkl,blij->bkij", ginv, term)
    dginv = -np.einsum("xka,xmac,xcl->xmkl", ginv, dg, ginv)
    dterm = d2g.transpose(0, 1, 4, 2, 3) + d2g.transpose(0, 1, 3, 4, 2) - d2g
    dgamma = 0.5 * np.einsum("bmkl,blij->bmkij", dginv, term)
    dgamma += 0.5 * np.einsum("bkl,bmlij->bmkij", ginv, dterm)
    ru = dgamma.transpose(0, 2, 1, 3, 4)
    ru = ru - ru.transpose(0, 1, 3, 2, 4)
    gg = np.einsum("blip,bpjk->blijk", gamma, gamma)
    ru = ru + gg - gg.transpose(0, 1, 3, 2, 4)
    riem_low = -np.einsum("blm,bmijk->bijkl", g, ru)
    ricci = np.einsum("bkl,bkilj->bij", ginv, riem_low)
    ricci = 0.5 * (ricci + ricci.transpose(0, 2, 1))
    rm_sq = np.einsum(
        "bpk,bql,bnm,biklm,bjpqn->bij", ginv, ginv, ginv, riem_low, riem_low,
        optimize=True,
    )
    rm_sq = 0.5 * (rm_sq + rm_sq.transpose(0, 2, 1))
    return gamma, riem_low, ricci, rm_sq


@njit(cache=True, parallel=True)
def _curvature_batch_numba(g, dg, d2g):  # pragma: no cover - compiled
    B, n = g.shape[0], g.shape[1]
    gamma = np.zeros((B, n, n, n))
    riem_low = np.zeros((B, n, n, n, n))
    ricci = np.zeros((B, n, n))
    rm_sq = np.zeros((B, n, n))
    for b in prange(B):
        ginv = np.linalg.inv(g[b])
        # dginv[m, k, l] = -g^{ka} d_m g_ab g^{bl}
        dginv = np.zeros((n, n, n))
        for m in range(n):
            for k in range(n):
                for l in range(n):
                    acc = 0.0
                    for a in range(n):
                        for c in range(n):
                            acc -= ginv[k, a] * dg[b, m, a, c] * ginv[c, l]
                    dginv[m, k, l] = acc
        gam = np.zeros((n, n, n))
        dgam = np.zeros((n, n, n, n))
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    acc = 0.0
                    for l in range(n):
                        acc += ginv[k, l] * (dg[b, i, j, l] + dg[b, j, i, l] - dg[b, l, i, j])
                    gam[k, i, j] = 0.5 * acc
        for m in range(n):
            for k in range(n):
                for i in range(n):
                    for j in range(n):
                        acc = 0.0
                        for l in range(n):
                            acc += dginv[m, k, l] * (
                                dg[b, i, j, l] + dg[b, j, i, l] - dg[b, l, i, j]
                            )
                            acc += ginv[k, l] * (
                                d2g[b, m, i, j, l] + d2g[b, m, j, i, l] - d2g[b, m, l, i, j]
                            )
                        dgam[m, k, i, j] = 0.5 * acc
        ru = np.zeros((n, n, n, n))
        for l in range(n):
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        acc = dgam[i, l, j, k] - dgam[j, l, i, k]
                        for p in range(n):
                            acc += gam[l, i, p] * gam[p, j, k] - gam[l, j, p] * gam[p, i, k]
                        ru[l, i, j, k] = acc
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        acc = 0.0
                        for m in range(n):
                            acc -= g[b, l, m] * ru[m, i, j, k]
                        riem_low[b, i, j, k, l] = acc
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for k in range(n):
                    for l in range(n):
                        acc += ginv[k, l] * riem_low[b, k, i, l, j]
                ricci[b, i, j] = acc
        for i in range(n):
            for j in range(i, n):
                acc = 0.0
                for p in range(n):
                    for k in range(n):
                        for q in range(n):
                            for l in range(n):
                                for nn in range(n):
                                    for m in range(n):
                                        acc += (
                                            ginv[p, k] * ginv[q, l] * ginv[nn, m]
                                            * riem_low[b, i, k, l, m]
                                            * riem_low[b, j, p, q, nn]
                                        )
                rm_sq[b, i, j] = acc
                rm_sq[b, j, i] = acc
        for i in range(n):
            for j in range(i, n):
                s = 0.5 * (ricci[b, i, j] + ricci[b, j, i])
                ricci[b, i, j] = s
                ricci[b, j, i] = s
        gamma[b] = gam
    return gamma, riem_low, ricci, rm_sq


def curvature_batch_numba(g, dg, d2g):
    g = np.ascontiguousarray(g, dtype=np.float64)
    dg = np.ascontiguousarray(dg, dtype=np.float64)
    d2g = np.ascontiguousarray(d2g, dtype=np.float64)
    return _curvature_batch_numba(g, dg, d2g)


def active_backend() -> str:
    """Which kernel implementation is in use ('numba' or 'numpy')."""
    choice = os.environ.get("RG2LAB_BACKEND", "").lower()
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not HAS_NUMBA:
            raise RuntimeError("RG2LAB_BACKEND=numba but numba is not importable")
        return "numba"
    return "numba" if HAS_NUMBA else "numpy"


def curvature_batch(g, dg, d2g):
    """Batched curvature via the backend selected by RG2LAB_BACKEND."""
    if active_backend() == "numba":
        return curvature_batch_numba(g, dg, d2g)
    return curvature_batch_numpy(g, dg, d2g)
