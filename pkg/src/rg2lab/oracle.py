"""Brute-force validators: naive contractions, finite-difference
variations, and plane-wave reconstruction of the principal symbol.

Everything here is written with literal nested loops and duplicates the
formulas on purpose: these functions are the ground truth that the fast
paths are tested against, so they must not share contraction code with
them.  They are slow and that is fine.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularMetricError
from .families import MetricFamily
from .geometry import CurvatureBundle, MetricJet2, frame_transform_tensor, orthonormal_frame
from .symbol import IndexMap


@dataclass(frozen=True)
class PlaneWavePerturbation:
    """h(x) = h0 * cos(freq * xi . (x - x0)), crest at x0.

    The coordinate second derivative at the crest is
    -freq^2 * xi_p * xi_q * h0, the handle the symbol extraction pulls on.
    """

    h0: np.ndarray
    xi: np.ndarray
    freq: float
    x0: np.ndarray

    def jets(self, x: np.ndarray):
        """(h, dh, d2h) of the wave at the point x."""
        x = np.asarray(x, dtype=float)
        phase = self.freq * float(self.xi @ (x - self.x0))
        c, s = np.cos(phase), np.sin(phase)
        h = c * self.h0
        dh = -self.freq * s * np.einsum("k,ab->kab", self.xi, self.h0)
        d2h = -self.freq ** 2 * c * np.einsum("p,q,ab->pqab", self.xi, self.xi, self.h0)
        return h, dh, d2h


# ---------------------------------------------------------------------------
# naive pointwise curvature (literal loops, no shared helpers)
# ---------------------------------------------------------------------------

def naive_christoffel(jet: MetricJet2):
    n = jet.dim
    ginv = np.linalg.inv(jet.g)
    gamma = np.zeros((n, n, n))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for l in range(n):
                    acc += ginv[k, l] * (jet.dg[i, j, l] + jet.dg[j, i, l] - jet.dg[l, i, j])
                gamma[k, i, j] = 0.5 * acc
    return gamma


def naive_dchristoffel(jet: MetricJet2):
    n = jet.dim
    ginv = np.linalg.inv(jet.g)
    dgamma = np.zeros((n, n, n, n))
    for m in range(n):
        # d_m g^{kl}
        dginv = np.zeros((n, n))
        for k in range(n):
            for l in range(n):
                for a in range(n):
                    for b in range(n):
                        dginv[k, l] -= ginv[k, a] * jet.dg[m, a, b] * ginv[b, l]
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    acc = 0.0
                    for l in range(n):
                        t = jet.dg[i, j, l] + jet.dg[j, i, l] - jet.dg[l, i, j]
                        dt = (jet.d2g[m, i, j, l] + jet.d2g[m, j, i, l]
                              - jet.d2g[m, l, i, j])
                        acc += dginv[k, l] * t + ginv[k, l] * dt
                    dgamma[m, k, i, j] = 0.5 * acc
    return dgamma


def naive_riemann_low(jet: MetricJet2):
    """R_ijkl in the R_1212 = +K convention, by literal loops."""
    n = jet.dim
    gamma = naive_christoffel(jet)
    dgamma = naive_dchristoffel(jet)
    rl = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                ru = np.zeros(n)
                for l in range(n):
                    acc = dgamma[i, l, j, k] - dgamma[j, l, i, k]
                    for p in range(n):
                        acc += gamma[l, i, p] * gamma[p, j, k]
                        acc -= gamma[l, j, p] * gamma[p, i, k]
                    ru[l] = acc
                for l in range(n):
                    acc = 0.0
                    for m in range(n):
                        acc -= jet.g[l, m] * ru[m]
                    rl[i, j, k, l] = acc
    return rl


def naive_ricci(jet: MetricJet2):
    n = jet.dim
    rl = naive_riemann_low(jet)
    ginv = np.linalg.inv(jet.g)
    ric = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    ric[i, j] += ginv[k, l] * rl[k, i, l, j]
    return ric


def naive_contractions(bundle: CurvatureBundle, jet: MetricJet2) -> np.ndarray:
    """Rm^2_ij = g^{pk} g^{ql} g^{nm} R_iklm R_jpqn, six literal loops."""
    n = jet.dim
    ginv = np.linalg.inv(jet.g)
    rl = bundle.riem_low
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for p in range(n):
                for k in range(n):
                    for q in range(n):
                        for l in range(n):
                            for nn in range(n):
                                for m in range(n):
                                    acc += (ginv[p, k] * ginv[q, l] * ginv[nn, m]
                                            * rl[i, k, l, m] * rl[j, p, q, nn])
            out[i, j] = acc
    return out


def naive_rm_sq(jet: MetricJet2):
    n = jet.dim
    ginv = np.linalg.inv(jet.g)
    rl = naive_riemann_low(jet)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for p in range(n):
                for k in range(n):
                    for q in range(n):
                        for l in range(n):
                            for nn in range(n):
                                for m in range(n):
                                    acc += (ginv[p, k] * ginv[q, l] * ginv[nn, m]
                                            * rl[i, k, l, m] * rl[j, p, q, nn])
            out[i, j] = acc
    return out


# ---------------------------------------------------------------------------
# DeTurck vector field and full flow right-hand side, naive
# ---------------------------------------------------------------------------

def naive_deturck_vector(jet_g: MetricJet2, jet_u: MetricJet2) -> np.ndarray:
    """W^i = -u^{il} g^{pq} (D_p u_ql - 1/2 D_l u_pq).

    Covariant derivatives are taken in the Levi-Civita connection of g.
    By the difference-of-connections formula this equals the classical
    gauge vector g^{pq} (Gamma(g)^i_pq - Gamma(u)^i_pq), which vanishes
    identically when u = g.
    """
    n = jet_g.dim
    ginv = np.linalg.inv(jet_g.g)
    uinv = np.linalg.inv(jet_u.g)
    gamma = naive_christoffel(jet_g)
    Du = np.zeros((n, n, n))  # Du[p, q, l] = D_p u_ql
    for p in range(n):
        for q in range(n):
            for l in range(n):
                acc = jet_u.dg[p, q, l]
                for m in range(n):
                    acc -= gamma[m, p, q] * jet_u.g[m, l]
                    acc -= gamma[m, p, l] * jet_u.g[q, m]
                Du[p, q, l] = acc
    T = np.zeros(n)
    for l in range(n):
        for p in range(n):
            for q in range(n):
                T[l] += ginv[p, q] * (Du[p, q, l] - 0.5 * Du[l, p, q])
    W = np.zeros(n)
    for i in range(n):
        for l in range(n):
            W[i] -= uinv[i, l] * T[l]
    return W


def naive_flow_rhs(gjet_at, ujet_at, x: np.ndarray, alpha: float,
                   fd_step: float = 1e-5) -> np.ndarray:
    """-2 Rc + L_W g - (alpha/2) Rm^2 at x, everything naive.

    gjet_at / ujet_at are callables returning 2-jets at a point; the
    coordinate derivative of the lowered W needed for the Lie term is
    taken by central differences in x (the fields are analytic).
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    jet_g = gjet_at(x)
    ric = naive_ricci(jet_g)
    rmsq = naive_rm_sq(jet_g)

    def W_low(y):
        jg = gjet_at(y)
        Wup = naive_deturck_vector(jg, ujet_at(y))
        return jg.g @ Wup

    Wl = W_low(x)
    dWl = np.zeros((n, n))  # dWl[i, j] = d_i W_j
    for i in range(n):
        e = np.zeros(n)
        e[i] = fd_step
        dWl[i] = (W_low(x + e) - W_low(x - e)) / (2.0 * fd_step)
    gamma = naive_christoffel(jet_g)
    lie = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            nab_ij = dWl[i, j]
            nab_ji = dWl[j, i]
            for m in range(n):
                nab_ij -= gamma[m, i, j] * Wl[m]
                nab_ji -= gamma[m, j, i] * Wl[m]
            lie[i, j] = nab_ij + nab_ji
    return -2.0 * ric + lie - 0.5 * alpha * rmsq


# ---------------------------------------------------------------------------
# finite-difference variations
# ---------------------------------------------------------------------------

_FUNCTIONALS = {
    "riemann": naive_riemann_low,
    "ricci": naive_ricci,
    "rm_sq": naive_rm_sq,
    "inverse_metric": lambda jet: np.linalg.inv(jet.g),
}


def fd_variation(functional: str, jet: MetricJet2, h, dh=None, d2h=None,
                 eps: float = 1e-4) -> np.ndarray:
    """Richardson-extrapolated central difference of a metric functional.

    h may be a constant symmetric matrix (dh = d2h = 0) or come with its
    own analytic derivative jets.
    """
    if functional not in _FUNCTIONALS:
        raise ValueError(f"unknown functional {functional!r}")
    if not 0.0 < eps <= 1e-2:
        raise ValueError("eps must lie in (0, 1e-2]")
    F = _FUNCTIONALS[functional]
    n = jet.dim
    h = np.asarray(h, dtype=float)
    dh = np.zeros((n, n, n)) if dh is None else dh
    d2h = np.zeros((n, n, n, n)) if d2h is None else d2h

    def central(e):
        jp = jet.perturbed(h, dh, d2h, e)
        jm = jet.perturbed(h, dh, d2h, -e)
        for j in (jp, jm):
            if np.linalg.eigvalsh(j.g)[0] <= 0:
                raise SingularMetricError("perturbed metric lost positivity")
        return (F(jp) - F(jm)) / (2.0 * e)

    return (4.0 * central(eps / 2.0) - central(eps)) / 3.0


def fd_convergence_order(functional: str, jet: MetricJet2, h,
                         eps_values=(4e-3, 2e-3, 1e-3)) -> float:
    """Observed order of the plain central difference against the
    extrapolated reference; should be about 2."""
    ref = fd_variation(functional, jet, h, eps=eps_values[-1] / 4.0)
    F = _FUNCTIONALS[functional]
    n = jet.dim
    h = np.asarray(h, dtype=float)
    dh = np.zeros((n, n, n))
    d2h = np.zeros((n, n, n, n))
    errs = []
    for e in eps_values:
        jp = jet.perturbed(h, dh, d2h, e)
        jm = jet.perturbed(h, dh, d2h, -e)
        d = (F(jp) - F(jm)) / (2.0 * e)
        errs.append(np.abs(d - ref).max())
    slopes = [
        np.log(errs[i] / errs[i + 1]) / np.log(eps_values[i] / eps_values[i + 1])
        for i in range(len(errs) - 1)
    ]
    return float(min(slopes))


# ---------------------------------------------------------------------------
# plane-wave reconstruction of the symbol
# ---------------------------------------------------------------------------

def symbol_from_plane_waves(family: MetricFamily, x0: np.ndarray, alpha: float,
                            xi: np.ndarray, freqs=(16.0, 32.0, 64.0),
                            eps: float = 1e-5,
                            fit_residual_max: float = 0.2) -> np.ndarray:
    """Reconstruct the symbol matrix from the full nonlinear operator.

    For each basis perturbation a plane wave is pushed through a central
    finite difference of the DeTurck-modified flow operator, the response
    at the crest is divided by -freq^2, and the freq -> infinity limit is
    taken by a linear fit in 1/freq.  Entirely independent of the
    symbol-assembly code path.
    """
    x0 = np.asarray(x0, dtype=float)
    n = family.dim
    jet0 = family.jet(x0)
    frame = orthonormal_frame(jet0, xi)
    V = frame.vectors
    Vinv = np.linalg.inv(V)
    xi_cov = Vinv[:, 0]  # unit-g-norm covector dual to e_1
    imap = IndexMap(n)
    N = imap.size
    cols = np.zeros((len(freqs), N, N))

    ujet_at = family.jet

    for b in range(N):
        Eb = imap.basis_matrix(b)
        h0 = Vinv @ Eb @ Vinv.T  # frame basis tensor in chart coordinates
        for fi, freq in enumerate(freqs):
            wave = PlaneWavePerturbation(h0, xi_cov, float(freq), x0)

            def gjet_at(y, s=1.0):
                h, dh, d2h = wave.jets(y)
                return family.jet(y).perturbed(h, dh, d2h, s)

            def response(e):
                rp = naive_flow_rhs(lambda y: gjet_at(y, e), ujet_at, x0, alpha)
                rm = naive_flow_rhs(lambda y: gjet_at(y, -e), ujet_at, x0, alpha)
                return (rp - rm) / (2.0 * e)

            d = (4.0 * response(eps / 2.0) - response(eps)) / 3.0
            sig_h = -(V @ d @ V.T) / freq ** 2
            for row in range(N):
                i, j = imap.pair(row)
                cols[fi, row, b] = sig_h[i, j]

    # linear fit in 1/freq, intercept = symbol entry
    invf = 1.0 / np.asarray(freqs, dtype=float)
    A = np.stack([np.ones_like(invf), invf], axis=1)
    coef, *_ = np.linalg.lstsq(A, cols.reshape(len(freqs), -1), rcond=None)
    intercept = coef[0].reshape(N, N)
    resid = np.abs(cols - (coef[0] + np.outer(invf, coef[1])).reshape(len(freqs), N, N))
    if resid.max() > fit_residual_max:
        raise RuntimeError(
            f"plane-wave fit residual {resid.max():.3e} exceeds threshold; "
            "principal part is suspect"
        )
    return intercept
