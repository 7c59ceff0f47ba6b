"""Pointwise Riemannian tensor algebra from metric 2-jets.

All curvature here is computed at a single point from the value of the
metric together with its first and second coordinate derivatives.  The
sign convention is fixed so that, in an orthonormal frame, R_{1212}
equals the sectional curvature of the (e_1, e_2) plane and is positive
on the round sphere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegeneratePlaneError,
    SingularMetricError,
    ValenceError,
    ZeroVectorError,
)

# Smallest admissible ratio min(eig g) / max(eig g); below this we refuse.
EIG_RATIO_FLOOR = 1e-12

# Default relative tolerance for symmetry residuals.
SYMMETRY_RTOL = 1e-9


@dataclass(frozen=True)
class MetricJet2:
    """Metric 2-jet at a chart point.

    g[i, j]          metric components
    dg[k, i, j]      d_k g_ij
    d2g[k, l, i, j]  d_k d_l g_ij
    """

    g: np.ndarray
    dg: np.ndarray
    d2g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "g", np.asarray(self.g, dtype=float))
        object.__setattr__(self, "dg", np.asarray(self.dg, dtype=float))
        object.__setattr__(self, "d2g", np.asarray(self.d2g, dtype=float))
        n = self.g.shape[0]
        if self.g.shape != (n, n) or self.dg.shape != (n, n, n) or self.d2g.shape != (n, n, n, n):
            raise ValueError("inconsistent jet array shapes")

    @property
    def dim(self) -> int:
        return self.g.shape[0]

    def validate(self, rtol: float = SYMMETRY_RTOL) -> None:
        """Check the symmetry and positivity invariants; raise on failure."""
        scale = 1.0 + np.abs(self.g).max()
        if np.abs(self.g - self.g.T).max() > rtol * scale:
            raise ValueError("metric is not symmetric")
        dscale = 1.0 + np.abs(self.dg).max()
        if np.abs(self.dg - self.dg.transpose(0, 2, 1)).max() > rtol * dscale:
            raise ValueError("dg is not symmetric in (i, j)")
        d2scale = 1.0 + np.abs(self.d2g).max()
        if np.abs(self.d2g - self.d2g.transpose(0, 1, 3, 2)).max() > rtol * d2scale:
            raise ValueError("d2g is not symmetric in (i, j)")
        if np.abs(self.d2g - self.d2g.transpose(1, 0, 2, 3)).max() > rtol * d2scale:
            raise ValueError("d2g is not symmetric in (k, l)")
        ev = np.linalg.eigvalsh(self.g)
        if ev[0] <= 0 or ev[0] < EIG_RATIO_FLOOR * ev[-1]:
            raise SingularMetricError("metric is not positive definite to working precision")

    def inverse(self) -> np.ndarray:
        ev = np.linalg.eigvalsh(self.g)
        if ev[0] <= EIG_RATIO_FLOOR * abs(ev[-1]):
            raise SingularMetricError(
                f"metric eigenvalue ratio {ev[0]:.3e}/{ev[-1]:.3e} below floor"
            )
        return np.linalg.inv(self.g)

    def scaled(self, c: float) -> "MetricJet2":
        """The jet of c*g (all derivative arrays scale with c)."""
        return MetricJet2(c * self.g, c * self.dg, c * self.d2g)

    def perturbed(self, h: np.ndarray, dh: np.ndarray, d2h: np.ndarray, eps: float) -> "MetricJet2":
        """The jet of g + eps*h for an analytic perturbation with known jets."""
        return MetricJet2(self.g + eps * h, self.dg + eps * dh, self.d2g + eps * d2h)


@dataclass(frozen=True)
class CurvatureBundle:
    """All pointwise curvature data derived from one metric jet."""

    gamma: np.ndarray      # gamma[k, i, j] = Gamma^k_ij
    dgamma: np.ndarray     # dgamma[l, k, i, j] = d_l Gamma^k_ij
    riem_up: np.ndarray    # riem_up[l, i, j, k] = R^l_ijk
    riem_low: np.ndarray   # riem_low[i, j, k, l], R_1212 = +K in orthonormal frames
    ricci: np.ndarray
    scalar: float
    rm_sq: np.ndarray


@dataclass(frozen=True)
class Frame:
    """Orthonormal frame; rows of ``vectors`` are the frame vectors e_a."""

    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]


@dataclass(frozen=True)
class Plane:
    """A 2-plane in the tangent space, spanned by u and v."""

    u: np.ndarray
    v: np.ndarray


def christoffel(jet: MetricJet2) -> tuple[np.ndarray, np.ndarray]:
    """Christoffel symbols Gamma^k_ij and their coordinate derivatives."""
    ginv = jet.inverse()
    dg, d2g = jet.dg, jet.d2g
    # term[l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
    term = dg.transpose(2, 0, 1) + dg.transpose(1, 2, 0) - dg
    gamma = 0.5 * np.einsum("kl,lij->kij", ginv, term)
    dginv = -np.einsum("ka,mab,bl->mkl", ginv, dg, ginv)
    dterm = d2g.transpose(0, 3, 1, 2) + d2g.transpose(0, 2, 3, 1) - d2g
    dgamma = 0.5 * np.einsum("mkl,lij->mkij", dginv, term)
    dgamma += 0.5 * np.einsum("kl,mlij->mkij", ginv, dterm)
    return gamma, dgamma


def curvature(jet: MetricJet2) -> CurvatureBundle:
    """Full curvature bundle (Christoffel, Riemann, Ricci, scalar, Rm^2)."""
    gamma, dgamma = christoffel(jet)
    ginv = jet.inverse()
    # R^l_ijk = d_i Gamma^l_jk - d_j Gamma^l_ik + G^l_ip G^p_jk - G^l_jp G^p_ik
    ru = dgamma.transpose(1, 0, 2, 3)
    ru = ru - ru.transpose(0, 2, 1, 3)
    gg = np.einsum("lip,pjk->lijk", gamma, gamma)
    ru = ru + gg - gg.transpose(0, 2, 1, 3)
    # Lowered with the sign that makes orthonormal R_1212 = +K on the sphere.
    rl = -np.einsum("lm,mijk->ijkl", jet.g, ru)
    ricci = np.einsum("kl,kilj->ij", ginv, rl)
    ricci = 0.5 * (ricci + ricci.T)
    scalar = float(np.einsum("ij,ij->", ginv, ricci))
    rm_sq = np.einsum("pk,ql,nm,iklm,jpqn->ij", ginv, ginv, ginv, rl, rl, optimize=True)
    rm_sq = 0.5 * (rm_sq + rm_sq.T)
    return CurvatureBundle(gamma, dgamma, ru, rl, ricci, scalar, rm_sq)


def riemann(jet: MetricJet2) -> CurvatureBundle:
    """Spec-level alias: bundle with the Riemann tensors populated."""
    return curvature(jet)


def ricci_and_scalar(bundle: CurvatureBundle, jet: MetricJet2) -> tuple[np.ndarray, float]:
    ginv = jet.inverse()
    ricci = np.einsum("kl,kilj->ij", ginv, bundle.riem_low)
    return 0.5 * (ricci + ricci.T), float(np.einsum("ij,ij->", ginv, ricci))


def rm_squared(bundle: CurvatureBundle, jet: MetricJet2) -> np.ndarray:
    ginv = jet.inverse()
    out = np.einsum(
        "pk,ql,nm,iklm,jpqn->ij", ginv, ginv, ginv, bundle.riem_low, bundle.riem_low,
        optimize=True,
    )
    return 0.5 * (out + out.T)


def sectional_curvature(bundle: CurvatureBundle, jet: MetricJet2, plane: Plane,
                        tol: float = 1e-14) -> float:
    """K_P = <R(u,v)v, u> / (|u|^2 |v|^2 - <u,v>^2), positive on spheres."""
    u = np.asarray(plane.u, dtype=float)
    v = np.asarray(plane.v, dtype=float)
    g = jet.g
    gram = (u @ g @ u) * (v @ g @ v) - (u @ g @ v) ** 2
    scale = max((u @ g @ u) * (v @ g @ v), tol)
    if gram <= tol * scale:
        raise DegeneratePlaneError("plane spanning vectors are (nearly) dependent")
    num = np.einsum("ijkl,i,j,k,l->", bundle.riem_low, u, v, u, v)
    return float(num / gram)


def orthonormal_frame(jet: MetricJet2, first_direction: np.ndarray | None = None) -> Frame:
    """Gram-Schmidt in the metric inner product, e_1 parallel to first_direction."""
    n = jet.dim
    g = jet.g
    if first_direction is None:
        first_direction = np.eye(n)[0]
    e1 = np.asarray(first_direction, dtype=float)
    norm1 = np.sqrt(max(e1 @ g @ e1, 0.0))
    if norm1 < 1e-14 * (1.0 + np.abs(e1).max()) or not np.isfinite(norm1) or norm1 == 0.0:
        raise ZeroVectorError("first frame direction is numerically zero")
    vectors = [e1 / norm1]
    for cand in np.eye(n):
        if len(vectors) == n:
            break
        w = cand.copy()
        for e in vectors:
            w = w - (e @ g @ w) * e
        nw = np.sqrt(max(w @ g @ w, 0.0))
        if nw > 1e-8:
            vectors.append(w / nw)
    if len(vectors) != n:
        raise SingularMetricError("could not complete an orthonormal frame")
    return Frame(np.array(vectors))


def frame_transform_tensor(tensor: np.ndarray, frame: Frame) -> np.ndarray:
    """Express a covariant rank-2 or rank-4 tensor in the frame."""
    V = frame.vectors
    if tensor.ndim == 2:
        return np.einsum("ai,bj,ij->ab", V, V, tensor)
    if tensor.ndim == 4:
        return np.einsum("ai,bj,ck,dl,ijkl->abcd", V, V, V, V, tensor, optimize=True)
    raise ValenceError(f"unsupported tensor rank {tensor.ndim}")


def riemann_symmetry_residuals(bundle: CurvatureBundle) -> dict[str, float]:
    """Max-abs residuals of the four Riemann identities, for diagnostics."""
    rl = bundle.riem_low
    return {
        "antisym_ij": float(np.abs(rl + rl.transpose(1, 0, 2, 3)).max()),
        "antisym_kl": float(np.abs(rl + rl.transpose(0, 1, 3, 2)).max()),
        "pair_swap": float(np.abs(rl - rl.transpose(2, 3, 0, 1)).max()),
        "first_bianchi": float(
            np.abs(rl + rl.transpose(1, 2, 0, 3) + rl.transpose(2, 0, 1, 3)).max()
        ),
    }
