"""Principal (second-order) parts of the linearized curvature operators.

Second-order expressions in a symmetric perturbation h are stored as
coefficient arrays over ordered derivative slots: an entry at
[..., p, q, a, b] multiplies the covariant second derivative
grad_p grad_q h_ab.  Lower-order terms are dropped by contract; the
slot carries a marker recording that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import CurvatureBundle, MetricJet2


@dataclass(frozen=True)
class SymmetricPerturbation:
    """A symmetric variation direction h_ij with raised-index caches."""

    h: np.ndarray
    jet: MetricJet2 | None = None

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        if np.abs(h - h.T).max() > 1e-12 * (1.0 + np.abs(h).max()):
            raise ValueError("perturbation must be symmetric")
        object.__setattr__(self, "h", h)

    def raised(self) -> np.ndarray:
        """h^{ij} relative to the attached metric jet."""
        if self.jet is None:
            raise ValueError("no metric attached")
        ginv = self.jet.inverse()
        return ginv @ self.h @ ginv

    def mixed(self) -> np.ndarray:
        """h^i_j relative to the attached metric jet."""
        if self.jet is None:
            raise ValueError("no metric attached")
        return self.jet.inverse() @ self.h


@dataclass(frozen=True)
class SecondDerivativeSlot:
    """Coefficients of grad_p grad_q h_ab in a second-order expression.

    coeff has shape out_shape + (n, n, n, n); the trailing axes are
    (p, q, a, b) with (a, b) stored symmetrized.  lot_dropped records
    that lower-order terms are excluded by contract.
    """

    coeff: np.ndarray
    lot_dropped: bool = True

    @property
    def dim(self) -> int:
        return self.coeff.shape[-1]

    def contract(self, ddh: np.ndarray) -> np.ndarray:
        """Evaluate the principal part on given values of grad grad h."""
        return np.einsum("...pqab,pqab->...", self.coeff, ddh)


def _add(block, p, q, a, b, val):
    """Accumulate into the (p, q) slot, symmetrized over (a, b)."""
    block[p, q, a, b] += 0.5 * val
    block[p, q, b, a] += 0.5 * val


def d_riemann_principal(jet: MetricJet2) -> SecondDerivativeSlot:
    """Principal part of the variation of R^l_ijk in the direction h.

    The six-term expression
    (1/2) g^{lp} (DiDj h_kp + DiDk h_jp - DiDp h_jk
                  - DjDi h_kp - DjDk h_ip + DjDp h_ik),
    encoded on derivative slots; output axes are (l, i, j, k).
    """
    n = jet.dim
    ginv = jet.inverse()
    C = np.zeros((n,) * 8)
    for l in range(n):
        for w in range(n):
            c = 0.5 * ginv[l, w]
            if c == 0.0:
                continue
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        blk = C[l, i, j, k]
                        _add(blk, i, j, k, w, c)
                        _add(blk, i, k, j, w, c)
                        _add(blk, i, w, j, k, -c)
                        _add(blk, j, i, k, w, -c)
                        _add(blk, j, k, i, w, -c)
                        _add(blk, j, w, i, k, c)
    return SecondDerivativeSlot(C)


def d_rmsq_principal(jet: MetricJet2, bundle: CurvatureBundle) -> SecondDerivativeSlot:
    """Principal part of the variation of Rm^2_ij in the direction h.

    Encodes R_iklu (DjD^l h^{ku} - D^k D^l h_j^u)
          + R_jklu (DiD^l h^{ku} - D^k D^l h_i^u)
    on derivative slots.  Commutators of covariant derivatives only move
    terms between this expression and lower order, so none appear here.
    """
    n = jet.dim
    ginv = jet.inverse()
    # The variation formula is stated in the convention opposite to the
    # R_1212 = +K storage convention, hence the sign flip.
    R = -bundle.riem_low
    C = np.zeros((n, n, n, n, n, n))
    # M1[i, p, a, b] = sum_{klu} R_iklu g^{lp} g^{ka} g^{ub}
    M1 = np.einsum("iklu,lp,ka,ub->ipab", R, ginv, ginv, ginv, optimize=True)
    # M2[i, p, q, b] = sum_{klu} R_iklu g^{kp} g^{lq} g^{ub}
    M2 = np.einsum("iklu,kp,lq,ub->ipqb", R, ginv, ginv, ginv, optimize=True)
    for i in range(n):
        for j in range(n):
            blk = C[i, j]
            for p in range(n):
                for a in range(n):
                    for b in range(n):
                        # R_iklu DjD^l h^{ku}  and  (i <-> j)
                        _add(blk, j, p, a, b, M1[i, p, a, b])
                        _add(blk, i, p, a, b, M1[j, p, a, b])
                for q in range(n):
                    for b in range(n):
                        # -R_iklu D^k D^l h_j^u  and  (i <-> j)
                        _add(blk, p, q, j, b, -M2[i, p, q, b])
                        _add(blk, p, q, i, b, -M2[j, p, q, b])
    return SecondDerivativeSlot(C)


def d_inverse_metric(h: np.ndarray, jet: MetricJet2) -> np.ndarray:
    """Variation of the inverse metric: -g^{ip} g^{jq} h_pq."""
    ginv = jet.inverse()
    return -ginv @ np.asarray(h, dtype=float) @ ginv


def covariant_hessian_of_wave(jet: MetricJet2, bundle: CurvatureBundle,
                              h0: np.ndarray, dh: np.ndarray,
                              d2h: np.ndarray) -> np.ndarray:
    """Exact grad_p grad_q h_ab at a point from coordinate jets of h.

    dh[k, a, b] = d_k h_ab and d2h[p, q, a, b] = d_p d_q h_ab are the
    plain coordinate derivatives of the tensor field at the point.
    """
    gam, dgam = bundle.gamma, bundle.dgamma
    # first covariant derivative: Dq h_ab = d_q h_ab - G^s_qa h_sb - G^s_qb h_as
    Dh = dh - np.einsum("sqa,sb->qab", gam, h0) - np.einsum("sqb,as->qab", gam, h0)
    # d_p (Dq h_ab)
    dDh = (
        d2h
        - np.einsum("psqa,sb->pqab", dgam, h0)
        - np.einsum("sqa,psb->pqab", gam, dh)
        - np.einsum("psqb,as->pqab", dgam, h0)
        - np.einsum("sqb,pas->pqab", gam, dh)
    )
    DDh = (
        dDh
        - np.einsum("spq,sab->pqab", gam, Dh)
        - np.einsum("spa,qsb->pqab", gam, Dh)
        - np.einsum("spb,qas->pqab", gam, Dh)
    )
    return DDh
