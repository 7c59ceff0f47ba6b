"""Principal symbol of the DeTurck RG-2 operator and parabolicity analysis.

The symbol is assembled in an orthonormal frame whose first vector is
the (unit-normalized) direction xi.  Rows and columns are indexed by
unordered pairs (i, j), i <= j, in the order
h_11, h_12, ..., h_1n, h_22, h_23, ..., h_nn, so the matrix splits into
an identity block, a coupling block, a zero block, and the square block
nu whose determinant equals the full determinant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, ZeroVectorError
from .families import MetricFamily
from .geometry import (
    CurvatureBundle,
    Frame,
    MetricJet2,
    Plane,
    curvature,
    frame_transform_tensor,
    orthonormal_frame,
    sectional_curvature,
)


@dataclass(frozen=True)
class IndexMap:
    """Bijection between 1..N and unordered index pairs (i, j), i <= j."""

    n: int
    pairs: tuple = field(init=False)

    def __post_init__(self):
        pairs = [(i, j) for i in range(self.n) for j in range(i, self.n)]
        object.__setattr__(self, "pairs", tuple(pairs))

    @property
    def size(self) -> int:
        return self.n * (self.n + 1) // 2

    def index(self, i: int, j: int) -> int:
        if i > j:
            i, j = j, i
        return self.pairs.index((i, j))

    def pair(self, a: int) -> tuple[int, int]:
        return self.pairs[a]

    def basis_matrix(self, a: int) -> np.ndarray:
        """Symmetric matrix with unit entries at the a-th index pair."""
        i, j = self.pairs[a]
        e = np.zeros((self.n, self.n))
        e[i, j] = 1.0
        e[j, i] = 1.0
        return e


@dataclass(frozen=True)
class SymbolMatrix:
    """The assembled N x N symbol with its frame and block views."""

    sigma: np.ndarray
    index_map: IndexMap
    alpha: float
    frame: Frame
    riem_frame: np.ndarray  # riem_low in frame components

    @property
    def n(self) -> int:
        return self.index_map.n

    @property
    def block_identity(self) -> np.ndarray:
        return self.sigma[: self.n, : self.n]

    @property
    def block_lambda(self) -> np.ndarray:
        return self.sigma[: self.n, self.n:]

    @property
    def block_mu(self) -> np.ndarray:
        return self.sigma[self.n:, : self.n]

    @property
    def block_nu(self) -> np.ndarray:
        return self.sigma[self.n:, self.n:]


@dataclass
class SampleRecord:
    """Per-(point, direction) diagnostics gathered during classification."""

    point: np.ndarray
    xi: np.ndarray
    min_1pak: float
    max_1pak: float
    nu_eigenvalues: np.ndarray
    det_nu: float


@dataclass
class ParabolicityReport:
    """Classification verdict with the extremal values that justify it."""

    verdict: str
    min_one_plus_alpha_K: float
    max_one_plus_alpha_K: float
    min_witness_point: np.ndarray
    min_witness_plane: Plane
    nu_eigenvalues: list
    det_nu: float
    alpha: float
    family: str
    samples: list[SampleRecord] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [
            f"family: {self.family}",
            f"alpha: {self.alpha!r}",
            f"verdict: {self.verdict}",
            f"min_1_plus_alpha_K: {self.min_one_plus_alpha_K!r}",
            f"max_1_plus_alpha_K: {self.max_one_plus_alpha_K!r}",
            f"min_witness_point: {np.array2string(self.min_witness_point, precision=8)}",
            f"min_witness_plane_u: {np.array2string(self.min_witness_plane.u, precision=8)}",
            f"min_witness_plane_v: {np.array2string(self.min_witness_plane.v, precision=8)}",
            f"det_nu: {self.det_nu!r}",
            f"nu_spectrum_re_range: [{min(e.real for e in self.nu_eigenvalues)!r}, "
            f"{max(e.real for e in self.nu_eigenvalues)!r}]",
            f"samples: {len(self.samples)}",
        ]
        for rec in self.samples:
            lines.append(
                "sample: point=%s xi=%s min_1pak=%r max_1pak=%r det_nu=%r"
                % (
                    np.array2string(rec.point, precision=6),
                    np.array2string(rec.xi, precision=6),
                    rec.min_1pak,
                    rec.max_1pak,
                    rec.det_nu,
                )
            )
        return "\n".join(lines) + "\n"

    def to_rows(self) -> list[dict]:
        """One flat record per sample, for tabular export."""
        rows = []
        for rec in self.samples:
            rows.append(
                {
                    "point": " ".join(f"{v:.10g}" for v in rec.point),
                    "xi": " ".join(f"{v:.10g}" for v in rec.xi),
                    "min_1pak": rec.min_1pak,
                    "max_1pak": rec.max_1pak,
                    "det_nu": rec.det_nu,
                    "min_re_nu_eig": float(rec.nu_eigenvalues.real.min()),
                    "max_re_nu_eig": float(rec.nu_eigenvalues.real.max()),
                }
            )
        return rows


def _apply_symbol_frame(Rf: np.ndarray, alpha: float, h: np.ndarray) -> np.ndarray:
    """Evaluate the symbol on one frame perturbation h (xi = e_1).

    sigma(h)_ij = h_ij + (a/2) R_ik1u d_j1 h^{ku} - (a/2) R_i11u h_j^u
                       + (a/2) R_jk1u d_i1 h^{ku} - (a/2) R_j11u h_i^u
    with all indices raised trivially in the orthonormal frame.
    """
    out = h.copy()
    s = np.einsum("ikou,ku->io", Rf[:, :, :1, :], h)[:, 0]  # s[i] = R_ik1u h_ku
    out[:, 0] += 0.5 * alpha * s
    out[0, :] += 0.5 * alpha * s
    t = np.einsum("iu,ju->ij", Rf[:, 0, 0, :], h)           # t[i, j] = R_i11u h_ju
    out -= 0.5 * alpha * (t + t.T)
    return out


def assemble_symbol(jet: MetricJet2, bundle: CurvatureBundle, alpha: float,
                    xi: np.ndarray) -> SymbolMatrix:
    """Assemble the symbol matrix column by column from basis perturbations."""
    xi = np.asarray(xi, dtype=float)
    if np.linalg.norm(xi) == 0.0:
        raise ZeroVectorError("xi must be nonzero")
    frame = orthonormal_frame(jet, xi)
    Rf = frame_transform_tensor(bundle.riem_low, frame)
    return assemble_symbol_in_frame(frame, Rf, alpha)


def assemble_symbol_in_frame(frame: Frame, Rf: np.ndarray, alpha: float) -> SymbolMatrix:
    """Assemble the symbol given an orthonormal frame with xi = e_1."""
    n = frame.dim
    imap = IndexMap(n)
    N = imap.size
    sigma = np.zeros((N, N))
    for col in range(N):
        out = _apply_symbol_frame(Rf, alpha, imap.basis_matrix(col))
        for row in range(N):
            i, j = imap.pair(row)
            sigma[row, col] = out[i, j]
    return SymbolMatrix(sigma, imap, alpha, frame, Rf)


def case_split_rows(sym: SymbolMatrix, tol: float = 1e-12):
    """Rebuild each row from the three case formulas and cross-check.

    Returns (case1_rows, case2_rows, case3_rows) as lists of row indices.
    Raises ConsistencyError if the per-case formulas disagree with the
    assembled matrix (which would signal an assembly bug).
    """
    n, imap, a = sym.n, sym.index_map, sym.alpha
    Rf = sym.riem_frame
    N = imap.size
    rebuilt = np.zeros((N, N))
    groups = ([], [], [])
    for row in range(N):
        i, j = imap.pair(row)
        r = rebuilt[row]
        r[row] += 1.0
        if i == 0 and j == 0:
            groups[0].append(row)
            for k in range(n):
                for u in range(n):
                    r[imap.index(k, u)] += a * Rf[0, k, 0, u]
        elif i == 0:
            groups[1].append(row)
            for k in range(1, n):
                for u in range(n):
                    r[imap.index(k, u)] += 0.5 * a * Rf[j, k, 0, u]
        else:
            groups[2].append(row)
            for u in range(n):
                r[imap.index(j, u)] += 0.5 * a * Rf[0, i, 0, u]
                r[imap.index(i, u)] += 0.5 * a * Rf[0, j, 0, u]
    scale = 1.0 + np.abs(sym.sigma).max()
    if np.abs(rebuilt - sym.sigma).max() > tol * scale:
        raise ConsistencyError(
            "case formulas disagree with assembled symbol by "
            f"{np.abs(rebuilt - sym.sigma).max():.3e}"
        )
    return groups


def block_decompose(sym: SymbolMatrix, tol: float = 1e-12):
    """Split the symbol at row/column n and verify the block structure."""
    n = sym.n
    scale = max(np.abs(sym.sigma).max(), 1.0)
    mu = sym.block_mu
    if mu.size and np.abs(mu).max() > tol * scale:
        raise ConsistencyError(f"mu block is not zero (max {np.abs(mu).max():.3e})")
    eye_err = np.abs(sym.block_identity - np.eye(n)).max()
    if eye_err > tol * scale:
        raise ConsistencyError(f"top-left block is not the identity ({eye_err:.3e})")
    return sym.block_identity, sym.block_lambda, mu, sym.block_nu


def diagonalize_R1m1n(jet: MetricJet2, bundle: CurvatureBundle, frame: Frame):
    """Rotate e_2..e_n so that the symmetric matrix R_1m1n becomes diagonal.

    Returns (rotated frame, eigenvalues of R_1m1n).  The eigenvalues are
    the sectional curvatures of the planes (e_1, e_m) of the new frame.
    """
    Rf = frame_transform_tensor(bundle.riem_low, frame)
    M = Rf[0, 1:, 0, 1:]
    kappa, Q = np.linalg.eigh(0.5 * (M + M.T))
    V = frame.vectors.copy()
    V[1:] = Q.T @ frame.vectors[1:]
    return Frame(V), kappa


def golden_nu_4d(Rf: np.ndarray, alpha: float) -> np.ndarray:
    """The explicit 6x6 nu block for n = 4, transcribed entry by entry.

    Column order: h_22, h_23, h_24, h_33, h_34, h_44 (frame indices,
    1-based as in the row comments below).
    """
    if Rf.shape[0] != 4:
        raise ValueError("golden nu matrix is only defined for n = 4")
    a = alpha
    r1212 = Rf[0, 1, 0, 1]
    r1213 = Rf[0, 1, 0, 2]
    r1214 = Rf[0, 1, 0, 3]
    r1312 = Rf[0, 2, 0, 1]
    r1313 = Rf[0, 2, 0, 2]
    r1314 = Rf[0, 2, 0, 3]
    r1414 = Rf[0, 3, 0, 3]
    return np.array([
        [1 + a * r1212, a * r1213, a * r1214, 0.0, 0.0, 0.0],
        [a / 2 * r1312, 1 + a / 2 * (r1313 + r1212), a / 2 * r1314,
         a / 2 * r1213, a / 2 * r1214, 0.0],
        [a / 2 * r1214, a / 2 * r1314, 1 + a / 2 * (r1212 + r1414),
         0.0, a / 2 * r1213, a / 2 * r1214],
        [0.0, a * r1213, 0.0, 1 + a * r1313, a * r1314, 0.0],
        [0.0, a / 2 * r1214, a / 2 * r1213, a / 2 * r1314,
         1 + a / 2 * (r1313 + r1414), a / 2 * r1314],
        [0.0, 0.0, a * r1214, 0.0, a * r1314, 1 + a * r1414],
    ])


def classify_parabolicity(
    family: MetricFamily,
    alpha: float,
    points: list[np.ndarray] | None = None,
    n_points: int = 4,
    n_directions: int = 3,
    n_random_planes: int = 12,
    seed: int = 0,
    tol: float = 1e-9,
) -> ParabolicityReport:
    """Classify the flow at alpha by sampling 1 + alpha*K_P and nu spectra.

    At every sampled point and direction xi the frame is rotated to
    diagonalize R_1m1n; the coordinate planes of that frame (which carry
    the extremal entries of nu) are scanned, plus random planes as a
    safety net.
    """
    rng = np.random.default_rng(seed)
    n = family.dim
    if points is None:
        points = [family.sample_point(rng) for _ in range(n_points)]
    if not points:
        raise ValueError("empty sampling specification")

    min_val, max_val, min_abs = np.inf, -np.inf, np.inf
    min_point, min_plane = None, None
    all_eigs: list[complex] = []
    det_at_min = 1.0
    samples: list[SampleRecord] = []

    for x in points:
        jet = family.jet(np.asarray(x, dtype=float))
        bundle = curvature(jet)
        dirs = [np.eye(n)[k] for k in range(min(n, n_directions))]
        while len(dirs) < n_directions:
            dirs.append(rng.normal(size=n))
        for xi in dirs:
            frame0 = orthonormal_frame(jet, xi)
            frame, _ = diagonalize_R1m1n(jet, bundle, frame0)
            Rf = frame_transform_tensor(bundle.riem_low, frame)
            sym = assemble_symbol_in_frame(frame, Rf, alpha)
            nu = sym.block_nu
            eigs = np.linalg.eigvals(nu)
            all_eigs.extend(eigs.tolist())
            det_nu = float(np.linalg.det(nu))
            vals = []
            planes = []
            for a_ in range(n):
                for b_ in range(a_ + 1, n):
                    planes.append(Plane(frame.vectors[a_], frame.vectors[b_]))
            for _ in range(n_random_planes):
                planes.append(Plane(rng.normal(size=n), rng.normal(size=n)))
            for pl in planes:
                K = sectional_curvature(bundle, jet, pl)
                val = 1.0 + alpha * K
                vals.append(val)
                min_abs = min(min_abs, abs(val))
                if val < min_val:
                    min_val, min_point, min_plane = val, np.asarray(x, float), pl
                max_val = max(max_val, val)
            samples.append(SampleRecord(np.asarray(x, float), np.asarray(xi, float),
                                        float(min(vals)), float(max(vals)),
                                        eigs, det_nu))
            if min_point is not None and np.array_equal(min_point, np.asarray(x, float)):
                det_at_min = det_nu

    re_parts = np.array([e.real for e in all_eigs])
    if min_abs <= tol:
        verdict = "degenerate"
    elif min_val > 0.0 and re_parts.min() > 0.0:
        verdict = "parabolic"
    elif max_val < 0.0:
        verdict = "backward_parabolic"
    else:
        verdict = "indefinite"

    return ParabolicityReport(
        verdict=verdict,
        min_one_plus_alpha_K=float(min_val),
        max_one_plus_alpha_K=float(max_val),
        min_witness_point=min_point,
        min_witness_plane=min_plane,
        nu_eigenvalues=all_eigs,
        det_nu=det_at_min,
        alpha=float(alpha),
        family=family.name,
        samples=samples,
    )
