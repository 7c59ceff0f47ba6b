"""Time integration of the second-order flow in reduced settings.

Two settings are supported: the constant-curvature ansatz, where the
flow reduces to a scalar ODE for the metric scale, and periodic
coordinate grids in dimensions 2 and 3, where the gauge-modified flow
is discretized with 4th-order central stencils and classical RK4.
A monitor tracks the parabolicity quantity 1 + alpha*K along the run
and terminates with the trace intact when the hypothesis fails.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ParabolicityError, PositivityLossError
from .families import MetricFamily
from .geometry import MetricJet2, curvature
from .kernels import curvature_batch
from .symbol import assemble_symbol

STABILITY_SIGMA = 0.1


# ---------------------------------------------------------------------------
# constant-curvature ansatz
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnsatzState:
    """Constant-curvature metric g = c * g_unit evolving by scale only.

    family is 'sphere' (unit sectional curvature +1) or 'hyperbolic'
    (unit sectional curvature -1); the represented metric has sectional
    curvature sign/c.
    """

    family: str
    dim: int
    c: float
    t: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        if self.family not in ("sphere", "hyperbolic"):
            raise ValueError("ansatz family must be 'sphere' or 'hyperbolic'")
        if self.dim < 2:
            raise ValueError("dimension must be >= 2")

    @property
    def curvature_sign(self) -> float:
        return 1.0 if self.family == "sphere" else -1.0

    @property
    def sectional(self) -> float:
        """Sectional curvature of the represented metric (all planes)."""
        if self.c <= 0:
            raise PositivityLossError("metric scale is nonpositive", t=self.t)
        return self.curvature_sign / self.c


def ansatz_rhs(state: AnsatzState) -> float:
    """dc/dt for the scale ODE of the constant-curvature ansatz.

    With K = sign/c, Ric = (n-1)K g and Rm^2 = 2(n-1)K^2 g, so
    dc/dt = -2(n-1)*sign - alpha*(n-1)/c.
    """
    if state.c <= 0:
        raise PositivityLossError("metric scale is nonpositive", t=state.t)
    n1 = state.dim - 1
    return -2.0 * n1 * state.curvature_sign - state.alpha * n1 / state.c


def ricci_flow_sphere_scale(c0: float, dim: int, t) -> np.ndarray:
    """Closed-form round-sphere scale under the alpha = 0 flow."""
    return c0 - 2.0 * (dim - 1) * np.asarray(t, dtype=float)


def reference_ansatz_solution(state: AnsatzState, T: float,
                              rtol: float = 1e-12, atol: float = 1e-12):
    """High-accuracy adaptive integration of the scale ODE (reference).

    Returns a callable c(t) on [state.t, state.t + T]; integration stops
    early if c reaches zero.
    """
    from scipy.integrate import solve_ivp

    def rhs(t, y):
        return [ansatz_rhs(replace(state, c=float(y[0]), t=t))]

    def hit_zero(t, y):
        return y[0]

    hit_zero.terminal = True
    sol = solve_ivp(rhs, (state.t, state.t + T), [state.c], rtol=rtol,
                    atol=atol, dense_output=True, events=hit_zero,
                    method="DOP853")
    return lambda t: float(sol.sol(t)[0])


# ---------------------------------------------------------------------------
# periodic grids
# ---------------------------------------------------------------------------

def _d1(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    """4th-order periodic central first derivative along axis."""
    return (
        -np.roll(f, -2, axis) + 8.0 * np.roll(f, -1, axis)
        - 8.0 * np.roll(f, 1, axis) + np.roll(f, 2, axis)
    ) / (12.0 * h)


def _d2_same(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    """4th-order periodic central second derivative along one axis."""
    return (
        -np.roll(f, -2, axis) + 16.0 * np.roll(f, -1, axis) - 30.0 * f
        + 16.0 * np.roll(f, 1, axis) - np.roll(f, 2, axis)
    ) / (12.0 * h * h)


def tensor_field_jets(field_g: np.ndarray, n: int, h: float):
    """Coordinate 2-jets of a nodal tensor field by periodic stencils.

    field_g has shape grid_shape + (n, n); returns (dg, d2g) with shapes
    grid_shape + (n, n, n) / (n, n, n, n), derivative axes leading the
    tensor axes as in MetricJet2.
    """
    shape = field_g.shape[:-2]
    dg = np.empty(shape + (n, n, n))
    for k in range(n):
        dg[..., k, :, :] = _d1(field_g, k, h)
    d2g = np.empty(shape + (n, n, n, n))
    for k in range(n):
        for l in range(n):
            if k == l:
                d2g[..., k, l, :, :] = _d2_same(field_g, k, h)
            else:
                d2g[..., k, l, :, :] = _d1(dg[..., k, :, :], l, h)
    return dg, d2g


@dataclass
class GridState:
    """Metric field on a periodic grid [0, 2*pi)^n, n in {2, 3}.

    The background field u is fixed for the whole run; its coordinate
    derivative is cached because the gauge vector needs it every stage.
    """

    dim: int
    m: int
    metric: np.ndarray          # grid_shape + (n, n)
    u: np.ndarray               # grid_shape + (n, n), fixed
    t: float = 0.0
    alpha: float = 0.0
    _du: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError("grid flows support dimensions 2 and 3 only")
        shape = (self.m,) * self.dim + (self.dim, self.dim)
        if self.metric.shape != shape or self.u.shape != shape:
            raise ValueError(f"metric/u fields must have shape {shape}")

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi / self.m

    @property
    def nodes(self) -> int:
        return self.m ** self.dim

    def du(self) -> np.ndarray:
        if self._du is None:
            self._du, _ = tensor_field_jets(self.u, self.dim, self.spacing)
        return self._du

    def check_spd(self):
        """Raise PositivityLossError naming a bad node if any metric is not SPD."""
        flat = self.metric.reshape(-1, self.dim, self.dim)
        eigs = np.linalg.eigvalsh(0.5 * (flat + flat.transpose(0, 2, 1)))
        bad = np.nonzero(eigs[:, 0] <= 0.0)[0]
        if bad.size:
            idx = np.unravel_index(bad[0], (self.m,) * self.dim)
            raise PositivityLossError(
                f"nodal metric not positive definite at grid index {idx}",
                t=self.t,
            )

    def node_jet(self, idx) -> MetricJet2:
        """The discrete metric 2-jet at one grid index (stencil-accurate)."""
        dg, d2g = tensor_field_jets(self.metric, self.dim, self.spacing)
        return MetricJet2(self.metric[idx], dg[idx], d2g[idx])

    @classmethod
    def from_family(cls, family: MetricFamily, m: int, alpha: float = 0.0,
                    background: str = "initial") -> "GridState":
        """Sample a periodic family on an m^n grid; u defaults to g(0)."""
        if not family.periodic:
            raise ValueError("grid flows need a periodic metric family")
        n = family.dim
        axes = [np.arange(m) * (2.0 * np.pi / m)] * n
        mesh = np.meshgrid(*axes, indexing="ij")
        gfield = np.empty((m,) * n + (n, n))
        for idx in np.ndindex(*(m,) * n):
            x = np.array([mesh[a][idx] for a in range(n)])
            gfield[idx] = family.jet(x).g
        if background == "initial":
            ufield = gfield.copy()
        elif background == "flat":
            ufield = np.broadcast_to(np.eye(n), gfield.shape).copy()
        else:
            raise ValueError("background must be 'initial' or 'flat'")
        return cls(dim=n, m=m, metric=gfield, u=ufield, alpha=alpha)


def _grid_curvature(grid: GridState):
    """Batched (gamma, riem_low, ricci, rm_sq) over all nodes, plus jets."""
    n, h = grid.dim, grid.spacing
    dg, d2g = tensor_field_jets(grid.metric, n, h)
    B = grid.nodes
    gf = grid.metric.reshape(B, n, n)
    gamma, riem_low, ricci, rm_sq = curvature_batch(
        gf, dg.reshape(B, n, n, n), d2g.reshape(B, n, n, n, n)
    )
    return gamma, riem_low, ricci, rm_sq


def deturck_vector_field(grid: GridState, gamma: np.ndarray | None = None) -> np.ndarray:
    """Gauge vector W^i = -u^{il} g^{pq} (D_p u_ql - 1/2 D_l u_pq) per node.

    D is the Levi-Civita connection of the current g; equivalently W is
    g^{pq} (Gamma(g) - Gamma(u))^i_pq, so u = g gives W = 0 identically.
    """
    n = grid.dim
    B = grid.nodes
    gf = grid.metric.reshape(B, n, n)
    uf = grid.u.reshape(B, n, n)
    du = grid.du().reshape(B, n, n, n)
    if gamma is None:
        gamma = _grid_curvature(grid)[0]
    ginv = np.linalg.inv(gf)
    uinv = np.linalg.inv(uf)
    # Du[b, p, q, l] = d_p u_ql - G^s_pq u_sl - G^s_pl u_qs
    Du = (
        du
        - np.einsum("bspq,bsl->bpql", gamma, uf)
        - np.einsum("bspl,bqs->bpql", gamma, uf)
    )
    T = np.einsum("bpq,bpql->bl", ginv, Du) - 0.5 * np.einsum("bpq,blpq->bl", ginv, Du)
    W = -np.einsum("bil,bl->bi", uinv, T)
    return W.reshape(grid.metric.shape[:-1])


def grid_rhs(grid: GridState) -> np.ndarray:
    """Nodal right-hand side -2 Rc + L_W g - (alpha/2) Rm^2."""
    grid.check_spd()
    n, h = grid.dim, grid.spacing
    B = grid.nodes
    gamma, riem_low, ricci, rm_sq = _grid_curvature(grid)
    W = deturck_vector_field(grid, gamma).reshape(B, n)
    gf = grid.metric.reshape(B, n, n)
    # lowered gauge field and its coordinate derivative (same stencil)
    Wlow = np.einsum("bjk,bk->bj", gf, W).reshape(grid.metric.shape[:-1])
    shape = grid.metric.shape[:-2]
    dWlow = np.empty(shape + (n, n))
    for k in range(n):
        dWlow[..., k, :] = _d1(Wlow, k, h)
    dWlow = dWlow.reshape(B, n, n)
    # nabla_i W_j = d_i W_j - G^s_ij W_s
    covW = dWlow - np.einsum("bsij,bs->bij", gamma, Wlow.reshape(B, n))
    lie = covW + covW.transpose(0, 2, 1)
    rhs = -2.0 * ricci + lie - 0.5 * grid.alpha * rm_sq
    rhs = 0.5 * (rhs + rhs.transpose(0, 2, 1))
    return rhs.reshape(grid.metric.shape)


def stability_bound(grid: GridState, sigma: float = STABILITY_SIGMA) -> float:
    """Conservative explicit step bound dt <= sigma*h^2/(2n*max|1+alpha*K|)."""
    _, riem_low, _, _ = _grid_curvature(grid)
    _, vals = _grid_one_plus_alpha_K(grid, riem_low)
    scale = max(1.0, float(np.abs(vals).max()))
    return sigma * grid.spacing ** 2 / (2.0 * grid.dim * scale)


def step(state, dt: float):
    """One classical RK4 step of an AnsatzState or GridState."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if isinstance(state, AnsatzState):
        c, t = state.c, state.t
        k1 = ansatz_rhs(state)
        k2 = ansatz_rhs(replace(state, c=c + 0.5 * dt * k1, t=t + 0.5 * dt))
        k3 = ansatz_rhs(replace(state, c=c + 0.5 * dt * k2, t=t + 0.5 * dt))
        k4 = ansatz_rhs(replace(state, c=c + dt * k3, t=t + dt))
        c_new = c + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if c_new <= 0:
            raise PositivityLossError("metric scale reached zero", t=t + dt)
        return replace(state, c=c_new, t=t + dt)
    if isinstance(state, GridState):
        def at(gfield, tt):
            return GridState(dim=state.dim, m=state.m, metric=gfield,
                             u=state.u, t=tt, alpha=state.alpha,
                             _du=state._du)

        g0, t = state.metric, state.t
        state.du()  # cache once; shared by all stages via _du
        k1 = grid_rhs(at(g0, t))
        k2 = grid_rhs(at(g0 + 0.5 * dt * k1, t + 0.5 * dt))
        k3 = grid_rhs(at(g0 + 0.5 * dt * k2, t + 0.5 * dt))
        k4 = grid_rhs(at(g0 + dt * k3, t + dt))
        new = at(g0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), t + dt)
        new.check_spd()
        return new
    raise TypeError(f"cannot step a {type(state).__name__}")


# ---------------------------------------------------------------------------
# monitoring and traces
# ---------------------------------------------------------------------------

@dataclass
class TraceRecord:
    t: float
    summary: float              # scale c (ansatz) or min metric eigenvalue (grid)
    min_K: float
    max_K: float
    min_one_plus_alpha_K: float
    scalar_min: float
    scalar_max: float
    dt: float
    verdict: str

    FIELDS = ("t", "summary", "min_K", "max_K", "min_1_plus_alpha_K",
              "scalar_min", "scalar_max", "dt", "verdict")

    def row(self):
        return [self.t, self.summary, self.min_K, self.max_K,
                self.min_one_plus_alpha_K, self.scalar_min, self.scalar_max,
                self.dt, self.verdict]


@dataclass
class FlowTrace:
    """Diagnostics at monitoring times; t strictly increasing."""

    records: list[TraceRecord] = field(default_factory=list)
    terminated_reason: str = "completed"
    failure_time: float | None = None
    failure_location: str = ""

    def append(self, rec: TraceRecord):
        if self.records and rec.t <= self.records[-1].t:
            raise ValueError("trace times must be strictly increasing")
        self.records.append(rec)

    def to_csv(self, header_lines: list[str] | None = None) -> str:
        buf = io.StringIO()
        for line in header_lines or []:
            buf.write(f"# {line}\n")
        buf.write(f"# terminated: {self.terminated_reason}\n")
        if self.failure_time is not None:
            buf.write(f"# failure_time: {self.failure_time!r}\n")
            buf.write(f"# failure_location: {self.failure_location}\n")
        w = csv.writer(buf)
        w.writerow(TraceRecord.FIELDS)
        for rec in self.records:
            w.writerow(rec.row())
        return buf.getvalue()


def _grid_one_plus_alpha_K(grid: GridState, riem_low: np.ndarray):
    """Sectional curvatures of all coordinate planes at every node.

    Returns (K values, 1 + alpha*K values), each shaped (nodes, planes).
    """
    n = grid.dim
    B = grid.nodes
    gf = grid.metric.reshape(B, n, n)
    cols = []
    for a in range(n):
        for b in range(a + 1, n):
            num = riem_low[:, a, b, a, b]
            gram = gf[:, a, a] * gf[:, b, b] - gf[:, a, b] ** 2
            cols.append(num / gram)
    K = np.stack(cols, axis=1)
    return K, 1.0 + grid.alpha * K


def _quick_verdict(min_val: float, max_val: float, nu_eigs, tol: float) -> str:
    if min(abs(min_val), abs(max_val)) <= tol:
        return "degenerate"
    if min_val > 0.0 and all(e.real > 0.0 for e in nu_eigs):
        return "parabolic"
    if max_val < 0.0:
        return "backward_parabolic"
    return "indefinite"


def diagnose(state, tol: float = 1e-9, max_symbol_nodes: int = 8) -> TraceRecord:
    """One monitoring record: curvature extremes, 1+alpha*K, verdict."""
    if isinstance(state, AnsatzState):
        K = state.sectional
        n = state.dim
        val = 1.0 + state.alpha * K
        # all planes share K; the nu spectrum is 1 + (alpha/2)(K + K) on pairs
        nu_eigs = np.array([1.0 + state.alpha * K], dtype=complex)
        scalar = n * (n - 1) * K
        return TraceRecord(state.t, state.c, K, K, val, scalar, scalar, 0.0,
                           _quick_verdict(val, val, nu_eigs, tol))
    if isinstance(state, GridState):
        state.check_spd()
        n = state.dim
        B = state.nodes
        _, riem_low, ricci, _ = _grid_curvature(state)
        gf = state.metric.reshape(B, n, n)
        ginv = np.linalg.inv(gf)
        scal = np.einsum("bij,bij->b", ginv, ricci)
        K, vals = _grid_one_plus_alpha_K(state, riem_low)
        min_val, max_val = float(vals.min()), float(vals.max())
        # nu spectra from the assembled symbol at a few extremal nodes
        order = np.argsort(vals.min(axis=1))
        pick = list(dict.fromkeys(list(order[:max_symbol_nodes // 2])
                                  + list(order[-(max_symbol_nodes // 2):])))
        dg, d2g = tensor_field_jets(state.metric, n, state.spacing)
        dgf = dg.reshape(B, n, n, n)
        d2gf = d2g.reshape(B, n, n, n, n)
        eigs = []
        for b in pick:
            jet = MetricJet2(gf[b], dgf[b], d2gf[b])
            bundle = curvature(jet)
            for xi in np.eye(n):
                sym = assemble_symbol(jet, bundle, state.alpha, xi)
                eigs.extend(np.linalg.eigvals(sym.block_nu))
        min_eig = float(np.linalg.eigvalsh(gf).min())
        return TraceRecord(state.t, min_eig, float(K.min()), float(K.max()),
                           min_val, float(scal.min()), float(scal.max()), 0.0,
                           _quick_verdict(min_val, max_val, np.array(eigs), tol))
    raise TypeError(f"cannot diagnose a {type(state).__name__}")


def run_with_monitor(initial, T: float, dt: float, monitor_every: int = 10,
                     override: bool = False, tol: float = 1e-9):
    """Integrate to time T, recording diagnostics every monitor_every steps.

    The initial verdict must be parabolic unless override is given.
    Positivity or parabolicity loss terminates the run with the trace
    intact; the first failing time and location are recorded.
    """
    if dt <= 0 or T <= 0:
        raise ValueError("T and dt must be positive")
    trace = FlowTrace()
    rec = diagnose(initial, tol=tol)
    rec.dt = dt
    if rec.verdict != "parabolic" and not override:
        raise ParabolicityError(
            f"initial data verdict is {rec.verdict!r} "
            f"(min 1+alpha*K = {rec.min_one_plus_alpha_K!r}); "
            "pass override to proceed anyway"
        )
    trace.append(rec)
    state = initial
    n_steps = int(round(T / dt))
    final = state
    for k in range(1, n_steps + 1):
        try:
            state = step(state, dt)
        except PositivityLossError as exc:
            trace.terminated_reason = "positivity_loss"
            trace.failure_time = exc.t if exc.t is not None else state.t
            trace.failure_location = str(exc)
            return trace, final
        final = state
        if k % monitor_every == 0 or k == n_steps:
            rec = diagnose(state, tol=tol)
            rec.dt = dt
            trace.append(rec)
            if rec.min_one_plus_alpha_K <= tol:
                trace.terminated_reason = "parabolicity_loss"
                trace.failure_time = state.t
                trace.failure_location = (
                    f"min 1+alpha*K = {rec.min_one_plus_alpha_K!r}"
                )
                return trace, final
    return trace, final


# ---------------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------------

SNAPSHOT_MAGIC = "rg2lab-grid-snapshot"
SNAPSHOT_VERSION = 1


def save_grid_snapshot(path: str, grid: GridState):
    """Text dump: one header line (format, version, dim, m, t, alpha),
    then nodes rows of flattened g followed by nodes rows of flattened u."""
    n = grid.dim
    B = grid.nodes
    data = np.vstack([grid.metric.reshape(B, n * n), grid.u.reshape(B, n * n)])
    header = f"{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION} {n} {grid.m} {grid.t!r} {grid.alpha!r}"
    np.savetxt(path, data, header=header, comments="")


def load_grid_snapshot(path: str) -> GridState:
    with open(path) as fh:
        head = fh.readline().split()
        if head[:2] != [SNAPSHOT_MAGIC, str(SNAPSHOT_VERSION)]:
            raise ValueError(f"not a version-{SNAPSHOT_VERSION} grid snapshot: {path}")
        n, m = int(head[2]), int(head[3])
        t, alpha = float(head[4]), float(head[5])
        data = np.loadtxt(fh)
    B = m ** n
    shape = (m,) * n + (n, n)
    return GridState(dim=n, m=m, metric=data[:B].reshape(shape),
                     u=data[B:].reshape(shape), t=t, alpha=alpha)
