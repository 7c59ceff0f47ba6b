"""Acceptance suite: one test per top-level correctness criterion.

Each test prints a single [PASS]/[FAIL] line (use pytest -s to see them
on success) and enforces the stated numerical tolerance and runtime
budget.
"""

import time

import numpy as np
import pytest

from rg2lab.cli import sweep_alpha
from rg2lab.families import (
    BumpyFamily,
    FlatFamily,
    HyperbolicFamily,
    ProductSpheresFamily,
    SphereFamily,
    WarpedTorusFamily,
    builtin_families,
)
from rg2lab.flow import (
    AnsatzState,
    GridState,
    grid_rhs,
    reference_ansatz_solution,
    ricci_flow_sphere_scale,
    step,
    tensor_field_jets,
)
from rg2lab.geometry import (
    MetricJet2,
    Plane,
    curvature,
    orthonormal_frame,
    riemann_symmetry_residuals,
    sectional_curvature,
)
from rg2lab.kernels import curvature_batch
from rg2lab.oracle import symbol_from_plane_waves
from rg2lab.symbol import (
    assemble_symbol,
    assemble_symbol_in_frame,
    diagonalize_R1m1n,
    golden_nu_4d,
)
from rg2lab.geometry import frame_transform_tensor


def _report(name: str, ok: bool, detail: str):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_acceptance_curvature_correctness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    worst = 0.0
    for n in (2, 3, 4):
        for r in (0.5, 1.0, 2.0):
            fam = SphereFamily(n, r)
            K = 1.0 / r**2
            jet = fam.jet(fam.sample_point(rng))
            b = curvature(jet)
            worst = max(worst, abs(b.scalar - n * (n - 1) * K) / (n * (n - 1) * K))
            worst = max(worst, np.abs(b.ricci / ((n - 1) * K) - jet.g).max()
                        / np.abs(jet.g).max())
            worst = max(worst, np.abs(b.rm_sq / (2 * (n - 1) * K**2) - jet.g).max()
                        / np.abs(jet.g).max())
            for _ in range(5):
                u, v = rng.normal(size=(2, n))
                kp = sectional_curvature(b, jet, Plane(u, v))
                worst = max(worst, abs(kp - K) / K)
    dt = time.perf_counter() - t0
    _report("curvature correctness", worst <= 1e-9 and dt < 1.0,
            f"max rel err {worst:.2e}, {dt:.2f}s")


def test_acceptance_riemann_symmetry_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    fams = builtin_families((2, 3, 4))
    worst = 0.0
    count = 0
    while count < 100:
        fam = fams[count % len(fams)]
        jet = fam.jet(fam.sample_point(rng))
        res = riemann_symmetry_residuals(curvature(jet))
        worst = max(worst, max(res.values()))
        count += 1
    dt = time.perf_counter() - t0
    _report("riemann symmetry suite", worst <= 1e-9 and dt < 5.0,
            f"100 points, max residual {worst:.2e}, {dt:.2f}s")


def test_acceptance_symbol_identity_cases():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    for fam in (SphereFamily(3, 0.7), HyperbolicFamily(4, 1.3), BumpyFamily(3, seed=2)):
        jet = fam.jet(fam.sample_point(rng))
        sym = assemble_symbol(jet, curvature(jet), 0.0, rng.normal(size=fam.dim))
        worst = max(worst, np.abs(sym.sigma - np.eye(sym.index_map.size)).max())
    for alpha in (-2.0, 0.0, 1.5):
        fam = FlatFamily(4)
        jet = fam.jet(np.zeros(4))
        sym = assemble_symbol(jet, curvature(jet), alpha, rng.normal(size=4))
        worst = max(worst, np.abs(sym.sigma - np.eye(10)).max())
    dt = time.perf_counter() - t0
    _report("symbol identity cases", worst <= 1e-12 and dt < 1.0,
            f"max deviation {worst:.2e}, {dt:.2f}s")


def test_acceptance_block_structure():
    rng = np.random.default_rng(3)
    worst_mu, worst_eye, worst_det = 0.0, 0.0, 0.0
    draws = 0
    while draws < 200:
        n = (3, 4, 5)[draws % 3]
        fam = (SphereFamily(n, 1.0 + 0.3 * (draws % 4)),
               HyperbolicFamily(n, 1.2),
               WarpedTorusFamily(n, seed=draws),
               BumpyFamily(n, seed=draws))[draws % 4]
        jet = fam.jet(fam.sample_point(rng))
        alpha = rng.uniform(-2.0, 2.0)
        sym = assemble_symbol(jet, curvature(jet), alpha, rng.normal(size=n))
        scale = np.abs(sym.sigma).max()
        if sym.block_mu.size:
            worst_mu = max(worst_mu, np.abs(sym.block_mu).max() / scale)
        worst_eye = max(worst_eye, np.abs(sym.block_identity - np.eye(n)).max())
        det_s, det_n = np.linalg.det(sym.sigma), np.linalg.det(sym.block_nu)
        worst_det = max(worst_det, abs(det_s - det_n) / max(abs(det_n), 1e-30))
        draws += 1
    ok = worst_mu <= 1e-12 and worst_eye <= 1e-12 and worst_det <= 1e-10
    _report("block structure", ok,
            f"200 draws: mu {worst_mu:.2e}, identity {worst_eye:.2e}, "
            f"det {worst_det:.2e}")


def test_acceptance_golden_4d_matrix():
    rng = np.random.default_rng(4)
    worst_gold, worst_off = 0.0, 0.0
    for fam in builtin_families((4,)):
        if fam.dim != 4:
            continue
        for alpha in (-1.1, 0.8):
            x = fam.sample_point(rng)
            jet = fam.jet(x)
            bundle = curvature(jet)
            sym = assemble_symbol(jet, bundle, alpha, rng.normal(size=4))
            golden = golden_nu_4d(sym.riem_frame, alpha)
            worst_gold = max(worst_gold, np.abs(sym.block_nu - golden).max())
            frame = orthonormal_frame(jet, rng.normal(size=4))
            rot, _ = diagonalize_R1m1n(jet, bundle, frame)
            Rf = frame_transform_tensor(bundle.riem_low, rot)
            nu = assemble_symbol_in_frame(rot, Rf, alpha).block_nu
            off = np.abs(nu - np.diag(np.diag(nu))).max()
            worst_off = max(worst_off, off / np.abs(nu).max())
    ok = worst_gold <= 1e-12 and worst_off <= 1e-9
    _report("4D golden matrix", ok,
            f"entrywise {worst_gold:.2e}, off-diagonal after rotation {worst_off:.2e}")


def test_acceptance_threshold_criterion():
    cases = [
        (SphereFamily(3, 1.0), 1.0, (-2.0, 0.0)),
        (SphereFamily(3, 2.0), 0.25, (-5.0, -3.0)),
        (HyperbolicFamily(3, 1.0), -1.0, (0.0, 2.0)),
        (HyperbolicFamily(3, 2.0), -0.25, (3.0, 5.0)),
    ]
    kwargs = dict(n_points=3, n_directions=2, n_random_planes=6, seed=0, tol=1e-12)
    worst, slowest = 0.0, 0.0
    for fam, K, (a0, a1) in cases:
        t0 = time.perf_counter()
        _, thresholds = sweep_alpha(fam, np.linspace(a0, a1, 9), dict(kwargs))
        slowest = max(slowest, time.perf_counter() - t0)
        assert len(thresholds) == 1, fam.name
        worst = max(worst, abs(thresholds[0] - (-1.0 / K)))
    _report("threshold criterion", worst <= 1e-6 and slowest < 10.0,
            f"max |alpha* + 1/K| = {worst:.2e}, slowest sweep {slowest:.2f}s")


def test_acceptance_plane_wave_symbol_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    worst = 0.0
    for fam, alpha in [
        (SphereFamily(3, 1.2), 0.8),
        (HyperbolicFamily(3, 1.5), -0.6),
        (BumpyFamily(3, seed=3), 0.7),
        (ProductSpheresFamily(1.0, 1.7), 0.6),
    ]:
        x0 = fam.sample_point(rng)
        xi = rng.normal(size=fam.dim)
        sig = symbol_from_plane_waves(fam, x0, alpha, xi)
        jet = fam.jet(x0)
        sym = assemble_symbol(jet, curvature(jet), alpha, xi)
        worst = max(worst, np.abs(sig - sym.sigma).max())
    dt = time.perf_counter() - t0
    _report("plane-wave symbol oracle", worst <= 2e-2 and dt < 60.0,
            f"max entry mismatch {worst:.2e}, {dt:.1f}s")


def test_acceptance_flow_oracle():
    t0 = time.perf_counter()
    # alpha = 0: exact linear law
    s = AnsatzState("sphere", 4, 1.0, alpha=0.0)
    for _ in range(100):
        s = step(s, 1e-3)
    err0 = abs(s.c - ricci_flow_sphere_scale(1.0, 4, 0.1))
    # alpha != 0 over unit time against an adaptive reference integration
    s0 = AnsatzState("sphere", 3, 10.0, alpha=0.4)
    ref = reference_ansatz_solution(s0, 1.0)
    s = s0
    for _ in range(1000):
        s = step(s, 1e-3)
    err1 = abs(s.c - ref(1.0))
    s0 = AnsatzState("hyperbolic", 3, 1.0, alpha=0.5)
    ref = reference_ansatz_solution(s0, 1.0)
    s = s0
    for _ in range(1000):
        s = step(s, 1e-3)
    err2 = abs(s.c - ref(1.0))
    dt = time.perf_counter() - t0
    ok = err0 <= 1e-10 and max(err1, err2) <= 1e-8 and dt < 1.0
    _report("flow oracle", ok,
            f"closed form {err0:.2e}, reference {max(err1, err2):.2e}, {dt:.2f}s")


def test_acceptance_grid_consistency():
    # warm up the compiled kernel outside the budget
    curvature_batch(np.eye(2)[None], np.zeros((1, 2, 2, 2)), np.zeros((1, 2, 2, 2, 2)))
    t0 = time.perf_counter()
    fam = WarpedTorusFamily(2, seed=4)
    alpha = 0.6
    # exact pointwise values at the 16x16 common node set
    base = 16
    exact = {}
    for idx in np.ndindex(base, base):
        x = np.array(idx) * (2 * np.pi / base)
        b = curvature(fam.jet(x))
        exact[idx] = -2 * b.ricci - 0.5 * alpha * b.rm_sq
    errs = []
    for m in (16, 32, 64):
        grid = GridState.from_family(fam, m, alpha=alpha)
        r = grid_rhs(grid)
        stride = m // base
        err = max(
            np.abs(r[i * stride, j * stride] - exact[(i, j)]).max()
            for i, j in np.ndindex(base, base)
        )
        errs.append(err)
    slopes = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    slope_ok = slopes.min() >= 3.7

    # single-mode linearized response vs the assembled symbol action
    m = 256
    h = 2 * np.pi / m
    x1 = (np.arange(m) * h)[:, None] * np.ones((1, m))
    rng = np.random.default_rng(6)
    h0 = rng.normal(size=(2, 2))
    h0 = 0.5 * (h0 + h0.T)
    flat_jet = MetricJet2(np.eye(2), np.zeros((2, 2, 2)), np.zeros((2, 2, 2, 2)))
    sym = assemble_symbol(flat_jet, curvature(flat_jet), alpha, np.array([1.0, 0.0]))
    target = np.zeros((2, 2))
    for row in range(sym.index_map.size):
        i, j = sym.index_map.pair(row)
        val = sum(sym.sigma[row, col] * h0[sym.index_map.pair(col)]
                  for col in range(sym.index_map.size))
        target[i, j] = target[j, i] = val
    mode_errs = []
    for lam in (8, 16, 32):
        eps = 1e-3 / lam**2
        wave = np.cos(lam * x1)
        gfield = np.broadcast_to(np.eye(2), (m, m, 2, 2)).copy()
        gfield += eps * wave[..., None, None] * h0
        ufield = np.broadcast_to(np.eye(2), (m, m, 2, 2)).copy()
        grid = GridState(dim=2, m=m, metric=gfield, u=ufield, alpha=alpha)
        r = grid_rhs(grid)
        response = -r[0, 0] / (lam**2 * eps)   # crest node x = 0
        mode_errs.append((lam, np.abs(response - target).max()))
    mode_ok = all(err <= 1.0 / lam for lam, err in mode_errs)
    dt = time.perf_counter() - t0
    _report("grid consistency", slope_ok and mode_ok and dt < 120.0,
            f"stencil slopes {np.round(slopes, 2)}, mode errors "
            + " ".join(f"{lam}:{err:.2e}" for lam, err in mode_errs)
            + f", {dt:.1f}s")
