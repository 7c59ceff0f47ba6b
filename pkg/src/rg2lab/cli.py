"""Command-line front end.

Usage: rg2lab <command> --config <file> [--key value ...]

Commands: curvature, symbol, parabolicity, sweep, flow, verify.  The
config file is flat key=value text ('#' comments); any --key value pair
on the command line overrides the file.  Every output starts with
header lines recording the tool version, the effective config, the
seed, and the tolerances, so runs are reproducible from the file alone.

Exit codes: 0 success (and verdict parabolic for the parabolicity
command); 1 error; for parabolicity, 2 backward_parabolic,
3 degenerate, 4 indefinite.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .errors import RG2Error
from .families import make_family
from .geometry import Plane, curvature, sectional_curvature
from .symbol import assemble_symbol, classify_parabolicity
from . import flow as flow_mod
from . import oracle as oracle_mod

VERDICT_EXIT_CODES = {
    "parabolic": 0,
    "backward_parabolic": 2,
    "degenerate": 3,
    "indefinite": 4,
}


def parse_config_text(text: str) -> dict:
    """Flat key=value lines; '#' starts a comment; later keys win."""
    cfg = {}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {ln}: expected key=value, got {raw!r}")
        key, val = line.split("=", 1)
        cfg[key.strip()] = val.strip()
    return cfg


def load_config(path: str | None, overrides: list[str]) -> dict:
    cfg = {}
    if path:
        with open(path) as fh:
            cfg.update(parse_config_text(fh.read()))
    if len(overrides) % 2:
        raise ValueError("override arguments must come in --key value pairs")
    for key, val in zip(overrides[::2], overrides[1::2]):
        if not key.startswith("--"):
            raise ValueError(f"expected --key, got {key!r}")
        cfg[key[2:]] = val
    return cfg


def _get(cfg, key, default=None, cast=str):
    if key in cfg:
        return cast(cfg[key])
    if default is None:
        raise ValueError(f"missing required config key {key!r}")
    return default


def _family_from_config(cfg):
    name = _get(cfg, "family")
    dim = int(cfg["dim"]) if "dim" in cfg else None
    params = {k: cfg[k] for k in ("r", "r1", "r2", "amplitude", "eps", "seed", "modes")
              if k in cfg}
    return make_family(name, dim, **params)


def _header(cfg, command) -> list[str]:
    items = " ".join(f"{k}={v}" for k, v in sorted(cfg.items()))
    return [
        f"rg2lab {__version__}",
        f"command: {command}",
        f"config: {items}",
        f"seed: {cfg.get('seed_sampling', '0')}",
        f"tolerance: {cfg.get('tol', '1e-9')}",
    ]


def _emit(cfg, lines: list[str]):
    text = "\n".join(lines) + "\n"
    out = cfg.get("output", "-")
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def cmd_curvature(cfg) -> int:
    family = _family_from_config(cfg)
    rng = np.random.default_rng(int(cfg.get("seed_sampling", 0)))
    n_points = int(cfg.get("n_points", 5))
    n_planes = int(cfg.get("n_random_planes", 20))
    n = family.dim
    lines = ["# " + h for h in _header(cfg, "curvature")]
    lines.append("point,scalar,ric_eig_min,ric_eig_max,rmsq_eig_min,rmsq_eig_max,K_min,K_max")
    for _ in range(n_points):
        x = family.sample_point(rng)
        jet = family.jet(x)
        bundle = curvature(jet)
        ginv = jet.inverse()
        ric_eigs = np.linalg.eigvals(ginv @ bundle.ricci).real
        rm_eigs = np.linalg.eigvals(ginv @ bundle.rm_sq).real
        ks = []
        for a in range(n):
            for b in range(a + 1, n):
                ks.append(sectional_curvature(bundle, jet, Plane(np.eye(n)[a], np.eye(n)[b])))
        for _ in range(n_planes):
            u, v = rng.normal(size=(2, n))
            ks.append(sectional_curvature(bundle, jet, Plane(u, v)))
        lines.append(",".join(
            [" ".join(f"{c:.10g}" for c in x), f"{bundle.scalar:.12g}",
             f"{ric_eigs.min():.12g}", f"{ric_eigs.max():.12g}",
             f"{rm_eigs.min():.12g}", f"{rm_eigs.max():.12g}",
             f"{min(ks):.12g}", f"{max(ks):.12g}"]))
    _emit(cfg, lines)
    return 0


def cmd_symbol(cfg) -> int:
    family = _family_from_config(cfg)
    alpha = float(_get(cfg, "alpha"))
    rng = np.random.default_rng(int(cfg.get("seed_sampling", 0)))
    x = family.sample_point(rng)
    xi = rng.normal(size=family.dim)
    jet = family.jet(x)
    sym = assemble_symbol(jet, curvature(jet), alpha, xi)
    nu = sym.block_nu
    lines = ["# " + h for h in _header(cfg, "symbol")]
    lines += [
        f"# point: {np.array2string(x, precision=8)}",
        f"# xi: {np.array2string(xi, precision=8)}",
        "sigma:",
        np.array2string(sym.sigma, precision=10, max_line_width=200),
        "nu_block:",
        np.array2string(nu, precision=10, max_line_width=200),
        f"det_sigma: {float(np.linalg.det(sym.sigma))!r}",
        f"det_nu: {float(np.linalg.det(nu))!r}",
        "nu_eigenvalues: "
        + " ".join(f"{e:.10g}" for e in np.linalg.eigvals(nu)),
    ]
    _emit(cfg, lines)
    return 0


def _classifier_kwargs(cfg):
    return dict(
        n_points=int(cfg.get("n_points", 4)),
        n_directions=int(cfg.get("n_directions", 3)),
        n_random_planes=int(cfg.get("n_random_planes", 12)),
        seed=int(cfg.get("seed_sampling", 0)),
        tol=float(cfg.get("tol", 1e-9)),
    )


def cmd_parabolicity(cfg) -> int:
    family = _family_from_config(cfg)
    alpha = float(_get(cfg, "alpha"))
    report = classify_parabolicity(family, alpha, **_classifier_kwargs(cfg))
    lines = ["# " + h for h in _header(cfg, "parabolicity")]
    lines.append(report.to_text().rstrip("\n"))
    _emit(cfg, lines)
    return VERDICT_EXIT_CODES[report.verdict]


def sweep_alpha(family, alphas, kwargs, bisect_tol=1e-6):
    """min(1+alpha*K) per alpha plus bisection-located sign changes.

    The sampled points are fixed once so the scan is a deterministic
    function of alpha.
    """
    rng = np.random.default_rng(kwargs.get("seed", 0))
    points = [family.sample_point(rng) for _ in range(kwargs.get("n_points", 4))]
    kw = dict(kwargs)
    kw.pop("n_points", None)

    reports = [classify_parabolicity(family, a, points=points, **kw) for a in alphas]

    def min_val(a):
        return classify_parabolicity(family, a, points=points, **kw).min_one_plus_alpha_K

    thresholds = []
    for a0, a1, r0, r1 in zip(alphas, alphas[1:], reports, reports[1:]):
        v0, v1 = r0.min_one_plus_alpha_K, r1.min_one_plus_alpha_K
        if v0 == 0.0:
            thresholds.append(a0)
            continue
        if v0 * v1 < 0.0:
            lo, hi, vlo = a0, a1, v0
            while hi - lo > bisect_tol:
                mid = 0.5 * (lo + hi)
                vm = min_val(mid)
                if vm == 0.0:
                    lo = hi = mid
                    break
                if vlo * vm < 0.0:
                    hi = mid
                else:
                    lo, vlo = mid, vm
            thresholds.append(0.5 * (lo + hi))
    return reports, thresholds


def cmd_sweep(cfg) -> int:
    family = _family_from_config(cfg)
    a0 = float(_get(cfg, "alpha_min"))
    a1 = float(_get(cfg, "alpha_max"))
    count = int(cfg.get("alpha_count", 21))
    if count < 2 or not a1 > a0:
        raise ValueError("sweep needs alpha_min < alpha_max and alpha_count >= 2")
    alphas = np.linspace(a0, a1, count)
    reports, thresholds = sweep_alpha(family, alphas, _classifier_kwargs(cfg))
    lines = ["# " + h for h in _header(cfg, "sweep")]
    for th in thresholds:
        lines.append(f"# threshold_alpha: {float(th)!r}")
    lines.append("alpha,verdict,min_1_plus_alpha_K,min_re_nu_eig,max_re_nu_eig")
    for a, rep in zip(alphas, reports):
        res = [e.real for e in rep.nu_eigenvalues]
        lines.append(f"{a:.12g},{rep.verdict},{rep.min_one_plus_alpha_K:.12g},"
                     f"{min(res):.12g},{max(res):.12g}")
    _emit(cfg, lines)
    return 0


def cmd_flow(cfg) -> int:
    setting = cfg.get("setting", "ansatz")
    alpha = float(_get(cfg, "alpha"))
    T = float(_get(cfg, "T"))
    dt = float(_get(cfg, "dt"))
    monitor_every = int(cfg.get("monitor_every", 10))
    override = cfg.get("override", "0") not in ("0", "false", "no", "")
    if setting == "ansatz":
        state = flow_mod.AnsatzState(
            family=_get(cfg, "family"), dim=int(_get(cfg, "dim")),
            c=float(cfg.get("c0", 1.0)), alpha=alpha,
        )
    elif setting == "grid":
        family = _family_from_config(cfg)
        state = flow_mod.GridState.from_family(
            family, int(cfg.get("m", 16)), alpha=alpha,
            background=cfg.get("background", "initial"),
        )
    else:
        raise ValueError("setting must be 'ansatz' or 'grid'")
    trace, final = flow_mod.run_with_monitor(
        state, T=T, dt=dt, monitor_every=monitor_every, override=override,
        tol=float(cfg.get("tol", 1e-9)),
    )
    text = trace.to_csv(header_lines=_header(cfg, "flow"))
    out = cfg.get("output", "-")
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)
    snap = cfg.get("snapshot", "")
    if snap and isinstance(final, flow_mod.GridState):
        flow_mod.save_grid_snapshot(snap, final)
    return 0


def run_verification_suite(family, alpha: float, seed: int = 0,
                           corrupt_sign: bool = False):
    """Cross-check the fast paths against the naive/FD oracles.

    Returns a list of (check name, residual, bound, passed).  The
    corrupt_sign hook deliberately flips one curvature block before the
    symmetry check, as a negative control that the check can fail.
    """
    rng = np.random.default_rng(seed)
    checks = []

    def add(name, residual, bound):
        checks.append((name, float(residual), float(bound), float(residual) <= bound))

    x = family.sample_point(rng)
    jet = family.jet(x)
    bundle = curvature(jet)

    riem = bundle.riem_low
    if corrupt_sign:
        riem = riem.copy()
        riem[0, 1] = -riem[0, 1]
    scale = max(np.abs(riem).max(), 1e-30)
    anti1 = np.abs(riem + riem.transpose(1, 0, 2, 3)).max() / scale
    anti2 = np.abs(riem + riem.transpose(0, 1, 3, 2)).max() / scale
    pair = np.abs(riem - riem.transpose(2, 3, 0, 1)).max() / scale
    bianchi = np.abs(riem + riem.transpose(0, 2, 3, 1)
                     + riem.transpose(0, 3, 1, 2)).max() / scale
    add("riemann_antisymmetry_first_pair", anti1, 1e-9)
    add("riemann_antisymmetry_second_pair", anti2, 1e-9)
    add("riemann_pair_symmetry", pair, 1e-9)
    add("riemann_first_bianchi", bianchi, 1e-9)

    naive_rm = oracle_mod.naive_rm_sq(jet)
    rm_scale = max(np.abs(bundle.rm_sq).max(), 1e-30)
    add("rm_sq_vs_naive_loops", np.abs(naive_rm - bundle.rm_sq).max() / rm_scale, 1e-12)
    ric_scale = max(np.abs(bundle.ricci).max(), 1e-30)
    add("ricci_vs_naive_loops",
        np.abs(oracle_mod.naive_ricci(jet) - bundle.ricci).max() / ric_scale, 1e-12)

    h = rng.normal(size=(family.dim,) * 2)
    h = h + h.T
    from .linearize import d_inverse_metric
    fd = oracle_mod.fd_variation("inverse_metric", jet, h)
    add("inverse_metric_variation_fd", np.abs(fd - d_inverse_metric(h, jet)).max(), 1e-10)

    xi = rng.normal(size=family.dim)
    sym0 = oracle_mod.symbol_from_plane_waves(family, x, 0.0, xi)
    add("symbol_alpha0_identity", np.abs(sym0 - np.eye(sym0.shape[0])).max(), 2e-2)
    syma = oracle_mod.symbol_from_plane_waves(family, x, alpha, xi)
    assembled = assemble_symbol(jet, bundle, alpha, xi).sigma
    add("symbol_plane_wave_vs_assembled", np.abs(syma - assembled).max(), 2e-2)
    return checks


def cmd_verify(cfg) -> int:
    family = _family_from_config(cfg)
    alpha = float(cfg.get("alpha", 0.5))
    checks = run_verification_suite(
        family, alpha, seed=int(cfg.get("seed_sampling", 0)),
        corrupt_sign=cfg.get("corrupt_sign", "0") not in ("0", "false", "no", ""),
    )
    lines = ["# " + h for h in _header(cfg, "verify")]
    lines.append("check,residual,bound,status")
    ok = True
    for name, residual, bound, passed in checks:
        ok &= passed
        lines.append(f"{name},{residual:.6g},{bound:.6g},{'pass' if passed else 'FAIL'}")
    lines.append(f"# overall: {'pass' if ok else 'FAIL'}")
    _emit(cfg, lines)
    return 0 if ok else 1


COMMANDS = {
    "curvature": cmd_curvature,
    "symbol": cmd_symbol,
    "parabolicity": cmd_parabolicity,
    "sweep": cmd_sweep,
    "flow": cmd_flow,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="rg2lab",
        description="Curvature, flow-symbol, and parabolicity analysis tools.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", default=None, help="key=value config file")
    parser.add_argument("overrides", nargs=argparse.REMAINDER,
                        help="--key value pairs overriding the config file")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides)
        return COMMANDS[args.command](cfg)
    except (RG2Error, ValueError, OSError) as exc:
        print(f"rg2lab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
