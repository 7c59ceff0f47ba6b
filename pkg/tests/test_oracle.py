import numpy as np
import pytest

from rg2lab.families import BumpyFamily, FlatFamily, SphereFamily
from rg2lab.geometry import curvature
from rg2lab.oracle import (
    PlaneWavePerturbation,
    fd_convergence_order,
    naive_contractions,
    naive_deturck_vector,
    naive_flow_rhs,
    naive_ricci,
    naive_riemann_low,
    naive_rm_sq,
    symbol_from_plane_waves,
)
from rg2lab.symbol import assemble_symbol

from conftest import random_spd_jet


def test_plane_wave_second_derivative_at_crest(rng):
    h0 = np.diag([1.0, 2.0, 3.0])
    xi = rng.normal(size=3)
    lam = 16.0
    x0 = rng.normal(size=3)
    wave = PlaneWavePerturbation(h0, xi, lam, x0)
    h, dh, d2h = wave.jets(x0)
    assert np.allclose(h, h0)
    assert np.abs(dh).max() < 1e-14
    expect = -lam**2 * np.einsum("p,q,ab->pqab", xi, xi, h0)
    assert np.allclose(d2h, expect, atol=1e-10)


def test_naive_matches_fast_paths(rng):
    """Naive loop implementations agree with the einsum paths."""
    for fam in (SphereFamily(3, 1.1), BumpyFamily(3, seed=9)):
        jet = fam.jet(fam.sample_point(rng))
        b = curvature(jet)
        assert np.allclose(naive_riemann_low(jet), b.riem_low, atol=1e-12)
        assert np.allclose(naive_ricci(jet), b.ricci, atol=1e-12)
        assert np.allclose(naive_rm_sq(jet), b.rm_sq, atol=1e-12)
        assert np.allclose(naive_contractions(b, jet), b.rm_sq, atol=1e-12)


def test_naive_rm_sq_random_jet_relative(rng):
    jet = random_spd_jet(rng, 4)
    b = curvature(jet)
    scale = max(np.abs(b.rm_sq).max(), 1e-30)
    assert np.abs(naive_rm_sq(jet) - b.rm_sq).max() / scale < 1e-12


def test_naive_rm_sq_sphere_closed_form(rng):
    r = 1.4
    fam = SphereFamily(3, r)
    jet = fam.jet(fam.sample_point(rng))
    assert np.allclose(naive_rm_sq(jet), 4.0 / r**4 * jet.g, rtol=1e-10)


def test_deturck_vector_vanishes_when_u_equals_g(rng):
    fam = BumpyFamily(3, seed=2)
    x = fam.sample_point(rng)
    jet = fam.jet(x)
    W = naive_deturck_vector(jet, jet)
    assert np.abs(W).max() < 1e-13


def test_deturck_vector_flat_constant_background():
    n = 3
    from rg2lab.geometry import MetricJet2

    flat = MetricJet2(np.eye(n), np.zeros((n, n, n)), np.zeros((n, n, n, n)))
    u = MetricJet2(np.diag([1.0, 2.0, 3.0]), np.zeros((n, n, n)), np.zeros((n, n, n, n)))
    assert np.abs(naive_deturck_vector(flat, u)).max() < 1e-14


def test_flow_rhs_flat_fixed_point():
    fam = FlatFamily(2)
    rhs = naive_flow_rhs(fam.jet, fam.jet, np.zeros(2), alpha=0.8)
    assert np.abs(rhs).max() < 1e-9


def test_fd_convergence_order(rng):
    fam = SphereFamily(3, 1.0)
    jet = fam.jet(fam.sample_point(rng))
    h = rng.normal(size=(3, 3))
    h = 0.5 * (h + h.T)
    assert fd_convergence_order("rm_sq", jet, h) >= 1.9


def test_symbol_from_plane_waves_flat(rng):
    fam = FlatFamily(3)
    sig = symbol_from_plane_waves(fam, np.zeros(3), 0.7, rng.normal(size=3))
    assert np.abs(sig - np.eye(6)).max() < 1e-4


def test_symbol_from_plane_waves_alpha_zero_curved(rng):
    fam = SphereFamily(3, 1.2)
    x0 = fam.sample_point(rng)
    sig = symbol_from_plane_waves(fam, x0, 0.0, rng.normal(size=3))
    assert np.abs(sig - np.eye(6)).max() < 2e-2


def test_symbol_from_plane_waves_matches_assembled(rng):
    fam = SphereFamily(3, 1.2)
    x0 = fam.sample_point(rng)
    xi = rng.normal(size=3)
    alpha = 0.8
    sig = symbol_from_plane_waves(fam, x0, alpha, xi)
    jet = fam.jet(x0)
    sym = assemble_symbol(jet, curvature(jet), alpha, xi)
    assert np.abs(sig - sym.sigma).max() < 2e-2
