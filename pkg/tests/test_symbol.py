import numpy as np
import pytest

from rg2lab.errors import ZeroVectorError
from rg2lab.families import (
    FlatFamily,
    HyperbolicFamily,
    ProductSpheresFamily,
    SphereFamily,
    builtin_families,
)
from rg2lab.geometry import curvature, frame_transform_tensor, orthonormal_frame
from rg2lab.symbol import (
    IndexMap,
    assemble_symbol,
    block_decompose,
    case_split_rows,
    classify_parabolicity,
    diagonalize_R1m1n,
    golden_nu_4d,
)


def _symbol_at(family, alpha, rng, xi=None):
    x = family.sample_point(rng)
    jet = family.jet(x)
    bundle = curvature(jet)
    if xi is None:
        xi = rng.normal(size=family.dim)
    return jet, bundle, assemble_symbol(jet, bundle, alpha, xi)


def test_index_map_ordering():
    imap = IndexMap(3)
    assert imap.pairs == ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))
    assert imap.size == 6
    assert imap.index(2, 0) == 2
    assert np.array_equal(imap.basis_matrix(1), np.array(
        [[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=float))


def test_flat_symbol_is_identity(rng):
    _, _, sym = _symbol_at(FlatFamily(4), 0.9, rng)
    assert np.abs(sym.sigma - np.eye(10)).max() <= 1e-12


def test_alpha_zero_symbol_is_identity(rng):
    for fam in (SphereFamily(3, 0.8), HyperbolicFamily(4, 1.1)):
        _, _, sym = _symbol_at(fam, 0.0, rng)
        N = sym.index_map.size
        assert np.abs(sym.sigma - np.eye(N)).max() <= 1e-12


def test_zero_direction_rejected(rng):
    fam = SphereFamily(3, 1.0)
    jet = fam.jet(fam.sample_point(rng))
    with pytest.raises(ZeroVectorError):
        assemble_symbol(jet, curvature(jet), 1.0, np.zeros(3))


def test_constant_curvature_nu_block(rng):
    """On S^n(r) the nu block is (1 + alpha/r^2) * identity."""
    alpha, r = 0.7, 1.3
    fam = SphereFamily(4, r)
    _, _, sym = _symbol_at(fam, alpha, rng)
    _, _, _, nu = block_decompose(sym)
    assert np.allclose(nu, (1 + alpha / r**2) * np.eye(6), atol=1e-10)


def test_block_structure_and_det(rng):
    for fam in builtin_families((3, 4)):
        for alpha in (-1.2, 0.4):
            _, _, sym = _symbol_at(fam, alpha, rng)
            block_decompose(sym)  # raises on mu != 0 or I-block failure
            det_ratio = np.linalg.det(sym.sigma) / np.linalg.det(sym.block_nu)
            assert det_ratio == pytest.approx(1.0, rel=1e-9), fam.name


def test_case_split_covers_all_rows(rng):
    _, _, sym = _symbol_at(SphereFamily(4, 1.0), 0.5, rng)
    c1, c2, c3 = case_split_rows(sym)
    n, N = sym.n, sym.index_map.size
    assert c1 == [0]
    assert len(c2) == n - 1
    assert len(c3) == N - n
    assert sorted(c1 + c2 + c3) == list(range(N))


def test_symbol_frame_invariance(rng):
    """The nu spectrum must not depend on the completion of the frame."""
    fam = ProductSpheresFamily(1.0, 2.0)
    x = fam.sample_point(rng)
    jet = fam.jet(x)
    bundle = curvature(jet)
    xi = rng.normal(size=4)
    s1 = assemble_symbol(jet, bundle, 0.9, xi)
    s2 = assemble_symbol(jet, bundle, 0.9, 3.7 * xi)
    e1 = np.sort(np.linalg.eigvals(s1.block_nu).real)
    e2 = np.sort(np.linalg.eigvals(s2.block_nu).real)
    assert np.allclose(e1, e2, atol=1e-10)


def test_golden_nu_matches_assembled(rng):
    for fam in (ProductSpheresFamily(1.0, 1.7), SphereFamily(4, 0.9),
                HyperbolicFamily(4, 1.2)):
        for alpha in (-0.8, 0.6):
            _, _, sym = _symbol_at(fam, alpha, rng)
            golden = golden_nu_4d(sym.riem_frame, alpha)
            assert np.abs(sym.block_nu - golden).max() <= 1e-12, fam.name


def test_diagonalization_kills_off_diagonal_nu(rng):
    fam = ProductSpheresFamily(1.0, 1.7)
    x = fam.sample_point(rng)
    jet = fam.jet(x)
    bundle = curvature(jet)
    frame = orthonormal_frame(jet, rng.normal(size=4))
    rot, kappa = diagonalize_R1m1n(jet, bundle, frame)
    Rf = frame_transform_tensor(bundle.riem_low, rot)
    from rg2lab.symbol import assemble_symbol_in_frame

    sym = assemble_symbol_in_frame(rot, Rf, 0.8)
    nu = sym.block_nu
    off = np.abs(nu - np.diag(np.diag(nu))).max()
    assert off <= 1e-9 * np.abs(nu).max()
    # diagonal entries are 1 + (alpha/2)(kappa_i + kappa_j) over pairs
    imap = sym.index_map
    for row in range(sym.n, imap.size):
        i, j = imap.pair(row)
        expect = 1 + 0.4 * (kappa[i - 1] + kappa[j - 1])
        assert nu[row - sym.n, row - sym.n] == pytest.approx(expect, abs=1e-10)


def test_classify_verdicts_constant_curvature():
    assert classify_parabolicity(SphereFamily(4, 1.0), 1.0).verdict == "parabolic"
    assert classify_parabolicity(SphereFamily(4, 1.0), -2.0).verdict == "backward_parabolic"
    assert classify_parabolicity(SphereFamily(4, 1.0), -1.0).verdict == "degenerate"
    assert classify_parabolicity(HyperbolicFamily(3, 1.0), 0.5).verdict == "parabolic"
    assert classify_parabolicity(HyperbolicFamily(3, 1.0), 2.0).verdict == "backward_parabolic"
    assert classify_parabolicity(FlatFamily(3), -5.0).verdict == "parabolic"


def test_classify_indefinite_on_mixed_curvature():
    rep = classify_parabolicity(ProductSpheresFamily(1.0, 1.0), -2.0)
    assert rep.verdict == "indefinite"
    assert rep.min_one_plus_alpha_K < 0 < rep.max_one_plus_alpha_K


def test_report_serialization_roundtrip():
    rep = classify_parabolicity(SphereFamily(3, 1.0), 0.5)
    text = rep.to_text()
    assert "verdict: parabolic" in text
    rows = rep.to_rows()
    assert rows and all("min_1pak" in r for r in rows)
