"""Built-in analytic metric families with exact 2-jets.

Every family can evaluate the metric, its first, and its second
coordinate derivatives exactly at any admissible chart point, which is
what the pointwise symbol analysis needs.  Spheres and hyperbolic
spaces use conformally flat charts (stereographic / Poincare ball);
torus families are periodic on [0, 2*pi)^n.
"""

from __future__ import annotations

import numpy as np

from .geometry import MetricJet2


class MetricFamily:
    """Base class: a named analytic family of metrics on a chart."""

    name: str = "?"
    dim: int = 0
    periodic: bool = False

    def jet(self, x: np.ndarray) -> MetricJet2:
        raise NotImplementedError

    def sample_point(self, rng: np.random.Generator) -> np.ndarray:
        """A random chart point safely inside the family's domain."""
        return rng.uniform(-0.5, 0.5, size=self.dim)

    def describe(self) -> str:
        return self.name


class FlatFamily(MetricFamily):
    def __init__(self, dim: int):
        self.dim = dim
        self.name = f"flat(n={dim})"

    def jet(self, x):
        n = self.dim
        return MetricJet2(np.eye(n), np.zeros((n, n, n)), np.zeros((n, n, n, n)))


class ConformallyFlatFamily(MetricFamily):
    """g = exp(2*phi(x)) * delta; subclasses supply the 2-jet of phi."""

    def phi_jet(self, x) -> tuple[float, np.ndarray, np.ndarray]:
        raise NotImplementedError

    def jet(self, x):
        x = np.asarray(x, dtype=float)
        n = self.dim
        phi, dphi, d2phi = self.phi_jet(x)
        f = np.exp(2.0 * phi)
        eye = np.eye(n)
        g = f * eye
        dg = 2.0 * f * np.einsum("k,ij->kij", dphi, eye)
        hess = 2.0 * d2phi + 4.0 * np.outer(dphi, dphi)
        d2g = f * np.einsum("kl,ij->klij", hess, eye)
        return MetricJet2(g, dg, d2g)


class SphereFamily(ConformallyFlatFamily):
    """Round sphere S^n of radius r in the stereographic chart (K = +1/r^2)."""

    def __init__(self, dim: int, r: float = 1.0):
        if r <= 0:
            raise ValueError("sphere radius must be positive")
        self.dim = dim
        self.r = float(r)
        self.name = f"sphere(n={dim}, r={r})"

    def phi_jet(self, x):
        r2 = self.r ** 2
        s = r2 + x @ x
        phi = np.log(2.0 * r2 / s)
        dphi = -2.0 * x / s
        d2phi = -2.0 * np.eye(self.dim) / s + 4.0 * np.outer(x, x) / s ** 2
        return phi, dphi, d2phi

    def sample_point(self, rng):
        return rng.uniform(-0.8, 0.8, size=self.dim) * self.r


class HyperbolicFamily(ConformallyFlatFamily):
    """Hyperbolic space H^n of curvature -1/r^2 in the Poincare ball chart."""

    def __init__(self, dim: int, r: float = 1.0):
        if r <= 0:
            raise ValueError("hyperbolic radius must be positive")
        self.dim = dim
        self.r = float(r)
        self.name = f"hyperbolic(n={dim}, r={r})"

    def phi_jet(self, x):
        r2 = self.r ** 2
        s = r2 - x @ x
        if s <= 0:
            raise ValueError("point outside the Poincare ball chart")
        phi = np.log(2.0 * r2 / s)
        dphi = 2.0 * x / s
        d2phi = 2.0 * np.eye(self.dim) / s + 4.0 * np.outer(x, x) / s ** 2
        return phi, dphi, d2phi

    def sample_point(self, rng):
        v = rng.uniform(-1.0, 1.0, size=self.dim)
        v *= 0.4 * self.r / max(np.linalg.norm(v), 1e-12) * rng.uniform(0.1, 1.0)
        return v


class ProductSpheresFamily(MetricFamily):
    """S^2(r1) x S^2(r2) as a block-diagonal metric on a 4-dimensional chart."""

    def __init__(self, r1: float = 1.0, r2: float = 1.0):
        self.dim = 4
        self.f1 = SphereFamily(2, r1)
        self.f2 = SphereFamily(2, r2)
        self.name = f"product_spheres(r1={r1}, r2={r2})"

    def jet(self, x):
        x = np.asarray(x, dtype=float)
        j1 = self.f1.jet(x[:2])
        j2 = self.f2.jet(x[2:])
        g = np.zeros((4, 4))
        dg = np.zeros((4, 4, 4))
        d2g = np.zeros((4, 4, 4, 4))
        g[:2, :2] = j1.g
        g[2:, 2:] = j2.g
        dg[:2, :2, :2] = j1.dg
        dg[2:, 2:, 2:] = j2.dg
        d2g[:2, :2, :2, :2] = j1.d2g
        d2g[2:, 2:, 2:, 2:] = j2.d2g
        return MetricJet2(g, dg, d2g)

    def sample_point(self, rng):
        return np.concatenate([self.f1.sample_point(rng), self.f2.sample_point(rng)])


class WarpedTorusFamily(MetricFamily):
    """Diagonal metric g_ii = exp(2*phi_i) on the torus, phi_i trigonometric."""

    periodic = True

    def __init__(self, dim: int, amplitude: float = 0.15, seed: int = 0):
        self.dim = dim
        self.amplitude = float(amplitude)
        self.seed = int(seed)
        rng = np.random.default_rng(seed)
        # phi_i(x) = sum_j a[i, j] * sin(x_j + p[i, j])
        self.a = rng.uniform(-1.0, 1.0, size=(dim, dim)) * amplitude / dim
        self.p = rng.uniform(0.0, 2.0 * np.pi, size=(dim, dim))
        self.name = f"warped_torus(n={dim}, amplitude={amplitude}, seed={seed})"

    def jet(self, x):
        x = np.asarray(x, dtype=float)
        n = self.dim
        s = np.sin(x[None, :] + self.p)
        c = np.cos(x[None, :] + self.p)
        phi = (self.a * s).sum(axis=1)                      # (n,)
        dphi = self.a * c                                   # dphi[i, k] = d_k phi_i
        f = np.exp(2.0 * phi)
        g = np.diag(f)
        dg = np.zeros((n, n, n))
        d2g = np.zeros((n, n, n, n))
        for i in range(n):
            dg[:, i, i] = 2.0 * dphi[i] * f[i]
            # d_k d_l phi_i = -a[i, k] * sin(x_k + p[i, k]) * delta_kl
            hess = np.diag(-self.a[i] * s[i])
            d2g[:, :, i, i] = (2.0 * hess + 4.0 * np.outer(dphi[i], dphi[i])) * f[i]
        return MetricJet2(g, dg, d2g)

    def sample_point(self, rng):
        return rng.uniform(0.0, 2.0 * np.pi, size=self.dim)


class BumpyFamily(MetricFamily):
    """Non-diagonal periodic perturbation of the flat metric.

    g(x) = I + sum_s B_s * sin(k_s . x + p_s) with symmetric B_s and
    integer wave vectors k_s, so the family is exact on the torus.
    """

    periodic = True

    def __init__(self, dim: int, eps: float = 0.1, seed: int = 0, modes: int = 3):
        self.dim = dim
        self.eps = float(eps)
        self.seed = int(seed)
        self.modes = int(modes)
        rng = np.random.default_rng(seed)
        bs = rng.uniform(-1.0, 1.0, size=(modes, dim, dim))
        self.B = (bs + bs.transpose(0, 2, 1)) * (eps / (2.0 * modes))
        self.k = rng.integers(-2, 3, size=(modes, dim)).astype(float)
        self.k[np.all(self.k == 0, axis=1)] = 1.0
        self.p = rng.uniform(0.0, 2.0 * np.pi, size=modes)
        self.name = f"bumpy(n={dim}, eps={eps}, seed={seed})"

    def jet(self, x):
        x = np.asarray(x, dtype=float)
        n = self.dim
        phase = self.k @ x + self.p
        s, c = np.sin(phase), np.cos(phase)
        g = np.eye(n) + np.einsum("s,sij->ij", s, self.B)
        dg = np.einsum("s,sk,sij->kij", c, self.k, self.B)
        d2g = -np.einsum("s,sk,sl,sij->klij", s, self.k, self.k, self.B)
        return MetricJet2(g, dg, d2g)

    def sample_point(self, rng):
        return rng.uniform(0.0, 2.0 * np.pi, size=self.dim)


FAMILY_NAMES = ("flat", "sphere", "hyperbolic", "product_spheres", "warped_torus", "bumpy")


def make_family(name: str, dim: int | None = None, **params) -> MetricFamily:
    """Construct a family by name; extra keyword arguments are parameters."""
    name = name.lower()
    if name == "flat":
        return FlatFamily(_need_dim(dim))
    if name == "sphere":
        return SphereFamily(_need_dim(dim), r=float(params.get("r", 1.0)))
    if name == "hyperbolic":
        return HyperbolicFamily(_need_dim(dim), r=float(params.get("r", 1.0)))
    if name == "product_spheres":
        return ProductSpheresFamily(
            r1=float(params.get("r1", 1.0)), r2=float(params.get("r2", 1.0))
        )
    if name == "warped_torus":
        return WarpedTorusFamily(
            _need_dim(dim),
            amplitude=float(params.get("amplitude", 0.15)),
            seed=int(params.get("seed", 0)),
        )
    if name == "bumpy":
        return BumpyFamily(
            _need_dim(dim),
            eps=float(params.get("eps", 0.1)),
            seed=int(params.get("seed", 0)),
            modes=int(params.get("modes", 3)),
        )
    raise ValueError(f"unknown metric family {name!r}; known: {FAMILY_NAMES}")


def _need_dim(dim):
    if dim is None:
        raise ValueError("this family needs an explicit dimension")
    if dim < 2:
        raise ValueError("dimension must be >= 2")
    return int(dim)


def builtin_families(dims=(2, 3, 4)) -> list[MetricFamily]:
    """A representative set of curved families, used by property tests."""
    fams: list[MetricFamily] = []
    for n in dims:
        fams.append(SphereFamily(n, r=1.0 + 0.25 * n))
        fams.append(HyperbolicFamily(n, r=1.5))
        fams.append(WarpedTorusFamily(n, seed=n))
        fams.append(BumpyFamily(n, seed=n))
    if 4 in dims:
        fams.append(ProductSpheresFamily(1.0, 1.7))
    return fams
