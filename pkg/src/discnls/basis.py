"""Radial Dirichlet eigenbasis of the unit disc and the spectral transforms.

The basis functions are e_n(r) = J0(lam_n r) / ||J0(lam_n .)||_{L2(D)} with
lam_n the n-th zero of J0, orthonormal for the plain Lebesgue measure on the
disc.  Radial integrals are evaluated with a Gauss-Legendre rule on (0,1)
carrying the 2*pi*r area factor in its weights; the node count is sized so
that products of up to `product_order` basis functions are integrated to
1e-10 or better.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import caching
from .bessel import eigenvalues

__all__ = [
    "EigenMode",
    "QuadratureRule",
    "SpectralBasis",
    "SpectralField",
    "build_basis",
    "quadrature_size",
    "synthesize",
    "analyze",
    "lp_norm",
    "mode_mask",
    "save_basis",
    "load_basis",
]


@dataclass(frozen=True)
class EigenMode:
    """One radial mode: index n, frequency lam (n-th J0 zero), J0 L2 norm."""

    index: int
    lam: float
    j0_l2_norm: float


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes/weights approximating integrals over the unit disc of radial functions.

    weights include the area factor: sum_i w_i f(r_i) ~ 2*pi*int_0^1 f(r) r dr.
    """

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def node_count(self) -> int:
        return self.nodes.size

    def integrate(self, values: np.ndarray):
        return values @ self.weights


def quadrature_size(mode_count: int, product_order: int) -> int:
    # resolves the oscillation of products of up to product_order modes
    return max(64, 3 * product_order * mode_count)


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Sampled eigenbasis: mode table, disc quadrature and the value matrix e_n(r_i)."""

    modes: tuple[EigenMode, ...]
    quad: QuadratureRule
    values: np.ndarray  # (mode_count, node_count)
    product_order: int
    lam: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(
            self, "lam", np.array([m.lam for m in self.modes], dtype=float)
        )
        self.lam.setflags(write=False)

    @property
    def mode_count(self) -> int:
        return len(self.modes)

    def evaluate_modes(self, radii, indices=None) -> np.ndarray:
        """e_n at arbitrary radii in [0, 1]; rows follow `indices` (default: all)."""
        radii = np.asarray(radii, dtype=float)
        if indices is None:
            indices = np.arange(1, self.mode_count + 1)
        lam = self.lam[np.asarray(indices) - 1]
        norms = np.array([self.modes[i - 1].j0_l2_norm for i in np.asarray(indices)])
        return special.j0(np.outer(lam, radii)) / norms[:, None]


@dataclass
class SpectralField:
    """Complex coefficient vector over modes 1..len(coeffs).

    `k` tags the nonlinearity degree the field is used with (metadata only)
    and `support_bound` the dyadic frequency N with coeffs zero past lam_n > N.
    """

    coeffs: np.ndarray
    k: int | None = None
    support_bound: float | None = None

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)

    def copy(self) -> "SpectralField":
        return SpectralField(self.coeffs.copy(), self.k, self.support_bound)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def hs_norm(self, basis: SpectralBasis, s: float) -> float:
        lam = basis.lam[: self.coeffs.size]
        return float(np.sqrt(np.sum(lam ** (2 * s) * np.abs(self.coeffs) ** 2)))


def build_basis(mode_count: int, product_order: int, node_count: int | None = None) -> SpectralBasis:
    """Construct the first `mode_count` modes with a rule-sized quadrature.

    product_order is the largest number of basis functions multiplied in any
    integrand the basis must resolve (2k+2 for a degree-k nonlinearity).
    """
    if mode_count < 1:
        raise ValueError("mode_count must be >= 1")
    if product_order < 2:
        raise ValueError("product_order must be >= 2")
    if node_count is None:
        node_count = quadrature_size(mode_count, product_order)
    lam = eigenvalues(mode_count)
    x, w_gl = special.roots_legendre(node_count)
    nodes = 0.5 * (x + 1.0)
    weights = 2.0 * np.pi * (0.5 * w_gl) * nodes
    # ||J0(lam_n .)||_{L2(D)}^2 = pi * J1(lam_n)^2 exactly at a J0 zero
    j0_norms = np.sqrt(np.pi) * np.abs(special.j1(lam))
    values = special.j0(np.outer(lam, nodes)) / j0_norms[:, None]
    modes = tuple(
        EigenMode(index=n, lam=float(lam[n - 1]), j0_l2_norm=float(j0_norms[n - 1]))
        for n in range(1, mode_count + 1)
    )
    return SpectralBasis(
        modes=modes,
        quad=QuadratureRule(nodes=nodes, weights=weights),
        values=values,
        product_order=product_order,
    )


def mode_mask(basis: SpectralBasis, N: float) -> np.ndarray:
    """Boolean mask of modes with lam_n <= N (the frequency box E_N)."""
    return basis.lam <= N


def _coeffs_of(field) -> np.ndarray:
    return field.coeffs if isinstance(field, SpectralField) else np.asarray(field, dtype=complex)


def synthesize(basis: SpectralBasis, field) -> np.ndarray:
    """Grid values sum_n c_n e_n(r_i) at the quadrature nodes."""
    c = _coeffs_of(field)
    if c.shape[-1] > basis.mode_count:
        raise ValueError(
            f"field has {c.shape[-1]} modes but basis holds {basis.mode_count}"
        )
    return c @ basis.values[: c.shape[-1]]


def analyze(basis: SpectralBasis, grid_values: np.ndarray) -> SpectralField:
    """Coefficients c_n = int_D u e_n dx of sampled grid values."""
    g = np.asarray(grid_values)
    if g.shape[-1] != basis.quad.node_count:
        raise ValueError(
            f"grid has {g.shape[-1]} values but the quadrature holds "
            f"{basis.quad.node_count} nodes"
        )
    coeffs = (g * basis.quad.weights) @ basis.values.T
    return SpectralField(coeffs)


def lp_norm(basis: SpectralBasis, n: int, p: float) -> float:
    """||e_n||_{L^p(D)} by quadrature; p = inf uses a refined grid maximum."""
    if not 1 <= n <= basis.mode_count:
        raise ValueError(f"mode {n} outside basis range 1..{basis.mode_count}")
    if p < 1:
        raise ValueError("p must be >= 1")
    e = basis.values[n - 1]
    if np.isinf(p):
        # Bessel peaks can fall between nodes: refine near the grid argmax and
        # include the center, where |J0| attains its global maximum.
        i = int(np.argmax(np.abs(e)))
        r = basis.quad.nodes
        lo = r[max(0, i - 1)]
        hi = r[min(r.size - 1, i + 1)]
        fine = np.linspace(lo, hi, 257)
        candidates = np.concatenate(([0.0], fine))
        vals = basis.evaluate_modes(candidates, indices=[n])[0]
        return float(max(np.max(np.abs(e)), np.max(np.abs(vals))))
    return float((np.abs(e) ** p) @ basis.quad.weights) ** (1.0 / p)


_BASIS_CACHE_KIND = "disc-basis"


def save_basis(basis: SpectralBasis, path) -> None:
    caching.write_blob(
        path,
        _BASIS_CACHE_KIND,
        meta={
            "mode_count": basis.mode_count,
            "node_count": basis.quad.node_count,
            "product_order": basis.product_order,
        },
        arrays={
            "lam": basis.lam,
            "j0_norms": np.array([m.j0_l2_norm for m in basis.modes]),
            "nodes": basis.quad.nodes,
            "weights": basis.quad.weights,
            "values": basis.values,
        },
    )


def load_basis(path, mode_count: int | None = None, product_order: int | None = None) -> SpectralBasis:
    expected = {}
    if mode_count is not None:
        expected["mode_count"] = mode_count
    if product_order is not None:
        expected["product_order"] = product_order
    meta, arrays = caching.read_blob(path, _BASIS_CACHE_KIND, expected or None)
    modes = tuple(
        EigenMode(index=n + 1, lam=float(arrays["lam"][n]), j0_l2_norm=float(arrays["j0_norms"][n]))
        for n in range(int(meta["mode_count"]))
    )
    return SpectralBasis(
        modes=modes,
        quad=QuadratureRule(nodes=arrays["nodes"], weights=arrays["weights"]),
        values=arrays["values"],
        product_order=int(meta["product_order"]),
    )
