"""
Weyl paraproducts, the ``B^log`` symbol and weighted energies.

A symbol ``a(x, xi)`` is tabulated on the grid nodes for each wavenumber of an
evaluation set, and its x-Fourier coefficients ``a~_p(xi)`` define the
discrete Weyl paraproduct

    (T_a f)_k = sum_j chi(|k - j| / |k + j|) a~_{k-j}((xi_k + xi_j)/2) c_j,

with ``chi(0/0) := 1``. The midpoint is an exact wavenumber when ``k + j`` is
even and is linearly interpolated otherwise. The same rule is used for
``(k, j)`` and ``(j, k)``, so the matrix is Hermitian whenever ``a`` is real.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import sparse

from .spectral_core import (
    DERIV,
    LOG,
    FourierGrid,
    RealField,
    SpectralField,
    abs_power,
    apply_multiplier,
    chi,
    forward_transform,
    inverse_transform,
    sobolev_norm,
)
from .symbols import coeff_c

__all__ = [
    "SymbolGrid",
    "EnergyPreconditionError",
    "ConvergenceError",
    "SupportError",
    "constant_symbol",
    "weyl_matrix",
    "weyl_paraproduct",
    "build_blog_symbol",
    "operator_norm",
    "operator_norm_tblog",
    "weighted_energy",
    "weighted_energy_total",
    "energy_bounds",
    "EnergyBounds",
    "commutator_xL",
    "WEYL_MAX_N",
]

WEYL_MAX_N = 4096


class EnergyPreconditionError(ValueError):
    """``||T_{B^log}|| >= 2``: the weighted energy is not positive definite."""


class ConvergenceError(RuntimeError):
    """Power iteration did not reach its tolerance."""


class SupportError(ValueError):
    """The field is not mean-free or not localised in the central half."""


@dataclass(frozen=True)
class SymbolGrid:
    """``values[i, m] = a(x_i, xis[m])``; ``xis`` defaults to ``grid.xi``."""

    grid: FourierGrid
    values: np.ndarray = field(repr=False)
    xis: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        xis = self.grid.xi if self.xis is None else np.asarray(self.xis, dtype=float)
        v = np.asarray(self.values)
        if v.shape != (self.grid.n_points, xis.size):
            raise ValueError(f"symbol table has shape {v.shape}, expected {(self.grid.n_points, xis.size)}")
        if not np.all(np.isfinite(v)):
            raise ValueError("symbol table contains non-finite values")
        object.__setattr__(self, "xis", xis)
        object.__setattr__(self, "values", v)


def constant_symbol(grid: FourierGrid, c: complex) -> SymbolGrid:
    return SymbolGrid(grid, np.full((grid.n_points, grid.n_points), c))


def _x_coefficients(a: SymbolGrid) -> np.ndarray:
    """``a~[p, m]``: x-Fourier coefficients of each column, rows in FFT order."""
    g = a.grid
    at = np.fft.fft(a.values, axis=0) / g.n_points * g.origin_phase()[:, None]
    # x-independent columns are set exactly, so that T_c = c Id holds bit for bit
    flat = np.all(a.values == a.values[:1], axis=0)
    at[:, flat] = 0.0
    at[0, flat] = a.values[0, flat]
    return at


def weyl_matrix(a: SymbolGrid) -> sparse.csr_matrix:
    """Sparse matrix of ``T_a`` acting on coefficient vectors in FFT order."""
    g = a.grid
    n = g.n_points
    if n > WEYL_MAX_N:
        raise ValueError(f"paraproduct assembly is capped at N={WEYL_MAX_N}")
    if not np.allclose(a.xis, g.xi):
        raise ValueError("weyl_matrix needs the symbol tabulated on the grid's own wavenumbers")
    at = _x_coefficients(a)
    ks = g.k
    K, J = np.meshgrid(ks, ks, indexing="ij")
    s, d = K + J, K - J
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(s != 0, np.abs(d) / np.abs(s), np.where(d == 0, 0.0, np.inf))
    w = np.where(np.isfinite(ratio), chi(np.where(np.isfinite(ratio), ratio, 0.0)), 0.0)
    rows, cols = np.nonzero(w)
    w = w[rows, cols]
    s, d = s[rows, cols], d[rows, cols]
    p = d % n
    lo = np.floor_divide(s, 2)
    hi = lo + (s % 2)
    hi = np.minimum(hi, n // 2 - 1)
    frac = np.where(s % 2 == 1, 0.5, 0.0)
    # an odd sum whose upper neighbour is out of range uses the lower one only
    frac = np.where(lo == hi, 0.0, frac)
    val = (1.0 - frac) * at[p, lo % n] + frac * at[p, hi % n]
    m = sparse.csr_matrix((w * val, (ks[rows] % n, ks[cols] % n)), shape=(n, n))
    m.eliminate_zeros()
    return m


def weyl_paraproduct(a: SymbolGrid, f: SpectralField, *, matrix=None) -> SpectralField:
    if a.grid != f.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {f.grid}")
    m = weyl_matrix(a) if matrix is None else matrix
    return SpectralField(f.grid, m @ f.coeffs)


def build_blog_symbol(phi: RealField, n_max: int = 1) -> SymbolGrid:
    """``B^log[phi](x, xi) = sum_n -2 c_n g_{n,xi}(x)^(2n)``.

    ``g_{n,xi}`` is ``phi_x`` filtered by ``chi((2n+1) eta / xi)``; the
    ``xi = 0`` column is set to zero.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    g = phi.grid
    phix = apply_multiplier(forward_transform(phi), DERIV).coeffs
    eta = g.xi
    ph = g.origin_phase()
    table = np.zeros((g.n_points, g.n_points))
    abs_xi = np.abs(g.xi)
    uniq, inv = np.unique(abs_xi, return_inverse=True)
    for n in range(1, n_max + 1):
        cn = coeff_c(n)
        cols = np.zeros((g.n_points, uniq.size))
        nz = uniq > 0
        filt = chi((2 * n + 1) * eta[:, None] / uniq[None, nz])
        gx = np.fft.ifft(phix[:, None] * filt * ph[:, None], axis=0).real * g.n_points
        cols[:, nz] = -2.0 * cn * gx ** (2 * n)
        table += cols[:, inv]
    return SymbolGrid(g, table)


def operator_norm(matrix, *, tol: float = 1e-6, max_iter: int = 2000, seed: int = 0) -> float:
    """``||T||`` for a Hermitian matrix, by power iteration on ``T^2``."""
    n = matrix.shape[0]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = matrix @ (matrix @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new = float(np.real(np.vdot(v, w)))
        v = w / nw
        if abs(new - lam) <= tol * abs(new):
            return float(np.sqrt(max(new, 0.0)))
        lam = new
    raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations")


def operator_norm_tblog(phi: RealField, n_max: int = 1, **kwargs) -> float:
    return operator_norm(weyl_matrix(build_blog_symbol(phi, n_max)), **kwargs)


def _energy(u: np.ndarray, op, s: int, L: float) -> float:
    v = u
    for _ in range(2 * s + 1):
        v = 2.0 * v - op @ v
    return float(L * np.real(np.vdot(u, v)))


def weighted_energy(phi: RealField, s: int, *, n_max: int = 1, check: bool = True, matrix=None) -> float:
    """``E^(s) = <|D|^s phi, (2 - T_{B^log})^(2s+1) |D|^s phi>``.

    Raises :class:`EnergyPreconditionError` when ``check`` is set and the
    paraproduct norm is 2 or more.
    """
    if not 0 <= s <= 8:
        raise ValueError("s must lie in 0..8")
    op = weyl_matrix(build_blog_symbol(phi, n_max)) if matrix is None else matrix
    if check:
        nrm = operator_norm(op)
        if nrm >= 2.0:
            raise EnergyPreconditionError(f"||T_Blog|| = {nrm:.4g} >= 2")
    fhat = forward_transform(phi)
    u = apply_multiplier(fhat, abs_power(s)).coeffs if s > 0 else fhat.coeffs
    return _energy(u, op, s, phi.grid.domain_length)


def weighted_energy_total(phi: RealField, s: int, *, n_max: int = 1, check: bool = True) -> float:
    """``E~^(s) = sum_{j=0}^{s} E^(j)``."""
    op = weyl_matrix(build_blog_symbol(phi, n_max))
    if check:
        nrm = operator_norm(op)
        if nrm >= 2.0:
            raise EnergyPreconditionError(f"||T_Blog|| = {nrm:.4g} >= 2")
    return sum(weighted_energy(phi, j, check=False, matrix=op) for j in range(s + 1))


@dataclass(frozen=True)
class EnergyBounds:
    lower: float
    energy: float
    upper: float
    margin: float

    @property
    def holds(self) -> bool:
        return self.lower <= self.energy <= self.upper


def energy_bounds(phi: RealField, s: int, *, n_max: int = 1) -> EnergyBounds:
    """``m^(2s+1) ||phi||_{H^s}^2``, ``E~^(s)`` and ``2^(2s+1) ||phi||_{H^s}^2`` with ``m = 2 - ||T||``."""
    op = weyl_matrix(build_blog_symbol(phi, n_max))
    m = 2.0 - operator_norm(op)
    if m <= 0:
        raise EnergyPreconditionError(f"||T_Blog|| = {2 - m:.4g} >= 2")
    e = sum(weighted_energy(phi, j, check=False, matrix=op) for j in range(s + 1))
    hs2 = sobolev_norm(forward_transform(phi), s) ** 2
    return EnergyBounds(m ** (2 * s + 1) * hs2, e, 2.0 ** (2 * s + 1) * hs2, m)


def commutator_xL(f: RealField, *, support_tol: float = 1e-12):
    """``[x, L] f`` computed directly, and the prediction ``F^{-1}[i f_hat / xi]``.

    The input must be mean-free with negligible mass outside ``|x| < L/4`` and
    negligible spectrum near ``xi = 0``, so that ``x L f`` has no periodic wrap.
    """
    g = f.grid
    fhat = forward_transform(f)
    c = fhat.coeffs
    peak = np.max(np.abs(f.values))
    if peak == 0.0:
        zero = RealField(g, np.zeros(g.n_points))
        return zero, zero
    if abs(c[0]) * g.domain_length > support_tol * peak * g.domain_length:
        raise SupportError("field is not mean-free")
    outer = np.abs(g.x) > 0.25 * g.domain_length
    if np.max(np.abs(f.values[outer])) > support_tol * peak:
        raise SupportError("field is not confined to the central half of the domain")
    x = g.x
    lf = inverse_transform(apply_multiplier(fhat, LOG)).values
    xf = forward_transform(RealField(g, x * f.values))
    direct = RealField(g, x * lf - inverse_transform(apply_multiplier(xf, LOG)).values)
    with np.errstate(divide="ignore", invalid="ignore"):
        pred = np.where(g.xi != 0, 1j * c / g.xi, 0.0)
    return direct, inverse_transform(SpectralField(g, pred))
