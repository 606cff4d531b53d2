"""
The nonlinear term ``N(phi)`` of the front equation

    phi_t + N(phi) = 2 log|d_x| phi_x,

    N(phi)(x) = int_R [phi_x(x) - phi_x(x+z)] {1/|z| - 1/sqrt(z^2 + (phi(x) - phi(x+z))^2)} dz.

Three evaluation routes are provided:

* physical products with multiplier operators (fast, used by the solver),
  ``N_n = d_x sum_l (-1)^(l+n) d_{n,l} phi^(2n+1-l) d_x^(2n) L(phi^l)``;
* direct multilinear convolution with the symbols ``T_n`` (oracle),
  ``F[N_n](xi) = -c_n/(2n+1) i xi sum T_n(eta) c_{k_1} ... c_{k_{2n+1}}``;
* quadrature of the z-integral above (oracle for the whole series).

All products are dealiased by zero padding, so for a band-limited field the
first two routes compute the same trigonometric polynomial.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate, special

from .spectral_core import (
    FourierGrid,
    RealField,
    SpectralField,
    Symbol,
    apply_multiplier,
    forward_transform,
    inverse_transform,
)
from .symbols import coeff_c, coeff_d, t1, t_symbol_closed_batch

__all__ = [
    "NonlinearityConfig",
    "SlopeError",
    "OracleError",
    "band_limit",
    "cubic_term_spectral",
    "cubic_term_convolution",
    "higher_term_spectral",
    "multilinear_convolution",
    "full_nonlinearity",
    "zeta_integral_oracle",
    "CONVOLUTION_MAX_N",
]

CONVOLUTION_MAX_N = 128
_MAX_TUPLES = 4_000_000


class SlopeError(ValueError):
    """The field is too steep for the expansion (``max |phi_x| >= 1/2``)."""


class OracleError(RuntimeError):
    """The z-integral quadrature did not converge."""


@dataclass(frozen=True)
class NonlinearityConfig:
    """Truncation and dealiasing settings.

    Parameters
    ----------
    n_max : int
        Highest series index kept; the degree is ``2*n_max + 1``.
    dealias_factor : float, optional
        Zero-padding ratio. Defaults to ``max(2, n_max + 1)``, the smallest
        ratio that makes every product exact on the retained modes.
    oracle_cutoff : float
        Radius of the directly summed part of the z-integral.
    """

    n_max: int = 1
    dealias_factor: Optional[float] = None
    oracle_cutoff: float = 1e3

    def __post_init__(self):
        if not 1 <= self.n_max <= 6:
            raise ValueError(f"n_max must lie in 1..6, got {self.n_max}")
        need = 2.0 if self.n_max == 1 else float(self.n_max + 1)
        if self.dealias_factor is None:
            object.__setattr__(self, "dealias_factor", need)
        elif self.dealias_factor < need:
            raise ValueError(f"dealias_factor must be >= {need} for n_max={self.n_max}")
        if not self.oracle_cutoff > 0:
            raise ValueError("oracle_cutoff must be positive")

    def padded_size(self, n_points: int) -> int:
        m = int(math.ceil(self.dealias_factor * n_points))
        return m + (m % 2)


def band_limit(f: SpectralField) -> SpectralField:
    """Drop the Nyquist mode, leaving ``|k| < N/2``."""
    c = np.array(f.coeffs)
    c[f.grid.nyquist_index] = 0.0
    return SpectralField(f.grid, c)


def _pad(f: SpectralField, m: int) -> SpectralField:
    n = f.grid.n_points
    h = n // 2
    c = np.zeros(m, dtype=complex)
    c[:h] = f.coeffs[:h]
    c[m - h + 1 :] = f.coeffs[h + 1 :]
    return SpectralField(FourierGrid(m, f.grid.domain_length), c)


def _truncate(f: SpectralField, grid: FourierGrid) -> SpectralField:
    h = grid.n_points // 2
    m = f.grid.n_points
    c = np.zeros(grid.n_points, dtype=complex)
    c[:h] = f.coeffs[:h]
    c[h + 1 :] = f.coeffs[m - h + 1 :]
    return SpectralField(grid, c)


def _even_log_derivative(n: int) -> Symbol:
    """Symbol of ``d_x^(2n) L``: ``(-1)^n xi^(2n) log|xi|``."""
    sgn = (-1) ** n

    def func(xi):
        return sgn * xi ** (2 * n) * np.log(np.abs(xi))

    return Symbol(func, name=f"d^{2 * n} L")


_D = Symbol(lambda xi: 1j * xi, odd=True, name="i xi")


def _flux_term(p: np.ndarray, pgrid: FourierGrid, n: int) -> np.ndarray:
    """Padded samples of ``sum_l (-1)^(l+n) d_{n,l} phi^(2n+1-l) d_x^(2n) L(phi^l)``."""
    op = _even_log_derivative(n)
    out = np.zeros_like(p)
    for ell in range(1, 2 * n + 2):
        inner = apply_multiplier(forward_transform(RealField(pgrid, p**ell)), op)
        w = (-1) ** (ell + n) * coeff_d(n, ell)
        out += w * p ** (2 * n + 1 - ell) * inverse_transform(inner).values
    return out


def _term(phi: RealField, n: int, cfg: NonlinearityConfig) -> RealField:
    grid = phi.grid
    fhat = band_limit(forward_transform(phi))
    padded = _pad(fhat, cfg.padded_size(grid.n_points))
    p = inverse_transform(padded).values
    flux = forward_transform(RealField(padded.grid, _flux_term(p, padded.grid, n)))
    return inverse_transform(apply_multiplier(_truncate(flux, grid), _D))


def cubic_term_spectral(phi: RealField, cfg: Optional[NonlinearityConfig] = None) -> RealField:
    """Cubic part of ``N``, computed as

        1/2 d_x { phi^2 L phi_xx - phi L(phi^2)_xx + 1/3 L(phi^3)_xx }

    with products formed on a zero-padded grid.
    """
    return _term(phi, 1, cfg or NonlinearityConfig())


def higher_term_spectral(phi: RealField, n: int, cfg: Optional[NonlinearityConfig] = None) -> RealField:
    """Degree ``2n+1`` part of ``N`` in physical-product form.

    Only meaningful for smooth fields whose spectrum has decayed to round-off
    at the grid scale: the individual products carry ``2n`` derivatives that
    cancel only in the sum.
    """
    cfg = cfg or NonlinearityConfig(n_max=max(n, 1))
    if not 2 <= n <= cfg.n_max:
        raise ValueError(f"n must lie in 2..{cfg.n_max}, got {n}")
    return _term(phi, n, cfg)


def full_nonlinearity(phi: RealField, cfg: Optional[NonlinearityConfig] = None) -> RealField:
    """``N(phi)`` truncated after the degree ``2 n_max + 1`` term."""
    cfg = cfg or NonlinearityConfig()
    grid = phi.grid
    fhat = band_limit(forward_transform(phi))
    padded = _pad(fhat, cfg.padded_size(grid.n_points))
    p = inverse_transform(padded).values
    flux = sum(_flux_term(p, padded.grid, n) for n in range(1, cfg.n_max + 1))
    flux = forward_transform(RealField(padded.grid, flux))
    return inverse_transform(apply_multiplier(_truncate(flux, grid), _D))


# ---------------------------------------------------------------------------
# Convolution oracles
# ---------------------------------------------------------------------------


def _signed_band(grid: FourierGrid) -> np.ndarray:
    h = grid.n_points // 2
    return np.arange(-h + 1, h)


def cubic_term_convolution(phi_hat: SpectralField) -> SpectralField:
    """``1/6 i xi sum_{k1+k2+k3=k} T_1 c_{k1} c_{k2} c_{k3}`` on the retained modes.

    Cost is ``O(N^3)``; refuses grids above ``CONVOLUTION_MAX_N`` points.
    """
    grid = phi_hat.grid
    n = grid.n_points
    if n > CONVOLUTION_MAX_N:
        raise ValueError(f"convolution oracle is capped at N={CONVOLUTION_MAX_N}, got {n}")
    ks = _signed_band(grid)
    c = phi_hat.coeffs[ks % n]
    dxi = grid.dxi
    k1, k2, k3 = np.meshgrid(ks, ks, ks, indexing="ij")
    w = t1(k1 * dxi, k2 * dxi, k3 * dxi) * (c[:, None, None] * c[None, :, None] * c[None, None, :])
    ksum = (k1 + k2 + k3).ravel()
    h = n // 2
    keep = np.abs(ksum) < h
    acc = np.zeros(2 * h - 1, dtype=complex)
    np.add.at(acc, ksum[keep] + h - 1, w.ravel()[keep])
    out = np.zeros(n, dtype=complex)
    out[ks % n] = acc
    out *= 1j * grid.xi / 6.0
    out[grid.nyquist_index] = 0.0
    return SpectralField(grid, out)


def multilinear_convolution(phi_hat: SpectralField, n: int, *, rel_support: float = 0.0) -> SpectralField:
    """``-c_n/(2n+1) i xi sum T_n(eta) prod c_{k_j}`` over the support of ``phi_hat``.

    Tuples are enumerated over modes with ``|c_k| > rel_support * max |c|``, so
    the cost is ``|support|^(2n+1)``; intended for fields with a handful of
    active modes.
    """
    grid = phi_hat.grid
    N = grid.n_points
    ks = _signed_band(grid)
    c = phi_hat.coeffs[ks % N]
    cmax = np.max(np.abs(c))
    if cmax == 0.0:
        return SpectralField(grid, np.zeros(N, dtype=complex))
    sup = ks[np.abs(c) > rel_support * cmax]
    m = 2 * n + 1
    if sup.size**m > _MAX_TUPLES:
        raise ValueError(f"{sup.size}^{m} tuples exceed the enumeration cap")
    tuples = np.array(list(itertools.product(sup, repeat=m)), dtype=np.int64)
    ksum = tuples.sum(axis=1)
    h = N // 2
    keep = np.abs(ksum) < h
    tuples, ksum = tuples[keep], ksum[keep]
    weights = t_symbol_closed_batch(n, tuples * grid.dxi) * np.prod(phi_hat.coeffs[tuples % N], axis=1)
    out = np.zeros(N, dtype=complex)
    np.add.at(out, ksum % N, weights)
    out *= -coeff_c(n) / (2 * n + 1) * 1j * grid.xi
    out[grid.nyquist_index] = 0.0
    return SpectralField(grid, out)


# ---------------------------------------------------------------------------
# z-integral oracle
# ---------------------------------------------------------------------------


def _max_slope(phi_hat: SpectralField, factor: int = 4) -> float:
    fine = _pad(phi_hat, factor * phi_hat.grid.n_points)
    return float(np.max(np.abs(inverse_transform(apply_multiplier(fine, _D)).values)))


def _kernel(z, d):
    """``1/|z| - 1/sqrt(z^2 + d^2)`` without cancellation."""
    az = np.abs(z)
    u = (d / az) ** 2
    r = np.sqrt(1.0 + u)
    return u / (az * r * (1.0 + r))


def zeta_integral_oracle(
    phi: RealField,
    x_index: int,
    cfg: Optional[NonlinearityConfig] = None,
    *,
    tol: float = 1e-13,
    tail_terms: int = 6,
) -> float:
    """``N(phi)`` at one grid node, by quadrature of the z-integral.

    The periodic field is integrated over the whole line by folding onto one
    period: images ``|m| L <= oracle_cutoff`` are summed directly and the rest
    through the binomial expansion of the kernel, whose image sums are Hurwitz
    zeta values. Differences ``phi(x) - phi(x+z)`` are evaluated from the
    Fourier coefficients, so no interpolation error enters.

    Raises
    ------
    SlopeError
        If ``max |phi_x| >= 1/2``.
    OracleError
        If the adaptive quadrature does not reach ``tol`` (absolute, relative
        to the integrand scale).
    """
    cfg = cfg or NonlinearityConfig()
    grid = phi.grid
    if not 0 <= x_index < grid.n_points:
        raise ValueError(f"x_index must lie in 0..{grid.n_points - 1}, got {x_index}")
    L = grid.domain_length
    fhat = band_limit(forward_transform(phi))
    slope = _max_slope(fhat)
    if slope >= 0.5:
        raise SlopeError(f"max |phi_x| = {slope:.3g} violates the small-slope condition (< 1/2)")
    if slope == 0.0:
        return 0.0
    x0 = grid.x[x_index]
    xi = grid.xi
    b = fhat.coeffs * np.exp(1j * xi * x0)
    ib = 1j * xi * b
    M = max(0, int(round(cfg.oracle_cutoff / L)))
    images = np.arange(-M, M + 1) * L
    cn = np.array([coeff_c(j) for j in range(1, tail_terms + 1)])
    pw = 2 * np.arange(1, tail_terms + 1) + 1

    def integrand(z):
        # 1 - exp(i xi z) = -2i sin(xi z/2) exp(i xi z/2)
        e = -2j * np.sin(0.5 * xi * z) * np.exp(0.5j * xi * z)
        d = float(np.real(np.dot(b, e)))
        a = float(np.real(np.dot(ib, e)))
        near = np.sum(_kernel(z + images, d))
        q = z / L
        hz = special.zeta(pw, M + 1 + q) + special.zeta(pw, M + 1 - q)
        far = -np.sum(cn * d ** (2 * np.arange(1, tail_terms + 1)) * L ** (-pw.astype(float)) * hz)
        return a * (near + far)

    scale = slope**3
    total = 0.0
    for lo, hi in ((-0.5 * L, 0.0), (0.0, 0.5 * L)):
        val, err, *rest = integrate.quad(
            integrand, lo, hi, epsabs=tol * scale, epsrel=0.0, limit=2000, full_output=1
        )
        if len(rest) >= 2 and rest[0] != 0 and err > 10 * tol * scale:
            raise OracleError(f"z-quadrature on [{lo:g}, {hi:g}] stopped at error {err:.3g}")
        total += val
    return float(total)
