"""
Periodic Fourier grid, transforms, multipliers and Littlewood-Paley cutoffs.

Conventions
-----------
Grid nodes are centred on the origin::

    x_j = -L/2 + j*dx,   j = 0, ..., N-1,   dx = L/N

and a field is stored through its Fourier-series coefficients ``c_k`` in
numpy FFT order, so that

    f(x) = sum_k c_k exp(i xi_k x),     xi_k = 2*pi*k/L.

``c_k`` is the discrete partner of the whole-line transform
``f_hat(xi) = (1/2pi) int f(x) exp(-i xi x) dx`` through
``f_hat(xi_k) ~= c_k / dxi`` with ``dxi = 2*pi/L``.

Norms use Plancherel weights, so that the ``H^0`` norm is the discrete L2
norm of the samples::

    ||f||_{H^s}^2 = L * sum_k (1 + xi_k^2)^s |c_k|^2
                  = 2*pi * sum_k (1 + xi_k^2)^s |f_hat(xi_k)|^2 dxi.

The Z-norm ``max_k (|xi_k| + |xi_k|^{r+3}) |f_hat(xi_k)|`` uses
``f_hat = c / dxi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "FourierGrid",
    "RealField",
    "SpectralField",
    "Symbol",
    "LOG",
    "DERIV",
    "DISPERSION",
    "abs_power",
    "forward_transform",
    "inverse_transform",
    "apply_multiplier",
    "smooth_step",
    "bump",
    "psi",
    "chi",
    "psi_k",
    "psi_le",
    "psi_ge",
    "psi_tilde",
    "dyadic_range",
    "dyadic_project",
    "sobolev_norm",
    "z_norm",
    "l2_inner",
]


@dataclass(frozen=True)
class FourierGrid:
    """Uniform periodic grid of ``n_points`` nodes on an interval of length L."""

    n_points: int
    domain_length: float

    def __post_init__(self):
        n = self.n_points
        if not isinstance(n, (int, np.integer)) or n <= 0 or n % 2:
            raise ValueError(f"n_points must be a positive even integer, got {n!r}")
        if not self.domain_length > 0 or not np.isfinite(self.domain_length):
            raise ValueError(f"domain_length must be positive, got {self.domain_length!r}")

    @property
    def dx(self) -> float:
        return self.domain_length / self.n_points

    @property
    def dxi(self) -> float:
        return 2.0 * np.pi / self.domain_length

    @property
    def x_min(self) -> float:
        return -0.5 * self.domain_length

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def k(self) -> np.ndarray:
        """Signed integer mode indices in FFT order."""
        return np.fft.fftfreq(self.n_points, d=1.0 / self.n_points).astype(np.int64)

    @property
    def xi(self) -> np.ndarray:
        return self.dxi * self.k

    @property
    def nyquist_index(self) -> int:
        return self.n_points // 2

    def wavenumber(self, k: int) -> float:
        return self.dxi * k

    def origin_phase(self) -> np.ndarray:
        """``exp(-i xi_k x_min)``, mapping FFT output to coefficients on centred nodes."""
        # xi_k * x_min = -pi*k exactly, so the factor is (-1)^k.
        return np.where(self.k % 2 == 0, 1.0, -1.0)

    def refined(self, factor: int) -> "FourierGrid":
        """Grid with the same length and ``factor`` times more points."""
        return FourierGrid(int(factor) * self.n_points, self.domain_length)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RealField:
    """Real samples of a field at the grid nodes."""

    grid: FourierGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != (self.grid.n_points,):
            raise ValueError(f"expected {self.grid.n_points} samples, got shape {v.shape}")
        if np.iscomplexobj(v):
            raise TypeError("RealField values must be real")
        v = v.astype(float)
        if not np.all(np.isfinite(v)):
            raise ValueError("RealField contains non-finite samples")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def from_function(cls, grid: FourierGrid, func: Callable[[np.ndarray], np.ndarray]) -> "RealField":
        return cls(grid, func(grid.x))

    def to_spectral(self) -> "SpectralField":
        return forward_transform(self)

    def __add__(self, other):
        _check_same_grid(self.grid, other.grid)
        return RealField(self.grid, self.values + other.values)

    def __sub__(self, other):
        _check_same_grid(self.grid, other.grid)
        return RealField(self.grid, self.values - other.values)

    def __neg__(self):
        return RealField(self.grid, -self.values)

    def __mul__(self, scalar):
        return RealField(self.grid, self.values * float(scalar))

    __rmul__ = __mul__


@dataclass(frozen=True)
class SpectralField:
    """Fourier-series coefficients ``c_k`` in FFT storage order."""

    grid: FourierGrid
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.grid.n_points,):
            raise ValueError(f"expected {self.grid.n_points} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", _frozen(c))

    def to_real(self) -> RealField:
        return inverse_transform(self)

    def hat(self) -> np.ndarray:
        """Samples of the whole-line transform, ``c_k / dxi``."""
        return self.coeffs / self.grid.dxi

    def symmetry_defect(self) -> float:
        """``max |c_{-k} - conj(c_k)|`` over non-Nyquist modes, relative to ``max |c|``."""
        c = self.coeffs
        scale = np.max(np.abs(c))
        if scale == 0.0:
            return 0.0
        n = self.grid.n_points
        idx = np.arange(1, n // 2)
        d = np.max(np.abs(c[n - idx] - np.conj(c[idx]))) if idx.size else 0.0
        d = max(d, abs(c[0].imag), abs(c[n // 2].imag))
        return float(d / scale)

    def __add__(self, other):
        _check_same_grid(self.grid, other.grid)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        _check_same_grid(self.grid, other.grid)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __neg__(self):
        return SpectralField(self.grid, -self.coeffs)

    def __mul__(self, scalar):
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__


def _check_same_grid(a: FourierGrid, b: FourierGrid):
    if a != b:
        raise ValueError(f"grid mismatch: {a} vs {b}")


def forward_transform(f: RealField) -> SpectralField:
    grid = f.grid
    c = np.fft.fft(f.values) / grid.n_points * grid.origin_phase()
    return SpectralField(grid, c)


def inverse_transform(f: SpectralField, *, real: bool = True) -> RealField:
    """Samples of ``sum_k c_k exp(i xi_k x_j)``; the imaginary part is dropped when ``real``."""
    grid = f.grid
    v = np.fft.ifft(f.coeffs * grid.origin_phase()) * grid.n_points
    if not real:
        return v
    return RealField(grid, v.real)


# ---------------------------------------------------------------------------
# Fourier multipliers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Symbol:
    """A Fourier multiplier ``m(xi)``.

    ``zero_value`` replaces ``m(0)``; ``odd`` symbols are zeroed at the Nyquist
    mode so that they map real fields to real fields.
    """

    func: Callable[[np.ndarray], np.ndarray]
    odd: bool = False
    zero_value: complex = 0.0
    name: str = ""

    def __call__(self, xi):
        return self.func(xi)

    def __mul__(self, other: "Symbol") -> "Symbol":
        f, g = self.func, other.func
        return Symbol(
            lambda xi: f(xi) * g(xi),
            odd=self.odd != other.odd,
            zero_value=self.zero_value * other.zero_value,
            name=f"({self.name})*({other.name})",
        )


def _log_abs(xi):
    with np.errstate(divide="ignore"):
        return np.log(np.abs(xi))


LOG = Symbol(_log_abs, name="log|xi|")
DERIV = Symbol(lambda xi: 1j * xi, odd=True, name="i xi")
DISPERSION = Symbol(lambda xi: 1j * xi * _log_abs(xi), odd=True, name="i xi log|xi|")


def abs_power(s: float) -> Symbol:
    """``|xi|^s``; the zero mode is set to 0, except for ``s = 0`` (the identity)."""
    return Symbol(lambda xi: np.abs(xi) ** s, zero_value=1.0 if s == 0 else 0.0, name=f"|xi|^{s}")


def multiplier_values(grid: FourierGrid, m) -> np.ndarray:
    """Evaluate ``m`` on the grid wavenumbers with the zero-mode / Nyquist conventions."""
    xi = grid.xi
    if not isinstance(m, Symbol):
        m = Symbol(m)
    vals = np.empty(grid.n_points, dtype=complex)
    nz = xi != 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        vals[nz] = m.func(xi[nz])
    if not np.all(np.isfinite(vals[nz])):
        bad = xi[nz][~np.isfinite(vals[nz])]
        raise ValueError(f"multiplier {m.name or m.func!r} is not finite at xi={bad[:4]}")
    vals[0] = m.zero_value
    if m.odd:
        vals[grid.nyquist_index] = 0.0
    return vals


def apply_multiplier(f: SpectralField, m) -> SpectralField:
    """Multiply each coefficient ``c_k`` by ``m(xi_k)``.

    ``m`` is a :class:`Symbol` or any vectorised callable; plain callables are
    treated as even symbols with ``m(0) := 0``.
    """
    return SpectralField(f.grid, f.coeffs * multiplier_values(f.grid, m))


# ---------------------------------------------------------------------------
# Smooth cutoffs and Littlewood-Paley blocks
# ---------------------------------------------------------------------------


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, ``S(t) + S(1-t) = 1``."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = (t > 0) & (t < 1)
    ti = t[inside]
    a = np.exp(-1.0 / ti)
    b = np.exp(-1.0 / (1.0 - ti))
    out[inside] = a / (a + b)
    out[t >= 1] = 1.0
    return out


def bump(xi, inner: float, outer: float):
    """Even cutoff equal to 1 on ``|xi| <= inner`` and supported in ``|xi| <= outer``."""
    xi = np.abs(np.asarray(xi, dtype=float))
    return smooth_step((outer - xi) / (outer - inner))


def psi(xi):
    """Dyadic base cutoff: 1 on [-5/4, 5/4], supported in [-8/5, 8/5]."""
    return bump(xi, 1.25, 1.6)


def chi(xi):
    """Paraproduct cutoff: 1 on [-3/40, 3/40], supported in [-1/10, 1/10]."""
    return bump(xi, 0.075, 0.1)


def psi_le(xi, k: int):
    return psi(np.asarray(xi, dtype=float) / 2.0**k)


def psi_k(xi, k: int):
    return psi_le(xi, k) - psi_le(xi, k - 1)


def psi_ge(xi, k: int):
    return 1.0 - psi_le(xi, k - 1)


def psi_tilde(xi, k: int):
    return psi_k(xi, k - 1) + psi_k(xi, k) + psi_k(xi, k + 1)


_VARIANTS = {"k": psi_k, "le": psi_le, "ge": psi_ge, "tilde": psi_tilde}


def dyadic_range(grid: FourierGrid) -> tuple[int, int]:
    """Smallest ``(j_lo, j_hi)`` with ``sum_{j_lo..j_hi} psi_j = 1`` on every nonzero grid mode."""
    xi_min = grid.dxi
    xi_max = grid.dxi * grid.nyquist_index
    # psi(xi/2^(j_lo-1)) must vanish at xi_min; psi(xi/2^j_hi) must be 1 at xi_max.
    j_lo = int(np.floor(np.log2(xi_min / 1.6))) + 1
    j_hi = int(np.ceil(np.log2(xi_max / 1.25)))
    return j_lo, j_hi


def dyadic_project(f: SpectralField, j: int, variant: str = "k") -> SpectralField:
    """Apply ``P_j`` (``variant='k'``), ``P_{<=j}``, ``P_{>=j}`` or ``P~_j``."""
    try:
        cut = _VARIANTS[variant]
    except KeyError:
        raise ValueError(f"unknown variant {variant!r}; expected one of {sorted(_VARIANTS)}") from None
    return SpectralField(f.grid, f.coeffs * cut(f.grid.xi, j))


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------


def sobolev_norm(f: SpectralField, s: float) -> float:
    xi = f.grid.xi
    w = (1.0 + xi**2) ** s
    return float(np.sqrt(f.grid.domain_length * np.sum(w * np.abs(f.coeffs) ** 2)))


def z_norm(f: SpectralField, r: int = 7) -> float:
    ax = np.abs(f.grid.xi)
    return float(np.max((ax + ax ** (r + 3)) * np.abs(f.coeffs)) / f.grid.dxi)


def l2_inner(f: SpectralField, g: SpectralField) -> complex:
    """``int f conj(g) dx`` over one period."""
    _check_same_grid(f.grid, g.grid)
    return complex(f.grid.domain_length * np.vdot(g.coeffs, f.coeffs))
