"""
Linear dispersion and resonance geometry.

The linear flow ``phi_t = 2 L phi_x`` has phase ``2 t xi log|xi|``; the cubic
interaction phase is

    Phi(xi, eta1, eta2) = 2 eta3 log|eta3| + 2 eta1 log|eta1| + 2 eta2 log|eta2| - 2 xi log|xi|,

with ``eta3 = xi - eta1 - eta2``. Its space-time resonances sit at the
permutations of ``(xi, xi, -xi)`` and its space resonance at ``(xi/3, xi/3)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from .spectral_core import (
    DERIV,
    LOG,
    FourierGrid,
    RealField,
    SpectralField,
    apply_multiplier,
    forward_transform,
    inverse_transform,
    psi,
    sobolev_norm,
)
from .symbols import t1, xlogx

__all__ = [
    "phase_phi",
    "stationary_point",
    "decay_fit",
    "rho",
    "Parallelogram",
    "ResonanceSets",
    "resonance_sets",
    "membership",
    "cutoff_b",
    "beta_coefficients",
    "beta_analytic",
    "beta_stationary",
    "BETA_RULES",
    "ScatteringPhase",
    "new_scattering_phase",
    "scattering_phase_update",
    "corrected_profile",
    "t1_over_phi",
    "T1PHI_COEFFICIENT",
    "ScalingResult",
    "scaling_galilean",
]

T1PHI_COEFFICIENT = 0.5 - 2.0 * math.log(2.0) / (3.0 * math.log(3.0))
PSI_INTEGRAL = 2.85  # int psi = 2 (5/4 + (8/5 - 5/4)/2) by the symmetry of the step


def phase_phi(xi, eta1, eta2):
    xi, eta1, eta2 = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (xi, eta1, eta2)))
    eta3 = xi - eta1 - eta2
    out = 2.0 * (xlogx(eta3) + xlogx(eta1) + xlogx(eta2) - xlogx(xi))
    return out if out.ndim else float(out)


def t1_over_phi(xi, eta1, eta2):
    return t1(eta1, eta2, np.asarray(xi) - eta1 - eta2) / phase_phi(xi, eta1, eta2)


def stationary_point(x, t) -> Tuple[float, float]:
    """Roots ``+-exp(-1 - x/(2t))`` of ``x + 2t(log|xi| + 1) = 0``."""
    if not t > 0:
        raise ValueError("t must be positive")
    r = math.exp(-1.0 - x / (2.0 * t))
    return r, -r


def decay_fit(series, window: Tuple[float, float] = (20.0, math.inf)) -> float:
    """Least-squares slope of ``log value`` against ``log t`` inside ``window``."""
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("series must be a sequence of (t, value) pairs")
    t, v = arr[:, 0], arr[:, 1]
    sel = (t >= window[0]) & (t <= window[1])
    if np.count_nonzero(sel) < 10:
        raise ValueError(f"need at least 10 samples in the window, got {np.count_nonzero(sel)}")
    t, v = t[sel], v[sel]
    if np.any(t <= 0) or np.any(v <= 0):
        raise ValueError("times and values must be positive for a log-log fit")
    return float(np.polyfit(np.log(t), np.log(v), 1)[0])


def rho(t):
    return (np.asarray(t, dtype=float) + 1.0) ** -0.49


# ---------------------------------------------------------------------------
# Resonance sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Parallelogram:
    """``|rows @ (eta - center)| < bound`` componentwise."""

    name: str
    center: Tuple[float, float]
    rows: Tuple[Tuple[float, float], Tuple[float, float]]
    bound: float

    def contains(self, eta1, eta2):
        d1 = np.asarray(eta1, dtype=float) - self.center[0]
        d2 = np.asarray(eta2, dtype=float) - self.center[1]
        (a, b), (c, d) = self.rows
        return (np.abs(a * d1 + b * d2) < self.bound) & (np.abs(c * d1 + d * d2) < self.bound)

    @property
    def jacobian(self) -> float:
        (a, b), (c, d) = self.rows
        return abs(a * d - b * c)

    def to_eta(self, u, v):
        (a, b), (c, d) = self.rows
        det = a * d - b * c
        d1 = (d * u - b * v) / det
        d2 = (-c * u + a * v) / det
        return self.center[0] + d1, self.center[1] + d2


@dataclass(frozen=True)
class ResonanceSets:
    xi: float
    t: float
    rho: float
    sets: Tuple[Parallelogram, ...]


def resonance_sets(xi: float, t: float) -> ResonanceSets:
    if xi == 0:
        raise ValueError("xi must be nonzero")
    if t < 0:
        raise ValueError("t must be nonnegative")
    r = float(rho(t))
    bound = 1.6 * r
    return ResonanceSets(
        xi,
        t,
        r,
        (
            Parallelogram("A1", (xi / 3, xi / 3), ((2, 1), (1, 2)), bound),
            Parallelogram("A2", (xi, xi), ((0, 1), (1, 0)), bound),
            Parallelogram("A3", (xi, -xi), ((2, 1), (1, 0)), bound),
            Parallelogram("A4", (-xi, xi), ((0, 1), (1, 2)), bound),
        ),
    )


def membership(sets: ResonanceSets, eta1: float, eta2: float) -> Optional[str]:
    """Name of the first set containing the point, or None."""
    for p in sets.sets:
        if p.contains(eta1, eta2):
            return p.name
    return None


def cutoff_b(xi, eta1, eta2, t):
    """``psi((|eta1| - |eta3|)/rho) psi((|eta2| - |eta3|)/rho)``, ``eta3 = xi - eta1 - eta2``."""
    r = rho(t)
    eta3 = np.abs(np.asarray(xi) - eta1 - eta2)
    return psi((np.abs(eta1) - eta3) / r) * psi((np.abs(eta2) - eta3) / r)


def beta_coefficients(xi: float, t: float, *, tol: float = 1e-10) -> Tuple[float, float, float]:
    """``beta_j = 1/6 int_{A} b`` over ``A_2, A_3, A_4`` by 2D quadrature.

    Each parallelogram is mapped to the square ``|u|, |v| < 8 rho / 5``; the
    same rule as for ``A_2`` is applied to ``A_3`` and ``A_4``.
    """
    sets = resonance_sets(xi, t)
    out = []
    for p in sets.sets[1:]:
        B = p.bound

        def f(uv, p=p):
            e1, e2 = p.to_eta(uv[:, 0], uv[:, 1])
            return cutoff_b(xi, e1, e2, t)

        res = integrate.cubature(f, [-B, -B], [B, B], rtol=tol, atol=tol * B * B)
        if res.status != "converged":
            raise RuntimeError(f"beta quadrature over {p.name} did not converge")
        out.append(float(res.estimate) / p.jacobian / 6.0)
    return tuple(out)


def beta_analytic(t: float) -> float:
    """``rho^2 (int psi)^2 / 6``, the exact value of each beta when ``|xi| >> rho``."""
    return float(rho(t)) ** 2 * PSI_INTEGRAL**2 / 6.0


def beta_stationary(xi, t):
    """``pi |xi| / (6 (t + 1))``: stationary-phase weight of each space-time resonance.

    Near ``(xi, xi)``, ``(xi, -xi)`` and ``(-xi, xi)`` the Hessian of ``Phi``
    has determinant ``-4/xi^2`` and signature 0, so
    ``int exp(i t Phi) d eta ~ pi |xi| / t``. The shift ``t -> t + 1`` keeps
    the weight finite at ``t = 0``.
    """
    return np.pi * np.abs(np.asarray(xi, dtype=float)) / (6.0 * (np.asarray(t, dtype=float) + 1.0))


BETA_RULES = ("analytic", "quadrature", "stationary")


# ---------------------------------------------------------------------------
# Modified scattering phase
# ---------------------------------------------------------------------------


@dataclass
class ScatteringPhase:
    """Running ``Theta(xi, t)`` on the tracked mode indices.

    ``integral`` holds ``int (beta_1 T_1(xi,xi,-xi) + beta_2 T_1(xi,-xi,xi)
    + beta_3 T_1(-xi,xi,xi)) |phi_hat|^2 dtau`` by the trapezoid rule, with
    ``phi_hat = c / dxi``. ``beta`` selects the weights: ``"analytic"`` is the
    area rule of :func:`beta_analytic`, ``"quadrature"`` integrates the
    cutoff over each set, and ``"stationary"`` uses :func:`beta_stationary`.
    """

    grid: FourierGrid
    modes: np.ndarray
    t: float = 0.0
    integral: np.ndarray = field(default=None, repr=False)
    last: Optional[np.ndarray] = field(default=None, repr=False)
    beta: str = "analytic"

    def __post_init__(self):
        self.modes = np.asarray(self.modes, dtype=np.int64)
        if self.integral is None:
            self.integral = np.zeros(self.modes.size)

    @property
    def xi(self) -> np.ndarray:
        return self.grid.dxi * self.modes

    def theta(self) -> np.ndarray:
        xi = self.xi
        return -2.0 * self.t * xlogx(xi) + xi * self.integral


def new_scattering_phase(grid: FourierGrid, modes: Optional[Sequence[int]] = None, t0: float = 0.0, beta: str = "analytic") -> ScatteringPhase:
    if modes is None:
        modes = np.arange(1, grid.n_points // 2)
    if beta not in BETA_RULES:
        raise ValueError(f"beta must be one of {BETA_RULES}")
    return ScatteringPhase(grid, np.asarray(modes), t0, beta=beta)


def _theta_integrand(acc: ScatteringPhase, phi_hat: SpectralField, tau: float) -> np.ndarray:
    xi = acc.xi
    amp2 = np.abs(phi_hat.coeffs[acc.modes % acc.grid.n_points] / acc.grid.dxi) ** 2
    if acc.beta == "analytic":
        b = beta_analytic(tau)
        betas = np.full((3, xi.size), b)
    elif acc.beta == "stationary":
        betas = np.tile(beta_stationary(xi, tau), (3, 1))
    else:
        betas = np.array([beta_coefficients(x, tau) for x in xi]).T
    s = betas[0] * t1(xi, xi, -xi) + betas[1] * t1(xi, -xi, xi) + betas[2] * t1(-xi, xi, xi)
    return s * amp2


def scattering_phase_update(acc: ScatteringPhase, phi_hat: SpectralField, tau: float, dtau: Optional[float] = None) -> ScatteringPhase:
    """Advance the accumulator to time ``tau`` using the solution at ``tau``."""
    if phi_hat.grid != acc.grid:
        raise ValueError("grid mismatch")
    if dtau is not None and not math.isclose(acc.t + dtau, tau, rel_tol=1e-12, abs_tol=1e-12):
        raise ValueError(f"dtau={dtau} inconsistent with t={acc.t} -> tau={tau}")
    if acc.last is not None and tau < acc.t:
        raise ValueError(f"times must be nondecreasing: {tau} after {acc.t}")
    cur = _theta_integrand(acc, phi_hat, tau)
    integral = acc.integral.copy()
    if acc.last is not None:
        integral += 0.5 * (tau - acc.t) * (acc.last + cur)
    return ScatteringPhase(acc.grid, acc.modes, tau, integral, cur, acc.beta)


def corrected_profile(phi_hat: SpectralField, acc: ScatteringPhase) -> SpectralField:
    """``v_hat = exp(i Theta) phi_hat`` on the tracked modes and their mirrors."""
    n = phi_hat.grid.n_points
    c = np.array(phi_hat.coeffs)
    th = acc.theta()
    idx = acc.modes % n
    c[idx] = c[idx] * np.exp(1j * th)
    # Theta is odd in xi, so the conjugate modes get the conjugate factor
    mirror = (-acc.modes) % n
    keep = mirror != idx
    c[mirror[keep]] = phi_hat.coeffs[mirror[keep]] * np.exp(-1j * th[keep])
    return SpectralField(phi_hat.grid, c)


# ---------------------------------------------------------------------------
# Scaling-Galilean field
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingResult:
    field: RealField
    norm: float
    residual_L: float
    residual_dx: float


def _support_check(phi: RealField, tol: float):
    peak = np.max(np.abs(phi.values))
    if peak == 0.0:
        return
    outer = np.abs(phi.grid.x) > 0.25 * phi.grid.domain_length
    if np.max(np.abs(phi.values[outer])) > tol * peak:
        from .paraproduct import SupportError

        raise SupportError("field is not confined to the central half of the domain")


def scaling_galilean(state, r: int = 7, *, support_tol: float = 1e-12) -> ScalingResult:
    """``S phi = (x + 2t) phi_x + t phi_t`` with ``phi_t = 2 L phi_x - N(phi)``.

    Also returns ``||[S, L] phi + phi|| / ||phi||`` and
    ``||[S, d_x] phi + phi_x|| / ||phi_x||``, evaluated with the time slot of
    ``S`` expanded through the same substitution for ``phi_t``.
    """
    from .evolution import profile_to_solution
    from .nonlinearity import full_nonlinearity

    cfg = state.config
    t = state.t
    phi_hat = profile_to_solution(state)
    phi = inverse_transform(phi_hat)
    _support_check(phi, support_tol)
    g = phi.grid
    xw = g.x + 2.0 * t

    def dx(f: SpectralField) -> SpectralField:
        return apply_multiplier(f, DERIV)

    def ell(f: SpectralField) -> SpectralField:
        return apply_multiplier(f, LOG)

    phit = 2.0 * ell(dx(phi_hat))
    if cfg.nonlinear:
        phit = phit - forward_transform(full_nonlinearity(phi, cfg.nonlinearity))

    def S(f: SpectralField, ft: SpectralField) -> SpectralField:
        return forward_transform(RealField(g, xw * inverse_transform(dx(f)).values)) + t * ft

    s_phi = S(phi_hat, phit)
    comm_L = S(ell(phi_hat), ell(phit)) - ell(s_phi)
    comm_dx = S(dx(phi_hat), dx(phit)) - dx(s_phi)
    nphi = sobolev_norm(phi_hat, 0)
    nphix = sobolev_norm(dx(phi_hat), 0)
    res_L = sobolev_norm(comm_L + phi_hat, 0) / nphi if nphi else 0.0
    res_dx = sobolev_norm(comm_dx + dx(phi_hat), 0) / nphix if nphix else 0.0
    return ScalingResult(inverse_transform(s_phi), sobolev_norm(s_phi, r), res_L, res_dx)
