"""
Time integration in the profile variable

    h_hat(xi, t) = exp(-2 i t xi log|xi|) phi_hat(xi, t),

which removes the linear flow ``phi_t = 2 L phi_x`` exactly. The profile obeys

    d/dt h_hat = -exp(-2 i t xi log|xi|) F[N(phi)]

and is advanced with classical fixed-step RK4.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import numpy as np

from .nonlinearity import NonlinearityConfig, band_limit, full_nonlinearity
from .spectral_core import (
    DERIV,
    DISPERSION,
    LOG,
    FourierGrid,
    RealField,
    SpectralField,
    apply_multiplier,
    forward_transform,
    inverse_transform,
    multiplier_values,
    sobolev_norm,
    z_norm,
)

__all__ = [
    "SimConfig",
    "SimState",
    "DiagnosticsRecord",
    "RunResult",
    "PROFILES",
    "initial_field",
    "initial_state",
    "profile_to_solution",
    "solution_to_profile",
    "linear_propagate",
    "rhs_profile",
    "step_rk4",
    "reflect",
    "guard_ratio",
    "diagnostics",
    "run",
]

log = logging.getLogger(__name__)


def _gaussian(x, a, w, k0):
    return a * np.exp(-((x / w) ** 2))


def _gaussian_derivative(x, a, w, k0):
    # normalised so the peak value is a
    return -a * np.sqrt(2 * np.e) * (x / w) * np.exp(-((x / w) ** 2))


def _packet(x, a, w, k0):
    return a * np.exp(-((x / w) ** 2)) * np.cos(k0 * x)


PROFILES = {
    "gaussian": _gaussian,
    "gaussian_derivative": _gaussian_derivative,
    "packet": _packet,
}

DIAGNOSTIC_NAMES = ("hs", "z", "phix_inf", "lphix_inf", "energy", "s_norm", "tblog")


@dataclass(frozen=True)
class SimConfig:
    """Run configuration.

    Parameters
    ----------
    n_points, domain_length : grid size and period.
    dt, t_end : step and final time; ``dt=None`` means ``0.25 * dx``.
    profile : one of :data:`PROFILES`, or ``"snapshot"`` with ``snapshot_path``.
    amplitude, width, carrier : initial-profile parameters.
    n_max : series truncation of the nonlinearity.
    nonlinear : set False to evolve the linear equation only.
    output_stride : steps between diagnostics rows.
    diagnostics : subset of ``hs, z, phix_inf, lphix_inf, energy, s_norm, tblog``.
    guard_fraction : width of each boundary margin, as a fraction of L.
    guard_tol : ``|phi|`` in the margins must stay below ``guard_tol`` times
        its peak.
    sobolev_index : ``s`` of the monitored ``H^s`` norm.
    energy_index : ``s`` of the weighted energy diagnostic.
    z_index : ``r`` of the Z-norm.
    drift_limit : largest accepted relative ``H^s`` change per step.
    tblog_limit : abort threshold for the paraproduct operator norm.
    seed : global seed for randomised perturbations.
    """

    n_points: int = 1024
    domain_length: float = 400.0
    dt: Optional[float] = None
    t_end: float = 10.0
    profile: str = "gaussian"
    amplitude: float = 1e-2
    width: float = 5.0
    carrier: float = 0.0
    snapshot_path: Optional[str] = None
    n_max: int = 1
    nonlinear: bool = True
    output_stride: int = 10
    diagnostics: tuple = ("hs", "z", "phix_inf", "lphix_inf")
    guard_fraction: float = 0.1
    guard_tol: float = 1e-10
    sobolev_index: float = 4.0
    energy_index: int = 1
    z_index: int = 7
    drift_limit: float = 1e-2
    tblog_limit: float = 1.9
    seed: int = 0

    def __post_init__(self):
        FourierGrid(self.n_points, self.domain_length)
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end >= 0:
            raise ValueError("t_end must be nonnegative")
        if not 0 < self.guard_fraction < 0.5:
            raise ValueError("guard_fraction must lie in (0, 0.5)")
        if self.profile != "snapshot" and self.profile not in PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}; expected one of {sorted(PROFILES)} or 'snapshot'")
        if self.profile == "snapshot" and not self.snapshot_path:
            raise ValueError("profile 'snapshot' needs snapshot_path")
        if self.output_stride < 1:
            raise ValueError("output_stride must be >= 1")
        bad = set(self.diagnostics) - set(DIAGNOSTIC_NAMES)
        if bad:
            raise ValueError(f"unknown diagnostics {sorted(bad)}")
        NonlinearityConfig(n_max=self.n_max)

    @property
    def grid(self) -> FourierGrid:
        return FourierGrid(self.n_points, self.domain_length)

    @property
    def step(self) -> float:
        return self.dt if self.dt is not None else 0.25 * self.grid.dx

    @property
    def nonlinearity(self) -> NonlinearityConfig:
        return NonlinearityConfig(n_max=self.n_max)


@dataclass(frozen=True)
class SimState:
    t: float
    profile: SpectralField
    config: SimConfig = field(default_factory=SimConfig, repr=False)
    step: int = 0

    @property
    def grid(self) -> FourierGrid:
        return self.profile.grid


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    step: int
    hs: float = float("nan")
    z: float = float("nan")
    phix_inf: float = float("nan")
    lphix_inf: float = float("nan")
    energy: float = float("nan")
    s_norm: float = float("nan")
    tblog: float = float("nan")
    guard: float = float("nan")


@dataclass
class RunResult:
    records: List[DiagnosticsRecord]
    final: SimState
    snapshots: List[str] = field(default_factory=list)
    abort_reason: Optional[str] = None
    last_good_time: float = 0.0

    @property
    def aborted(self) -> bool:
        return self.abort_reason is not None


# ---------------------------------------------------------------------------
# Phase maps
# ---------------------------------------------------------------------------


def _phase(grid: FourierGrid, t: float) -> np.ndarray:
    """``exp(2 i t xi log|xi|)``, equal to 1 at the zero and Nyquist modes."""
    return np.exp(2.0 * t * multiplier_values(grid, DISPERSION))


def profile_to_solution(state: SimState) -> SpectralField:
    return SpectralField(state.grid, state.profile.coeffs * _phase(state.grid, state.t))


def solution_to_profile(phi_hat: SpectralField, t: float) -> SpectralField:
    return SpectralField(phi_hat.grid, phi_hat.coeffs * _phase(phi_hat.grid, -t))


def linear_propagate(phi_hat: SpectralField, dt: float) -> SpectralField:
    """Exact solution operator of ``phi_t = 2 L phi_x`` over time ``dt``."""
    return SpectralField(phi_hat.grid, phi_hat.coeffs * _phase(phi_hat.grid, dt))


# ---------------------------------------------------------------------------
# Stepping
# ---------------------------------------------------------------------------


def _profile_rhs(grid: FourierGrid, t: float, h: np.ndarray, cfg: NonlinearityConfig) -> np.ndarray:
    ph = _phase(grid, t)
    phi = inverse_transform(SpectralField(grid, h * ph))
    nl = forward_transform(full_nonlinearity(phi, cfg)).coeffs
    return -nl * np.conj(ph)


def rhs_profile(state: SimState) -> SpectralField:
    """``d h_hat / dt`` at the state; zero when the nonlinearity is off."""
    cfg = state.config
    if not cfg.nonlinear:
        return SpectralField(state.grid, np.zeros(state.grid.n_points, dtype=complex))
    return SpectralField(state.grid, _profile_rhs(state.grid, state.t, state.profile.coeffs, cfg.nonlinearity))


def step_rk4(state: SimState, dt: float) -> SimState:
    cfg = state.config
    if not cfg.nonlinear:
        return replace(state, t=state.t + dt, step=state.step + 1)
    grid, t, h = state.grid, state.t, state.profile.coeffs
    ncfg = cfg.nonlinearity
    k1 = _profile_rhs(grid, t, h, ncfg)
    k2 = _profile_rhs(grid, t + 0.5 * dt, h + 0.5 * dt * k1, ncfg)
    k3 = _profile_rhs(grid, t + 0.5 * dt, h + 0.5 * dt * k2, ncfg)
    k4 = _profile_rhs(grid, t + dt, h + dt * k3, ncfg)
    h_new = h + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return replace(state, t=t + dt, profile=SpectralField(grid, h_new), step=state.step + 1)


def reflect(f: RealField) -> RealField:
    """``f(x) -> f(-x)`` on the centred grid (node j maps to node N-j)."""
    n = f.grid.n_points
    return RealField(f.grid, f.values[(-np.arange(n)) % n])


# ---------------------------------------------------------------------------
# Initial data and diagnostics
# ---------------------------------------------------------------------------


def initial_field(config: SimConfig) -> RealField:
    grid = config.grid
    if config.profile == "snapshot":
        from .cli_io import read_snapshot

        st = read_snapshot(config.snapshot_path)
        if st.grid != grid:
            raise ValueError(f"snapshot grid {st.grid} does not match the configured grid {grid}")
        return inverse_transform(profile_to_solution(st))
    func = PROFILES[config.profile]
    phi = RealField.from_function(grid, lambda x: func(x, config.amplitude, config.width, config.carrier))
    return inverse_transform(band_limit(forward_transform(phi)))


def initial_state(config: SimConfig) -> SimState:
    if config.profile == "snapshot":
        from .cli_io import read_snapshot

        st = read_snapshot(config.snapshot_path)
        return SimState(st.t, st.profile, config, 0)
    return SimState(0.0, forward_transform(initial_field(config)), config, 0)


def guard_ratio(phi: RealField, guard_fraction: float) -> float:
    """Max of ``|phi|`` in the two boundary margins over its peak."""
    v = phi.values
    peak = np.max(np.abs(v))
    if peak == 0.0:
        return 0.0
    x = phi.grid.x
    margin = np.abs(x) >= (0.5 - guard_fraction) * phi.grid.domain_length
    return float(np.max(np.abs(v[margin])) / peak)


def diagnostics(state: SimState, names: Optional[Sequence[str]] = None) -> DiagnosticsRecord:
    cfg = state.config
    names = cfg.diagnostics if names is None else names
    phi_hat = profile_to_solution(state)
    phi = inverse_transform(phi_hat)
    row = {"t": state.t, "step": state.step}
    if "hs" in names:
        row["hs"] = sobolev_norm(phi_hat, cfg.sobolev_index)
    if "z" in names:
        row["z"] = z_norm(phi_hat, cfg.z_index)
    if "phix_inf" in names or "lphix_inf" in names:
        phix = apply_multiplier(phi_hat, DERIV)
        row["phix_inf"] = float(np.max(np.abs(inverse_transform(phix).values)))
        row["lphix_inf"] = float(np.max(np.abs(inverse_transform(apply_multiplier(phix, LOG)).values)))
    if "energy" in names:
        from .paraproduct import weighted_energy

        row["energy"] = weighted_energy(phi, cfg.energy_index)
    if "s_norm" in names:
        from .dispersion import scaling_galilean

        row["s_norm"] = scaling_galilean(state, r=cfg.z_index).norm
    if "tblog" in names:
        from .paraproduct import operator_norm_tblog

        row["tblog"] = operator_norm_tblog(phi)
    row["guard"] = guard_ratio(phi, cfg.guard_fraction)
    return DiagnosticsRecord(**row)


def run(
    config: SimConfig,
    *,
    snapshot_dir: Optional[str] = None,
    snapshot_stride: Optional[int] = None,
    callback: Optional[Callable[[SimState], None]] = None,
) -> RunResult:
    """Integrate to ``t_end``, stopping early on NaN, guard or drift violations.

    Diagnostics are recorded every ``output_stride`` steps and at the final
    time. Snapshots are written to ``snapshot_dir`` every ``snapshot_stride``
    steps (default: at the end only).
    """
    state = initial_state(config)
    dt = config.step
    n_steps = int(np.ceil(round((config.t_end - state.t) / dt, 9)))
    s = config.sobolev_index
    records = [diagnostics(state)]
    snapshots: List[str] = []
    result = RunResult(records, state, snapshots, None, state.t)

    def snap(st):
        if snapshot_dir is None:
            return
        from .cli_io import write_snapshot

        path = Path(snapshot_dir) / f"state_{st.step:07d}.sqgf"
        write_snapshot(st, path)
        snapshots.append(str(path))

    norm_prev = sobolev_norm(state.profile, s)
    for i in range(n_steps):
        h = min(dt, config.t_end - state.t) if i == n_steps - 1 else dt
        new = step_rk4(state, h)
        c = new.profile.coeffs
        if not np.all(np.isfinite(c)):
            result.abort_reason = f"non-finite coefficients at t={new.t:.6g}"
            break
        norm_new = sobolev_norm(new.profile, s)
        if norm_prev > 0 and abs(norm_new - norm_prev) > config.drift_limit * norm_prev:
            result.abort_reason = f"H^{s:g} drift {abs(norm_new / norm_prev - 1):.3g} per step at t={new.t:.6g}"
            break
        last = i == n_steps - 1
        if new.step % config.output_stride == 0 or last:
            rec = diagnostics(new)
            records.append(rec)
            if rec.guard > config.guard_tol:
                result.abort_reason = (
                    f"boundary guard violated at t={new.t:.6g}: margin/peak = {rec.guard:.3g} "
                    f"> {config.guard_tol:g}; enlarge the domain"
                )
                state = new
                result.last_good_time = records[-2].t
                break
            if rec.tblog >= config.tblog_limit:
                result.abort_reason = f"paraproduct norm {rec.tblog:.4g} reached {config.tblog_limit} at t={new.t:.6g}"
                state = new
                break
        if snapshot_stride and new.step % snapshot_stride == 0:
            snap(new)
        if callback is not None:
            callback(new)
        state, norm_prev = new, norm_new
        result.last_good_time = state.t
    result.final = state
    if result.abort_reason:
        log.warning("run aborted: %s", result.abort_reason)
    final_name = f"state_{state.step:07d}.sqgf"
    if not snapshots or Path(snapshots[-1]).name != final_name:
        snap(state)
    return result
