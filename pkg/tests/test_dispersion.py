import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sqgfront.dispersion import (
    PSI_INTEGRAL,
    T1PHI_COEFFICIENT,
    beta_analytic,
    beta_coefficients,
    beta_stationary,
    corrected_profile,
    decay_fit,
    membership,
    new_scattering_phase,
    phase_phi,
    resonance_sets,
    rho,
    scaling_galilean,
    scattering_phase_update,
    stationary_point,
    t1_over_phi,
)
from sqgfront.evolution import SimConfig, SimState, initial_state, profile_to_solution, run
from sqgfront.paraproduct import SupportError
from sqgfront.spectral_core import (
    DERIV,
    FourierGrid,
    SpectralField,
    apply_multiplier,
    forward_transform,
    inverse_transform,
)
from sqgfront.symbols import xlogx

from conftest import random_smooth_field

nonzero = st.floats(0.05, 20.0) | st.floats(-20.0, -0.05)


class TestPhase:
    @given(nonzero)
    def test_space_time_resonance(self, xi):
        assert phase_phi(xi, xi, xi) == pytest.approx(0.0, abs=1e-12 * max(1.0, abs(xi) * math.log(abs(xi) + 2)))

    def test_space_resonance_value(self):
        assert phase_phi(1.0, 1 / 3, 1 / 3) == pytest.approx(-2 * math.log(3), abs=1e-12)

    @given(nonzero, st.floats(-5, 5), st.floats(-5, 5))
    def test_symmetric(self, xi, a, b):
        assert phase_phi(xi, a, b) == pytest.approx(phase_phi(xi, b, a), abs=1e-12)

    @pytest.mark.parametrize("xi", [0.7, 1.3, 4.0])
    def test_t1_over_phi_expansion(self, xi):
        limit = T1PHI_COEFFICIENT * xi
        errs = []
        for d in (0.04, 0.02, 0.01):
            e1, e2 = xi / 3 + d, xi / 3 - 0.6 * d
            errs.append(abs(t1_over_phi(xi, e1, e2) - limit))
        assert t1_over_phi(xi, xi / 3, xi / 3) == pytest.approx(limit, rel=1e-12)
        for a, b in zip(errs[:-1], errs[1:]):
            assert a / b == pytest.approx(4.0, rel=0.1)

    def test_coefficient(self):
        assert T1PHI_COEFFICIENT == pytest.approx(0.5 - 2 * math.log(2) / (3 * math.log(3)), rel=1e-15)


class TestStationaryPoints:
    def test_unit(self):
        assert stationary_point(-2.0, 1.0) == (1.0, -1.0)

    @given(st.floats(0.01, 1e3))
    def test_origin(self, t):
        p, m = stationary_point(0.0, t)
        assert p == pytest.approx(math.exp(-1)) and m == -p

    @given(st.floats(-50, 50), st.floats(0.1, 100))
    def test_residual(self, x, t):
        xi0, _ = stationary_point(x, t)
        assert abs(x + 2 * t * (math.log(abs(xi0)) + 1)) <= 1e-14 * max(1.0, abs(x), t)

    def test_needs_positive_time(self):
        with pytest.raises(ValueError):
            stationary_point(1.0, 0.0)


class TestDecayFit:
    def test_power_law(self):
        t = np.linspace(20, 200, 40)
        assert decay_fit(np.c_[t, 3.0 * t**-0.5]) == pytest.approx(-0.5, abs=1e-12)

    def test_constant(self):
        t = np.linspace(20, 200, 40)
        assert decay_fit(np.c_[t, np.full_like(t, 2.0)]) == pytest.approx(0.0, abs=1e-12)

    def test_window_and_errors(self):
        t = np.linspace(1, 200, 200)
        v = np.where(t < 20, 1.0, t**-0.5)
        assert decay_fit(np.c_[t, v], (20, 200)) == pytest.approx(-0.5, abs=1e-12)
        with pytest.raises(ValueError):
            decay_fit(np.c_[t[:5], v[:5]])
        with pytest.raises(ValueError):
            decay_fit(np.c_[t, -v])

    def test_linear_packet_decay(self):
        from sqgfront.evolution import linear_propagate

        g = FourierGrid(2**12, 1000.0)
        f = forward_transform(
            inverse_transform(SpectralField(g, np.zeros(g.n_points)))
            + type(inverse_transform(SpectralField(g, np.zeros(g.n_points)))).from_function(
                g, lambda x: np.exp(-((x / 5) ** 2)) * np.cos(x)
            )
        )
        ts = np.linspace(20, 100, 20)
        linf = [np.max(np.abs(inverse_transform(linear_propagate(f, t)).values)) for t in ts]
        assert -0.6 <= decay_fit(np.c_[ts, linf]) <= -0.4


class TestResonanceSets:
    def test_centre_of_a2(self):
        for t in (0.0, 10.0, 1e4):
            s = resonance_sets(1.7, t)
            assert membership(s, 1.7, 1.7) == "A2"

    def test_outside_a1(self):
        xi, t = 3.0, 5.0
        s = resonance_sets(xi, t)
        a1 = s.sets[0]
        assert not a1.contains(xi / 3 + 2 * s.rho, xi / 3)
        assert a1.contains(xi / 3 + 0.7 * s.rho, xi / 3)

    def test_centres(self):
        s = resonance_sets(2.0, 1.0)
        assert [p.center for p in s.sets] == [(2 / 3, 2 / 3), (2.0, 2.0), (2.0, -2.0), (-2.0, 2.0)]

    @given(st.floats(0.0, 5.0), st.floats(1.01, 4.0), st.integers(0, 2**32 - 1))
    def test_disjoint(self, t, factor, seed):
        # A1 spans xi/3 +- B in eta1 and A3 spans xi +- B, with B = 8 rho / 5,
        # so the sets separate once xi > 3 B
        xi = factor * 3 * 1.6 * float(rho(t))
        s = resonance_sets(xi, t)
        rng = np.random.default_rng(seed)
        e1 = rng.uniform(-1.5 * xi, 1.5 * xi, 4000)
        e2 = rng.uniform(-1.5 * xi, 1.5 * xi, 4000)
        # also sample densely around every centre
        for p in s.sets:
            e1 = np.r_[e1, p.center[0] + rng.uniform(-2, 2, 1000) * s.rho]
            e2 = np.r_[e2, p.center[1] + rng.uniform(-2, 2, 1000) * s.rho]
        counts = sum(p.contains(e1, e2).astype(int) for p in s.sets)
        assert counts.max() <= 1

    def test_overlap_when_xi_is_small(self):
        s = resonance_sets(3.0, 0.0)
        assert s.sets[0].contains(1.5, 1.0) and s.sets[2].contains(1.5, 1.0)

    def test_parallelogram_map(self):
        p = resonance_sets(1.0, 0.0).sets[2]
        u, v = 0.3, -0.2
        e1, e2 = p.to_eta(u, v)
        (a, b), (c, d) = p.rows
        assert a * (e1 - p.center[0]) + b * (e2 - p.center[1]) == pytest.approx(u)
        assert c * (e1 - p.center[0]) + d * (e2 - p.center[1]) == pytest.approx(v)

    def test_invalid(self):
        with pytest.raises(ValueError):
            resonance_sets(0.0, 1.0)
        with pytest.raises(ValueError):
            resonance_sets(1.0, -1.0)

    def test_rho(self):
        assert rho(0.0) == 1.0
        assert rho(99.0) == pytest.approx(100**-0.49)


class TestBeta:
    def test_analytic_value(self):
        assert beta_analytic(10.0) == pytest.approx(rho(10.0) ** 2 * 2.85**2 / 6)
        assert PSI_INTEGRAL == pytest.approx(2.85)

    def test_quadrature_matches_analytic_far_from_origin(self):
        b = beta_coefficients(5.0, 10.0)
        assert b == pytest.approx((beta_analytic(10.0),) * 3, rel=1e-8)

    def test_stationary(self):
        assert beta_stationary(2.0, 1.0) == pytest.approx(np.pi * 2 / 12)
        assert beta_stationary(-2.0, 1.0) == beta_stationary(2.0, 1.0)


class TestScatteringPhase:
    grid = FourierGrid(256, 100.0)

    def test_zero_solution(self):
        acc = new_scattering_phase(self.grid)
        zero = SpectralField(self.grid, np.zeros(256))
        for tau in (0.0, 0.5, 1.7, 4.0):
            acc = scattering_phase_update(acc, zero, tau)
        assert np.allclose(acc.theta(), -2 * 4.0 * xlogx(acc.xi), rtol=1e-14, atol=0)

    @pytest.mark.parametrize("rule", ["analytic", "stationary"])
    def test_unimodular(self, rule, rng):
        f = forward_transform(random_smooth_field(self.grid, rng))
        acc = new_scattering_phase(self.grid, beta=rule)
        acc = scattering_phase_update(acc, f, 0.0)
        acc = scattering_phase_update(acc, f, 2.0, dtau=2.0)
        v = corrected_profile(f, acc)
        assert np.allclose(np.abs(v.coeffs), np.abs(f.coeffs), rtol=1e-14, atol=0)
        assert v.symmetry_defect() < 1e-12

    def test_time_order(self):
        zero = SpectralField(self.grid, np.zeros(256))
        acc = scattering_phase_update(new_scattering_phase(self.grid), zero, 2.0)
        with pytest.raises(ValueError):
            scattering_phase_update(acc, zero, 1.0)
        with pytest.raises(ValueError):
            scattering_phase_update(acc, zero, 3.0, dtau=0.5)
        with pytest.raises(ValueError):
            new_scattering_phase(self.grid, beta="guess")


@pytest.fixture(scope="module")
def packet_phases():
    """arg h and arg v at the carrier of a small packet, t in [0, 40]."""
    cfg = SimConfig(
        n_points=1024, domain_length=600.0, profile="packet", amplitude=0.1, width=3.0, carrier=1.5,
        t_end=40.0, dt=0.1, guard_tol=1.0, output_stride=10**6,
    )
    g = cfg.grid
    mode = int(round(1.5 / g.dxi))
    accs = {r: new_scattering_phase(g, [mode], beta=r) for r in ("analytic", "stationary")}
    rows = []

    def track(state):
        ph = profile_to_solution(state)
        row = [state.t, np.angle(state.profile.coeffs[mode])]
        for r in accs:
            accs[r] = scattering_phase_update(accs[r], ph, state.t)
            row.append(np.angle(corrected_profile(ph, accs[r]).coeffs[mode]))
        rows.append(row)

    track(initial_state(cfg))
    run(cfg, callback=track)
    arr = np.array(rows)
    return arr[:, 0], np.unwrap(arr[:, 1:], axis=0)


def window_increments(t, phase, starts):
    out = []
    for a in starts:
        i, j = np.searchsorted(t, [a - 1e-9, 2 * a - 1e-9])
        out.append(phase[j] - phase[i])
    return np.array(out)


class TestModifiedScattering:
    def test_profile_phase_grows_logarithmically(self, packet_phases):
        t, ph = packet_phases
        dh = window_increments(t, ph[:, 0], [5, 10, 20])
        assert np.all(dh < 0)
        # equal increments over doubling windows: log t growth
        assert abs(dh[2] / dh[1] - 1) < 0.2

    @pytest.mark.parametrize("col", [1, 2])
    def test_convergence_ratio_below_one(self, packet_phases, col):
        t, ph = packet_phases
        dh = window_increments(t, ph[:, 0], [10, 20])
        dv = window_increments(t, ph[:, col], [10, 20])
        assert np.all(np.abs(dv) < np.abs(dh))

    def test_stationary_rule_converges(self, packet_phases):
        t, ph = packet_phases
        dv = np.abs(window_increments(t, ph[:, 2], [5, 10, 20]))
        assert dv[0] > dv[1] > dv[2]
        assert dv[2] < 0.05 * abs(window_increments(t, ph[:, 0], [20])[0])


class TestScalingField:
    def packet_state(self, t_end, amplitude=0.01):
        cfg = SimConfig(
            n_points=1024, domain_length=400.0, profile="packet", amplitude=amplitude, width=10.0, carrier=1.5,
            t_end=t_end, dt=0.1, guard_tol=1.0,
        )
        return run(cfg).final if t_end else initial_state(cfg)

    @pytest.mark.parametrize("t_end", [0.0, 3.0])
    def test_commutators(self, t_end):
        res = scaling_galilean(self.packet_state(t_end))
        assert res.residual_L <= 1e-8
        assert res.residual_dx <= 1e-8
        assert np.isfinite(res.norm)

    def test_reduces_to_x_phix_at_zero(self):
        state = self.packet_state(0.0)
        res = scaling_galilean(state)
        phi_hat = profile_to_solution(state)
        g = state.grid
        xphix = g.x * inverse_transform(apply_multiplier(phi_hat, DERIV)).values
        assert np.array_equal(res.field.values, inverse_transform(forward_transform(
            type(res.field)(g, xphix))).values)

    def test_nonlinear_tails_are_rejected(self):
        # a = 0.05 leaves ~2e-10 relative tails in the outer half by t = 3
        with pytest.raises(SupportError):
            scaling_galilean(self.packet_state(3.0, amplitude=0.05))

    def test_support(self):
        cfg = SimConfig(n_points=256, domain_length=40.0, width=8.0)
        with pytest.raises(SupportError):
            scaling_galilean(SimState(0.0, initial_state(cfg).profile, cfg))
