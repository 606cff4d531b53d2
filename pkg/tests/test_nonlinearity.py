import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sqgfront.nonlinearity import (
    NonlinearityConfig,
    OracleError,
    SlopeError,
    cubic_term_convolution,
    cubic_term_spectral,
    full_nonlinearity,
    higher_term_spectral,
    multilinear_convolution,
    zeta_integral_oracle,
)
from sqgfront.spectral_core import FourierGrid, RealField, forward_transform
from sqgfront.symbols import t1

from conftest import bump_field, random_smooth_field, rel_l2

G64 = FourierGrid(64, 20.0)


def spectral_gap(phi, cfg=None):
    a = forward_transform(cubic_term_spectral(phi, cfg)).coeffs
    b = cubic_term_convolution(forward_transform(phi)).coeffs
    return rel_l2(a, b)


class TestConfig:
    def test_defaults(self):
        cfg = NonlinearityConfig()
        assert cfg.n_max == 1
        assert cfg.padded_size(64) == 128
        assert NonlinearityConfig(n_max=3).padded_size(64) == 256

    def test_invalid(self):
        with pytest.raises(ValueError):
            NonlinearityConfig(n_max=0)


class TestCubic:
    def test_zero(self):
        z = RealField(G64, np.zeros(64))
        assert np.all(cubic_term_spectral(z).values == 0.0)
        assert np.all(cubic_term_convolution(forward_transform(z)).coeffs == 0.0)

    def test_single_mode_hand_enumeration(self):
        a, k = 0.01, 3
        x1 = G64.wavenumber(k)
        phi = RealField.from_function(G64, lambda x: a * np.cos(x1 * x))
        c = a / 2
        # k: three orderings of (x1, x1, -x1); 3k: the single triple (x1, x1, x1)
        expect_k = 1j * x1 / 6 * 3 * t1(x1, x1, -x1) * c**3
        expect_3k = 1j * 3 * x1 / 6 * t1(x1, x1, x1) * c**3
        out = forward_transform(cubic_term_spectral(phi)).coeffs
        conv = cubic_term_convolution(forward_transform(phi)).coeffs
        for arr in (out, conv):
            assert arr[k] == pytest.approx(expect_k, rel=1e-11)
            assert arr[3 * k] == pytest.approx(expect_3k, rel=1e-11)
            assert arr[-k] == pytest.approx(np.conj(expect_k), rel=1e-11)
            rest = np.delete(np.abs(arr), [k, 3 * k, 64 - k, 64 - 3 * k])
            assert np.max(rest) < 1e-13 * abs(expect_k)

    @given(st.integers(0, 2**32 - 1))
    def test_two_path_equality(self, seed):
        phi = random_smooth_field(G64, np.random.default_rng(seed), amplitude=0.05, band=31)
        assert spectral_gap(phi) <= 1e-11

    @given(st.floats(-3.0, 3.0).filter(lambda v: abs(v) > 1e-3))
    def test_trilinear_scaling(self, lam):
        phi = random_smooth_field(G64, np.random.default_rng(7), amplitude=0.05)
        base = cubic_term_spectral(phi).values
        scaled = cubic_term_spectral(lam * phi).values
        # the three products are up to ~30x the result, so round-off lands near 3e-13 of the peak
        assert np.allclose(scaled, lam**3 * base, rtol=1e-12, atol=1e-12 * abs(lam) ** 3 * np.max(np.abs(base)))

    def test_conjugate_symmetry(self, rng):
        phi = random_smooth_field(G64, rng, amplitude=0.05, band=31)
        assert cubic_term_convolution(forward_transform(phi)).symmetry_defect() < 1e-12

    def test_convolution_size_cap(self):
        with pytest.raises(ValueError):
            cubic_term_convolution(forward_transform(RealField(FourierGrid(256, 1.0), np.zeros(256))))


class TestHigher:
    def test_quintic_against_five_fold_convolution(self):
        g = FourierGrid(32, 2 * np.pi * 4)
        a = 1e-3
        phi = RealField.from_function(g, lambda x: a * np.cos(g.wavenumber(2) * x))
        cfg = NonlinearityConfig(n_max=2)
        got = forward_transform(higher_term_spectral(phi, 2, cfg)).coeffs
        ref = multilinear_convolution(forward_transform(phi), 2, rel_support=1e-8).coeffs
        assert rel_l2(got, ref) <= 1e-8

    def test_septic_against_seven_fold_convolution(self):
        g = FourierGrid(32, 2 * np.pi * 4)
        phi = RealField.from_function(g, lambda x: 1e-2 * np.cos(g.wavenumber(1) * x))
        cfg = NonlinearityConfig(n_max=3)
        got = forward_transform(higher_term_spectral(phi, 3, cfg)).coeffs
        ref = multilinear_convolution(forward_transform(phi), 3, rel_support=1e-8).coeffs
        assert rel_l2(got, ref) <= 1e-8

    def test_two_mode_quintic(self):
        g = FourierGrid(64, 2 * np.pi * 4)
        phi = RealField.from_function(
            g, lambda x: 1e-2 * np.cos(g.wavenumber(2) * x) + 5e-3 * np.sin(g.wavenumber(3) * x)
        )
        cfg = NonlinearityConfig(n_max=2)
        got = forward_transform(higher_term_spectral(phi, 2, cfg)).coeffs
        ref = multilinear_convolution(forward_transform(phi), 2, rel_support=1e-8).coeffs
        assert rel_l2(got, ref) <= 1e-8

    @pytest.mark.parametrize("lam", [0.5, 2.0, -1.5])
    def test_scaling(self, lam):
        phi = bump_field(G64, 0.02, 2.0)
        cfg = NonlinearityConfig(n_max=2)
        base = higher_term_spectral(phi, 2, cfg).values
        scaled = higher_term_spectral(lam * phi, 2, cfg).values
        assert np.allclose(scaled, lam**5 * base, rtol=1e-10, atol=1e-10 * np.max(np.abs(base)) * abs(lam) ** 5)

    def test_zero_and_range(self):
        cfg = NonlinearityConfig(n_max=2)
        z = RealField(G64, np.zeros(64))
        assert np.all(higher_term_spectral(z, 2, cfg).values == 0.0)
        with pytest.raises(ValueError):
            higher_term_spectral(z, 3, cfg)
        with pytest.raises(ValueError):
            higher_term_spectral(z, 1, cfg)


class TestFull:
    @pytest.mark.parametrize("n_max", [1, 2, 3])
    def test_mean_zero(self, n_max):
        phi = bump_field(FourierGrid(128, 40.0), 0.05, 2.0, center=1.3)
        out = forward_transform(full_nonlinearity(phi, NonlinearityConfig(n_max=n_max)))
        assert abs(out.coeffs[0]) <= 1e-12 * np.max(np.abs(out.coeffs))

    def test_is_sum_of_terms(self):
        phi = bump_field(G64, 0.05, 2.0)
        cfg = NonlinearityConfig(n_max=3)
        total = full_nonlinearity(phi, cfg).values
        parts = cubic_term_spectral(phi, cfg).values + sum(higher_term_spectral(phi, n, cfg).values for n in (2, 3))
        assert np.allclose(total, parts, rtol=1e-12, atol=1e-16)

    def test_cubic_leading_order(self):
        # ||N(a phi0)||/a^3 = C3 + C5 a^2 + ...: successive differences shrink by 4
        phi0 = bump_field(G64, 1.0, 2.0)
        cfg = NonlinearityConfig(n_max=2)
        amps = [0.08, 0.04, 0.02, 0.01]
        r = [np.linalg.norm(full_nonlinearity(a * phi0, cfg).values) / a**3 for a in amps]
        d = np.diff(r)
        for ratio in d[:-1] / d[1:]:
            assert 3.5 < ratio < 4.5
        assert abs(d[-1]) < 1e-3 * r[-1]


class TestOracle:
    def test_zero(self):
        g = FourierGrid(64, 20.0)
        assert zeta_integral_oracle(RealField(g, np.zeros(64)), 32) == 0.0

    def test_even_bump_at_centre(self):
        g = FourierGrid(128, 40.0)
        phi = bump_field(g, 0.05, 1.5)
        scale = np.max(np.abs(full_nonlinearity(phi).values))
        assert abs(zeta_integral_oracle(phi, 64)) < 1e-12 * scale

    def test_slope_precondition(self):
        g = FourierGrid(64, 20.0)
        with pytest.raises(SlopeError):
            zeta_integral_oracle(bump_field(g, 2.0, 1.0), 32)

    def test_index_range(self):
        g = FourierGrid(64, 20.0)
        with pytest.raises(ValueError):
            zeta_integral_oracle(bump_field(g, 0.01, 1.0), 64)

    def test_agrees_with_series(self):
        g = FourierGrid(256, 40.0)
        phi = bump_field(g, 0.02, 1.5)
        j = 128 + 6
        ref = full_nonlinearity(phi, NonlinearityConfig(n_max=3)).values[j]
        val = zeta_integral_oracle(phi, j)
        # the first omitted term is of degree 9
        assert abs(val - ref) <= 1e-6 * abs(ref)

    def test_oracle_error_is_runtime_error(self):
        assert issubclass(OracleError, RuntimeError)
