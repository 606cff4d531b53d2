import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sqgfront.spectral_core import FourierGrid, RealField, forward_transform

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_smooth_field(grid: FourierGrid, rng, amplitude=1.0, band=None) -> RealField:
    """Real field with random coefficients on ``|k| <= band`` (default N/8)."""
    n = grid.n_points
    band = n // 8 if band is None else band
    c = np.zeros(n, dtype=complex)
    k = np.arange(1, band + 1)
    vals = (rng.standard_normal(band) + 1j * rng.standard_normal(band)) / k
    c[k] = vals
    c[-k] = np.conj(vals)
    c[0] = rng.standard_normal()
    v = np.fft.ifft(c * grid.origin_phase()).real * n
    v *= amplitude / np.max(np.abs(v))
    return RealField(grid, v)


def bump_field(grid: FourierGrid, amplitude, width, center=0.0) -> RealField:
    return RealField.from_function(grid, lambda x: amplitude * np.exp(-(((x - center) / width) ** 2)))


def rel_l2(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


__all__ = ["random_smooth_field", "bump_field", "rel_l2", "forward_transform"]


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE_RESULTS = {}


def record_acceptance(number: int, passed: bool, detail: str):
    ACCEPTANCE_RESULTS[number] = (bool(passed), detail)
    print(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
