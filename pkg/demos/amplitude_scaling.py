"""How the truncated nonlinearity scales with amplitude.

Two checks on the series truncation:

* a short run with ``n_max = 1`` differs from the ``n_max = 2`` run by a quintic
  amount, so halving the amplitude divides the gap by about 32;
* the truncated sum is compared with a direct evaluation of the full
  zeta-integral at one node, and the gap drops by about 2^7 per halving.
"""

import numpy as np

from sqgfront.evolution import SimConfig, initial_state, profile_to_solution, step_rk4
from sqgfront.nonlinearity import NonlinearityConfig, full_nonlinearity, zeta_integral_oracle
from sqgfront.spectral_core import FourierGrid, RealField, sobolev_norm


def truncation_gap(a, T=4.0, dt=0.05):
    finals = []
    for n_max in (1, 2):
        state = initial_state(SimConfig(n_points=256, domain_length=100.0, amplitude=a, width=3.0, n_max=n_max))
        for _ in range(int(round(T / dt))):
            state = step_rk4(state, dt)
        finals.append(profile_to_solution(state))
    return sobolev_norm(finals[0] - finals[1], 0)


def main():
    gaps = {a: truncation_gap(a) for a in (0.2, 0.1, 0.05)}
    for a, g in gaps.items():
        print(f"a = {a:5.3f}   ||phi_(n=1) - phi_(n=2)|| at t = 4: {g:.3e}")
    print(f"ratios: {gaps[0.2] / gaps[0.1]:.2f}, {gaps[0.1] / gaps[0.05]:.2f} (quintic: 32)")

    grid = FourierGrid(256, 40.0)
    j = grid.n_points // 2 + 6
    cfg = NonlinearityConfig(n_max=2)
    prev = None
    for a in (0.02, 0.01, 0.005):
        phi = RealField.from_function(grid, lambda x: a * np.exp(-((x / 1.5) ** 2)))
        gap = abs(zeta_integral_oracle(phi, j, cfg) - full_nonlinearity(phi, cfg).values[j])
        extra = f"   ratio {prev / gap:.1f}" if prev else ""
        print(f"a = {a:5.3f}   |oracle - series| at x = {grid.x[j]:.3f}: {gap:.3e}{extra}")
        prev = gap


if __name__ == "__main__":
    main()
