"""Dispersive decay of a linear wave packet.

A packet ``exp(-(x/5)^2) cos(x)`` is propagated exactly in Fourier space and its
sup norm is sampled on ``t in [20, 200]``.  The log-log slope should sit near
``-1/2``, and the packet centre should move with the group velocity
``-2(log|xi| + 1)`` of the dispersion relation.
"""

import numpy as np

from sqgfront.dispersion import decay_fit
from sqgfront.evolution import linear_propagate
from sqgfront.spectral_core import FourierGrid, RealField, forward_transform, inverse_transform


def main():
    grid = FourierGrid(2**14, 4000.0)
    f = forward_transform(RealField.from_function(grid, lambda x: np.exp(-((x / 5) ** 2)) * np.cos(x)))
    ts = np.linspace(20, 200, 37)
    linf = np.array([np.max(np.abs(inverse_transform(linear_propagate(f, t)).values)) for t in ts])
    for t, v in zip(ts[::6], linf[::6]):
        print(f"t = {t:6.1f}   sup|phi| = {v:.5f}   sqrt(t) sup|phi| = {np.sqrt(t) * v:.5f}")
    print(f"fitted decay exponent: {decay_fit(np.c_[ts, linf], (20, 200)):.4f}")

    # centre of mass of |phi|^2 for a packet with carrier 2
    g = FourierGrid(4096, 1600.0)
    p = forward_transform(RealField.from_function(g, lambda x: np.exp(-((x / 20) ** 2)) * np.cos(2 * x)))
    T = 30.0
    u = inverse_transform(linear_propagate(p, T)).values
    # the group velocity is even in xi, so both halves of the real packet move together
    w = u**2
    c = np.sum(g.x * w) / np.sum(w)
    print(f"|centre| after t = {T:g}: {abs(c):.2f}, predicted 2(log 2 + 1) t = {2 * (np.log(2) + 1) * T:.2f}")


if __name__ == "__main__":
    main()
