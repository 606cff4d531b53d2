"""
Expansion coefficients and the multilinear symbols ``T_n``.

``T_n(eta_1, ..., eta_{2n+1})`` is the zeta-integral

    T_n = int_R prod_j (1 - exp(i eta_j zeta)) / |zeta|^{2n+1} d zeta

and is evaluated two independent ways: the closed form as a signed sum of
``s^{2n} log|s|`` over the subset sums ``s`` of the arguments
(:func:`t_symbol_closed`), and adaptive quadrature of the integral itself
(:func:`t_symbol_quadrature`).
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

__all__ = [
    "SymbolQuery",
    "QuadratureError",
    "coeff_c",
    "coeff_d",
    "xlogx",
    "x2logx",
    "subset_sums",
    "t_symbol_closed",
    "t_symbol_quadrature",
    "t_symbol_closed_batch",
    "t1",
    "t1_gradient",
    "cancellation_sum",
    "MAX_CLOSED_DEGREE",
]

MAX_CLOSED_DEGREE = 6


class QuadratureError(RuntimeError):
    """Adaptive quadrature exhausted its budget without meeting the tolerance."""


@dataclass(frozen=True)
class SymbolQuery:
    n: int
    etas: tuple
    tol: float = 1e-9

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        etas = tuple(float(e) for e in self.etas)
        if len(etas) != 2 * self.n + 1:
            raise ValueError(f"T_{self.n} takes {2 * self.n + 1} arguments, got {len(etas)}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        object.__setattr__(self, "etas", etas)


def coeff_c(n: int) -> float:
    """``c_n = sqrt(pi) / (Gamma(1/2 - n) Gamma(n + 1))`` via ``c_n = -c_{n-1} (2n-1)/(2n)``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    c = 1.0
    for m in range(1, n + 1):
        c *= -(2 * m - 1) / (2 * m)
    return c


def coeff_d(n: int, ell: int) -> float:
    """``d_{n,l} = 2 |c_n| binom(2n+1, l) / (2n+1)!``, for ``1 <= l <= 2n+1``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 1 <= ell <= 2 * n + 1:
        raise ValueError(f"ell must lie in 1..{2 * n + 1}, got {ell}")
    # binom(2n+1, l)/(2n+1)! = 1/(l! (2n+1-l)!), exact in integers
    return 2.0 * abs(coeff_c(n)) / (math.factorial(ell) * math.factorial(2 * n + 1 - ell))


def xlogx(x):
    """``x log|x|`` with the value 0 at x = 0."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.zeros_like(x)
    nz = ax > 0
    out[nz] = x[nz] * np.log(ax[nz])
    return out


def x2logx(x, power: int = 2):
    """``x^power log|x|`` with the value 0 at x = 0."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.zeros_like(x)
    nz = ax > 0
    out[nz] = x[nz] ** power * np.log(ax[nz])
    return out


def subset_sums(etas: Sequence[float]):
    """Sums and sizes over all nonempty subsets, enumerated by bitmask."""
    etas = np.asarray(etas, dtype=float)
    m = etas.size
    masks = np.arange(1, 2**m)
    bits = (masks[:, None] >> np.arange(m)) & 1
    return bits @ etas, bits.sum(axis=1)


def t_symbol_closed(q: SymbolQuery) -> float:
    n = q.n
    if n > MAX_CLOSED_DEGREE:
        raise ValueError(f"closed form is limited to n <= {MAX_CLOSED_DEGREE}")
    sums, sizes = subset_sums(q.etas)
    signs = np.where(sizes % 2 == 0, 1.0, -1.0)
    total = np.sum(signs * x2logx(sums, 2 * n))
    return float(2.0 * (-1) ** (n + 1) / math.factorial(2 * n) * total)


def _sinc(x):
    # np.sinc is the normalised sinc
    return np.sinc(x / np.pi)


def t_symbol_quadrature(q: SymbolQuery, *, limit: int = 400) -> float:
    """Adaptive quadrature of the defining zeta-integral.

    With ``1 - e^{i a z} = -2i sin(a z/2) e^{i a z/2}`` and ``u = z/2`` the real
    part of the integrand becomes

        4 (-1)^n sin(S u) prod_j eta_j sinc(eta_j u),    S = sum_j eta_j,

    integrated over ``(0, inf)``; the factor 4 already folds in the even half
    line, and the imaginary part is odd and drops out.  This form is smooth at ``u = 0`` and free of cancellation.
    The head ``(0, U)`` is integrated piecewise with Gauss-Kronrod; the tail
    ``(U, inf)`` is expanded into cosines and each one is done with QAWF.
    """
    n = q.n
    etas = np.asarray(q.etas)
    if np.any(etas == 0.0):
        return 0.0
    S = etas.sum()
    prod_eta = np.prod(etas)
    amax = np.max(np.abs(etas))
    sign = 4.0 * (-1) ** n

    def head(u):
        return sign * prod_eta * np.sin(S * u) * np.prod(_sinc(etas * u))

    # a handful of oscillations of the fastest factor in the head
    omega_max = abs(S) + np.abs(etas).sum()
    U = 8.0 * np.pi / amax
    n_pieces = max(4, int(np.ceil(U * omega_max / np.pi)))
    edges = np.linspace(0.0, U, n_pieces + 1)
    # QUADPACK refuses relative targets below 50 machine epsilons
    epsrel = max(q.tol * 1e-2, 1e-13)
    # absolute floor on the natural scale |eta|^(2n), for pieces that nearly cancel
    head_eps = 1e-3 * q.tol * amax ** (2 * n) / n_pieces
    total = 0.0
    abserr = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            for a, b in zip(edges[:-1], edges[1:]):
                val, err = integrate.quad(head, a, b, epsabs=head_eps, epsrel=epsrel, limit=limit)
                total += val
                abserr += err
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"head integral did not converge: {exc}") from None

        # tail: sin(S u) prod sin(eta_j u) = (-1)^(n+1) 2^-(2n+2) sum_sigma (prod sigma) cos((sigma.a) u)
        freqs = np.concatenate([[S], etas])
        m = freqs.size
        sig = 1 - 2 * ((np.arange(2**m)[:, None] >> np.arange(m)) & 1)
        omegas = np.abs(sig @ freqs)
        weights = np.prod(sig, axis=1).astype(float)
        # merge equal frequencies (up to rounding) before integrating
        order = np.argsort(omegas)
        omegas, weights = omegas[order], weights[order]
        groups = np.concatenate([[True], np.diff(omegas) > 1e-12 * max(1.0, omegas[-1])])
        gid = np.cumsum(groups) - 1
        w_merged = np.bincount(gid, weights=weights)
        om_merged = omegas[groups]
        pref = sign * (-1) ** (n + 1) * 2.0 ** (-(2 * n + 2))
        p = 2 * n + 1

        def power(u):
            return u ** (-p)

        # absolute target per cosine term, on the natural scale |eta|^(2n)
        tail_eps = 1e-2 * q.tol * amax ** (2 * n) / (abs(pref) * max(1, len(om_merged)))
        tail = 0.0
        try:
            for om, w in zip(om_merged, w_merged):
                if w == 0.0:
                    continue
                if om * U < 1e-8:
                    val = U ** (1 - p) / (p - 1)
                    err = 0.0
                else:
                    val, err = integrate.quad(power, U, np.inf, weight="cos", wvar=om, epsabs=tail_eps, limlst=200)
                tail += w * val
                abserr += abs(w * pref) * err
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"tail integral did not converge: {exc}") from None
        total += pref * tail
    scale = max(abs(total), amax ** (2 * n) * 1e-300)
    if abserr > 10.0 * q.tol * scale:
        raise QuadratureError(f"estimated error {abserr:.3g} exceeds tolerance for |T|={abs(total):.3g}")
    return float(total)


def t1(eta1, eta2, eta3):
    """Closed form of ``T_1``; vectorised over broadcastable arguments."""
    e1, e2, e3 = np.broadcast_arrays(*(np.asarray(e, dtype=float) for e in (eta1, eta2, eta3)))
    out = (
        -x2logx(e1)
        - x2logx(e2)
        - x2logx(e3)
        - x2logx(e1 + e2 + e3)
        + x2logx(e1 + e2)
        + x2logx(e1 + e3)
        + x2logx(e2 + e3)
    )
    return out if out.ndim else float(out)


def t1_gradient(xi, eta1, eta2):
    """Gradient of ``eta1, eta2 -> T_1(eta1, eta2, xi - eta1 - eta2)``."""
    xi, eta1, eta2 = (np.asarray(a, dtype=float) for a in (xi, eta1, eta2))
    rest = xi - eta1 - eta2
    g1 = -2.0 * (xlogx(eta1) - xlogx(eta1 + eta2) + xlogx(xi - eta1) - xlogx(rest))
    g2 = -2.0 * (xlogx(eta2) - xlogx(eta1 + eta2) + xlogx(xi - eta2) - xlogx(rest))
    if g1.ndim == 0:
        return float(g1), float(g2)
    return g1, g2


def cancellation_sum(p: int, etas: Sequence[float]) -> float:
    """``sum over nonempty subsets of (-1)^|subset| (subset sum)^p``; identically 0 for ``1 <= p < N``."""
    etas = np.asarray(etas, dtype=float)
    N = etas.size
    if N < 2:
        raise ValueError("need at least two values")
    if not 1 <= p <= N - 1:
        raise ValueError(f"p must lie in 1..{N - 1}, got {p}")
    total = 0.0
    for ell in range(1, N + 1):
        sgn = -1.0 if ell % 2 else 1.0
        for idx in itertools.combinations(range(N), ell):
            total += sgn * math.fsum(etas[list(idx)]) ** p
    return total


def t_symbol_closed_batch(n: int, etas) -> np.ndarray:
    """Closed form of ``T_n`` for each row of an ``(M, 2n+1)`` array."""
    if not 1 <= n <= MAX_CLOSED_DEGREE:
        raise ValueError(f"n must lie in 1..{MAX_CLOSED_DEGREE}")
    etas = np.atleast_2d(np.asarray(etas, dtype=float))
    m = 2 * n + 1
    if etas.shape[1] != m:
        raise ValueError(f"T_{n} takes {m} arguments per row, got {etas.shape[1]}")
    masks = np.arange(1, 2**m)
    bits = (masks[:, None] >> np.arange(m)) & 1
    signs = np.where(bits.sum(axis=1) % 2 == 0, 1.0, -1.0)
    sums = etas @ bits.T
    return 2.0 * (-1) ** (n + 1) / math.factorial(2 * n) * (x2logx(sums, 2 * n) @ signs)
