"""Vacuum eigenvalues of the local and nonlocal integrals of motion from the
counting function, and their conversion to the quantum field normalization.

Every eigenvalue is a single contour integral
J(a) = Int e^{a theta} log(1 + e^{-i eps(theta)}) d theta over the lowered
contour, dressed with a trigonometric prefactor.  The prefactors are the
residues of the reconstruction kernel F at its poles nu = -i(2n-1) and
nu = -2 i alpha n; their degeneration loci are exactly where the Gamma
factors of the quantum normalization constants compensate.
"""

from __future__ import annotations

import math

import numpy as np

from .ddv import CountingFunction, tail_integral
from .grid import GridFunction

__all__ = [
    "quantum_local_im",
    "nonlocal_im",
    "normalize_to_sg",
    "fit_im_from_central",
]


def quantum_local_im(cf: CountingFunction, n: int, gamma: float | None = None):
    """(I_{2n-1}, Ibar_{2n-1}) in the classical normalization.

    I_{2n-1} = -r delta_{n,1}/(4 cos(pi/2alpha))
               + (-1)^{n+1} Im J(2n-1) / (pi sin(pi(2n-1)/2alpha)),
    with the antichiral partner using the mirrored weight and opposite sign
    on the integral term.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    p = cf.params
    al = p.alpha
    s_half = math.sin(math.pi * (2 * n - 1) / (2.0 * al))
    if abs(s_half) < 1e-10:
        raise ValueError(
            f"normalization pole: sin(pi (2n-1)/(2 alpha)) = 0 at alpha={al}, n={n}; "
            "the quantum constant C_n diverges at the same locus")
    c = math.cos(math.pi / (2.0 * al))
    drive = -p.r / (4.0 * c) if n == 1 else 0.0
    sgn = (-1.0) ** (n + 1)
    j_plus = tail_integral(cf, float(2 * n - 1), gamma=gamma).imag
    j_minus = tail_integral(cf, -float(2 * n - 1), gamma=gamma).imag
    frak_i = drive + sgn * j_plus / (math.pi * s_half)
    frak_ibar = drive - sgn * j_minus / (math.pi * s_half)
    return frak_i, frak_ibar


def nonlocal_im(cf: CountingFunction, n: int, gamma: float | None = None):
    """(G_n, Gbar_n): coefficients of the e^{-2 alpha n theta} tower."""
    if n < 1:
        raise ValueError("n must be >= 1")
    p = cf.params
    al = p.alpha
    cn = math.cos(math.pi * al * n)
    if abs(cn) < 1e-10:
        raise ValueError(f"cos(pi alpha n) = 0 at alpha={al}, n={n}")
    pref = al * (-1.0) ** n / (math.pi * cn)
    g = pref * tail_integral(cf, 2.0 * al * n, gamma=gamma).imag
    gbar = -pref * tail_integral(cf, -2.0 * al * n, gamma=gamma).imag
    return g, gbar


def normalize_to_sg(alpha: float, m: float, n: int) -> float:
    """Constant C_n converting the asymptotic coefficients to the quantum
    normalization, I_{2n-1}^{asym} = C_n I_{2n-1}^{quantum}.

    m is the lightest breather mass 2 M sin(pi/2alpha).  Gamma poles are
    reported with the resonant alpha named.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    x1 = -(2 * n - 1) / (2.0 * alpha)
    x2 = (2 * n - 1) * (alpha + 1.0) / (2.0 * alpha)
    if abs(x1 - round(x1)) < 1e-12 and x1 <= 0:
        raise ValueError(f"Gamma pole in C_{n}: alpha = {alpha} makes "
                         f"-(2n-1)/(2 alpha) a non-positive integer")
    bracket = m / (8.0 * math.sqrt(math.pi)) * math.gamma((alpha + 1.0) / (2.0 * alpha)) \
        * math.gamma(-1.0 / (2.0 * alpha))
    return (math.gamma(x1) * math.gamma(x2) / (2.0 * math.sqrt(math.pi) * math.factorial(n))
            * (-alpha ** 2 / (alpha + 1.0)) ** (n - 1)
            * bracket ** (1 - 2 * n))


def fit_im_from_central(central: GridFunction, s_factor: float, params) -> dict:
    """Cross-check: recover I_1 and Ibar_1 from the large-|theta| tails of
    log Q on the central line.

    Fits the driving-subtracted values on [Theta/2, 3 Theta/4] against the
    basis {e^{-theta}, e^{-3 theta}, e^{-2 alpha theta}} (mirrored on the
    antichiral side), which separates the local from the nonlocal towers.
    """
    al = params.alpha
    c = math.cos(math.pi / (2.0 * al))
    g = central.grid
    th = g.nodes
    lo, hi = g.half_width / 2.0, 3.0 * g.half_width / 4.0
    out = {}
    for side, key in ((+1, "I1"), (-1, "Ibar1")):
        # the reflection constant enters with the side's sign:
        # +log(S)/2 in the chiral expansion, -log(S)/2 in the antichiral one
        base = (params.r * np.cosh(th) / (2.0 * c) + 1j * math.pi * params.k
                + side * 0.5 * math.log(s_factor))
        resid = central.values - base
        m = (side * th >= lo) & (side * th <= hi)
        x = th[m]
        basis = np.array([np.exp(-side * x), np.exp(-3 * side * x),
                          np.exp(-2 * al * side * x)]).T
        coef, *_ = np.linalg.lstsq(basis, resid[m].real, rcond=None)
        out[key] = -coef[0] - (params.r / (4.0 * c))
        out[key + "_g"] = coef[2]
    return out
