"""Independent spectral oracle: eigenvalues of the radial anharmonic operator
-psi'' + [l(l+1)/x^2 + x^(2 alpha)] psi = E psi with psi ~ x^(l+1) at the
origin and decay at infinity.

Used to verify the small-s limit of the Q-function zeros; at alpha = 1 the
spectrum is the radial harmonic oscillator 4n + 2l + 3, which pins the
shooting accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

__all__ = ["OscillatorSpectrum", "eigenvalues_shooting", "match_cft_zeros"]


@dataclass
class OscillatorSpectrum:
    alpha: float
    l: float
    energies: np.ndarray


def _series_start(alpha: float, l: float, e: float, x0: float):
    """(psi, psi') at x0 from the Frobenius series x^(l+1)(1 + sum a_sigma x^sigma).

    a_sigma = (-E a_{sigma-2} + a_{sigma-2-2 alpha}) / (sigma (sigma + 2l + 1)),
    carried over the exponent lattice sigma = 2i + (2 alpha + 2) j.
    """
    terms = {(0, 0): 1.0}
    exps = {(0, 0): 0.0}
    for j in range(0, 3):
        for i in range(0, 8):
            if (i, j) == (0, 0):
                continue
            sigma = 2.0 * i + (2.0 * alpha + 2.0) * j
            if sigma > 16.0:
                continue
            prev_e = terms.get((i - 1, j), 0.0)
            prev_a = terms.get((i, j - 1), 0.0) if i >= 0 else 0.0
            # a_{sigma-2} has lattice index (i-1, j); a_{sigma-2-2alpha} -> (i, j-1)
            terms[(i, j)] = (-e * prev_e + prev_a) / (sigma * (sigma + 2.0 * l + 1.0))
            exps[(i, j)] = sigma
    psi = 0.0
    dpsi = 0.0
    for key, a in terms.items():
        sigma = exps[key]
        psi += a * x0 ** (l + 1.0 + sigma)
        dpsi += a * (l + 1.0 + sigma) * x0 ** (l + sigma)
    return psi, dpsi


def _rhs(alpha: float, l: float, e: float):
    def f(x, y):
        v = l * (l + 1.0) / (x * x) + x ** (2.0 * alpha)
        return [y[1], (v - e) * y[0]]
    return f


def _integrate_left(alpha, l, e, x0, x_match):
    sol = solve_ivp(_rhs(alpha, l, e), (x0, x_match), _series_start(alpha, l, e, x0),
                    method="RK45", rtol=1e-11, atol=1e-40, dense_output=False,
                    max_step=(x_match - x0) / 40.0)
    return sol


def _node_count(alpha, l, e, x0):
    """Sign changes of the regular solution, counted a little past the outer
    turning point so a freshly-entered node is seen promptly."""
    x_end = (e + 15.0) ** (1.0 / (2.0 * alpha))
    sol = solve_ivp(_rhs(alpha, l, e), (x0, x_end),
                    _series_start(alpha, l, e, x0), method="RK45",
                    rtol=1e-8, atol=1e-30, max_step=x_end / 80.0)
    s = np.sign(sol.y[0])
    return int(np.sum(s[:-1] * s[1:] < 0))


def _wronskian(alpha, l, e, x0):
    x_turn = e ** (1.0 / (2.0 * alpha)) if e > 0 else 0.0
    x_match = max(0.85 * x_turn, 2.0 * x0)
    x_r = (e + 40.0) ** (1.0 / (2.0 * alpha))
    left = _integrate_left(alpha, l, e, x0, x_match)
    # WKB-consistent decaying start at x_r, integrated inward (stable direction)
    v = l * (l + 1.0) / x_r ** 2 + x_r ** (2.0 * alpha)
    dv = -2.0 * l * (l + 1.0) / x_r ** 3 + 2.0 * alpha * x_r ** (2.0 * alpha - 1.0)
    y_r = -math.sqrt(v - e) - dv / (4.0 * (v - e))
    right = solve_ivp(_rhs(alpha, l, e), (x_r, x_match), [1.0, y_r], method="RK45",
                      rtol=1e-11, atol=1e-40, max_step=(x_r - x_match) / 40.0)
    pl, dl = left.y[0][-1], left.y[1][-1]
    pr, dr = right.y[0][-1], right.y[1][-1]
    scale = math.hypot(pl, dl) * math.hypot(pr, dr)
    return (dl * pr - pl * dr) / scale


def eigenvalues_shooting(alpha: float, l: float, n_max: int, x0: float = 0.04,
                         match_radius_factor: float = 1.0) -> OscillatorSpectrum:
    """First n_max + 1 eigenvalues by bisection on the matching Wronskian.

    Brackets come from the node-count staircase (Sturm oscillation: the n-th
    eigenfunction has n interior nodes), then brentq polishes each eigenvalue
    to relative 1e-9 or better.
    """
    if alpha < 1.0:
        raise ValueError("alpha must be >= 1")
    if l <= -1.5:
        raise ValueError("l must exceed -3/2")
    x0 = x0 * match_radius_factor

    def count(e):
        return _node_count(alpha, l, e, x0)

    # staircase edges t_n (node count jumps n -> n+1) satisfy
    # E_n < t_n < E_{n+1}: consecutive edges bracket one eigenvalue each
    e_hi = 8.0
    while count(e_hi) <= n_max + 1:
        e_hi *= 1.8
    edges = [1e-6]
    for n in range(n_max + 1):
        lo, hi = edges[-1], e_hi
        while hi - lo > 2e-3 * (1.0 + hi):
            mid = 0.5 * (lo + hi)
            if count(mid) <= n:
                lo = mid
            else:
                hi = mid
        edges.append(hi)
    energies = []
    for n in range(n_max + 1):
        a, b = edges[n], edges[n + 1]
        e_n = brentq(lambda e: _wronskian(alpha, l, e, x0), a, b,
                     xtol=1e-12, rtol=1e-12)
        energies.append(e_n)
    return OscillatorSpectrum(alpha=alpha, l=l, energies=np.asarray(energies))


def match_cft_zeros(alpha: float, k: float, s_values, n_list,
                    spectrum: OscillatorSpectrum | None = None,
                    n_zeros: int = 24) -> dict:
    """Compare E_n(k) at small s against the oscillator eigenvalues with
    l = 2k - 1/2, including the two-point Richardson extrapolation in s^(2 alpha).

    Returns per-n raw deviations at each s and the extrapolated ones.
    """
    from .ddv import solve_ddv
    from .params import derive_scales
    from .qt import find_zeros

    if spectrum is None:
        spectrum = eigenvalues_shooting(alpha, 2.0 * k - 0.5, max(n_list))
    rows = {}
    tables = []
    for s in s_values:
        p = derive_scales(alpha, s=s, k=k)
        cf = solve_ddv(p)
        zs = find_zeros(cf, (-2, max(max(n_list), n_zeros // 4)))
        tables.append(zs.E_plus)
    s_values = list(s_values)
    for n in n_list:
        target = spectrum.energies[n]
        devs = [tables[i][n] / target - 1.0 for i in range(len(s_values))]
        x = [s ** (2.0 * alpha) for s in s_values]
        e0, e1 = tables[0][n], tables[1][n]
        extrap = (e1 * x[0] - e0 * x[1]) / (x[0] - x[1])
        rows[n] = {"raw": devs, "extrapolated": extrap / target - 1.0}
    return {"l": spectrum.l, "energies": spectrum.energies, "rows": rows}
