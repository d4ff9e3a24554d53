"""Classical field reconstruction from the transfer-matrix data: coordinate
map, the pair of linear integral equations for the Jost components, the
log-determinant trace series, and the asymptotic checks.

The kernel D(theta) = T_reg(theta + i pi (alpha+1)/2 alpha)
exp(-2 w_s e^theta - 2 wbar_s e^{-theta}), w_s = w + rhat tan(pi/2alpha)
- i rhat, decays like exp(-C cosh theta) for points inside the tractable
domain; everything downstream is a dense Nystrom solve or an eigenvalue
sum on the nodes where D is alive.

All solvers accept an independent wbar: off the physical slice
(wbar != conj(w)) the same formulas analytically continue the field, which
is how holomorphic derivatives are taken without 2-D stencils.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import RapidityGrid
from .params import ModelParams

__all__ = [
    "WChart",
    "w_of_z",
    "FieldKernel",
    "GlmState",
    "glm_solve",
    "eta_logdet",
    "eta_hat",
    "u_hat",
    "pde_residual",
    "eta_asymptotic",
    "mshg_eta",
    "eta_linearized",
]


@dataclass(frozen=True)
class WChart:
    """Rotated-chart data: p(z) = z^(2 alpha) + s^(2 alpha)."""

    alpha: float
    s: float
    rhat: float

    @property
    def w0(self) -> complex:
        return -2.0 * self.rhat / math.sin(math.pi / self.alpha)

    def turning_point(self, sign: int = +1) -> complex:
        return self.s * np.exp(1j * sign * math.pi / (2.0 * self.alpha))

    def turning_point_image(self, sign: int = +1) -> complex:
        """Image -rhat tan(pi/2alpha) +- i rhat: sits on the boundary line
        Re w = -rhat tan(pi/2alpha) of the straight-contour domain, and
        differs from the apex image by rhat (cot + i) as the quadrature
        of sqrt(p) along the boundary ray requires."""
        return -self.rhat * math.tan(math.pi / (2.0 * self.alpha)) + 1j * sign * self.rhat


def chart_for(params: ModelParams) -> WChart:
    return WChart(alpha=params.alpha, s=params.s, rhat=params.rhat)


_GAUSS_N = 80
_GX, _GW = np.polynomial.legendre.leggauss(_GAUSS_N)


def w_of_z(z: complex, chart: WChart) -> complex:
    """w(z) = z^(alpha+1)/(alpha+1) - Int_z^inf [sqrt(p) - zeta^alpha] d zeta,
    the primitive of sqrt(p) normalized to z^(alpha+1)/(alpha+1) at infinity.

    Straight-ray quadrature with an analytic large-zeta tail; the path must
    keep clear of the turning points s e^{+- i pi/2 alpha} where the root
    branches.
    """
    al, s = chart.alpha, chart.s
    z = complex(z)
    big = max(4.0 * abs(z), 8.0 * s, 12.0)
    zr = big * (z / abs(z) if abs(z) > 1e-14 else 1.0)
    # w(z) = w(zr) - Int_z^zr sqrt(p); the integrand is smooth away from the
    # turning points (the zeta^alpha cusp is kept in the exact endpoint term)
    integral = 0.0
    cuts = np.linspace(0.0, 1.0, 4)
    for u0, u1 in zip(cuts[:-1], cuts[1:]):
        a, b = z + u0 * (zr - z), z + u1 * (zr - z)
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        zz = mid + half * _GX
        for sgn in (+1, -1):
            if np.min(np.abs(zz - chart.turning_point(sgn))) < 0.04 * s:
                raise ValueError("integration path passes a turning point "
                                 "s e^{+-i pi/2 alpha}; move the evaluation point")
        integral += half * np.sum(_GW * np.sqrt(zz ** (2.0 * al) + s ** (2.0 * al)))
    # w(zr) = zr^(alpha+1)/(alpha+1) - tail, tail from sqrt(1+x) = 1 + sum b_m x^m
    m = 1
    b_m = 0.5
    tail = 0.0
    while m < 40:
        power = 2.0 * al * m - al - 1.0
        term = b_m * s ** (2.0 * al * m) * zr ** (-power) / power
        tail += term
        if abs(term) < 1e-18:
            break
        m += 1
        b_m *= (0.5 - (m - 1)) / m
    return zr ** (al + 1.0) / (al + 1.0) - tail - integral


# ----------------------------------------------------------------------
# reconstruction kernel and the two solution routes
# ----------------------------------------------------------------------

class FieldKernel:
    """Cached samples of log T_reg on the reconstruction line, with the
    exponential factors supplied per w-point.

    t_family must expose log_t_reg_central(t); grid is the theta grid the
    Nystrom/eigenvalue solvers run on.
    """

    def __init__(self, t_family, grid: RapidityGrid | None = None):
        self.params = t_family.params
        p = self.params
        if grid is None:
            grid = RapidityGrid(9.0, 1024)
        self.grid = grid
        self.log_treg = np.asarray(t_family.log_t_reg_central(grid.nodes))
        self.rhat = p.rhat
        self.shift = p.rhat * math.tan(math.pi / (2.0 * p.alpha)) - 1j * p.rhat

    def log_d(self, w: complex, wbar: complex | None = None) -> np.ndarray:
        if wbar is None:
            wbar = np.conj(w)
        ws = w + self.shift
        wbs = wbar + np.conj(self.shift)
        t = self.grid.nodes
        return self.log_treg - 2.0 * ws * np.exp(t) - 2.0 * wbs * np.exp(-t)

    def d_samples(self, w, wbar=None, floor: float = 1e-16):
        """(active nodes, D values); raises when D fails to die at the edges
        (the w-point is outside the tractable domain)."""
        ld = self.log_d(w, wbar)
        mag = ld.real
        peak = np.max(mag)
        if max(mag[0], mag[-1]) > peak - 4.0:
            raise ValueError(f"kernel does not decay at the grid edges for w={w}; "
                             "outside the reconstruction domain (or enlarge the grid)")
        active = mag > peak + math.log(floor)
        d = np.exp(ld[active])
        if peak > 1.0:
            raise ValueError(f"kernel magnitude exp({peak:.2f}) signals a "
                             f"domain violation at w={w}")
        return self.grid.nodes[active], d


@dataclass
class GlmState:
    """Solution data of the pair of linear integral equations at one w."""

    w: complex
    wbar: complex
    theta: np.ndarray
    x_plus: np.ndarray
    x_minus: np.ndarray
    d_plus: complex
    d_minus: complex
    d: complex
    kappa_plus: complex
    kappa_minus: complex
    omega_plus: complex
    omega_minus: complex
    eta_hat: complex


def glm_solve(w: complex, kernel: FieldKernel, wbar: complex | None = None) -> GlmState:
    """Nystrom solve of X+-(theta) = 1 +- Int dtheta'/4pi tanh((theta-theta')/2)
    D(theta') X+-(theta'), then the scattering constants and the field value.

    e^{2 eta_hat} = (1+d+)(1+d-)/((1-d+)(1-d-)); on the physical slice
    wbar = conj(w) the result is real and d- = conj(d+).
    """
    if wbar is None:
        wbar = np.conj(w)
    t, d = kernel.d_samples(w, wbar)
    h = kernel.grid.spacing
    tk = np.tanh(0.5 * (t[:, None] - t[None, :]))
    core = (h / (4.0 * math.pi)) * tk * d[None, :]
    n = len(t)
    ident = np.eye(n)
    x_plus = np.linalg.solve(ident - core, np.ones(n, dtype=complex))
    x_minus = np.linalg.solve(ident + core, np.ones(n, dtype=complex))
    quad = h / (4.0 * math.pi) * d
    d_plus = complex(np.sum(quad * x_plus))
    d_minus = complex(np.sum(quad * x_minus))
    dd = 1.0 - d_plus * d_minus
    if abs(dd) < 1e-8 or abs(1.0 - d_plus) < 1e-10 or abs(1.0 - d_minus) < 1e-10:
        raise ValueError(f"Fredholm data degenerate at w={w} (d={dd}); "
                         "outside the reconstruction domain")
    kappa_p = dd ** (-0.5) * ((1.0 - d_minus ** 2) / (1.0 - d_plus ** 2)) ** 0.25
    kappa_m = dd ** (-0.5) * ((1.0 - d_minus ** 2) / (1.0 - d_plus ** 2)) ** -0.25
    omega_p = np.log1p((d_plus - d_minus) / dd)
    omega_m = np.log1p(-(d_plus - d_minus) / dd)
    eta = 0.5 * (np.log1p(d_plus) + np.log1p(d_minus)
                 - np.log1p(-d_plus) - np.log1p(-d_minus))
    if wbar == np.conj(w):
        eta = eta.real
    return GlmState(w=w, wbar=wbar, theta=t, x_plus=x_plus, x_minus=x_minus,
                    d_plus=d_plus, d_minus=d_minus, d=dd,
                    kappa_plus=kappa_p, kappa_minus=kappa_m,
                    omega_plus=omega_p, omega_minus=omega_m, eta_hat=eta)


def eta_logdet(w: complex, kernel: FieldKernel, wbar: complex | None = None,
               n_max: int = 12) -> dict:
    """Field value from the cyclic trace series with the sech-type kernel.

    Returns the partial sums 2 tr(M^{2n-1})/(2n-1), their resummation
    log det[(1+M)(1-M)^{-1}] via the eigenvalues, and the spectral radius
    (must be < 1 for the series to converge).
    """
    if wbar is None:
        wbar = np.conj(w)
    t, d = kernel.d_samples(w, wbar)
    h = kernel.grid.spacing
    core = (h / (4.0 * math.pi)) / np.cosh(0.5 * (t[:, None] - t[None, :])) * d[None, :]
    lam = np.linalg.eigvals(core)
    rho = float(np.max(np.abs(lam)))
    if rho >= 1.0:
        raise ValueError(f"spectral radius {rho:.3f} >= 1 at w={w}; outside the "
                         "convergence domain of the series")
    partial = []
    acc = 0.0
    powers = lam.copy()
    for n in range(1, n_max + 1):
        acc = acc + 2.0 * np.sum(powers) / (2 * n - 1)
        partial.append(complex(acc))
        powers = powers * lam * lam
    resummed = complex(np.sum(np.log((1.0 + lam) / (1.0 - lam))))
    if wbar == np.conj(w):
        resummed = resummed.real
        partial = [p.real for p in partial]
    return {"partial": partial, "eta_hat": resummed, "spectral_radius": rho}


def eta_hat(w, kernel: FieldKernel, wbar=None):
    """Field value at one w (log-determinant route)."""
    return eta_logdet(w, kernel, wbar)["eta_hat"]


def eta_linearized(w: complex, kernel: FieldKernel, wbar: complex | None = None) -> complex:
    """First Born term: Int dtheta/2pi D(theta)."""
    if wbar is None:
        wbar = np.conj(w)
    t, d = kernel.d_samples(w, wbar)
    out = kernel.grid.spacing * np.sum(d) / (2.0 * math.pi)
    return out.real if wbar == np.conj(w) else out


def u_hat(w: complex, kernel: FieldKernel, step: float = 2e-3) -> complex:
    """u = (d eta/dw)^2 - d^2 eta/dw^2, by holomorphic finite differences:
    w is varied at fixed wbar (off-slice evaluations), which is the
    derivative the conserved densities need."""
    wbar = np.conj(w)
    f = [eta_logdet(w + m * step, kernel, wbar)["eta_hat"]
         for m in (-2, -1, 0, 1, 2)]
    d1 = (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * step)
    d2 = (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * step ** 2)
    return d1 * d1 - d2


def pde_residual(field_fn, w0: complex, h: float) -> float:
    """|d_w d_wbar eta - e^{2 eta} + e^{-2 eta}| by the 5-point Laplacian
    (d_w d_wbar = (d^2_{w1} + d^2_{w2})/4) on the physical slice."""
    w1, w2 = w0.real, w0.imag
    f0 = field_fn(complex(w1, w2))
    fx = [field_fn(complex(w1 + m * h, w2)) for m in (-1, 1)]
    fy = [field_fn(complex(w1, w2 + m * h)) for m in (-1, 1)]
    lap = (fx[0] + fx[1] + fy[0] + fy[1] - 4.0 * f0) / h ** 2
    return abs(0.25 * lap - math.exp(2.0 * f0) + math.exp(-2.0 * f0))


def eta_asymptotic(rho: float, phi: float, t_family, params: ModelParams) -> float:
    """Leading + subleading large-rho field in the original (unrotated)
    chart: (1/4) log(s^4a - 2 (s rho)^2a cos(2 a phi) + rho^4a)
    + T(i (alpha+1) phi) e^{-tau} / sqrt(2 pi tau), tau = 4 rho^(a+1)/(a+1).
    """
    al, s = params.alpha, params.s
    tau = 4.0 * rho ** (al + 1.0) / (al + 1.0)
    lead = 0.25 * math.log(s ** (4 * al) - 2.0 * (s * rho) ** (2 * al)
                           * math.cos(2.0 * al * phi) + rho ** (4 * al))
    sub = t_family.t(0.5, np.array([1j * (al + 1.0) * phi]))[0]
    return lead + float(sub.real) * math.exp(-tau) / math.sqrt(2.0 * math.pi * tau)


def mshg_eta(z: complex, kernel: FieldKernel, chart: WChart) -> float:
    """Field of the deformed equation at the rotated-chart point z:
    eta = eta_hat(w(z)) + (1/4) log(p pbar), p = z^(2 alpha) + s^(2 alpha)."""
    w = w_of_z(z, chart)
    p = z ** (2.0 * chart.alpha) + chart.s ** (2.0 * chart.alpha)
    val = eta_hat(w, kernel)
    return float(np.real(val + 0.25 * np.log(p * np.conj(p))))
