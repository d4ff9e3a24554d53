"""Vacuum counting function epsilon(theta, k) from its nonlinear integral equation.

The equation on the real axis,

    eps(theta) = r sinh(theta) - 2 pi k - 2 (G * Im log(1 + e^{-i eps(.-i0)}))(theta),

is solved on the lowered contour Im theta = -gamma, where the log term
decays like exp(-r cosh(theta) sin(gamma)) and every quadrature is
spectrally accurate.  Writing the -i0 boundary value as a difference of
the two analytic branches,

    2 Im L = -i L(.-i gamma) + i conj(L)(.+i gamma),

turns the equation into FFT convolutions with the imaginary-shifted kernel
transforms; the same machinery provides the analytic continuation of eps
and all shifted-contour tail integrals used for the integrals of motion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import GridFunction, RapidityGrid, convolve_transform, lagrange_eval, make_grid
from .kernels import N_NU, NU_RANGE_FACTOR, g_hat
from .params import ModelParams

__all__ = [
    "CountingFunction",
    "boundary_log_term",
    "solve_ddv",
    "continue_eps",
    "tail_integral",
    "DdvConvergenceError",
]

SAW_DELTA = 1e-12  # global branch regulator for the -i0 sawtooth


class DdvConvergenceError(RuntimeError):
    """Fixed-point iteration failed; carries the residual history."""

    def __init__(self, message, history):
        super().__init__(message)
        self.history = list(history)


def boundary_log_term(eps_value):
    """Principal-branch sawtooth Im log(1 + e^{-i eps(theta - i0)}) at real eps.

    Regularized as atan2(-(1-delta) sin eps, 1 + (1-delta) cos eps) with
    delta = 1e-12, which selects the branch dictated by approaching the
    real axis from below; range (-pi/2, pi/2].
    """
    eps_value = np.asarray(eps_value, dtype=float)
    c = 1.0 - SAW_DELTA
    return np.arctan2(-c * np.sin(eps_value), 1.0 + c * np.cos(eps_value))


def default_gamma(alpha: float) -> float:
    return min(math.pi / 2.0, math.pi / alpha) / 4.0


@dataclass
class CountingFunction:
    """Converged counting function with its contour data.

    eps holds real-axis samples; f_minus holds log(1 + e^{-i eps}) on the
    contour Im theta = -gamma, which is the reusable ingredient for
    continuation, reconstruction integrals and tail integrals.
    """

    params: ModelParams
    grid: RapidityGrid
    gamma: float
    eps: np.ndarray
    eps_contour: np.ndarray
    f_minus: np.ndarray
    residual: float
    iterations: int
    _kernel_tables: dict = field(default_factory=dict, repr=False)
    _contour_cache: dict = field(default_factory=dict, repr=False)

    @property
    def eps_gridfunction(self) -> GridFunction:
        drive = lambda th: self.params.r * np.sinh(th) - 2.0 * math.pi * self.params.k
        return GridFunction(self.grid, self.eps, tail=drive)

    # -- evaluation ------------------------------------------------------

    def eps_at(self, theta) -> np.ndarray:
        """eps at arbitrary real theta: interpolation on-grid, the integral
        representation (kernel table sum) off-grid."""
        theta = np.asarray(theta, dtype=float)
        scalar = theta.ndim == 0
        theta = np.atleast_1d(theta).astype(float)
        out = np.empty(theta.shape)
        inside = np.abs(theta) <= self.grid.half_width
        if np.any(inside):
            out[inside] = lagrange_eval(self.grid, self.eps, theta[inside])
        if np.any(~inside):
            out[~inside] = self._eps_direct_real(theta[~inside])
        return out[0] if scalar else out

    def _kernel_table(self, shift: float):
        """Dense samples of G(x + i*shift) on a fine lattice, for off-grid sums."""
        key = round(shift, 14)
        if key not in self._kernel_tables:
            from .grid import kernel_samples_from_transform
            h = self.grid.spacing / 4.0
            span = 2.0 * self.grid.half_width + 4.0
            n_off = int(span / h) + 2
            samples = kernel_samples_from_transform(
                lambda nu: g_hat(nu, self.params.alpha), h, n_off, imag_shift=shift)
            xs = np.arange(-(n_off - 1), n_off) * h
            self._kernel_tables[key] = (xs, samples)
        return self._kernel_tables[key]

    def _eps_direct_real(self, theta: np.ndarray) -> np.ndarray:
        """Integral representation at real theta beyond the grid."""
        p = self.params
        xs, gtab = self._kernel_table(self.gamma)
        h = xs[1] - xs[0]
        active = np.abs(self.f_minus) > 1e-18
        tj = self.grid.nodes[active]
        fj = self.f_minus[active]
        out = np.empty(theta.shape)
        for i, th in enumerate(theta):
            x = th - tj
            idx = np.clip(((x - xs[0]) / h).astype(int), 3, len(xs) - 5)
            # 8-point Lagrange on the kernel lattice
            t = (x - xs[0]) / h - (idx - 3)
            val = np.zeros(len(x), dtype=complex)
            for j in range(8):
                w = np.ones_like(t)
                for mth in range(8):
                    if mth != j:
                        w = w * (t - mth) / (j - mth)
                val += w * gtab[idx - 3 + j]
            conv = self.grid.spacing * np.sum(val * fj)
            out[i] = p.r * math.sinh(th) - 2.0 * math.pi * p.k - 2.0 * conv.imag
        return out

    def contour_log(self, gamma: float) -> np.ndarray:
        """f_minus on an alternative contour Im theta = -gamma (cached)."""
        key = round(gamma, 14)
        if key == round(self.gamma, 14):
            return self.f_minus
        strip = math.pi / self.params.alpha
        if gamma <= 0 or gamma + self.gamma >= strip:
            raise ValueError(f"contour shift {gamma} outside the kernel "
                             f"analyticity budget (needs 0 < gamma < "
                             f"{strip - self.gamma:.4f})")
        if key not in self._contour_cache:
            p = self.params
            g = self.grid
            ghat = lambda nu: g_hat(nu, p.alpha)
            drive = p.r * np.sinh(g.nodes - 1j * gamma) - 2.0 * math.pi * p.k
            c1 = convolve_transform(ghat, self.f_minus, g, imag_shift=self.gamma - gamma)
            c2 = convolve_transform(ghat, np.conj(self.f_minus), g,
                                    imag_shift=-self.gamma - gamma)
            eps_g = drive + 1j * c1 - 1j * c2
            if np.max(np.abs(np.exp(-1j * eps_g))) >= 1.0:
                raise ValueError(f"contour Im theta = -{gamma} crosses a zero of "
                                 "1 + e^{-i eps}; use a smaller shift")
            self._contour_cache[key] = np.log1p(np.exp(-1j * eps_g))
        return self._contour_cache[key]


def _anderson_step(hist_x, hist_g, mixing):
    """Type-I Anderson update from stored (x, g(x)) pairs."""
    fk = [g - x for x, g in zip(hist_x, hist_g)]
    dF = np.array([fk[i + 1] - fk[i] for i in range(len(fk) - 1)]).T
    dG = np.array([hist_g[i + 1] - hist_g[i] for i in range(len(hist_g) - 1)]).T
    gam, *_ = np.linalg.lstsq(dF, fk[-1], rcond=None)
    return hist_g[-1] - dG @ gam - (1.0 - mixing) * (fk[-1] - dF @ gam)


def solve_ddv(params: ModelParams, grid: RapidityGrid | None = None,
              damping: float = 0.5, tol: float = 1e-12, max_iter: int = 400,
              gamma: float | None = None) -> CountingFunction:
    """Solve the counting-function equation by damped fixed-point iteration.

    Under-relaxed Picard with an Anderson-accelerated fallback that engages
    automatically when plain iteration stalls (the kernel norm grows with
    alpha).  Deterministic: fixed iteration order, fixed switch rule.
    Raises DdvConvergenceError with the residual history on failure.
    """
    if params.alpha < 1.0:
        raise ValueError("alpha must be >= 1")
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    if grid is None:
        grid = make_grid(params.r)
    if gamma is None:
        gamma = default_gamma(params.alpha)
    p = params
    g = grid
    ghat = lambda nu: g_hat(nu, p.alpha)
    drive_c = p.r * np.sinh(g.nodes - 1j * gamma) - 2.0 * math.pi * p.k

    scale = np.maximum(1.0, np.abs(drive_c))

    def rhs(e_minus):
        f_m = np.log1p(np.exp(-1j * e_minus))
        c1 = convolve_transform(ghat, f_m, g, imag_shift=0.0)
        c2 = convolve_transform(ghat, np.conj(f_m), g, imag_shift=-2.0 * gamma)
        return drive_c + 1j * c1 - 1j * c2

    def pack(z):
        return np.concatenate([z.real, z.imag])

    def unpack(v):
        return v[:g.n] + 1j * v[g.n:]

    e = drive_c.copy()
    history = []
    hist_x, hist_g = [], []
    use_anderson = False
    residual = np.inf
    if p.alpha == 1.0:
        # kernel vanishes identically; the driving term is the solution
        e = drive_c.copy()
        residual = 0.0
        it = 0
    else:
        for it in range(1, max_iter + 1):
            target = rhs(e)
            # defect scaled to the local magnitude: the driving term reaches
            # ~1e6 at grid edges where doubles cannot resolve 1e-12 absolute
            residual = float(np.max(np.abs(target - e) / scale))
            history.append(residual)
            if residual < tol:
                break
            if not use_anderson and it >= 16 and history[-1] > 0.92 * history[-6]:
                use_anderson = True
            if use_anderson:
                hist_x.append(pack(e))
                hist_g.append(pack(target))
                if len(hist_x) > 5:
                    hist_x.pop(0)
                    hist_g.pop(0)
                if len(hist_x) >= 2:
                    e = unpack(_anderson_step(hist_x, hist_g, damping))
                else:
                    e = unpack((1.0 - damping) * pack(e) + damping * pack(target))
            else:
                e = (1.0 - damping) * e + damping * target
        else:
            raise DdvConvergenceError(
                f"no fixed point after {max_iter} iterations "
                f"(last residual {residual:.3e})", history)

    f_minus = np.log1p(np.exp(-1j * e))
    c1r = convolve_transform(ghat, f_minus, g, imag_shift=gamma)
    eps_real = p.r * np.sinh(g.nodes) - 2.0 * math.pi * p.k - 2.0 * c1r.imag
    return CountingFunction(params=p, grid=g, gamma=gamma, eps=eps_real,
                            eps_contour=e, f_minus=f_minus,
                            residual=residual, iterations=it)


def continue_eps(cf: CountingFunction, theta) -> np.ndarray:
    """Analytic continuation of eps off the real axis, via the equation itself.

    Valid in the kernel analyticity strip |Im theta| < min(pi/2, pi/alpha)
    minus the contour offset; a request outside is rejected.
    """
    p = cf.params
    theta = np.asarray(theta, dtype=complex)
    scalar = theta.ndim == 0
    theta = np.atleast_1d(theta)
    strip = min(math.pi / 2.0, math.pi / p.alpha) - 1.25 * cf.gamma
    if np.any(np.abs(theta.imag) > strip):
        raise ValueError(f"|Im theta| must stay below {strip:.4f} "
                         "(kernel analyticity strip minus contour offset)")
    if p.alpha == 1.0:
        out = p.r * np.sinh(theta) - 2.0 * math.pi * p.k
        return out[0] if scalar else out
    active = np.abs(cf.f_minus) > 1e-18
    tj = cf.grid.nodes[active]
    fj = cf.f_minus[active]
    v = NU_RANGE_FACTOR * p.alpha
    n_nu = N_NU
    nu = np.linspace(-v, v, n_nu)
    w = np.full(n_nu, nu[1] - nu[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    gh = g_hat(nu, p.alpha) * w / (2.0 * math.pi)
    out = np.empty(theta.shape, dtype=complex)
    for i, th in enumerate(theta):
        arg1 = (th - tj) + 1j * cf.gamma      # pairs with f_minus
        arg2 = (th - tj) - 1j * cf.gamma      # pairs with conj(f_minus)
        k1 = np.exp(1j * np.multiply.outer(arg1, nu)) @ gh
        k2 = np.exp(1j * np.multiply.outer(arg2, nu)) @ gh
        conv = cf.grid.spacing * (1j * np.sum(k1 * fj) - 1j * np.sum(k2 * np.conj(fj)))
        out[i] = p.r * np.sinh(th) - 2.0 * math.pi * p.k + conv
    return out[0] if scalar else out


def tail_integral(cf: CountingFunction, weight_exponent: float,
                  gamma: float | None = None) -> complex:
    """Contour integral J(a) = Int e^{a theta} log(1 + e^{-i eps(theta)}) dtheta
    over Im theta = -gamma, where the integrand decays like
    exp(-r cosh(theta) sin(gamma)).

    Returns the complex value; callers take the Im-combination their formula
    prescribes.  Errors when the requested weight exhausts the decay budget
    at the grid edges, or when the contour touches a zero of 1 + e^{-i eps}.
    """
    if gamma is None:
        gamma = cf.gamma
    f_m = cf.contour_log(gamma)
    t = cf.grid.nodes
    integrand = np.exp(weight_exponent * (t - 1j * gamma)) * f_m
    scale = np.max(np.abs(integrand))
    edge = max(np.abs(integrand[0]), np.abs(integrand[-1]))
    if scale > 0 and edge > 1e-13 * scale:
        raise ValueError(
            f"weight exponent {weight_exponent} exceeds the contour decay budget "
            f"(edge/max = {edge / scale:.2e}); enlarge the grid or reduce |a|")
    return complex(np.sum(integrand) * cf.grid.spacing)
