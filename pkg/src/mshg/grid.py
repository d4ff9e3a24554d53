"""Uniform rapidity grids, trapezoid quadrature, fast convolution, roots.

The shared numerical substrate.  Grids are uniform in theta and sized in
powers of two so every convolution runs through zero-padded FFTs.
Kernels enter either as sampled GridFunctions or as analytic Fourier
transforms; the transform route is exact to trapezoid accuracy and is what
the nonlinear integral equation solvers use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "RapidityGrid",
    "GridFunction",
    "default_half_width",
    "make_grid",
    "convolve",
    "convolve_transform",
    "root_solve",
    "lagrange_eval",
]


@dataclass(frozen=True)
class RapidityGrid:
    """Uniform symmetric grid theta_i in [-half_width, half_width]."""

    half_width: float
    n: int
    nodes: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.n < 256 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 256, got {self.n}")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        # indices offset by the half-integer midpoint: nodes are exactly
        # sign-symmetric in floating point, which parity tests rely on
        h = 2.0 * self.half_width / (self.n - 1)
        object.__setattr__(self, "nodes",
                           (np.arange(self.n) - (self.n - 1) / 2.0) * h)
        self.nodes.setflags(write=False)

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.n - 1)


def default_half_width(r: float) -> float:
    """Half-width large enough that zeros migrating like ln(1/s^(2 alpha)) stay on-grid."""
    return max(12.0, math.log(50.0 / r) + 10.0)


def make_grid(r: float, n: int = 4096) -> RapidityGrid:
    return RapidityGrid(default_half_width(r), n)


class GridFunction:
    """Samples on a RapidityGrid plus an off-grid evaluation rule.

    Inside the grid, evaluation uses 8-point local Lagrange interpolation
    (machine accurate for analytic samples at these spacings).  Outside,
    the declared tail model is called; with no tail model an out-of-range
    request is an error.
    """

    def __init__(self, grid: RapidityGrid, values: np.ndarray,
                 tail: Callable[[np.ndarray], np.ndarray] | None = None):
        values = np.asarray(values)
        if values.shape != (grid.n,):
            raise ValueError(f"values shape {values.shape} != grid size {grid.n}")
        self.grid = grid
        self.values = values
        self.tail = tail
        values.setflags(write=False)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        scalar = theta.ndim == 0
        theta = np.atleast_1d(theta)
        out = np.empty(theta.shape, dtype=self.values.dtype)
        inside = np.abs(theta) <= self.grid.half_width
        if np.any(~inside):
            if self.tail is None:
                bad = theta[~inside][0]
                raise ValueError(f"theta={bad} outside grid [{-self.grid.half_width}, "
                                 f"{self.grid.half_width}] and no tail model declared")
            out[~inside] = self.tail(theta[~inside])
        if np.any(inside):
            out[inside] = lagrange_eval(self.grid, self.values, theta[inside])
        return out[0] if scalar else out


def lagrange_eval(grid: RapidityGrid, values: np.ndarray, theta: np.ndarray,
                  order: int = 8) -> np.ndarray:
    """Local Lagrange interpolation of uniform samples at points theta."""
    h = grid.spacing
    x = (np.asarray(theta, dtype=float) + grid.half_width) / h
    i0 = np.clip(np.floor(x).astype(int) - order // 2 + 1, 0, grid.n - order)
    t = x - i0
    out = np.zeros(theta.shape, dtype=np.result_type(values.dtype, float))
    for j in range(order):
        w = np.ones_like(t)
        for mth in range(order):
            if mth != j:
                w *= (t - mth) / (j - mth)
        out += w * values[i0 + j]
    return out


def convolve(kernel: GridFunction, f: GridFunction) -> GridFunction:
    """Trapezoid-rule convolution (K * f)(theta_i) = h sum_j K(theta_i-theta_j) f_j.

    Node differences land on the integer lattice m*h while the symmetric
    nodes themselves sit on half-integers, so the kernel samples are
    interpolated onto the offset lattice (machine-accurate for analytic
    kernels) and treated as zero beyond the grid; zero padding to 2n makes
    the circular FFT convolution linear.
    """
    if kernel.grid is not f.grid and not (
            kernel.grid.n == f.grid.n and kernel.grid.half_width == f.grid.half_width):
        raise ValueError("kernel and f must share a grid")
    g = f.grid
    h = g.spacing
    p = 2 * g.n
    offs = np.arange(-(g.n - 1), g.n) * h
    koff = np.zeros(len(offs), dtype=complex)
    inside = np.abs(offs) <= g.nodes[-1]
    koff[inside] = lagrange_eval(g, kernel.values, offs[inside])
    kpad = np.zeros(p, dtype=complex)
    kpad[:g.n] = koff[g.n - 1:]
    kpad[p - (g.n - 1):] = koff[:g.n - 1]
    fpad = np.zeros(p, dtype=complex)
    fpad[:g.n] = f.values
    conv = np.fft.ifft(np.fft.fft(kpad) * np.fft.fft(fpad))[:g.n] * h
    if not (np.iscomplexobj(kernel.values) or np.iscomplexobj(f.values)):
        conv = conv.real
    return GridFunction(g, conv)


def convolve_transform(ghat: Callable[[np.ndarray], np.ndarray], f_values: np.ndarray,
                       grid: RapidityGrid, imag_shift: float = 0.0,
                       pad_factor: int = 2) -> np.ndarray:
    """Convolution with a kernel given by its Fourier transform ghat(nu).

    Evaluates h * sum_j G(theta_i - theta_j + i*imag_shift) f_j where
    G(x) = (1/2 pi) Int ghat(nu) e^{i nu x} d nu, by multiplying the padded
    FFT of f with ghat(nu) e^{-nu*imag_shift} at the FFT frequencies.  This
    is exact for the trapezoid discretization of both integrals and carries
    no kernel-sampling error.
    """
    n = grid.n
    p = pad_factor * n
    fpad = np.zeros(p, dtype=complex)
    fpad[:n] = f_values
    nu = 2.0 * math.pi * np.fft.fftfreq(p, d=grid.spacing)
    mult = np.asarray(ghat(nu), dtype=complex)
    if imag_shift != 0.0:
        mult = _shifted_multiplier(mult, nu, imag_shift)
    out = np.fft.ifft(np.fft.fft(fpad) * mult)[:n]
    return out


def _shifted_multiplier(vals: np.ndarray, nu: np.ndarray, shift: float) -> np.ndarray:
    """vals * exp(-nu*shift) without inf*0 artifacts when the transform has
    already underflowed where the exponential factor is astronomically large."""
    out = np.zeros_like(vals)
    nz = vals != 0
    expo = np.clip(-nu[nz] * shift, -745.0, 705.0)
    out[nz] = vals[nz] * np.exp(expo)
    return out


def kernel_samples_from_transform(ghat: Callable[[np.ndarray], np.ndarray],
                                  offsets_h: float, n_offsets: int,
                                  imag_shift: float = 0.0,
                                  oversample: int = 8) -> np.ndarray:
    """Sample G(m*h + i*shift) for m = -(n-1)..(n-1) from its transform.

    Uses one long FFT on an oversampled frequency grid; accuracy is set by
    the transform's decay, which for the kernels here is exponential.
    """
    p = oversample * 2 * n_offsets
    nu = 2.0 * math.pi * np.fft.fftfreq(p, d=offsets_h)
    vals = np.asarray(ghat(nu), dtype=complex)
    if imag_shift != 0.0:
        vals = _shifted_multiplier(vals, nu, imag_shift)
    g = np.fft.ifft(vals) / offsets_h
    m = np.arange(-(n_offsets - 1), n_offsets)
    return g[m % p]


def root_solve(f: Callable[[float], float], target: float, lo: float, hi: float,
               tol_f: float = 1e-12, tol_x: float = 1e-12, max_iter: int = 200) -> float:
    """Bisection-safeguarded secant for a continuous monotone f.

    Requires f(lo) and f(hi) to bracket the target; returns theta* with
    |f(theta*) - target| < tol_f or bracket width < tol_x.
    """
    flo = f(lo) - target
    fhi = f(hi) - target
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ValueError(f"invalid bracket: f({lo})-target={flo}, f({hi})-target={fhi}")
    a, b, fa, fb = lo, hi, flo, fhi
    x, fx = a, fa
    for _ in range(max_iter):
        # secant proposal, clipped into the bracket interior
        if fb != fa:
            x_new = b - fb * (b - a) / (fb - fa)
        else:
            x_new = 0.5 * (a + b)
        if not (a < x_new < b):
            x_new = 0.5 * (a + b)
        fx_new = f(x_new) - target
        x, fx = x_new, fx_new
        if abs(fx) < tol_f or (b - a) < tol_x:
            return x
        if fa * fx_new <= 0:
            b, fb = x_new, fx_new
        else:
            a, fa = x_new, fx_new
    return x
