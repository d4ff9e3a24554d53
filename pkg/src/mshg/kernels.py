"""The analytic kernels: G (counting-function equation), F (Q reconstruction),
Phi (sinh-Gordon pseudo-energy equation), and their Fourier transforms.

G and F are defined through Fourier integrals over nu whose integrands decay
like exp(-pi |nu| / alpha); both are evaluated by trapezoid quadrature on a
truncated nu-range sized for 1e-12 absolute accuracy.  F carries a simple
pole at nu = 0 passed below the real path ("nu - i0"); it is split off
analytically with a sech taper so the remaining quadrature is smooth.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "g_hat",
    "g_kernel",
    "f_kernel",
    "f_kernel_contour",
    "phi_kernel",
    "phi_hat",
]

NU_RANGE_FACTOR = 40.0 / math.pi   # |nu| <= 40 alpha / pi
N_NU = 8192


def _shc(x):
    """sinh(x)/x, stable at 0."""
    x = np.asarray(x, dtype=np.result_type(x, float))
    small = np.abs(x) < 1e-4
    out = np.empty_like(x)
    xs = x[small]
    out[small] = 1.0 + xs * xs / 6.0 * (1.0 + xs * xs / 20.0)
    xl = x[~small]
    out[~small] = np.sinh(xl) / xl
    return out


def g_hat(nu, alpha: float):
    """Fourier transform of G: sinh(pi nu (1-alpha)/2alpha) / (2 cosh(pi nu/2) sinh(pi nu/2alpha)).

    Even, real, regular at nu = 0 with g_hat(0) = (1-alpha)/2.
    """
    nu = np.asarray(nu, dtype=float)
    a = math.pi * (1.0 - alpha) / (2.0 * alpha)
    b = math.pi / (2.0 * alpha)
    # sinh(a nu)/sinh(b nu) = (a/b) shc(a nu)/shc(b nu), but overflow-safe:
    # for large |nu| work with exponentials directly.
    big = np.abs(nu) * max(abs(a), b, math.pi / 2.0) > 30.0
    out = np.empty_like(nu)
    ns = nu[~big]
    out[~big] = (a / b) * _shc(a * ns) / (2.0 * np.cosh(math.pi * ns / 2.0) * _shc(b * ns))
    nl = nu[big]
    # exact form with positive exponent factored out; decays ~ e^{-pi |nu|/alpha}
    x = np.abs(nl)
    num = np.exp((abs(a) - b - math.pi / 2.0) * x) * np.sign(a) * (1.0 - np.exp(-2.0 * abs(a) * x))
    den = (1.0 + np.exp(-math.pi * x)) * (1.0 - np.exp(-2.0 * b * x))
    out[big] = num / den
    return out


def _nu_grid(alpha: float, n_nu: int = N_NU, v_min: float = 0.0):
    v = max(NU_RANGE_FACTOR * alpha, v_min)
    nu = np.linspace(-v, v, n_nu)
    w = np.full(n_nu, nu[1] - nu[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return nu, w


def g_kernel(theta, alpha: float):
    """G(theta) by nu-quadrature; real and even, vanishes identically at alpha=1."""
    if alpha < 1.0:
        raise ValueError("alpha must be >= 1")
    if alpha == 1.0:
        return np.zeros_like(np.asarray(theta, dtype=float))
    theta = np.asarray(theta, dtype=complex)
    nu, w = _nu_grid(alpha)
    gh = g_hat(nu, alpha) * w / (2.0 * math.pi)
    out = np.exp(1j * np.multiply.outer(theta, nu)) @ gh
    if np.all(np.isreal(theta)):
        out = out.real
    return out


def _f_integrand_regular(nu, alpha: float):
    """K_reg(nu) = K(nu) - (alpha/2pi) sech(pi nu/2)/nu, K the F-transform."""
    nu = np.asarray(nu, dtype=float)
    x = math.pi * nu / (2.0 * alpha)
    # 1/shc(x) - 1, stable at 0
    small = np.abs(x) < 1e-4
    bracket = np.empty_like(nu)
    xs = x[small]
    bracket[small] = -xs * xs / 6.0 + 7.0 * xs ** 4 / 360.0
    xl = x[~small]
    bracket[~small] = xl / np.sinh(xl) - 1.0
    sech = 1.0 / np.cosh(math.pi * nu / 2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (alpha / (2.0 * math.pi)) * sech * bracket / nu
    out[nu == 0.0] = 0.0
    return out


def _gd(x):
    """Gudermannian 2 arctan(tanh(x/2)), analytic for |Im x| < pi/2."""
    return 2.0 * np.arctan(np.tanh(np.asarray(x, dtype=complex) / 2.0))


def f_kernel(x, alpha: float):
    """F(x - i0): pole term i alpha/(4 pi) (1 + (2/pi) gd(x)) plus smooth quadrature.

    Valid for complex x with |Im x| < pi/2 (enough for every shifted-contour
    use in this package); for real x this is the boundary value selected by
    passing the nu = 0 pole from below.
    """
    if alpha < 1.0:
        raise ValueError("alpha must be >= 1")
    x = np.asarray(x, dtype=complex)
    if np.any(np.abs(x.imag) >= math.pi / 2.0 - 1e-9):
        raise ValueError("f_kernel continuation limited to |Im x| < pi/2")
    # the subtracted sech taper decays like e^{-pi nu/2} whatever alpha, so
    # the truncation range carries an alpha-independent floor
    nu, w = _nu_grid(alpha, v_min=26.0)
    kreg = _f_integrand_regular(nu, alpha) * w / (2.0 * math.pi)
    smooth = np.exp(1j * np.multiply.outer(x, nu)) @ kreg
    pole = 1j * alpha / (4.0 * math.pi) * (1.0 + (2.0 / math.pi) * _gd(x))
    return pole + smooth


def f_kernel_contour(x, alpha: float, c0: float | None = None, n_nu: int = N_NU):
    """Independent F evaluation on the straight lowered path nu -> nu - i c0.

    Oracle route: no pole splitting, just trapezoid on a path passing below
    nu = 0.  c0 must stay under min(1, 2 alpha) (nearest other poles) and
    small enough that e^{c0 Re x} does not wash out precision.
    """
    x = np.asarray(x, dtype=complex)
    if c0 is None:
        c0 = 0.5 * min(1.0, 2.0 * alpha)
    v = NU_RANGE_FACTOR * alpha
    t = np.linspace(-v, v, n_nu)
    nu = t - 1j * c0
    w = np.full(n_nu, t[1] - t[0], dtype=complex)
    w[0] *= 0.5
    w[-1] *= 0.5
    integ = w / (4.0 * np.cosh(math.pi * nu / 2.0) * np.sinh(math.pi * nu / (2.0 * alpha)))
    return np.exp(1j * np.multiply.outer(x, nu)) @ integ / (2.0 * math.pi)


def phi_kernel(theta, nu: float):
    """Closed-form sinh-Gordon kernel 4 sin(pi/nu) cosh(theta) / (cosh 2theta - cos 2pi/nu).

    Positive, even and integrable for nu > 1; invariant under
    1/nu -> 1 - 1/nu exactly.
    """
    if nu <= 1.0:
        raise ValueError("nu must exceed 1")
    theta = np.asarray(theta, dtype=np.result_type(theta, float))
    return 4.0 * math.sin(math.pi / nu) * np.cosh(theta) / (
        np.cosh(2.0 * theta) - math.cos(2.0 * math.pi / nu))


def phi_hat(omega, nu: float):
    """Fourier transform of phi_kernel: 2 pi cosh((pi/2 - pi/nu) omega) / cosh(pi omega / 2).

    Obtained by summing residues at theta = +-i pi/nu + i pi m (alternating
    signs from the cosh numerator); phi_hat(0) = 2 pi.
    """
    omega = np.asarray(omega, dtype=float)
    a = math.pi / 2.0 - math.pi / nu
    # overflow-safe: both cosh args scale with |omega|
    x = np.abs(omega)
    num = np.exp((abs(a) - math.pi / 2.0) * x) * (1.0 + np.exp(-2.0 * abs(a) * x))
    den = 1.0 + np.exp(-math.pi * x)
    return 2.0 * math.pi * num / den
