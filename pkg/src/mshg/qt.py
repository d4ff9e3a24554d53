"""Zeros and energies of Q, the two Q representations, the reflection factor,
and the T-function family with its functional identities.

Q is an entire function with only real simple zeros in the fundamental
strip.  We locate a finite batch of zeros by root-finding on the counting
function and handle the infinite tails with asymptotic zero positions whose
correction coefficients are the same contour integrals that produce the
integrals of motion: a few Newton steps on

    (r/2) X + a1/X + a3/X^3 + b1 X^(-2 alpha) = pi (2n + 1 +- 2k)

give tail positions accurate to O(mu^-6), and the remaining infinite
products collapse to log-Gamma / Hurwitz-zeta closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import digamma, gammaln, zeta

from .ddv import CountingFunction, tail_integral
from .grid import GridFunction, root_solve
from .kernels import f_kernel
from .params import ModelParams, reduce_k

__all__ = [
    "ZeroSet",
    "QFunction",
    "TFamily",
    "find_zeros",
    "build_q",
    "wronskian",
    "reflection_s",
    "reflection_s_product",
    "t_family",
    "t_half_richardson",
    "functional_checks",
    "count_zeros_rect",
]

EULER_GAMMA = float(np.euler_gamma)


# ----------------------------------------------------------------------
# zero location
# ----------------------------------------------------------------------

@dataclass
class ZeroSet:
    """Zeros theta_n with eps(theta_n) = pi (2n+1), and the induced energies.

    E_plus[n] = E_n(k) comes from the zeros n >= 0, E_minus[n] = E_n(-k)
    from the zeros n < 0.  tail_* stores the large-theta expansion
    coefficients of eps used to model all zeros beyond n_max.
    """

    params: ModelParams
    n_min: int
    n_max: int
    theta: np.ndarray
    E_plus: np.ndarray
    E_minus: np.ndarray
    tail_plus: tuple
    tail_minus: tuple

    def theta_n(self, n: int) -> float:
        return self.theta[n - self.n_min]

    @property
    def p_exponent(self) -> float:
        a = self.params.alpha
        return 2.0 * a / (a + 1.0)

    def mu(self, n, sign: int = +1):
        """mu_n = 2 pi (2n + 1 + sign*2k)/r, the leading zero-position scale."""
        p = self.params
        return 2.0 * math.pi * (2.0 * np.asarray(n, dtype=float) + 1.0
                                + 2.0 * sign * p.k) / p.r

    def asymptotic_E(self, n, sign: int = +1):
        """((2 pi / B)(2n + 1 +- 2k))^(2 alpha/(alpha+1)) without corrections."""
        p = self.params
        return (p.s ** (2.0 * p.alpha)) * self.mu(n, sign) ** self.p_exponent

    def model_E(self, n, sign: int = +1):
        """Tail-model energies: Newton-refined asymptotic zero positions."""
        p = self.params
        a1, a3, b1 = self.tail_plus if sign > 0 else self.tail_minus
        mu = self.mu(n, sign)
        x = mu.astype(float).copy()
        r = p.r
        al = p.alpha
        for _ in range(4):
            fv = 0.5 * r * x + a1 / x + a3 / x ** 3 + b1 * x ** (-2.0 * al) - 0.5 * r * mu
            fp = 0.5 * r - a1 / x ** 2 - 3.0 * a3 / x ** 4 - 2.0 * al * b1 * x ** (-2.0 * al - 1.0)
            x = x - fv / fp
        return (p.s ** (2.0 * al)) * x ** self.p_exponent


def _eps_expansion_coeffs(cf: CountingFunction, side: int):
    """(a1, a3, b1) of eps ~ r sinh(theta) - 2 pi k + a1 e^{-theta} + ... as
    theta -> +inf (side=+1) or its mirror as theta -> -inf (side=-1).

    a_n = -(r/2) delta_{n,1} + (2/pi) cot(pi (2n-1)/2 alpha) Im J(+-(2n-1)),
    tied to the local IM; the e^{-2 alpha theta} coefficient b1 is tied to
    the first nonlocal IM.  Terms whose trigonometric prefactor degenerates,
    or whose weight exceeds the contour decay budget, are dropped (they only
    sharpen the tail model).
    """
    p = cf.params
    al = p.alpha

    def im_j(a):
        try:
            return tail_integral(cf, a).imag
        except ValueError:
            return None

    coeffs = []
    for n in (1, 2):
        x_n = math.pi * (2 * n - 1) / (2.0 * al)
        j = im_j(side * (2 * n - 1))
        if j is None or abs(math.sin(x_n)) < 1e-6:
            coeffs.append(-(0.5 * p.r) if n == 1 else 0.0)
            continue
        val = side * (2.0 / math.pi) * (math.cos(x_n) / math.sin(x_n)) * j
        if n == 1:
            val += -(0.5 * p.r)
        coeffs.append(val)
    c = math.cos(math.pi * al)
    j = im_j(side * 2.0 * al)
    if j is None or abs(c) < 1e-6 or abs(math.sin(math.pi * al)) < 1e-12:
        b1 = 0.0
    else:
        b1 = -side * (2.0 * al / math.pi) * math.tan(math.pi * al) * j
    return (coeffs[0], coeffs[1], b1)


def find_zeros(cf: CountingFunction, n_range: tuple[int, int]) -> ZeroSet:
    """Locate zeros via eps(theta_n) = pi (2n+1) for n in [n_min, n_max]."""
    p = cf.params
    n_min, n_max = n_range
    if n_min > n_max:
        raise ValueError("empty n_range")
    limit = min(2.0 * cf.grid.half_width - 2.0, cf.grid.half_width + 8.0)
    for n_check in (n_min, n_max):
        target = math.pi * (2 * n_check + 1)
        guess = math.asinh((target + 2.0 * math.pi * p.k) / p.r)
        if abs(guess) > limit:
            raise ValueError(
                f"zero n={n_check} sits near theta={guess:.2f}, beyond the "
                f"trusted evaluation range {limit:.2f}; enlarge the grid "
                "half-width")
    thetas = np.empty(n_max - n_min + 1)
    for n in range(n_min, n_max + 1):
        target = math.pi * (2 * n + 1)
        # initial guess from the driving term r sinh(theta) - 2 pi k
        guess = math.asinh((target + 2.0 * math.pi * p.k) / p.r)
        w = 0.4
        lo, hi = guess - w, guess + w
        while cf.eps_at(lo) > target:
            lo -= w
        while cf.eps_at(hi) < target:
            hi += w
        thetas[n - n_min] = root_solve(cf.eps_at, target, lo, hi,
                                       tol_f=1e-11, tol_x=1e-13)
    al = p.alpha
    pe = 2.0 * al / (al + 1.0)
    e_plus = np.array([p.s ** (2 * al) * math.exp(pe * thetas[n - n_min])
                       for n in range(0, n_max + 1)]) if n_max >= 0 else np.empty(0)
    e_minus = np.array([p.s ** (2 * al) * math.exp(-pe * thetas[-n - 1 - n_min])
                        for n in range(0, -n_min)]) if n_min < 0 else np.empty(0)
    return ZeroSet(params=p, n_min=n_min, n_max=n_max, theta=thetas,
                   E_plus=e_plus, E_minus=e_minus,
                   tail_plus=_eps_expansion_coeffs(cf, +1),
                   tail_minus=_eps_expansion_coeffs(cf, -1))


# ----------------------------------------------------------------------
# product representation
# ----------------------------------------------------------------------

N_MODEL_TAIL = 1536    # tail zeros taken from the Newton model before closed forms


def _tail_log_sum(x, zeros: ZeroSet, sign: int):
    """sum_{n > n_expl} log(1 - x / E_n) using model zeros, then an
    m-series of Hurwitz zeta sums for the pure-asymptotic remainder."""
    zs = zeros
    p = zs.params
    n_expl = (len(zs.E_plus) if sign > 0 else len(zs.E_minus)) - 1
    n1 = n_expl + 1
    n2 = n_expl + N_MODEL_TAIL
    nn = np.arange(n1, n2 + 1)
    e_model = zs.model_E(nn, sign)
    x = np.asarray(x, dtype=complex)
    out = np.sum(np.log1p(-x[..., None] / e_model), axis=-1)
    # remainder n > n2: E ~ (q0 (2n+1+-2k))^pe exactly (model corrections
    # are O(mu^-2) ~ 1e-9 relative there and summable below 1e-12)
    pe = zs.p_exponent
    q0 = 2.0 * math.pi / p.B
    off = 0.5 + sign * p.k
    ratio = np.max(np.abs(x)) / zs.asymptotic_E(n2 + 1, sign)
    if ratio > 0.75:
        raise ValueError(f"|argument| too close to the first tail energy "
                         f"(ratio {ratio:.2f}); compute more explicit zeros")
    m = 1
    term_scale = np.inf
    acc = np.zeros_like(out)
    while term_scale > 1e-18 and m < 300:
        s_m = (2.0 ** (-pe * m)) * q0 ** (-pe * m) * zeta(pe * m, n2 + 1 + off)
        t = -(x ** m / m) * s_m
        acc = acc + t
        term_scale = np.max(np.abs(t))
        m += 1
    return out + acc


def _delta_sum_beyond(zeros: ZeroSet, sign: int, n_from: int):
    """sum_{n >= n_from} (E_n/E_n^asy - 1) from the tail model, by fitting
    the model deviation on a ladder and summing the fitted basis in closed
    Hurwitz-zeta form."""
    zs = zeros
    p = zs.params
    nn = np.unique(np.round(np.geomspace(n_from, n_from + 20000, 60)).astype(int))
    mu = zs.mu(nn, sign)
    delta = zs.model_E(nn, sign) / zs.asymptotic_E(nn, sign) - 1.0
    expns = sorted({2.0, 4.0, 2.0 * p.alpha + 1.0})
    basis = np.array([mu ** (-e) for e in expns]).T
    coef, *_ = np.linalg.lstsq(basis, delta, rcond=None)
    off = 0.5 + sign * p.k
    scale = 4.0 * math.pi / p.r
    total = 0.0
    for e, c in zip(expns, coef):
        total += c * scale ** (-e) * zeta(e, n_from + off)
    return total


def _log_c_prefactor(zeros: ZeroSet) -> float:
    """log of the product-form normalization (k already reduced to [0, 1/2],
    so the (-1)^[k] sign is +1)."""
    zs = zeros
    p = zs.params
    al = p.alpha
    pe = zs.p_exponent
    k = reduce_k(p.k)
    q0 = 2.0 * math.pi / p.B
    n_expl = min(len(zs.E_plus), len(zs.E_minus)) - 1
    n = np.arange(0, n_expl + 1)
    core = float(np.sum(0.5 * (np.log(zs.E_plus[n]) + np.log(zs.E_minus[n]))
                        - pe * np.log(q0 * (2 * n + 1))))
    # model zeros out to the closed-form regime
    n1, n2 = n_expl + 1, n_expl + N_MODEL_TAIL
    nn = np.arange(n1, n2 + 1)
    core += float(np.sum(0.5 * (np.log(zs.model_E(nn, +1)) + np.log(zs.model_E(nn, -1)))
                         - pe * np.log(q0 * (2 * nn + 1))))
    # asymptotic-position remainder: Gamma-product closed form ...
    m0 = n2 + 1
    main = (pe / 2.0) * (2.0 * gammaln(m0 + 0.5) - gammaln(m0 + 0.5 + k)
                         - gammaln(m0 + 0.5 - k))
    # ... plus the model-vs-asymptotic deviation summed in closed form
    dev = 0.5 * (_delta_sum_beyond(zs, +1, m0) + _delta_sum_beyond(zs, -1, m0))
    return (al / (al + 1.0)) * math.log(2.0) + core + main + dev


def reflection_s(cf: CountingFunction) -> tuple[float, float]:
    """Reflection factor S from the contour integral, and the boundary
    constant eta0 tied to it on 0 <= k < 1/2.

    log S = (alpha/pi) Im Int log(1 + e^{-i eps}) over the lowered contour;
    eta0 solves S = Gamma(2k)/Gamma(1-2k) 2^(4k-1) e^(eta0).
    """
    p = cf.params
    log_s = (p.alpha / math.pi) * tail_integral(cf, 0.0).imag
    k = reduce_k(p.k)
    if k == 0.0:
        eta0 = -math.inf
    else:
        eta0 = log_s - (math.lgamma(2.0 * k) - math.lgamma(1.0 - 2.0 * k)) \
            - (4.0 * k - 1.0) * math.log(2.0)
    return math.exp(log_s), eta0


def reflection_s_product(zeros: ZeroSet) -> float:
    """S from its convergent product over the energies (cross-check route)."""
    zs = zeros
    p = zs.params
    k = reduce_k(p.k)
    pe = zs.p_exponent
    log_s = -(2.0 * pe * k) * math.log(p.r * math.exp(EULER_GAMMA) / (4.0 * math.pi))
    n_expl = min(len(zs.E_plus), len(zs.E_minus)) - 1
    n = np.arange(0, n_expl + 1)
    log_s += float(np.sum(np.log(zs.E_minus[n]) - np.log(zs.E_plus[n])
                          + 2.0 * pe * k / (n + 1.0)))
    n1, n2 = n_expl + 1, n_expl + N_MODEL_TAIL
    nn = np.arange(n1, n2 + 1)
    log_s += float(np.sum(np.log(zs.model_E(nn, -1)) - np.log(zs.model_E(nn, +1))
                          + 2.0 * pe * k / (nn + 1.0)))
    m0 = n2 + 1
    log_s += pe * (gammaln(m0 + 0.5 + k) - gammaln(m0 + 0.5 - k)
                   - 2.0 * k * digamma(m0 + 1.0))
    log_s += _delta_sum_beyond(zs, -1, m0) - _delta_sum_beyond(zs, +1, m0)
    return math.exp(log_s)


class QFunction:
    """Q in both representations, with normalization data.

    log_q evaluates the product representation anywhere in the theta plane;
    central_line_log is the integral-equation route on the line
    Im theta = pi (alpha+1)/(2 alpha), valid for real argument offsets.
    """

    def __init__(self, cf: CountingFunction, zeros: ZeroSet):
        if reduce_k(cf.params.k) != cf.params.k:
            raise ValueError("build the Q-function at the reduced quasi-momentum "
                             f"(k={cf.params.k} reduces to {reduce_k(cf.params.k)})")
        self.cf = cf
        self.zeros = zeros
        self.params = cf.params
        self.S, self.eta0 = reflection_s(cf)
        self.log_c = _log_c_prefactor(zeros)
        self._central_cache = None

    # -- product representation ---------------------------------------

    def log_q(self, theta, sign: int = +1):
        """log Q(theta, +-k) from the product over zeros (alpha > 1).

        Branch: each factor contributes its principal log, so exp(log_q)
        is exactly the product while log_q itself is defined mod 2 pi i.
        """
        p = self.params
        if p.alpha <= 1.0:
            raise ValueError("plain product representation requires alpha > 1")
        zs = self.zeros
        theta = np.asarray(theta, dtype=complex)
        scalar = theta.ndim == 0
        theta = np.atleast_1d(theta)
        pe = zs.p_exponent
        s2a = p.s ** (2.0 * p.alpha)
        xp = s2a * np.exp(pe * theta)
        xm = s2a * np.exp(-pe * theta)
        e_up = zs.E_plus if sign > 0 else zs.E_minus
        e_dn = zs.E_minus if sign > 0 else zs.E_plus
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (self.log_c + sign * 2.0 * p.k * p.alpha / (p.alpha + 1.0) * theta
                   + np.sum(np.log1p(-xp[..., None] / e_up), axis=-1)
                   + np.sum(np.log1p(-xm[..., None] / e_dn), axis=-1))
            out = out + _tail_log_sum(xp, zs, sign) + _tail_log_sum(xm, zs, -sign)
        return out[0] if scalar else out

    def q(self, theta, sign: int = +1):
        lq = self.log_q(theta, sign)
        return np.where(np.isneginf(np.real(lq)), 0.0, np.exp(lq))

    # -- integral representation on the central line --------------------

    def central_line_log(self) -> GridFunction:
        """log Q(theta + i pi (alpha+1)/2 alpha, k) sampled on the real grid."""
        if self._central_cache is None:
            self._central_cache = central_line_log(self.cf, self.S)
        return self._central_cache


def central_line_log(cf: CountingFunction, s_factor: float | None = None) -> GridFunction:
    """log Q on the line Im theta = pi (alpha+1)/(2 alpha), straight from the
    counting function (valid at alpha = 1 too, where the product diverges).

    The reconstruction term is 2 Re of the contour convolution with the
    F kernel: F is conjugate-odd (F(conj x)* = -F(x)), which is exactly what
    makes this piece real and the asymptotic IM coefficients real.
    """
    p = cf.params
    g = cf.grid
    if s_factor is None:
        s_factor = reflection_s(cf)[0]
    c = math.cos(math.pi / (2.0 * p.alpha))
    jf = _f_convolution(cf)
    vals = (p.r * np.cosh(g.nodes) / (2.0 * c) + 1j * math.pi * p.k
            + 0.5 * math.log(s_factor) + 2.0 * jf.real)
    return GridFunction(g, vals)


def t_reg_alpha1(cf_plus: CountingFunction, cf_minus: CountingFunction,
                 theta: np.ndarray) -> np.ndarray:
    """T_reg on the real axis at alpha = 1, where it is the only
    well-defined member of the T family.

    T is defined only modulo exp(const cosh theta) at this degenerate
    point; the convention here is exp((sigma_int[k] + sigma_int[-k])/2)
    with sigma_int the reconstruction integral of each counting function
    (the pair solved at +-k), which matches the closed double-log-integral
    form; the continuous alpha -> 1 limit of the generic-alpha T_reg is
    its square.
    """
    if cf_plus.params.alpha != 1.0:
        raise ValueError("this closed combination is the alpha = 1 case")
    out = []
    for cf in (cf_plus, cf_minus):
        jf = _f_convolution(cf)
        sig = GridFunction(cf.grid, 2.0 * jf.real)
        out.append(sig(theta))
    return np.exp(0.5 * (out[0] + out[1]))


def _f_convolution(cf: CountingFunction) -> np.ndarray:
    """J_F(theta_i) = Int_{Im=-gamma} log(1+e^{-i eps(u)}) F(u - theta_i) du
    for every grid node, via FFT with tabulated F(-x - i gamma) samples."""
    g = cf.grid
    p = cf.params
    n = g.n
    pad = 2 * n
    # kernel samples K_m = F(-(m h) - i gamma) for m = -(n-1)..(n-1)
    mh = np.arange(-(n - 1), n) * g.spacing
    ksamp = f_kernel(-mh - 1j * cf.gamma, p.alpha)
    kpad = np.zeros(pad, dtype=complex)
    kpad[:n] = ksamp[n - 1:]
    kpad[pad - (n - 1):] = ksamp[:n - 1]
    fpad = np.zeros(pad, dtype=complex)
    fpad[:n] = cf.f_minus
    conv = np.fft.ifft(np.fft.fft(kpad) * np.fft.fft(fpad))[:n] * g.spacing
    return conv


def build_q(cf: CountingFunction, n_zeros: int = 160) -> QFunction:
    """Convenience constructor: locate +-n_zeros zeros and assemble Q."""
    zs = find_zeros(cf, (-n_zeros - 1, n_zeros))
    return QFunction(cf, zs)


def wronskian(q: QFunction, theta):
    """The quantum Wronskian combination of Q at arguments shifted by
    i pi/(2 alpha), equal to the theta-independent constant -2i sin(2 pi k).

    Orientation note: with the product normalization and the zero labeling
    as implemented (fixed by the alpha = 1 closed forms), the combination
    that evaluates to -2i sin(2 pi k) carries Q(., -k) on the upshifted
    first slot; the opposite pairing gives +2i sin(2 pi k).  T_0 = 1 and the
    Baxter relation single out this orientation.
    """
    p = q.params
    d = math.pi / (2.0 * p.alpha)
    theta = np.asarray(theta, dtype=complex)
    return (q.q(theta + 1j * d, -1) * q.q(theta - 1j * d, +1)
            - q.q(theta - 1j * d, -1) * q.q(theta + 1j * d, +1))


# ----------------------------------------------------------------------
# T-functions
# ----------------------------------------------------------------------

class TFamily:
    """Transfer-matrix eigenvalues T_j built from the Q bilinear.

    Everything is evaluated through log_q so large driving exponentials
    never overflow; t(j, theta) returns values, log_t the stable logarithm.
    """

    def __init__(self, q: QFunction, j_max: float):
        self.q = q
        self.params = q.params
        if abs(math.sin(2.0 * math.pi * self.params.k)) < 1e-8:
            raise ValueError("k sits at a degenerate point of the bilinear "
                             "(sin 2 pi k ~ 0); use the Richardson pair route")
        self.j_list = [0.5 * m for m in range(0, int(round(2 * j_max)) + 1)]

    def log_t(self, j: float, theta):
        """log T_j(theta), from the bilinear whose orientation is fixed by
        T_0 = 1 (equivalently by the Baxter relation; see wronskian())."""
        p = self.params
        theta = np.asarray(theta, dtype=complex)
        if j == -0.5:
            raise ValueError("T_{-1/2} vanishes identically; no logarithm")
        d = math.pi * (2.0 * j + 1.0) / (2.0 * p.alpha)
        la = self.q.log_q(theta + 1j * d, -1) + self.q.log_q(theta - 1j * d, +1)
        lb = self.q.log_q(theta - 1j * d, -1) + self.q.log_q(theta + 1j * d, +1)
        pref = 1j / (2.0 * math.sin(2.0 * math.pi * p.k))
        return np.log(pref) + la + np.log1p(-np.exp(lb - la))

    def t(self, j: float, theta):
        if j == -0.5:
            return np.zeros(np.shape(theta), dtype=complex) if np.ndim(theta) else 0.0 + 0j
        return np.exp(self.log_t(j, theta))

    def log_t_reg(self, theta):
        """log of T_{1/2}(theta) exp(-4 rhat cosh(theta)/cos(pi/2 alpha))."""
        p = self.params
        c = math.cos(math.pi / (2.0 * p.alpha))
        theta = np.asarray(theta, dtype=complex)
        return self.log_t(0.5, theta) - 4.0 * p.rhat * np.cosh(theta) / c

    def log_t_reg_central(self, t):
        """log T_reg at theta = t + i pi (alpha+1)/(2 alpha), the argument
        entering the field-reconstruction kernel."""
        p = self.params
        t = np.asarray(t, dtype=complex)
        return self.log_t_reg(t + 1j * math.pi * (p.alpha + 1.0) / (2.0 * p.alpha))


def t_family(q: QFunction, j_max: float) -> TFamily:
    return TFamily(q, j_max)


def t_half_richardson(make_q, k: float, theta, dk: float = 1e-4):
    """T_{1/2} at a degenerate quasi-momentum (sin 2 pi k = 0) by evenness:
    T is even in k, so averaging the pipelines at k +- dk cancels the O(dk)
    term and Richardson over dk, 2dk removes O(dk^2).

    make_q: callable k -> QFunction (a full pipeline rebuild).  Evenness and
    periodicity in k let every probe point be reduced to [0, 1/2] first.
    """
    def t_at(kk):
        qf = make_q(reduce_k(kk))
        return TFamily(qf, 0.5).t(0.5, theta)

    def avg(d):
        return 0.5 * (t_at(k + d) + t_at(k - d))

    a1, a2 = avg(dk), avg(2.0 * dk)
    return (4.0 * a1 - a2) / 3.0


# ----------------------------------------------------------------------
# functional identities
# ----------------------------------------------------------------------

def _rel_residual(lhs, rhs, floor_frac: float = 1e-6, abs_floor: float = 0.0):
    """Pointwise relative defect, excluding removable 0/0 samples where both
    sides vanish together (zeros of the T's, or whole identities that
    degenerate to 0 = 0 at special k, make those ratios pure noise)."""
    scale = np.maximum(np.abs(lhs), np.abs(rhs))
    keep = scale > np.maximum(floor_frac * np.max(scale), abs_floor)
    if not np.any(keep):
        return 0.0
    return float(np.max(np.abs(lhs - rhs)[keep] / scale[keep]))


def functional_checks(q: QFunction, t: TFamily, theta_window: float = 2.0,
                      n_samples: int = 21) -> dict:
    """Sup-norm relative residuals of the T-Q relation, fusion, truncation
    (when 2 alpha is an integer) and the closed Y-system.

    Sample points near a real zero of Q are masked out of the T-Q residual;
    both sides vanish linearly there and the ratio is noise.
    """
    p = q.params
    al = p.alpha
    th = np.linspace(-theta_window, theta_window, n_samples)
    out = {}

    # Baxter T-Q, masked near zeros of Q
    mask = np.ones(len(th), dtype=bool)
    for tn in q.zeros.theta:
        mask &= np.abs(th - tn) > 0.05
    tq = t.t(0.5, th[mask]) * q.q(th[mask].astype(complex))
    qq = q.q(th[mask] + 1j * math.pi / al) + q.q(th[mask] - 1j * math.pi / al)
    out["t_q"] = _rel_residual(tq, qq)

    # fusion among available j; identities that degenerate to 0 = 0 at
    # root-of-unity k are dropped through the absolute floor
    ref = float(np.max(np.abs(t.t(0.5, th)))) ** 2
    fus = 0.0
    for j in t.j_list[1:-1]:
        sh = math.pi / (2.0 * al)
        lhs = t.t(0.5, th) * t.t(j, th + 1j * sh * (2 * j + 1))
        rhs = t.t(j - 0.5, th + 1j * sh * (2 * j + 2)) + t.t(j + 0.5, th + 1j * sh * 2 * j)
        fus = max(fus, _rel_residual(lhs, rhs, abs_floor=1e-9 * ref))
    out["fusion"] = fus

    two_alpha = 2.0 * al
    if abs(two_alpha - round(two_alpha)) < 1e-12:
        n_trunc = int(round(al + 1.0)) if abs(al - round(al)) < 1e-12 else int(round(two_alpha + 2.0))
        jn = n_trunc / 2.0
        if jn <= max(t.j_list):
            lhs = t.t(jn, th)
            rhs = 2.0 * math.cos(2.0 * math.pi * p.k) + t.t(jn - 1.0, th)
            out["truncation"] = _rel_residual(lhs, rhs)
            out.update(_y_system_checks(t, n_trunc, th))
    return out


def _y_system_checks(t: TFamily, n_trunc: int, th: np.ndarray) -> dict:
    """Closed Y-system residuals for 2 alpha integer, including the fork
    node Ybar = T_{N/2-1}."""
    al = t.params.alpha
    k = t.params.k
    sh = math.pi / (2.0 * al)

    def y(j, theta):
        return t.t(j - 0.5, theta) * t.t(j + 0.5, theta)

    res = 0.0
    j = 0.5
    while j <= n_trunc / 2.0 - 1.5 + 1e-9:
        lhs = y(j, th + 1j * sh) * y(j, th - 1j * sh)
        rhs = (1.0 + y(j - 0.5, th)) * (1.0 + y(j + 0.5, th))
        res = max(res, _rel_residual(lhs, rhs))
        j += 0.5
    jn = n_trunc / 2.0 - 1.0
    ybar = t.t(jn, th)
    lhs = y(jn, th + 1j * sh) * y(jn, th - 1j * sh)
    y_prev = y(jn - 0.5, th) if jn - 0.5 > 0 else np.zeros_like(th, dtype=complex)
    rhs = (1.0 + y_prev) * (1.0 + np.exp(2j * math.pi * k) * ybar) \
        * (1.0 + np.exp(-2j * math.pi * k) * ybar)
    res = max(res, _rel_residual(lhs, rhs))
    fork = _rel_residual(t.t(jn, th + 1j * sh) * t.t(jn, th - 1j * sh), 1.0 + y(jn, th))
    return {"y_system": res, "y_fork": fork}


def count_zeros_rect(q: QFunction, sign: int, re_range: tuple[float, float],
                     im_half: float, n_samples: int = 4000) -> int:
    """Argument-principle zero count of Q inside a rectangle, via the
    winding of its continuously-unwrapped log along the boundary."""
    a, b = re_range
    c = im_half
    corners = [a - 1j * c, b - 1j * c, b + 1j * c, a + 1j * c, a - 1j * c]
    phase = 0.0
    for z0, z1 in zip(corners[:-1], corners[1:]):
        zz = z0 + (z1 - z0) * np.linspace(0.0, 1.0, n_samples)
        lq = q.log_q(zz, sign)
        phase += np.sum(np.diff(np.unwrap(np.imag(lq))))
    return int(round(phase / (2.0 * math.pi)))
