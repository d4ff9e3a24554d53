import math

import numpy as np
import pytest

from mshg import ddv, params
from mshg.grid import RapidityGrid
from mshg.kernels import g_hat


def test_boundary_log_term_values():
    assert ddv.boundary_log_term(0.0) == pytest.approx(0.0, abs=1e-12)
    assert ddv.boundary_log_term(math.pi / 2) == pytest.approx(-math.pi / 4, abs=1e-12)
    # at eps = pi the sawtooth jumps by pi; the regulator smooths the jump
    # so the value at the (float) midpoint is tiny on the jump scale, and
    # bounded by sin(float pi)/delta for each regulator
    v12 = ddv.boundary_log_term(math.pi)
    assert abs(v12) < 1.01 * math.sin(math.pi) / 1e-12
    c = 1.0 - 1e-8
    v8 = math.atan2(-c * math.sin(math.pi), 1.0 + c * math.cos(math.pi))
    assert abs(v8) < 1e-7
    assert abs(v12) < 2e-4    # both negligible against the +-pi/2 jump
    # just outside the smoothing window the one-sided limits are +-pi/2
    assert ddv.boundary_log_term(math.pi - 1e-4) == pytest.approx(-math.pi / 2, abs=2e-4)
    assert ddv.boundary_log_term(math.pi + 1e-4) == pytest.approx(math.pi / 2, abs=2e-4)
    # range (-pi/2, pi/2]
    eps = np.linspace(-20, 20, 4001)
    vals = ddv.boundary_log_term(eps)
    assert np.all(vals <= math.pi / 2 + 1e-15)
    assert np.all(vals > -math.pi / 2 - 1e-15)


def test_alpha1_closed_form():
    p = params.derive_scales(1.0, s=1.0, k=0.2)
    cf = ddv.solve_ddv(p)
    exact = math.pi * np.sinh(cf.grid.nodes) - 0.4 * math.pi
    assert np.max(np.abs(cf.eps - exact)) < 1e-12


def test_k_zero_oddness_and_center(pipe_a2):
    p0 = params.derive_scales(2.0, s=0.5, k=0.0)
    cf0 = ddv.solve_ddv(p0)
    assert np.max(np.abs(cf0.eps + cf0.eps[::-1])) < 1e-9
    assert abs(cf0.eps_at(0.0)) < 1e-12


def test_monotonicity(pipe_a2):
    _, cf, _ = pipe_a2
    assert np.all(np.diff(cf.eps) > 0)


def test_k_shift_property(pipe_a2):
    p, cf, _ = pipe_a2
    ps = params.derive_scales(p.alpha, s=p.s, k=p.k + 1.0)
    cfs = ddv.solve_ddv(ps)
    assert np.max(np.abs(cfs.eps - (cf.eps - 2.0 * math.pi))) < 1e-10


def test_edge_behavior():
    p = params.derive_scales(2.0, s=0.5, k=0.1)
    cf = ddv.solve_ddv(p, grid=RapidityGrid(20.0, 4096))
    for idx in (0, -1):
        theta = cf.grid.nodes[idx]
        drive = p.r * math.sinh(theta) - 2.0 * math.pi * p.k
        assert abs(cf.eps[idx] - drive) < 1e-8


def test_continuation(pipe_a2):
    p, cf, _ = pipe_a2
    th = np.array([0.3, -1.7, 2.2], dtype=complex)
    assert np.max(np.abs(ddv.continue_eps(cf, th) - cf.eps_at(th.real))) < 1e-12
    z = 0.7 + 0.2j
    assert abs(np.conj(ddv.continue_eps(cf, np.conj(z))) - ddv.continue_eps(cf, z)) < 1e-13
    with pytest.raises(ValueError):
        ddv.continue_eps(cf, 0.3 + 1.4j)


def test_continuation_alpha1_closed_form():
    p = params.derive_scales(1.0, s=1.0, k=0.2)
    cf = ddv.solve_ddv(p)
    z = 0.5 - 0.3j
    exact = math.pi * np.sinh(z) - 0.4 * math.pi
    assert abs(ddv.continue_eps(cf, z) - exact) < 1e-13


def test_nonconvergence_diagnostic():
    p = params.derive_scales(3.0, s=0.5, k=0.1)
    with pytest.raises(ddv.DdvConvergenceError) as err:
        ddv.solve_ddv(p, max_iter=3)
    assert len(err.value.history) == 3


def test_collocation_newton_oracle():
    """Independent route: dense-collocation Newton on a halved grid with
    directly-sampled kernels (no FFT), different contour offset."""
    p = params.derive_scales(2.0, s=0.5, k=0.1)
    cf = ddv.solve_ddv(p)

    g = RapidityGrid(cf.grid.half_width, cf.grid.n // 4)
    gamma = 0.7 * cf.gamma
    n = g.n
    h = g.spacing
    offs = np.arange(-(n - 1), n) * h
    from mshg.grid import kernel_samples_from_transform
    k0 = kernel_samples_from_transform(lambda nu: g_hat(nu, p.alpha), h, n)
    k2 = kernel_samples_from_transform(lambda nu: g_hat(nu, p.alpha), h, n,
                                       imag_shift=-2.0 * gamma)
    idx = np.arange(n)
    toe0 = h * k0[(idx[:, None] - idx[None, :]) + (n - 1)]
    toe2 = h * k2[(idx[:, None] - idx[None, :]) + (n - 1)]
    drive = p.r * np.sinh(g.nodes - 1j * gamma) - 2.0 * math.pi * p.k

    def big(mat_a, mat_b):
        """real 2n x 2n block for u -> A u + B conj(u)."""
        top = np.hstack([mat_a.real + mat_b.real, -mat_a.imag + mat_b.imag])
        bot = np.hstack([mat_a.imag + mat_b.imag, mat_a.real - mat_b.real])
        return np.vstack([top, bot])

    u = drive.copy()
    for _ in range(30):
        f = np.log1p(np.exp(-1j * u))
        rhs = drive + 1j * (toe0 @ f) - 1j * (toe2 @ np.conj(f))
        res = u - rhs
        if np.max(np.abs(res)) < 1e-12:
            break
        gprime = -1j * np.exp(-1j * u) / (1.0 + np.exp(-1j * u))
        a_mat = 1j * toe0 * gprime[None, :]
        b_mat = -1j * toe2 * np.conj(gprime)[None, :]
        jac = np.eye(2 * n) - big(a_mat, b_mat)
        step = np.linalg.solve(jac, np.concatenate([res.real, res.imag]))
        u = u - (step[:n] + 1j * step[n:])
    # real-axis value via the same independent kernels
    k0r = kernel_samples_from_transform(lambda nu: g_hat(nu, p.alpha), h, n,
                                        imag_shift=gamma)
    toe0r = h * k0r[(idx[:, None] - idx[None, :]) + (n - 1)]
    f = np.log1p(np.exp(-1j * u))
    eps_real = p.r * np.sinh(g.nodes) - 2.0 * math.pi * p.k \
        - 2.0 * (toe0r @ f).imag
    i0 = n // 2
    assert abs(eps_real[i0] - cf.eps_at(g.nodes[i0])) < 1e-8
    assert np.max(np.abs(eps_real[n // 4: 3 * n // 4]
                         - cf.eps_at(g.nodes[n // 4: 3 * n // 4]))) < 1e-8


def test_tail_integral_parity_at_k0():
    p = params.derive_scales(2.0, s=0.5, k=0.0)
    cf = ddv.solve_ddv(p)
    j_plus = ddv.tail_integral(cf, 1.0)
    j_minus = ddv.tail_integral(cf, -1.0)
    # chiral and antichiral integrals coincide up to conjugation parity
    assert abs(j_plus.imag - (-j_minus.imag)) < 1e-12
    assert abs(j_plus - np.conj(j_minus)) < 1e-12


def test_tail_integral_gamma_independence(pipe_a2):
    _, cf, _ = pipe_a2
    for a in (0.0, 1.0, -1.0, 3.0):
        j1 = ddv.tail_integral(cf, a)
        j2 = ddv.tail_integral(cf, a, gamma=cf.gamma / 2.0)
        assert abs(j1 - j2) < 1e-10 * max(1.0, abs(j1))


def test_tail_integral_budget_error():
    p = params.derive_scales(2.0, s=0.5, k=0.1)
    cf = ddv.solve_ddv(p, grid=RapidityGrid(6.0, 1024))
    with pytest.raises(ValueError):
        ddv.tail_integral(cf, 30.0)


def test_tail_integral_alpha1_mpmath_oracle():
    """The alpha = 1 closed-form counting function makes the contour
    integral computable by independent arbitrary-precision quadrature."""
    import mpmath as mp

    s, k, a = 1.0, 0.2, 1.0
    p = params.derive_scales(1.0, s=s, k=k)
    cf = ddv.solve_ddv(p)
    j = ddv.tail_integral(cf, a)

    mp.mp.dps = 25

    def integrand(t):
        th = t - 0.3j
        eps = mp.pi * mp.sinh(th) - 2 * mp.pi * mp.mpf("0.2")
        return mp.e ** (a * th) * mp.log(1 + mp.e ** (-1j * eps))

    oracle = complex(mp.quad(integrand, [-8, -4, -2, 0, 2, 3, 4, 5, 6, 7]))
    assert abs(j - oracle) < 1e-12


def test_tail_integral_alpha1_regulated_real_axis_oracle():
    """Adaptive real-axis quadrature of the regulated integrand
    Im[e^{a(theta - i d)} log(1 + e^{-i eps(theta - i d)})] (the boundary
    prescription at a small finite height d), with the closed-form counting
    function.  The naive improper real-axis integral converges to a
    different, principal-value-like number: the prescription is essential,
    and the regulated quadrature is the honest independent oracle."""
    from scipy.integrate import quad

    s, k, a = 1.0, 0.2, 1.0
    p = params.derive_scales(1.0, s=s, k=k)
    cf = ddv.solve_ddv(p)
    j = ddv.tail_integral(cf, a).imag

    d = 0.15

    def integrand(t):
        th = t - 1j * d
        eps = math.pi * np.sinh(th) - 2.0 * math.pi * k
        return (np.exp(a * th) * np.log1p(np.exp(-1j * eps))).imag

    total = 0.0
    cuts = [-16, -8, -4, -2, 0, 2, 3, 4, 4.8, 5.6, 6.4, 7.4]
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, _ = quad(integrand, lo, hi, limit=800, epsabs=1e-13, epsrel=1e-12)
        total += val
    assert abs(j - total) < 1e-9


def test_contour_crossing_guard(pipe_a2):
    _, cf, _ = pipe_a2
    with pytest.raises(ValueError):
        # far beyond the analyticity strip the shifted contour is rejected
        cf.contour_log(10.0)
