import math

import numpy as np
import pytest
from scipy.special import beta as beta_fn

from mshg import mshg_field as mf
from mshg import params


@pytest.fixture(scope="module")
def chart_a2():
    p = params.derive_scales(2.0, s=0.5, k=0.1)
    return p, mf.chart_for(p)


def test_w_apex_image(chart_a2):
    p, ch = chart_a2
    assert abs(mf.w_of_z(0.0, ch) - ch.w0) < 1e-12
    assert ch.w0 == pytest.approx(-2 * p.rhat / math.sin(math.pi / p.alpha))


def test_w_apex_image_other_alpha():
    for alpha in (1.5, 3.0):
        p = params.derive_scales(alpha, s=0.5)
        ch = mf.chart_for(p)
        assert abs(mf.w_of_z(0.0, ch) - ch.w0) < 2e-11 * max(1.0, abs(ch.w0))


def test_turning_point_image_identity(chart_a2):
    """w(tp) - w(0) = Int_0^tp sqrt(p) has the closed Beta-function value
    rhat (cot(pi/2 alpha) + i); together with w0 this places the turning
    points on the boundary line Re w = -rhat tan(pi/2 alpha)."""
    for alpha in (2.0, 3.0, 1.5):
        p = params.derive_scales(alpha, s=0.5)
        ch = mf.chart_for(p)
        t = math.pi / (2 * alpha)
        delta = np.exp(1j * t) * p.s ** (alpha + 1) \
            * beta_fn(1 / (2 * alpha), 1.5) / (2 * alpha)
        assert abs(delta - p.rhat * (1 / math.tan(t) + 1j)) < 1e-14
        assert abs((ch.w0 + delta) - ch.turning_point_image(+1)) < 1e-14
        assert ch.turning_point_image(+1).real == pytest.approx(
            -p.rhat * math.tan(t))


def test_w_large_z(chart_a2):
    _, ch = chart_a2
    z = 1000.0
    assert abs(mf.w_of_z(z, ch) - z ** 3 / 3.0) / (z ** 3 / 3.0) < 1e-10


def test_w_path_through_turning_point_rejected(chart_a2):
    _, ch = chart_a2
    with pytest.raises(ValueError, match="turning point"):
        mf.w_of_z(ch.turning_point(+1) * 1.0001, ch)


def test_far_field_limit(kernel_a2):
    st = mf.glm_solve(6.0 + 0j, kernel_a2)
    assert abs(st.eta_hat) < 1e-10
    assert abs(st.d_plus) < 1e-10
    assert abs(st.omega_plus) < 1e-10
    assert np.max(np.abs(st.x_plus - 1.0)) < 1e-10


def test_conjugation_relations(kernel_a2):
    st = mf.glm_solve(0.45 + 0.1j, kernel_a2)
    assert abs(st.d_minus - np.conj(st.d_plus)) < 1e-12
    assert abs(st.kappa_minus - np.conj(st.kappa_plus)) < 1e-12
    assert abs(st.omega_minus - np.conj(st.omega_plus)) < 1e-12
    assert abs(np.imag(st.eta_hat)) < 1e-11
    # the omega defects are tiny in the far field and real-combined
    assert abs((st.omega_plus + st.omega_minus).imag) < 1e-12


def test_route_equivalence(kernel_a2):
    for w in (0.35 + 0j, 0.6 + 0.15j, 1.2 - 0.2j):
        a = mf.glm_solve(w, kernel_a2).eta_hat
        b = mf.eta_logdet(w, kernel_a2)["eta_hat"]
        assert abs(a - b) < 1e-10


def test_linearized_term_and_geometric_partials(kernel_a2):
    w = 0.4 + 0j
    ld = mf.eta_logdet(w, kernel_a2)
    eta1 = mf.eta_linearized(w, kernel_a2)
    assert abs(ld["partial"][0] - eta1) < 1e-13
    rho2 = ld["spectral_radius"] ** 2
    gaps = np.abs(np.diff(np.asarray(ld["partial"], dtype=float)))
    ratio = gaps[1] / gaps[0]
    assert ratio < 2.0 * rho2


def test_domain_violation_raises(kernel_a2):
    with pytest.raises(ValueError):
        mf.glm_solve(-1.0 + 0j, kernel_a2)    # far left of the boundary line


def test_pde_residual_vacuum():
    assert mf.pde_residual(lambda w: 0.0, 0.3 + 0.1j, 1e-3) < 1e-12


def test_pde_residual_orders(kernel_a2):
    fn = lambda w: mf.eta_hat(w, kernel_a2)
    r1 = mf.pde_residual(fn, 0.4 + 0.05j, 4e-3)
    r2 = mf.pde_residual(fn, 0.4 + 0.05j, 2e-3)
    assert r1 < 1e-4
    assert 2.5 < r1 / r2 < 6.0


def test_linearized_field_taylor_remainder(kernel_a2):
    """Feeding only the first Born term into the equation leaves the cubic
    Taylor remainder |e^{2 eta1} - e^{-2 eta1} - 4 eta1|."""
    w0 = 0.32 + 0.0j
    fn = lambda w: mf.eta_linearized(w, kernel_a2)
    res = mf.pde_residual(fn, w0, 2e-3)
    eta1 = fn(w0)
    expected = abs(math.exp(2 * eta1) - math.exp(-2 * eta1) - 4 * eta1)
    assert abs(res - expected) < 0.2 * expected


def test_u_hat_real_on_slice(kernel_a2):
    u = mf.u_hat(0.4 + 0j, kernel_a2)
    assert abs(np.imag(u)) < 1e-9


def test_eta_asymptotic_limits(tfam_a2, pipe_a2):
    p, _, _ = pipe_a2
    # leading term alone: eta - alpha log rho -> 0
    rho = 25.0
    lead = 0.25 * math.log(p.s ** 8 - 2 * (p.s * rho) ** 4 * math.cos(4 * 0.2)
                           + rho ** 8)
    assert abs(lead - p.alpha * math.log(rho)) < 1e-4


def test_mshg_eta_zframe(kernel_a2, pipe_a2):
    p, _, _ = pipe_a2
    ch = mf.chart_for(p)
    # MShG equation residual in the z frame (chain rule + w map correctness)
    z0 = 1.1 * np.exp(0.15j)
    h = 2e-3
    f0 = mf.mshg_eta(z0, kernel_a2, ch)
    fx = [mf.mshg_eta(z0 + m * h, kernel_a2, ch) for m in (-1, 1)]
    fy = [mf.mshg_eta(z0 + 1j * m * h, kernel_a2, ch) for m in (-1, 1)]
    lap = (fx[0] + fx[1] + fy[0] + fy[1] - 4 * f0) / h ** 2
    pz = z0 ** 4 + p.s ** 4
    res = abs(0.25 * lap - math.exp(2 * f0) + abs(pz) ** 2 * math.exp(-2 * f0))
    assert res < 1e-4
    # large |z| growth: eta ~ alpha log|z|^2 / 2
    zbig = 4.0
    eta_big = mf.mshg_eta(zbig, kernel_a2, ch)
    assert abs(eta_big - p.alpha * math.log(zbig)) < 1e-3
