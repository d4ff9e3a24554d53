"""Model parameters and exact scale conversions.

All couplings live here: the exponent alpha of the deformed potential
p(z) = z^(2 alpha) - s^(2 alpha), the quasi-momentum k, and the web of
derived scales (r, M, m, rhat, R, mu).  Everything downstream receives a
frozen ModelParams / ShgParams and never recomputes a conversion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "ModelParams",
    "ShgParams",
    "b_constant",
    "derive_scales",
    "dual_map",
    "reduce_k",
]


def b_constant(alpha: float) -> float:
    """Gamma-ratio constant B with r = B * s**(1+alpha).

    B = 2 sqrt(pi) Gamma(1 + 1/(2 alpha)) / Gamma(3/2 + 1/(2 alpha)).
    """
    x = 1.0 / (2.0 * alpha)
    return 2.0 * math.sqrt(math.pi) * math.gamma(1.0 + x) / math.gamma(1.5 + x)


def soliton_mass(alpha: float, mu: float, R: float) -> float:
    """Soliton mass M from the action coupling mu (beta^2 = 1/(1+alpha))."""
    beta2 = 1.0 / (alpha + 1.0)
    e = 1.0 / (2.0 - 2.0 * beta2)
    pref = 2.0 * math.gamma(beta2 * e) / (math.sqrt(math.pi) * math.gamma(e))
    return pref * (math.pi * mu * math.gamma(1.0 - beta2) / math.gamma(beta2)) ** e


def _mu_from_s(alpha: float, s: float, R: float) -> float:
    # invert s = (R/(pi beta^2))^beta2 * [mu pi Gamma(1-beta2)/Gamma(beta2)]^(beta2/(2-2beta2))
    beta2 = 1.0 / (alpha + 1.0)
    base = s / (R / (math.pi * beta2)) ** beta2
    bracket = base ** ((2.0 - 2.0 * beta2) / beta2)
    return bracket * math.gamma(beta2) / (math.pi * math.gamma(1.0 - beta2))


def reduce_k(k: float) -> float:
    """Map any real quasi-momentum into the fundamental domain [0, 1/2].

    Uses periodicity Q(theta, k) = Q(theta, k+1) and the reflection
    Q(-theta, k) = Q(theta, -k); the reduced value parameterizes the same
    spectrum up to theta -> -theta.
    """
    km = k % 1.0
    if km > 0.5:
        km = 1.0 - km
    return km


@dataclass(frozen=True)
class ModelParams:
    """Sine-Gordon side parameter record (alpha >= 1).

    l = 2|k| - 1/2 is always derived, never stored, so the constraint
    cannot be broken by construction.
    """

    alpha: float
    k: float
    s: float
    r: float
    M: float
    m: float
    R: float
    mu: float

    @property
    def beta2(self) -> float:
        return 1.0 / (self.alpha + 1.0)

    @property
    def l(self) -> float:
        return 2.0 * abs(self.k) - 0.5

    @property
    def k_reduced(self) -> float:
        return reduce_k(self.k)

    @property
    def B(self) -> float:
        return b_constant(self.alpha)

    @property
    def rhat(self) -> float:
        return self.m * self.R / 8.0

    def with_k(self, k: float) -> "ModelParams":
        return ModelParams(self.alpha, k, self.s, self.r, self.M, self.m, self.R, self.mu)


def derive_scales(alpha: float, *, s: float | None = None, r: float | None = None,
                  mu: float | None = None, R: float | None = None,
                  k: float = 0.0) -> ModelParams:
    """Populate a full ModelParams from alpha plus exactly one scale input.

    Accepted scale inputs: s, or r, or the pair (mu, R).  When only s or r
    is given, the circumference R defaults to 1 and (M, mu) are fixed from
    r = M R.

    Raises ValueError for alpha < 1, non-positive scales, or an over/under
    determined scale specification.
    """
    if alpha < 1.0:
        raise ValueError(f"alpha must be >= 1 (got {alpha}); 0 < alpha < 1 needs "
                         "Weierstrass-regularized products and is unsupported")
    given = [name for name, v in (("s", s), ("r", r), ("mu", mu)) if v is not None]
    if mu is not None and R is None:
        raise ValueError("mu requires R as well")
    if len(given) != 1:
        raise ValueError(f"exactly one scale input among s, r, (mu, R) required, got {given}")

    B = b_constant(alpha)
    if s is not None:
        if s <= 0:
            raise ValueError("s must be positive")
        r = B * s ** (1.0 + alpha)
    elif r is not None:
        if r <= 0:
            raise ValueError("r must be positive")
        s = (r / B) ** (1.0 / (1.0 + alpha))
    else:
        if mu <= 0 or R <= 0:
            raise ValueError("mu and R must be positive")
        beta2 = 1.0 / (alpha + 1.0)
        s = (R / (math.pi * beta2)) ** beta2 * (
            math.pi * mu * math.gamma(1.0 - beta2) / math.gamma(beta2)
        ) ** (beta2 / (2.0 - 2.0 * beta2))
        r = B * s ** (1.0 + alpha)

    if R is None:
        R = 1.0
    M = r / R
    if mu is None:
        mu = _mu_from_s(alpha, s, R)
    m = 2.0 * M * math.sin(math.pi / (2.0 * alpha))
    return ModelParams(alpha=alpha, k=k, s=s, r=r, M=M, m=m, R=R, mu=mu)


@dataclass(frozen=True)
class ShgParams:
    """Sinh-Gordon side parameter record (nu = -alpha > 1)."""

    nu: float
    s: float
    rhat: float

    @property
    def b2(self) -> float:
        return 1.0 / (self.nu - 1.0)


def shg_rhat(nu: float, s: float) -> float:
    """rhat = pi^(3/2) nu s^(1-nu) / ((nu-1) Gamma(1/2nu) Gamma((nu-1)/2nu))."""
    g = math.lgamma(1.0 / (2.0 * nu)) + math.lgamma((nu - 1.0) / (2.0 * nu))
    return math.pi ** 1.5 * nu * s ** (1.0 - nu) / (nu - 1.0) * math.exp(-g)


def shg_params(nu: float, *, s: float | None = None, rhat: float | None = None) -> ShgParams:
    """Build ShgParams from nu > 1 and either the scale s or rhat directly."""
    if nu <= 1.0:
        raise ValueError(f"nu must exceed 1 (got {nu})")
    if (s is None) == (rhat is None):
        raise ValueError("exactly one of s, rhat required")
    if s is not None:
        if s <= 0:
            raise ValueError("s must be positive")
        rhat = shg_rhat(nu, s)
    else:
        if rhat <= 0:
            raise ValueError("rhat must be positive")
        s = (shg_rhat(nu, 1.0) / rhat) ** (1.0 / (nu - 1.0))
    return ShgParams(nu=nu, s=s, rhat=rhat)


def dual_map(p: ShgParams) -> ShgParams:
    """Weak-strong duality 1/nu~ = 1 - 1/nu at fixed rhat.

    Involution: dual_map(dual_map(p)) == p up to round-off in nu.
    """
    if p.nu <= 1.0:
        raise ValueError("nu must exceed 1")
    nu_t = 1.0 / (1.0 - 1.0 / p.nu)
    s_t = (shg_rhat(nu_t, 1.0) / p.rhat) ** (1.0 / (nu_t - 1.0))
    return ShgParams(nu=nu_t, s=s_t, rhat=p.rhat)
