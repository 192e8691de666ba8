"""European calls on degree-day futures.

For a measurement day ``s`` the only randomness in ``F(tau, s)`` is the
scalar ``Z = e_1' exp(A(s - tau)) X(tau)``, Gaussian given ``X(t) = x``. The
exact call is priced by sampling ``Z`` directly; its state Greeks use the
likelihood-ratio weight ``(Z - mean) / var`` since only the mean of ``Z``
depends on ``x``.

Linearised futures make the call a Bachelier-type closed form
``disc * S * Psi((d - K) / S)`` for both day and period contracts.

Exact Greeks over a measurement period are not offered: the payoff then
depends on the whole path of the state over the period and the density
argument no longer applies.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special

from . import car_model as cm
from . import rng
from .kernels import psi_array, psi_numpy
from .pricing import ContractSpec, Day, Period, Scheme, approx_coeffs, approx_coeffs_day, fcdd_approx, futures_price
from .sensitivity import SensitivityVector

__all__ = [
    "ApproxCallTerms",
    "ConditionalLaw",
    "McEstimate",
    "OptionSpec",
    "PathDependentGreekError",
    "call_approx",
    "call_approx_greeks",
    "call_approx_terms",
    "call_exact_mc",
    "call_greek_density_mc",
    "conditional_law",
]


class PathDependentGreekError(ValueError):
    """Raised when exact option Greeks are requested on a period contract."""


@dataclass(frozen=True)
class OptionSpec:
    K: float
    tau: float
    r: float
    underlying: ContractSpec

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"risk-free rate must be positive, got {self.r}")
        if not math.isfinite(self.K):
            raise ValueError("strike must be finite")
        if self.tau > self.underlying.first_day:
            raise ValueError("exercise time must not exceed the first measurement day")

    def check_time(self, t):
        if not t <= self.tau:
            raise ValueError(f"need t <= tau, got t={t}, tau={self.tau}")

    def discount(self, t):
        return math.exp(-self.r * (self.tau - t))


class ConditionalLaw(NamedTuple):
    mean: float
    variance: float


class McEstimate(NamedTuple):
    price: float
    se: float


@dataclass(frozen=True)
class ApproxCallTerms:
    d: float
    S: float
    a_vec: np.ndarray


def conditional_law(model, t, s, tau, x):
    """Mean and variance of ``e_1' exp(A(s - tau)) X(tau)`` given ``X(t) = x``."""
    if not t <= tau <= s:
        raise ValueError("conditional law requires t <= tau <= s")
    x = cm.as_state(model, x)
    mean = float(cm.f_vector(model, s - t) @ x + cm.theta_drift(model, t, tau, s))
    variance = float(cm.lagged_variance(model, t, tau, s))
    return ConditionalLaw(mean, variance)


def _day_only(opt):
    if not isinstance(opt.underlying.measurement, Day):
        raise PathDependentGreekError(
            "exact option pricing and Greeks are only available for a measurement day; "
            "over a period the payoff is path-dependent and the density approach fails"
        )
    return opt.underlying.measurement.s


def _futures_at_exercise(model, seasonal, opt, z, scheme):
    """Futures price at ``tau`` as a function of sampled ``Z`` (vectorised)."""
    s = opt.underlying.measurement.s
    side = opt.underlying.side
    if scheme is Scheme.EXACT:
        offset = float(seasonal(s)) + float(cm.theta_drift(model, opt.tau, s, s)) - model.c
        gap = side.sign * (offset + z)
        sig = math.sqrt(float(cm.sigma_sq(model, opt.tau, s)))
        if sig == 0.0:
            return np.maximum(gap, 0.0)
        return sig * psi_array(gap / sig)
    coeffs = approx_coeffs_day(model, seasonal, opt.tau, s, scheme, side)
    # a(tau, s) X(tau) = sign * slope * Z
    return coeffs.theta_term + side.sign * scheme.slope * z


def _sample(model, seasonal, t, opt, x, n_paths, seed, scheme):
    s = _day_only(opt)
    opt.check_time(t)
    if n_paths < 2:
        raise ValueError("n_paths must be at least 2")
    law = conditional_law(model, t, s, opt.tau, x)
    xi = rng.standard_normals(seed, n_paths, 1)[:, 0]
    sd = math.sqrt(law.variance)
    z = law.mean + sd * xi
    payoff = np.maximum(_futures_at_exercise(model, seasonal, opt, z, scheme) - opt.K, 0.0)
    return payoff, xi, sd


def call_exact_mc(model, seasonal, t, opt, x, n_paths, seed, scheme=Scheme.EXACT):
    """Monte Carlo call price and standard error.

    ``scheme`` selects the futures formula applied at exercise: the exact day
    price by default, or a linearised one (used to check the closed form).
    """
    s = _day_only(opt)
    opt.check_time(t)
    if t == opt.tau:
        contract = ContractSpec(Day(s), opt.underlying.side, scheme)
        return McEstimate(max(futures_price(model, seasonal, contract, t, x) - opt.K, 0.0), 0.0)
    payoff, _, _ = _sample(model, seasonal, t, opt, x, n_paths, seed, scheme)
    disc = opt.discount(t)
    return McEstimate(float(disc * payoff.mean()), float(disc * payoff.std(ddof=1) / math.sqrt(n_paths)))


def call_greek_density_mc(model, seasonal, t, opt, x, n_paths, seed, scheme=Scheme.EXACT):
    """Likelihood-ratio estimate of ``d C / d x_i`` and its per-component standard error.

    Uses the same draws as :func:`call_exact_mc` for a given seed.
    """
    s = _day_only(opt)
    if not t < opt.tau:
        raise ValueError("density Greek needs t < tau; the conditional variance vanishes at tau = t")
    payoff, xi, sd = _sample(model, seasonal, t, opt, x, n_paths, seed, scheme)
    score = payoff * xi / sd  # payoff * (Z - mean) / variance
    disc = opt.discount(t)
    f = cm.f_vector(model, s - t)
    greeks = disc * score.mean() * f
    se = disc * score.std(ddof=1) / math.sqrt(n_paths) * np.abs(f)
    meta = {"method": "density_mc", "n_paths": n_paths, "seed": seed, "t": t}
    return SensitivityVector(greeks, meta), se


def _approx_scheme(opt, scheme):
    scheme = opt.underlying.scheme if scheme is None else scheme
    if scheme is Scheme.EXACT:
        raise ValueError("closed-form call needs a linearised scheme (approx_x or approx_taylor)")
    return scheme


def call_approx_terms(model, seasonal, t, opt, x, scheme=None):
    """Drift term ``d``, volatility ``S`` and futures gradient ``a(t, .)`` of the closed form."""
    scheme = _approx_scheme(opt, scheme)
    opt.check_time(t)
    contract = opt.underlying
    k = contract.side.sign * scheme.slope
    now = approx_coeffs(model, seasonal, contract, t, scheme)
    later = approx_coeffs(model, seasonal, contract, opt.tau, scheme)
    m = contract.measurement
    if isinstance(m, Day):
        anchor, coef = m.s, model.coef(0, model.p - 1)
    elif isinstance(m, Period):
        anchor, coef = m.tau1, cm.period_kernel_coef(model, m.tau1, m.tau2)
    drift = 0.0
    if not model.theta.is_zero:
        drift = k * float(cm.lag_integral(model, coef, None, t, opt.tau, anchor, model.theta, 1))
    var = k * k * float(cm.lag_integral(model, coef, coef, t, opt.tau, anchor, model.sigma, 2))
    d = fcdd_approx(now, x) + later.theta_term - now.theta_term + drift
    return ApproxCallTerms(float(d), math.sqrt(max(var, 0.0)), now.a_vec)


def call_approx(model, seasonal, t, opt, x, scheme=None):
    """Closed-form call on the linearised futures price."""
    terms = call_approx_terms(model, seasonal, t, opt, x, scheme)
    disc = opt.discount(t)
    if terms.S == 0.0:
        return disc * max(terms.d - opt.K, 0.0)
    return disc * terms.S * float(psi_numpy((terms.d - opt.K) / terms.S))


def call_approx_greeks(model, seasonal, t, opt, x, scheme=None):
    """``disc * Phi((d - K) / S) * a(t, .)``; at ``S = 0`` Phi becomes ``1{d > K}``."""
    terms = call_approx_terms(model, seasonal, t, opt, x, scheme)
    if terms.S > 0.0:
        weight = float(special.ndtr((terms.d - opt.K) / terms.S))
    else:
        weight = 1.0 if terms.d > opt.K else 0.0
    meta = {"method": "closed_form", "t": t}
    return SensitivityVector(opt.discount(t) * weight * terms.a_vec, meta)
