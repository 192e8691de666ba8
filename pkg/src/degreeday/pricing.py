"""CDD/HDD futures prices, exact and linearised, for a day or a period.

Futures are undiscounted conditional expectations of the index under the
pricing measure. For a measurement day ``s`` the CDD price is
``Sigma * Psi((m - c) / Sigma)`` with ``m = m_theta(t, s, x)`` and
``Sigma^2 = sigma_sq(t, s)``; the HDD price uses ``(c - m) / Sigma``. Period
prices integrate the day price over ``[tau1, tau2]``.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import car_model as cm
from .kernels import psi_excess, psi_numpy

__all__ = [
    "ApproxCoefficients",
    "ContractSpec",
    "Day",
    "Period",
    "Scheme",
    "Side",
    "approx_coeffs",
    "approx_coeffs_day",
    "approx_coeffs_period",
    "fcdd_approx",
    "fcdd_day",
    "fcdd_period",
    "fhdd_day",
    "fhdd_period",
    "futures_price",
    "period_nodes",
    "psi",
    "psi_excess",
]

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class Side(Enum):
    CDD = "CDD"
    HDD = "HDD"

    @property
    def sign(self):
        return 1.0 if self is Side.CDD else -1.0


class Scheme(Enum):
    EXACT = "exact"
    APPROX_X = "approx_x"
    APPROX_TAYLOR = "approx_taylor"

    @property
    def slope(self):
        """Slope of the linearisation of Psi: 1 for Psi(z) ~ z, 1/2 for the Taylor form."""
        return {Scheme.APPROX_X: 1.0, Scheme.APPROX_TAYLOR: 0.5}[self]


@dataclass(frozen=True)
class Day:
    s: float


@dataclass(frozen=True)
class Period:
    tau1: float
    tau2: float

    def __post_init__(self):
        if not self.tau1 < self.tau2:
            raise ValueError(f"period needs tau1 < tau2, got [{self.tau1}, {self.tau2}]")


@dataclass(frozen=True)
class ContractSpec:
    measurement: Day | Period
    side: Side = Side.CDD
    scheme: Scheme = Scheme.EXACT

    @property
    def first_day(self):
        m = self.measurement
        return m.s if isinstance(m, Day) else m.tau1

    def check_time(self, t):
        if t > self.first_day:
            what = "s" if isinstance(self.measurement, Day) else "tau1"
            raise ValueError(f"pricing time t={t} must not exceed {what}={self.first_day}")


@dataclass(frozen=True)
class ApproxCoefficients:
    """Linearised futures price ``theta_term + a_vec @ x``."""

    theta_term: float
    a_vec: np.ndarray


def psi(x):
    """``Psi(x) = x Phi(x) + phi(x)``; scalars in, floats out."""
    out = psi_numpy(x)
    return float(out) if out.ndim == 0 else out


def _scalar(v):
    v = np.asarray(v)
    return float(v) if v.ndim == 0 else v


def _day_moments(model, seasonal, t, s, x):
    m = cm.m_theta(model, seasonal, t, s, x)
    sig = np.sqrt(cm.sigma_sq(model, t, s))
    return m, sig


def _day_price(model, seasonal, t, s, x, side):
    t = float(t)
    s = np.asarray(s, dtype=np.float64)
    if np.any(s < t):
        raise ValueError("day futures require t <= s")
    m, sig = _day_moments(model, seasonal, t, s, x)
    gap = side.sign * (m - model.c)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sig > 0, gap / np.where(sig > 0, sig, 1.0), 0.0)
    # Sigma = 0 at s = t: the continuous limit max(gap, 0)
    price = np.where(sig > 0, sig * psi_numpy(z), np.maximum(gap, 0.0))
    return _scalar(price)


def fcdd_day(model, seasonal, t, s, x):
    """CDD futures price for measurement day ``s`` (degF days); ``s`` may be an array."""
    return _day_price(model, seasonal, t, s, x, Side.CDD)


def fhdd_day(model, seasonal, t, s, x):
    """HDD futures price for measurement day ``s``."""
    return _day_price(model, seasonal, t, s, x, Side.HDD)


def period_nodes(tau1, tau2, panels_per_day=1, order=4):
    """Composite Gauss-Legendre nodes and weights on ``[tau1, tau2]``."""
    if not tau1 < tau2:
        raise ValueError("period needs tau1 < tau2")
    n_panels = max(1, math.ceil((tau2 - tau1) * panels_per_day - 1e-9))
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(tau1, tau2, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def _period_price(model, seasonal, t, tau1, tau2, x, side, panels_per_day, order):
    if t > tau1:
        raise ValueError("period futures require t <= tau1")
    nodes, weights = period_nodes(tau1, tau2, panels_per_day, order)
    return float(weights @ _day_price(model, seasonal, t, nodes, x, side))


def fcdd_period(model, seasonal, t, tau1, tau2, x, panels_per_day=1, order=4):
    """CDD futures price over ``[tau1, tau2]`` as the integral of day prices."""
    return _period_price(model, seasonal, t, tau1, tau2, x, Side.CDD, panels_per_day, order)


def fhdd_period(model, seasonal, t, tau1, tau2, x, panels_per_day=1, order=4):
    return _period_price(model, seasonal, t, tau1, tau2, x, Side.HDD, panels_per_day, order)


def approx_coeffs_day(model, seasonal, t, s, scheme, side=Side.CDD):
    """Coefficients of the linearised day price.

    With ``k`` the scheme slope (1 or 1/2) and ``g = m_theta(x=0) - c``:
    ``a = sign*k*e_1' exp(A(s-t))`` and ``Theta = sign*k*g`` plus
    ``Sigma/sqrt(2 pi)`` for the Taylor scheme.
    """
    if scheme is Scheme.EXACT:
        raise ValueError("exact scheme has no linear coefficients")
    if s < t:
        raise ValueError("approximate day coefficients require t <= s")
    k = side.sign * scheme.slope
    gap = float(seasonal(s)) - model.c + float(cm.theta_drift(model, t, s, s))
    theta_term = k * gap
    if scheme is Scheme.APPROX_TAYLOR:
        theta_term += INV_SQRT_2PI * math.sqrt(float(cm.sigma_sq(model, t, s)))
    return ApproxCoefficients(theta_term, k * cm.f_vector(model, s - t))


def _a_period(model, t, tau1, tau2):
    # int_{tau1}^{tau2} e_1' exp(A(s-t)) ds, exactly, via the eigen-expansion
    lam = model.eigenvalues
    growth = (np.exp(lam * (tau2 - t)) - np.exp(lam * (tau1 - t))) / lam
    return (growth @ model._W[0]).real


def approx_coeffs_period(model, seasonal, t, tau1, tau2, scheme, side=Side.CDD, panels_per_day=1, order=4):
    """Period integrals of the day coefficients."""
    if scheme is Scheme.EXACT:
        raise ValueError("exact scheme has no linear coefficients")
    if not t <= tau1 < tau2:
        raise ValueError("approximate period coefficients require t <= tau1 < tau2")
    k = side.sign * scheme.slope
    gap = float(seasonal.integral(tau1, tau2)) - model.c * (tau2 - tau1)
    needs_nodes = not model.theta.is_zero or scheme is Scheme.APPROX_TAYLOR
    if needs_nodes:
        nodes, weights = period_nodes(tau1, tau2, panels_per_day, order)
    if not model.theta.is_zero:
        gap += weights @ cm.theta_drift(model, t, nodes, nodes)
    theta_term = k * gap
    if scheme is Scheme.APPROX_TAYLOR:
        theta_term += INV_SQRT_2PI * (weights @ np.sqrt(cm.sigma_sq(model, t, nodes)))
    return ApproxCoefficients(float(theta_term), k * _a_period(model, t, tau1, tau2))


def approx_coeffs(model, seasonal, contract, t, scheme=None):
    scheme = contract.scheme if scheme is None else scheme
    m = contract.measurement
    if isinstance(m, Day):
        return approx_coeffs_day(model, seasonal, t, m.s, scheme, contract.side)
    return approx_coeffs_period(model, seasonal, t, m.tau1, m.tau2, scheme, contract.side)


def fcdd_approx(coeffs, x):
    """Linearised price ``Theta + a . x`` (affine in the state)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1:] != coeffs.a_vec.shape:
        raise ValueError(f"state of shape {x.shape} does not match coefficients of length {coeffs.a_vec.size}")
    return _scalar(coeffs.theta_term + x @ coeffs.a_vec)


def futures_price(model, seasonal, contract, t, x):
    """Price any :class:`ContractSpec` at time ``t`` and state ``x``."""
    contract.check_time(t)
    if contract.scheme is not Scheme.EXACT:
        return fcdd_approx(approx_coeffs(model, seasonal, contract, t), x)
    m = contract.measurement
    if isinstance(m, Day):
        return _day_price(model, seasonal, t, m.s, x, contract.side)
    return _period_price(model, seasonal, t, m.tau1, m.tau2, x, contract.side, 1, 4)

