"""Partial derivatives of futures prices with respect to the state vector.

For the exact day price the derivative in ``x_i`` is ``Phi(z) f_i(s - t)``
with ``z = (m_theta - c) / Sigma``; the linearised prices have the constant
gradient ``a``. Period Greeks integrate the day Greeks over the period.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import car_model as cm
from .pricing import ApproxCoefficients, Side, period_nodes

__all__ = [
    "RelativeErrorReport",
    "SensitivityVector",
    "dapprox",
    "day_greeks",
    "dfcdd_day",
    "dfcdd_period",
    "dfhdd_day",
    "dfhdd_period",
    "fd_gradient",
    "relative_error_report",
]

# relative errors are reported only where |exact| exceeds this
EXACT_FLOOR = 1e-12


@dataclass(frozen=True)
class SensitivityVector:
    """``d[i] = d price / d x_{i+1}`` plus free-form metadata."""

    d: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.float64)
        if d.ndim != 1:
            raise ValueError("sensitivity vector must be one-dimensional")
        if not np.all(np.isfinite(d)):
            raise ValueError("sensitivity vector has non-finite entries")
        object.__setattr__(self, "d", d)

    def __len__(self):
        return self.d.size

    def __getitem__(self, i):
        return self.d[i]

    def __array__(self, dtype=None, copy=None):
        return self.d if dtype is None else self.d.astype(dtype)


def day_greeks(model, seasonal, t, s, x, side=Side.CDD):
    """Exact day Greeks on an array of measurement days; shape ``s.shape + (p,)``.

    At ``s = t`` (zero variance) the factor ``Phi(z)`` becomes the indicator
    of ``gap > 0``, with the value 1/2 when the gap is exactly zero.
    """
    t = float(t)
    s = np.asarray(s, dtype=np.float64)
    if np.any(s < t):
        raise ValueError("day Greeks require t <= s")
    x = cm.as_state(model, x)
    gap = side.sign * (cm.m_theta(model, seasonal, t, s, x) - model.c)
    sig = np.sqrt(cm.sigma_sq(model, t, s))
    with np.errstate(divide="ignore", invalid="ignore"):
        weight = np.where(sig > 0, special.ndtr(gap / np.where(sig > 0, sig, 1.0)), 0.5 * (1.0 + np.sign(gap)))
    return side.sign * weight[..., None] * cm.f_vector(model, s - t)


def dfcdd_day(model, seasonal, t, s, x):
    d = day_greeks(model, seasonal, t, s, x, Side.CDD)
    return SensitivityVector(d, {"measurement": ("day", float(s)), "t": float(t), "side": "CDD", "scheme": "exact"})


def dfhdd_day(model, seasonal, t, s, x):
    d = day_greeks(model, seasonal, t, s, x, Side.HDD)
    return SensitivityVector(d, {"measurement": ("day", float(s)), "t": float(t), "side": "HDD", "scheme": "exact"})


def _period_greeks(model, seasonal, t, tau1, tau2, x, side, panels_per_day, order):
    if not t <= tau1 < tau2:
        raise ValueError("period Greeks require t <= tau1 < tau2")
    nodes, weights = period_nodes(tau1, tau2, panels_per_day, order)
    d = weights @ day_greeks(model, seasonal, t, nodes, x, side)
    meta = {"measurement": ("period", float(tau1), float(tau2)), "t": float(t), "side": side.value, "scheme": "exact"}
    return SensitivityVector(d, meta)


def dfcdd_period(model, seasonal, t, tau1, tau2, x, panels_per_day=1, order=4):
    return _period_greeks(model, seasonal, t, tau1, tau2, x, Side.CDD, panels_per_day, order)


def dfhdd_period(model, seasonal, t, tau1, tau2, x, panels_per_day=1, order=4):
    return _period_greeks(model, seasonal, t, tau1, tau2, x, Side.HDD, panels_per_day, order)


def dapprox(coeffs: ApproxCoefficients):
    """Gradient of a linearised price: the coefficient row itself, whatever the state."""
    return SensitivityVector(np.array(coeffs.a_vec, dtype=np.float64), {"scheme": "approx"})


def fd_gradient(price_fn, x, h=1e-5):
    """Central-difference gradient of ``price_fn`` at ``x``."""
    if not h > 0:
        raise ValueError("step h must be positive")
    x = np.asarray(x, dtype=np.float64)
    grad = np.empty(x.size)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        up, down = float(price_fn(x + step)), float(price_fn(x - step))
        if not (np.isfinite(up) and np.isfinite(down)):
            raise ArithmeticError(f"non-finite price while bumping component {i + 1}")
        grad[i] = (up - down) / (2.0 * h)
    return SensitivityVector(grad, {"method": "central_fd", "h": h})


@dataclass(frozen=True)
class RelativeErrorReport:
    """Per-component ``100 |approx - exact| / |exact|``.

    Components whose exact value is below ``EXACT_FLOOR`` in magnitude are
    flagged in ``undefined``; their ``percent`` entry is NaN and only
    ``absolute`` is meaningful.
    """

    percent: np.ndarray
    absolute: np.ndarray
    undefined: np.ndarray

    @property
    def max_percent(self):
        defined = self.percent[~self.undefined]
        return float(defined.max()) if defined.size else float("nan")


def relative_error_report(exact, approx, floor=EXACT_FLOOR):
    e = np.asarray(exact, dtype=np.float64)
    a = np.asarray(approx, dtype=np.float64)
    if e.shape != a.shape:
        raise ValueError(f"length mismatch: {e.shape} vs {a.shape}")
    absolute = np.abs(a - e)
    undefined = np.abs(e) < floor
    with np.errstate(divide="ignore", invalid="ignore"):
        percent = np.where(undefined, np.nan, 100.0 * absolute / np.abs(e))
    return RelativeErrorReport(percent, absolute, undefined)
