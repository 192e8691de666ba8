"""CAR(p) state dynamics.

The deseasonalised temperature is the first coordinate of a p-dimensional
Ornstein-Uhlenbeck process ``dX = A X dt + sigma(t) e_p dB`` with ``A`` in
companion form. Time is measured in days.

Because ``A`` has distinct eigenvalues, ``e_r' exp(A v) e_c`` is an
exponential sum ``Re(sum_k W[r, k, c] exp(lam_k v))``; every integral below is
a weighted integral of such sums and goes through :func:`kernels.gk_expsum`.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import kernels, rng

__all__ = [
    "CarModel",
    "ModelError",
    "PiecewiseConstant",
    "StationarityError",
    "as_state",
    "conditional_cov",
    "conditional_mean",
    "f_kernel",
    "lag_integral",
    "lagged_variance",
    "period_kernel_coef",
    "f_vector",
    "m_theta",
    "mat_exp",
    "sigma_sq",
    "simulate_state",
    "theta_drift",
]

EIG_REAL_BOUND = -1e-12
EIG_MIN_GAP = 1e-9
BACKEND_TOL = 1e-10
_BACKEND_PROBES = (0.1, 1.0, 5.0, 20.0)


class ModelError(ValueError):
    """Invalid model parameters."""


class StationarityError(ModelError):
    """Drift matrix violates the distinct, strictly-stable eigenvalue requirement."""


@dataclass(frozen=True)
class PiecewiseConstant:
    """Right-continuous step function of time.

    ``values[0]`` applies before ``breakpoints[0]``, ``values[j]`` on
    ``[breakpoints[j-1], breakpoints[j])`` and ``values[-1]`` afterwards.
    """

    breakpoints: tuple = ()
    values: tuple = (0.0,)

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        if len(vals) != len(bp) + 1:
            raise ModelError("piecewise function needs len(values) == len(breakpoints) + 1")
        if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise ModelError("breakpoints must be strictly increasing")
        if not all(np.isfinite(bp)) or not all(np.isfinite(vals)):
            raise ModelError("piecewise function must be finite")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, value):
        return cls((), (float(value),))

    @classmethod
    def coerce(cls, obj):
        if isinstance(obj, cls):
            return obj
        if np.isscalar(obj):
            return cls.constant(obj)
        raise TypeError(f"cannot interpret {obj!r} as a piecewise-constant function")

    @property
    def is_constant(self):
        return not self.breakpoints

    @property
    def is_zero(self):
        return all(v == 0.0 for v in self.values)

    def __call__(self, t):
        idx = np.searchsorted(self.breakpoints, t, side="right")
        return np.asarray(self.values)[idx]

    def segments(self, lo, hi):
        """Pieces ``(a, b, value)`` covering ``[lo, hi]``."""
        if hi <= lo:
            return []
        cuts = [b for b in self.breakpoints if lo < b < hi]
        edges = [lo, *cuts, hi]
        return [(a, b, float(self(0.5 * (a + b)))) for a, b in zip(edges, edges[1:])]


class CarModel:
    """CAR(p) dynamics: companion matrix, volatility, market price of risk, threshold.

    Parameters
    ----------
    A : array_like, shape (p, p)
        Companion matrix: ones on the superdiagonal of rows ``1..p-1``, the
        negated autoregressive coefficients in the last row.
    sigma : float or PiecewiseConstant
        Volatility in degF per sqrt(day); must be positive everywhere.
    theta : float or PiecewiseConstant
        Market price of risk (drift of the pricing measure), default 0.
    c : float
        Degree-day threshold, default 65 (degF).
    """

    def __init__(self, A, sigma=1.0, theta=0.0, c=65.0):
        A = np.array(A, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
            raise ModelError(f"A must be a square matrix, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ModelError("A must be finite")
        p = A.shape[0]
        expected = np.eye(p, k=1)[:-1]
        if not np.array_equal(A[:-1], expected):
            raise ModelError("A must be in companion form (rows 1..p-1 = shifted identity)")
        self.A = A
        self.A.setflags(write=False)
        self.sigma = PiecewiseConstant.coerce(sigma)
        self.theta = PiecewiseConstant.coerce(theta)
        self.c = float(c)
        if min(self.sigma.values) <= 0.0:
            raise ModelError("sigma must be strictly positive")
        if not np.isfinite(self.c):
            raise ModelError("threshold c must be finite")

        lam, V = np.linalg.eig(A)
        if np.any(lam.real >= EIG_REAL_BOUND):
            raise StationarityError(
                "stationarity invariant violated: eigenvalues of A must have strictly negative "
                f"real part, got {np.array2string(lam, precision=6)}"
            )
        if p > 1:
            gaps = np.abs(lam[:, None] - lam[None, :])[np.triu_indices(p, 1)]
            if gaps.min() < EIG_MIN_GAP:
                raise StationarityError("eigenvalues of A must be distinct")
        order = np.lexsort((lam.imag, lam.real))
        self.eigenvalues = lam[order]
        self._V = V[:, order]
        self._Vinv = np.linalg.inv(self._V)
        # W[r, k, c] = V[r, k] Vinv[k, c]:  e_r' exp(Av) e_c = Re sum_k W[r,k,c] exp(lam_k v)
        self._W = self._V[:, :, None] * self._Vinv[None, :, :]

        for u in _BACKEND_PROBES:
            eig = self._expm_eig(u)
            pade = scipy.linalg.expm(A * u)
            if np.max(np.abs(eig - pade)) > BACKEND_TOL * max(1.0, np.max(np.abs(pade))):
                raise ModelError(f"matrix exponential backends disagree at u={u}; A is ill-conditioned")

    @classmethod
    def from_last_row(cls, row, sigma=1.0, theta=0.0, c=65.0):
        """Build the companion matrix from its last row ``(-alpha_p, ..., -alpha_1)``."""
        row = np.asarray(row, dtype=np.float64).ravel()
        p = row.size
        A = np.eye(p, k=1)
        A[-1] = row
        return cls(A, sigma=sigma, theta=theta, c=c)

    @property
    def p(self):
        return self.A.shape[0]

    def _expm_eig(self, u):
        return ((self._V * np.exp(self.eigenvalues * u)) @ self._Vinv).real

    def coef(self, row, col):
        """Exponential-sum coefficients of ``e_row' exp(Av) e_col`` (0-based)."""
        return self._W[row, :, col]

    def __repr__(self):
        return f"CarModel(p={self.p}, last_row={self.A[-1].tolist()}, sigma={self.sigma}, theta={self.theta}, c={self.c})"


def as_state(model, x):
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1:] != (model.p,):
        raise ValueError(f"state vector must have length p={model.p}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("state vector must be finite")
    return x


def _check_lag(u):
    u = np.asarray(u, dtype=np.float64)
    if not np.all(np.isfinite(u)):
        raise ValueError("time argument must be finite")
    if np.any(u < 0):
        raise ValueError("time argument must be non-negative")
    return u


def mat_exp(model, u, backend="eig"):
    """``exp(A u)`` for scalar ``u >= 0``; ``backend`` is ``"eig"`` or ``"pade"``."""
    u = float(_check_lag(u))
    if backend == "eig":
        return model._expm_eig(u)
    if backend == "pade":
        return scipy.linalg.expm(model.A * u)
    raise ValueError(f"unknown backend {backend!r}")


def f_vector(model, u):
    """Row ``e_1' exp(A u)``; shape ``u.shape + (p,)``."""
    u = _check_lag(u)
    W0 = model._W[0]  # (k, c)
    return (np.exp(u[..., None] * model.eigenvalues) @ W0).real


def f_kernel(model, u, i):
    """``f_i(u) = e_1' exp(A u) e_i`` with 1-based ``i``."""
    if not (1 <= i <= model.p):
        raise IndexError(f"component index {i} outside 1..{model.p}")
    return f_vector(model, u)[..., i - 1]


def lag_integral(model, coef_a, coef_b, t, upto, anchor, fn, power):
    """``int_t^upto fn(u)^power * ga(anchor - u) [* gb(anchor - u)] du``, broadcast.

    ``coef_b is None`` selects the linear (single-sum) integrand.
    """
    t, upto, anchor = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (t, upto, anchor)))
    shape = t.shape
    t, upto, anchor = t.ravel(), upto.ravel(), anchor.ravel()
    if np.any(upto < t):
        raise ValueError("integration requires t <= upper limit")
    if fn.is_constant:
        lo, hi, owner = anchor - upto, anchor - t, np.arange(t.size)
        weight = np.full(t.size, fn.values[0] ** power)
    else:
        rows = [
            (anchor[e] - b, anchor[e] - a, v**power, e)
            for e in range(t.size)
            for a, b, v in fn.segments(t[e], upto[e])
        ]
        if not rows:
            return np.zeros(shape)
        lo, hi, weight, owner = (np.array(col) for col in zip(*rows))
        owner = owner.astype(np.int64)
    squared = coef_b is not None
    vals, _ = kernels.gk_expsum(coef_a, coef_b if squared else None, model.eigenvalues, lo, hi, squared=squared)
    out = np.zeros(t.size)
    np.add.at(out, owner, weight * vals)
    return out.reshape(shape)


def lagged_variance(model, t, upto, s):
    """``int_t^upto (e_1' exp(A(s-u)) e_p)^2 sigma^2(u) du`` for ``upto <= s``."""
    g = model.coef(0, model.p - 1)
    return lag_integral(model, g, g, t, upto, s, model.sigma, 2)


def sigma_sq(model, t, s):
    """Variance ``Sigma^2(t, s) = int_t^s (e_1' exp(A(s-u)) e_p)^2 sigma^2(u) du`` (degF^2)."""
    if np.any(np.asarray(t) > np.asarray(s)):
        raise ValueError("sigma_sq requires t <= s")
    return lagged_variance(model, t, s, s)


def period_kernel_coef(model, tau1, tau2):
    """Coefficients ``b`` with ``int_{tau1}^{tau2} e_1' exp(A(s-u)) e_p ds = Re sum_k b_k exp(lam_k (tau1-u))``."""
    lam = model.eigenvalues
    return model.coef(0, model.p - 1) * (np.exp(lam * (tau2 - tau1)) - 1.0) / lam


def theta_drift(model, t, upto, s):
    """``int_t^upto theta(u) e_1' exp(A(s-u)) e_p du``; zero when theta vanishes."""
    if model.theta.is_zero:
        return np.zeros(np.broadcast(np.asarray(t), np.asarray(upto), np.asarray(s)).shape)
    return lag_integral(model, model.coef(0, model.p - 1), None, t, upto, s, model.theta, 1)


def m_theta(model, seasonal, t, s, x):
    """Conditional mean of ``T(s)`` under the pricing measure given ``X(t) = x``."""
    t = np.asarray(t, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    if np.any(t > s):
        raise ValueError("m_theta requires t <= s")
    x = as_state(model, x)
    return seasonal(s) + f_vector(model, s - t) @ x + theta_drift(model, t, s, s)


def conditional_mean(model, t, tau, x):
    """``E[X(tau) | X(t) = x]`` (vector of length p)."""
    if tau < t:
        raise ValueError("conditional_mean requires t <= tau")
    x = as_state(model, x)
    mean = mat_exp(model, tau - t) @ x
    if not model.theta.is_zero:
        for i in range(model.p):
            mean[i] += lag_integral(model, model.coef(i, model.p - 1), None, t, tau, tau, model.theta, 1)
    return mean


def conditional_cov(model, t, tau):
    """``Cov[X(tau) | X(t)] = int_t^tau sigma^2 exp(A(tau-u)) e_p e_p' exp(A'(tau-u)) du``."""
    if tau < t:
        raise ValueError("conditional_cov requires t <= tau")
    p = model.p
    cov = np.empty((p, p))
    for i in range(p):
        for j in range(i, p):
            cov[i, j] = cov[j, i] = lag_integral(
                model, model.coef(i, p - 1), model.coef(j, p - 1), t, tau, tau, model.sigma, 2
            )
    return cov


def _cov_factor(cov):
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        w, U = np.linalg.eigh(cov)
        return U * np.sqrt(np.clip(w, 0.0, None))


def simulate_state(model, t, tau, x, n_paths, seed, start=0):
    """Exact draws of ``X(tau)`` given ``X(t) = x``; shape ``(n_paths, p)``.

    The conditional law is Gaussian, so no time stepping is involved. Path
    ``k`` uses counter block ``start + k`` of the seeded stream.
    """
    if tau < t:
        raise ValueError("simulate_state requires t <= tau")
    if n_paths < 1:
        raise ValueError("n_paths must be at least 1")
    x = as_state(model, x)
    if tau == t:
        return np.tile(x, (n_paths, 1))
    mean = conditional_mean(model, t, tau, x)
    L = _cov_factor(conditional_cov(model, t, tau))
    xi = rng.standard_normals(seed, n_paths, model.p, start)
    return mean + xi @ L.T
