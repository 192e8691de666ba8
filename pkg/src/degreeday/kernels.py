"""Hot numeric kernels with a numba path and a pure-numpy path.

Two kernels dominate runtime:

* ``gk_expsum`` -- adaptive Gauss-Kronrod (7/15) integration of exponential
  sums ``Re(sum_k a_k exp(lam_k v))`` or products of two such sums over many
  intervals at once. Every variance integral, drift integral and volatility
  term in the library reduces to this.
* ``psi_array`` -- the function ``x*Phi(x) + phi(x)`` over Monte Carlo paths
  and quadrature nodes.

Both variants implement the same algorithm. Panel acceptance is purely local
(``err <= abstol * panel_length / interval_length``), so the set of accepted
panels is identical between the depth-first numba loop and the breadth-first
numpy loop; results agree to summation-order rounding.
"""

import math

import numpy as np
from scipy import special

from ._accel import NUMBA_ENABLED, njit

__all__ = [
    "NUMBA_ENABLED",
    "QuadratureError",
    "gk_expsum",
    "gk_expsum_numba",
    "gk_expsum_numpy",
    "psi_array",
    "psi_numba",
    "psi_numpy",
    "psi_excess",
]

DEFAULT_ABSTOL = 1e-10
DEFAULT_MAX_PANELS = 4096

# Kronrod 15-point abscissae on [-1, 1] (non-negative half) and weights.
_XGK = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ]
)
_WGK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
# Gauss 7-point weights on the odd Kronrod nodes 1, 3, 5, 7.
_WG = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)

# Full 15-point node/weight vectors, ordered from -1 to 1.
_NODES15 = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK15 = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
for _j, _w in zip((1, 3, 5), _WG[:3]):
    _WG15[_j] = _w
    _WG15[14 - _j] = _w
_WG15[7] = _WG[3]


class QuadratureError(ArithmeticError):
    """Adaptive quadrature hit its panel cap before meeting the tolerance."""


def _validate(a, b, lam, lo, hi):
    a = np.ascontiguousarray(a, dtype=np.complex128)
    b = np.ascontiguousarray(a if b is None else b, dtype=np.complex128)
    lam = np.ascontiguousarray(lam, dtype=np.complex128)
    lo = np.atleast_1d(np.asarray(lo, dtype=np.float64))
    hi = np.atleast_1d(np.asarray(hi, dtype=np.float64))
    lo, hi = np.broadcast_arrays(lo, hi)
    if np.any(hi < lo):
        raise ValueError("gk_expsum requires lo <= hi")
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("gk_expsum requires finite limits")
    return a, b, lam, np.ascontiguousarray(lo), np.ascontiguousarray(hi)


# ---------------------------------------------------------------------------
# numpy path
# ---------------------------------------------------------------------------


def _expsum_numpy(coef, lam, v):
    return (np.exp(v[..., None] * lam) @ coef).real


def gk_expsum_numpy(a, b, lam, lo, hi, squared, abstol=DEFAULT_ABSTOL, max_panels=DEFAULT_MAX_PANELS):
    """Breadth-first adaptive GK15 over a batch of intervals (numpy only)."""
    a, b, lam, lo, hi = _validate(a, b, lam, lo, hi)
    n = lo.size
    total = hi - lo
    values = np.zeros(n)
    errors = np.zeros(n)
    counts = np.ones(n, dtype=np.int64)

    live = total > 0.0
    pa, pb, owner = lo[live], hi[live], np.nonzero(live)[0]
    while pa.size:
        half = 0.5 * (pb - pa)
        mid = 0.5 * (pa + pb)
        v = mid[:, None] + half[:, None] * _NODES15
        f = _expsum_numpy(a, lam, v)
        if squared:
            f = f * _expsum_numpy(b, lam, v)
        kron = half * (f @ _WK15)
        gauss = half * (f @ _WG15)
        err = np.abs(kron - gauss)
        ok = err <= abstol * (pb - pa) / total[owner]
        np.add.at(values, owner[ok], kron[ok])
        np.add.at(errors, owner[ok], err[ok])

        split = ~ok
        if not split.any():
            break
        np.add.at(counts, owner[split], 1)
        if counts.max() > max_panels:
            raise QuadratureError(f"panel cap {max_panels} exceeded")
        sa, sb, so, sm = pa[split], pb[split], owner[split], mid[split]
        pa = np.concatenate([sa, sm])
        pb = np.concatenate([sm, sb])
        owner = np.concatenate([so, so])
    return values, errors


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------


@njit(cache=True)
def _expsum_point(coef, lam, v):
    acc = 0.0
    for k in range(lam.shape[0]):
        acc += (coef[k] * np.exp(lam[k] * v)).real
    return acc


@njit(cache=True)
def _gk15_panel(a, b, lam, pa, pb, squared, nodes, wk, wg):
    half = 0.5 * (pb - pa)
    mid = 0.5 * (pa + pb)
    kron = 0.0
    gauss = 0.0
    for j in range(15):
        v = mid + half * nodes[j]
        f = _expsum_point(a, lam, v)
        if squared:
            f *= _expsum_point(b, lam, v)
        kron += wk[j] * f
        gauss += wg[j] * f
    return half * kron, abs(half * (kron - gauss))


@njit(cache=True)
def _gk_expsum_loop(a, b, lam, lo, hi, squared, abstol, max_panels, nodes, wk, wg):
    n = lo.shape[0]
    values = np.zeros(n)
    errors = np.zeros(n)
    stack_a = np.empty(max_panels + 1)
    stack_b = np.empty(max_panels + 1)
    for i in range(n):
        total = hi[i] - lo[i]
        if total <= 0.0:
            continue
        top = 0
        stack_a[0] = lo[i]
        stack_b[0] = hi[i]
        created = 1
        while top >= 0:
            pa = stack_a[top]
            pb = stack_b[top]
            top -= 1
            kron, err = _gk15_panel(a, b, lam, pa, pb, squared, nodes, wk, wg)
            if err <= abstol * (pb - pa) / total:
                values[i] += kron
                errors[i] += err
                continue
            created += 1
            if created > max_panels:
                return values, errors, False
            mid = 0.5 * (pa + pb)
            top += 1
            stack_a[top] = mid
            stack_b[top] = pb
            top += 1
            stack_a[top] = pa
            stack_b[top] = mid
    return values, errors, True


def gk_expsum_numba(a, b, lam, lo, hi, squared, abstol=DEFAULT_ABSTOL, max_panels=DEFAULT_MAX_PANELS):
    """Depth-first adaptive GK15 (numba-compiled when available)."""
    a, b, lam, lo, hi = _validate(a, b, lam, lo, hi)
    values, errors, ok = _gk_expsum_loop(
        a, b, lam, lo, hi, bool(squared), float(abstol), int(max_panels), _NODES15, _WK15, _WG15
    )
    if not ok:
        raise QuadratureError(f"panel cap {max_panels} exceeded")
    return values, errors


def gk_expsum(a, b, lam, lo, hi, squared=False, abstol=DEFAULT_ABSTOL, max_panels=DEFAULT_MAX_PANELS):
    """Integrate an exponential sum (or a product of two) over ``[lo, hi]``.

    Parameters
    ----------
    a, b : complex arrays, shape (m,)
        Coefficients of ``Re(sum_k a_k exp(lam_k v))``. ``b`` is only used when
        ``squared`` is true; ``None`` means ``b = a``.
    lam : complex array, shape (m,)
        Exponents (eigenvalues).
    lo, hi : float or array
        Integration limits, broadcast against each other, ``lo <= hi``.
    squared : bool
        Integrate the product of the two sums instead of the first sum.

    Returns
    -------
    values, errors : ndarray
        Integral and accumulated |K15 - G7| estimate per interval.
    """
    impl = gk_expsum_numba if NUMBA_ENABLED else gk_expsum_numpy
    return impl(a, b, lam, lo, hi, squared, abstol, max_panels)


# ---------------------------------------------------------------------------
# Psi(x) = x Phi(x) + phi(x)
# ---------------------------------------------------------------------------

_SQRT_HALF_PI = math.sqrt(0.5 * math.pi)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


_CF_SWITCH = 2.0  # below this the Mills-ratio form loses under one digit


def _cf_depth(y):
    # terms needed for ~1e-15 relative accuracy; convergence speeds up like y**2
    return int(12.0 + 420.0 / (y * y))


_CF_BINS = (2.0, 3.0, 5.0, 8.0, np.inf)


def _tail_cf(y, depth):
    # Psi(-y) = phi(y) R(y) q(y) with R = 1/(y + q), q = 1/(y + 2/(y + 3/(y + ...)));
    # the product form avoids the cancellation in 1 - y R(y)
    t = y
    for k in range(depth, 1, -1):
        t = y + k / t
    q = 1.0 / t
    return _INV_SQRT_2PI * np.exp(-0.5 * y * y) * q / (y + q)


def psi_excess(x):
    """``Psi(x) - max(x, 0)``, computed without cancellation.

    By the symmetry ``Psi(x) - Psi(-x) = x`` this equals ``Psi(-|x|)``. Near
    zero it is written through the Mills ratio; in the tail through a
    continued fraction, so the relative accuracy holds until underflow.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.abs(x).ravel()
    near = np.minimum(y, _CF_SWITCH)
    mills = _SQRT_HALF_PI * special.erfcx(near / math.sqrt(2.0))
    out = _INV_SQRT_2PI * np.exp(-0.5 * near * near) * (1.0 - near * mills)
    for lo, hi in zip(_CF_BINS, _CF_BINS[1:]):
        sel = (y >= lo) & (y < hi)
        if np.any(sel):
            out[sel] = _tail_cf(y[sel], _cf_depth(lo))
    return np.maximum(out, 0.0).reshape(x.shape)


def psi_numpy(x):
    x = np.asarray(x, dtype=np.float64)
    return np.maximum(x, 0.0) + psi_excess(x)


@njit(cache=True)
def _psi_loop(x, out):
    for j in range(x.shape[0]):
        y = abs(x[j])
        if y >= _CF_SWITCH:
            t = y
            for k in range(int(12.0 + 420.0 / (y * y)), 1, -1):
                t = y + k / t
            q = 1.0 / t
            tail = _INV_SQRT_2PI * math.exp(-0.5 * y * y) * q / (y + q)
        else:
            tail = _INV_SQRT_2PI * math.exp(-0.5 * y * y) - y * 0.5 * math.erfc(y / math.sqrt(2.0))
            if tail < 0.0:
                tail = 0.0
        out[j] = tail + (x[j] if x[j] > 0.0 else 0.0)
    return out


def psi_numba(x):
    x = np.asarray(x, dtype=np.float64)
    flat = np.ascontiguousarray(x.ravel())
    return _psi_loop(flat, np.empty_like(flat)).reshape(x.shape)


def psi_array(x):
    """Vectorised ``Psi`` used on Monte Carlo paths; scalar input returns a 0-d array."""
    return psi_numba(x) if NUMBA_ENABLED else psi_numpy(x)
