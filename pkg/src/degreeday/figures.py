"""Tables behind the sensitivity figures.

Each function returns ``(header, rows)`` built from library calls only; the
command-line runner just writes them out. Maturity grids are integer lags
``s - t`` (or ``tau1 - t`` for periods) in days.
"""

import numpy as np

from .options import OptionSpec, call_approx_greeks, call_greek_density_mc
from .pricing import Scheme, Side, approx_coeffs_day, approx_coeffs_period, fcdd_approx, fcdd_day
from .sensitivity import dapprox, day_greeks, dfcdd_period, relative_error_report

__all__ = [
    "FIGURES",
    "approx_call_greeks_curve",
    "approx_day_greeks_curve",
    "approx_period_greeks_curve",
    "density_call_greeks_curve",
    "exact_day_greeks_curve",
    "exact_period_greeks_curve",
    "forward_curve",
    "relative_error_curve",
]


def _cols(prefix, p):
    return [f"{prefix}_x{i}" for i in range(1, p + 1)]


def approx_day_greeks_curve(model, seasonal, s, lags, scheme=Scheme.APPROX_X):
    rows = [[lag, *dapprox(approx_coeffs_day(model, seasonal, s - lag, s, scheme)).d] for lag in lags]
    return ["s_minus_t", *_cols("d", model.p)], rows


def exact_day_greeks_curve(model, seasonal, s, lags, x):
    lags = np.asarray(lags, dtype=float)
    greeks = np.array([day_greeks(model, seasonal, s - lag, s, x, Side.CDD) for lag in lags])
    return ["s_minus_t", *_cols("d", model.p)], [[int(lag), *g] for lag, g in zip(lags, greeks)]


def relative_error_curve(model, seasonal, s, lags, x, scheme=Scheme.APPROX_X):
    rows = []
    for lag in lags:
        exact = day_greeks(model, seasonal, s - lag, s, x, Side.CDD)
        approx = dapprox(approx_coeffs_day(model, seasonal, s - lag, s, scheme)).d
        rows.append([lag, *relative_error_report(exact, approx).percent])
    return ["s_minus_t", *_cols("relerr_pct", model.p)], rows


def forward_curve(model, seasonal, s, lags, x):
    rows = []
    for lag in lags:
        t = s - lag
        rows.append(
            [
                lag,
                fcdd_day(model, seasonal, t, s, x),
                fcdd_approx(approx_coeffs_day(model, seasonal, t, s, Scheme.APPROX_X), x),
                fcdd_approx(approx_coeffs_day(model, seasonal, t, s, Scheme.APPROX_TAYLOR), x),
            ]
        )
    return ["s_minus_t", "exact", "approx_x", "approx_taylor"], rows


def density_call_greeks_curve(model, seasonal, opt: OptionSpec, lags, x, n_paths, seed):
    """Likelihood-ratio call Greeks against ``s - t``; lags with ``t >= tau`` are skipped."""
    s = opt.underlying.first_day
    rows = []
    for lag in lags:
        t = s - lag
        if t >= opt.tau:
            continue
        g, se = call_greek_density_mc(model, seasonal, t, opt, x, n_paths, seed)
        rows.append([lag, *g.d, *se])
    return ["s_minus_t", *_cols("d", model.p), *_cols("se", model.p)], rows


def approx_call_greeks_curve(model, seasonal, opt: OptionSpec, lags, x, scheme=Scheme.APPROX_X):
    s = opt.underlying.first_day
    rows = []
    for lag in lags:
        t = s - lag
        if t > opt.tau:
            continue
        rows.append([lag, *call_approx_greeks(model, seasonal, t, opt, x, scheme).d])
    return ["s_minus_t", *_cols("d", model.p)], rows


def approx_period_greeks_curve(model, seasonal, tau1, tau2, lags, scheme=Scheme.APPROX_X):
    rows = [[lag, *approx_coeffs_period(model, seasonal, tau1 - lag, tau1, tau2, scheme).a_vec] for lag in lags]
    return ["tau1_minus_t", *_cols("d", model.p)], rows


def exact_period_greeks_curve(model, seasonal, tau1, tau2, lags, x):
    rows = [[lag, *dfcdd_period(model, seasonal, tau1 - lag, tau1, tau2, x).d] for lag in lags]
    return ["tau1_minus_t", *_cols("d", model.p)], rows


def _unit(model, k):
    x = np.zeros(model.p)
    if k:
        x[k - 1] = 1.0
    return x


# name -> (kind of contract needed, builder(scenario-free args))
FIGURES = {
    "fig3": ("day", lambda m, sf, c, lags, **kw: approx_day_greeks_curve(m, sf, c, lags, kw["scheme"])),
    "fig4": ("day", lambda m, sf, c, lags, **kw: exact_day_greeks_curve(m, sf, c, lags, _unit(m, 0))),
    "fig5": ("day", lambda m, sf, c, lags, **kw: relative_error_curve(m, sf, c, lags, _unit(m, 0), kw["scheme"])),
    "fig6": ("day", lambda m, sf, c, lags, **kw: relative_error_curve(m, sf, c, lags, _unit(m, 1), kw["scheme"])),
    "fig7": ("forward", lambda m, sf, c, lags, **kw: forward_curve(m, sf, c, lags, kw["state"])),
    "fig8": (
        "option",
        lambda m, sf, o, lags, **kw: density_call_greeks_curve(m, sf, o, lags, _unit(m, 0), kw["paths"], kw["seed"]),
    ),
    "fig9": ("option", lambda m, sf, o, lags, **kw: approx_call_greeks_curve(m, sf, o, lags, _unit(m, 0), kw["scheme"])),
    "fig10": (
        "option",
        lambda m, sf, o, lags, **kw: density_call_greeks_curve(m, sf, o, lags, _unit(m, 1), kw["paths"], kw["seed"]),
    ),
    "fig11": ("option", lambda m, sf, o, lags, **kw: approx_call_greeks_curve(m, sf, o, lags, _unit(m, 1), kw["scheme"])),
    "fig12": ("period", lambda m, sf, p, lags, **kw: approx_period_greeks_curve(m, sf, p.tau1, p.tau2, lags, kw["scheme"])),
    "fig13": ("period", lambda m, sf, p, lags, **kw: exact_period_greeks_curve(m, sf, p.tau1, p.tau2, lags, _unit(m, 0))),
    "fig14": ("period", lambda m, sf, p, lags, **kw: exact_period_greeks_curve(m, sf, p.tau1, p.tau2, lags, _unit(m, 1))),
}
