"""Scenario documents (TOML) for the command-line runner.

A scenario names a model, a seasonal curve, an evaluation date and state,
contracts, options, grids and Monte Carlo settings. Dates are ISO-8601 and
become day offsets from the scenario's ``epoch``. See
``data/ny2011.toml`` for an annotated example.

Loading collects every problem before giving up, so a user sees the full
list of field paths to fix in one go.
"""

import math
from importlib import resources
from dataclasses import dataclass, field
from datetime import date

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .car_model import CarModel, ModelError, PiecewiseConstant, StationarityError
from .options import OptionSpec
from .pricing import ContractSpec, Day, Period, Scheme, Side
from .seasonal import SeasonalFunction, reference_profile, state_from_temps

__all__ = ["Diagnostic", "Scenario", "ScenarioError", "fixture_path", "load_scenario", "validate_file"]


@dataclass(frozen=True)
class Diagnostic:
    path: str
    message: str
    numeric: bool = False

    def __str__(self):
        return f"{self.path}: {self.message}"


class ScenarioError(Exception):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(map(str, self.diagnostics)))

    @property
    def numeric(self):
        return any(d.numeric for d in self.diagnostics)


@dataclass
class Scenario:
    epoch: date
    model: CarModel
    seasonal: SeasonalFunction
    t: float
    state: np.ndarray
    contracts: dict
    options: dict
    max_lag: int = 50
    forward_lags: tuple = (1, 50)
    figure_scheme: Scheme = Scheme.APPROX_X
    paths: int = 100_000
    seed: int = 0
    out_dir: str = "out"
    source: dict = field(default_factory=dict, repr=False)

    def day(self, d):
        return float((d - self.epoch).days)


class _Collector:
    def __init__(self):
        self.diagnostics = []

    def add(self, path, message, numeric=False):
        self.diagnostics.append(Diagnostic(path, message, numeric))

    def date(self, raw, path):
        if isinstance(raw, date):
            return raw
        try:
            return date.fromisoformat(str(raw))
        except ValueError:
            self.add(path, f"not an ISO-8601 date: {raw!r}")
            return None

    def number(self, raw, path, positive=False):
        if isinstance(raw, bool) or not isinstance(raw, (int, float)) or not math.isfinite(raw):
            self.add(path, f"expected a finite number, got {raw!r}")
            return None
        if positive and raw <= 0:
            self.add(path, f"must be positive, got {raw!r}")
            return None
        return float(raw)


def _piecewise(col, raw, path, epoch, positive):
    if isinstance(raw, dict):
        bps = [col.date(b, f"{path}.breakpoints[{i}]") if isinstance(b, str) else b for i, b in enumerate(raw.get("breakpoints", []))]
        bps = [float((b - epoch).days) if isinstance(b, date) else b for b in bps]
        values = [col.number(v, f"{path}.values[{i}]", positive) for i, v in enumerate(raw.get("values", []))]
        if None in bps or None in values:
            return None
        try:
            return PiecewiseConstant(tuple(bps), tuple(values))
        except ModelError as exc:
            col.add(path, str(exc))
            return None
    value = col.number(raw, path, positive)
    return None if value is None else PiecewiseConstant.constant(value)


def _model(col, raw, epoch):
    if not isinstance(raw, dict):
        col.add("model", "missing [model] section")
        return None
    if "A" in raw:
        A = raw["A"]
        try:
            A = np.array(A, dtype=float)
        except (TypeError, ValueError):
            col.add("model.A", "must be a list of equal-length numeric rows")
            return None
    elif "last_row" in raw:
        try:
            row = np.array(raw["last_row"], dtype=float).ravel()
        except (TypeError, ValueError):
            col.add("model.last_row", "must be a list of numbers")
            return None
        A = np.eye(row.size, k=1)
        A[-1] = row
    else:
        col.add("model", "needs either A (full rows) or last_row (companion coefficients)")
        return None
    sigma = _piecewise(col, raw.get("sigma", 1.0), "model.sigma", epoch, positive=True)
    theta = _piecewise(col, raw.get("theta", 0.0), "model.theta", epoch, positive=False)
    c = col.number(raw.get("c", 65.0), "model.c")
    if sigma is None or theta is None or c is None:
        return None
    try:
        return CarModel(A, sigma=sigma, theta=theta, c=c)
    except StationarityError as exc:
        col.add("model.A", str(exc), numeric=True)
    except ModelError as exc:
        col.add("model.A", str(exc))
    return None


def _seasonal(col, raw, epoch):
    if not isinstance(raw, dict):
        col.add("seasonal", "missing [seasonal] section")
        return None
    if raw.get("reference", False):
        peak = raw.get("peak")
        peak = col.date(peak, "seasonal.peak") if peak is not None else None
        return reference_profile(epoch, peak)
    a0 = col.number(raw.get("a0"), "seasonal.a0")
    trend = col.number(raw.get("trend", 0.0), "seasonal.trend")
    harmonics = []
    for i, h in enumerate(raw.get("harmonics", [])):
        p = f"seasonal.harmonics[{i}]"
        if not isinstance(h, dict):
            col.add(p, "expected a table with amplitude, phase, period")
            continue
        vals = (
            col.number(h.get("amplitude"), f"{p}.amplitude"),
            col.number(h.get("phase", 0.0), f"{p}.phase"),
            col.number(h.get("period"), f"{p}.period", positive=True),
        )
        if None not in vals:
            harmonics.append(vals)
    if a0 is None or trend is None:
        return None
    return SeasonalFunction(a0, trend, tuple(harmonics))


def _contracts(col, raw, epoch):
    contracts = {}
    if not isinstance(raw, list) or not raw:
        col.add("contracts", "need at least one [[contracts]] entry")
        return contracts
    for i, c in enumerate(raw):
        p = f"contracts[{i}]"
        name = str(c.get("name", f"contract{i}"))
        if name in contracts:
            col.add(f"{p}.name", f"duplicate contract name {name!r}")
        try:
            side = Side(str(c.get("side", "CDD")).upper())
        except ValueError:
            col.add(f"{p}.side", "must be CDD or HDD")
            continue
        try:
            scheme = Scheme(str(c.get("scheme", "exact")).lower())
        except ValueError:
            col.add(f"{p}.scheme", "must be exact, approx_x or approx_taylor")
            continue
        if ("day" in c) == ("period" in c):
            col.add(p, "specify exactly one of day or period")
            continue
        if "day" in c:
            d = col.date(c["day"], f"{p}.day")
            if d is None:
                continue
            measurement = Day(float((d - epoch).days))
        else:
            per = c["period"]
            if not isinstance(per, dict):
                col.add(f"{p}.period", "expected {start = ..., end = ...} (end inclusive)")
                continue
            start = col.date(per.get("start"), f"{p}.period.start")
            end = col.date(per.get("end"), f"{p}.period.end")
            if start is None or end is None:
                continue
            if end < start:
                col.add(f"{p}.period", f"end {end} precedes start {start} (tau2 <= tau1)")
                continue
            # inclusive end date: the index accumulates through the end of that day
            measurement = Period(float((start - epoch).days), float((end - epoch).days + 1))
        contracts[name] = ContractSpec(measurement, side, scheme)
    return contracts


def _options(col, raw, epoch, contracts):
    options = {}
    for i, o in enumerate(raw or []):
        p = f"options[{i}]"
        name = str(o.get("name", f"option{i}"))
        ref = o.get("contract")
        if ref not in contracts:
            col.add(f"{p}.contract", f"unknown contract {ref!r}")
            continue
        K = col.number(o.get("strike"), f"{p}.strike")
        r = col.number(o.get("rate", 1e-4), f"{p}.rate", positive=True)
        ex = col.date(o.get("exercise"), f"{p}.exercise")
        if None in (K, r, ex):
            continue
        underlying = contracts[ref]
        exact = o.get("exact", isinstance(underlying.measurement, Day))
        if exact and isinstance(underlying.measurement, Period):
            col.add(
                f"{p}.exact",
                "exact option Greeks are unavailable over a measurement period: the payoff is "
                "path-dependent on the state over the period, so the density approach fails",
            )
            continue
        try:
            options[name] = (OptionSpec(K, float((ex - epoch).days), r, underlying), bool(exact))
        except ValueError as exc:
            col.add(f"{p}.exercise", str(exc))
    return options


def _build(doc):
    col = _Collector()
    epoch = col.date(doc.get("epoch"), "epoch") if "epoch" in doc else None
    if epoch is None:
        if "epoch" not in doc:
            col.add("epoch", "missing scenario epoch (ISO date mapped to day 0)")
        raise ScenarioError(col.diagnostics)

    model = _model(col, doc.get("model"), epoch)
    seasonal = _seasonal(col, doc.get("seasonal"), epoch)
    contracts = _contracts(col, doc.get("contracts"), epoch)
    options = _options(col, doc.get("options"), epoch, contracts)

    ev = doc.get("evaluation", {})
    t = None
    eval_date = col.date(ev.get("date"), "evaluation.date") if "date" in ev else None
    if eval_date is None and "date" not in ev:
        col.add("evaluation.date", "missing evaluation date")
    if eval_date is not None:
        t = float((eval_date - epoch).days)
    state = None
    if "state" in ev and "temps" in ev:
        col.add("evaluation", "give either state or temps, not both")
    elif "temps" in ev:
        temps = ev["temps"]
        if model is not None and model.p != 3:
            col.add("evaluation.temps", "temperature reconstruction is defined for p = 3 only")
        elif seasonal is not None and t is not None:
            try:
                state = state_from_temps(seasonal, temps, t)
            except (TypeError, ValueError) as exc:
                col.add("evaluation.temps", str(exc))
    else:
        try:
            state = np.array(ev.get("state", [0.0] * (model.p if model else 3)), dtype=float).ravel()
        except (TypeError, ValueError):
            col.add("evaluation.state", "must be a list of numbers")
        if state is not None and model is not None and state.size != model.p:
            col.add("evaluation.state", f"length {state.size} does not match model order p={model.p}")
        if state is not None and not np.all(np.isfinite(state)):
            col.add("evaluation.state", "must be finite")

    if t is not None:
        for name, c in contracts.items():
            if t > c.first_day:
                col.add(f"contracts.{name}", "evaluation date is after the (first) measurement day")
        for name, (o, _) in options.items():
            if t > o.tau:
                col.add(f"options.{name}.exercise", "evaluation date is after exercise")

    grid = doc.get("grid", {})
    max_lag = grid.get("max_lag", 50)
    if not isinstance(max_lag, int) or max_lag < 2:
        col.add("grid.max_lag", "must be an integer >= 2")
        max_lag = 50
    fwd = grid.get("forward_lags", [1, max_lag])
    if not (isinstance(fwd, list) and len(fwd) == 2 and all(isinstance(v, int) for v in fwd) and 0 <= fwd[0] <= fwd[1]):
        col.add("grid.forward_lags", "must be [first, last] integer lags with 0 <= first <= last")
        fwd = [1, max_lag]
    try:
        fig_scheme = Scheme(str(grid.get("scheme", "approx_x")))
        if fig_scheme is Scheme.EXACT:
            raise ValueError
    except ValueError:
        col.add("grid.scheme", "must be approx_x or approx_taylor")
        fig_scheme = Scheme.APPROX_X

    mc = doc.get("mc", {})
    paths = mc.get("paths", 100_000)
    seed = mc.get("seed", 0)
    if not isinstance(paths, int) or paths < 2:
        col.add("mc.paths", "must be an integer >= 2")
    if not isinstance(seed, int) or not 0 <= seed < 2**64:
        col.add("mc.seed", "must be an unsigned 64-bit integer")
    out_dir = str(doc.get("output", {}).get("dir", "out"))

    if col.diagnostics:
        raise ScenarioError(col.diagnostics)
    return Scenario(
        epoch=epoch,
        model=model,
        seasonal=seasonal,
        t=t,
        state=state,
        contracts=contracts,
        options=options,
        max_lag=max_lag,
        forward_lags=tuple(fwd),
        figure_scheme=fig_scheme,
        paths=paths,
        seed=seed,
        out_dir=out_dir,
        source=doc,
    )


def _read(path):
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def load_scenario(path):
    """Parse and validate a scenario file; raises :class:`ScenarioError` listing every problem."""
    try:
        doc = _read(path)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError([Diagnostic("<document>", f"TOML syntax error: {exc}")]) from None
    return _build(doc)


def validate_file(path):
    """All diagnostics for ``path``; empty when the scenario is usable.

    Raises ``OSError`` if the file cannot be read.
    """
    try:
        load_scenario(path)
    except ScenarioError as exc:
        return exc.diagnostics
    return []


def fixture_path(name="ny2011.toml"):
    """Filesystem path of a scenario shipped in ``degreeday/data``."""
    return resources.files("degreeday") / "data" / name
