"""Seasonal mean temperature, daily temperature ingestion, state reconstruction."""

import csv
import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import NamedTuple

import numpy as np

__all__ = [
    "Harmonic",
    "IngestError",
    "SeasonalFunction",
    "TemperatureSeries",
    "ingest_csv",
    "lambda_at",
    "reference_profile",
    "state_from_temps",
    "temps_from_state",
]


class Harmonic(NamedTuple):
    amplitude: float
    phase: float
    period: float


@dataclass(frozen=True)
class SeasonalFunction:
    """``Lambda(t) = a0 + trend*t + sum_j amp_j sin(2 pi t / period_j + phase_j)``, t in days."""

    a0: float
    trend: float = 0.0
    harmonics: tuple = ()

    def __post_init__(self):
        hs = tuple(Harmonic(*map(float, h)) for h in self.harmonics)
        if any(h.period <= 0 for h in hs):
            raise ValueError("harmonic periods must be positive")
        if not all(math.isfinite(v) for v in (self.a0, self.trend, *(x for h in hs for x in h))):
            raise ValueError("seasonal parameters must be finite")
        object.__setattr__(self, "harmonics", hs)

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        out = self.a0 + self.trend * t
        for h in self.harmonics:
            out = out + h.amplitude * np.sin(2.0 * np.pi * t / h.period + h.phase)
        return out

    def integral(self, a, b):
        """Closed-form ``int_a^b Lambda(s) ds``."""
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        out = self.a0 * (b - a) + 0.5 * self.trend * (b * b - a * a)
        for h in self.harmonics:
            w = 2.0 * np.pi / h.period
            out = out - h.amplitude / w * (np.cos(w * b + h.phase) - np.cos(w * a + h.phase))
        return out


def lambda_at(sf, t):
    return sf(t)


def reference_profile(epoch=date(2011, 1, 1), peak=None):
    """Synthetic New-York-like profile: 53 degF level, 21 degF annual swing.

    The single harmonic peaks on July 25 of the epoch's year unless ``peak``
    is given. This is a shipped fixture for shape checks, not a fitted curve.
    """
    period = 365.25
    peak = date(epoch.year, 7, 25) if peak is None else peak
    t_peak = (peak - epoch).days
    phase = 0.5 * np.pi - 2.0 * np.pi * t_peak / period
    return SeasonalFunction(53.0, 0.0, ((21.0, phase, period),))


def state_from_temps(sf, temps, t):
    """State ``(Y, Y', Y'')`` at day ``t`` from ``(T(t-2), T(t-1), T(t))``.

    Derivatives are first and second backward differences of the
    deseasonalised series.
    """
    temps = np.asarray(temps, dtype=np.float64)
    if temps.shape != (3,):
        raise ValueError(f"need exactly 3 consecutive daily temperatures, got shape {temps.shape}")
    if not np.all(np.isfinite(temps)):
        raise ValueError("temperatures must be finite")
    y2, y1, y0 = temps - sf(np.array([t - 2.0, t - 1.0, float(t)]))
    return np.array([y0, y0 - y1, y0 - 2.0 * y1 + y2])


def temps_from_state(sf, x, t):
    """Inverse of :func:`state_from_temps`; returns ``(T(t-2), T(t-1), T(t))``."""
    x1, x2, x3 = np.asarray(x, dtype=np.float64)
    lam = sf(np.array([t - 2.0, t - 1.0, float(t)]))
    return lam + np.array([x3 - 2.0 * x2 + x1, x1 - x2, x1])


class IngestError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class TemperatureSeries:
    """Gap-free daily average temperatures (degF)."""

    dates: tuple
    values: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.dates)

    @property
    def start(self):
        return self.dates[0]

    def day_index(self, d, epoch=None):
        return float((d - (self.start if epoch is None else epoch)).days)

    def state_at(self, sf, d, epoch=None):
        """State vector at date ``d`` using the two preceding records."""
        k = (d - self.start).days
        if not 2 <= k < len(self):
            raise ValueError(f"{d} needs two preceding records inside the series")
        return state_from_temps(sf, self.values[k - 2 : k + 1], self.day_index(d, epoch))


def ingest_csv(path):
    """Read a ``date,tavg_f`` file into a :class:`TemperatureSeries`."""
    dates, values = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise IngestError("no records")
        if [h.strip().lower() for h in header] != ["date", "tavg_f"]:
            raise IngestError(f"expected header 'date,tavg_f', got {','.join(header)!r}", 1)
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise IngestError(f"expected 2 fields, got {len(row)}", line)
            try:
                d = date.fromisoformat(row[0].strip())
            except ValueError:
                raise IngestError(f"unparseable date {row[0]!r}", line) from None
            try:
                v = float(row[1])
            except ValueError:
                raise IngestError(f"unparseable temperature {row[1]!r}", line) from None
            if not math.isfinite(v):
                raise IngestError(f"non-finite temperature {row[1]!r}", line)
            if dates:
                step = (d - dates[-1]).days
                if step == 0:
                    raise IngestError(f"duplicate date {d}", line)
                if step < 0:
                    raise IngestError(f"date {d} out of order", line)
                if step > 1:
                    raise IngestError(f"gap: missing {dates[-1] + timedelta(days=1)}", line)
            dates.append(d)
            values.append(v)
    if not dates:
        raise IngestError("no records")
    return TemperatureSeries(tuple(dates), np.array(values))
