"""Post-processing of simulation output.

Peak extraction and the log-decrement estimate of a viscous-like damping
ratio for free-vibration records, hysteresis loop areas for cyclic
stress-strain traces, and per-grid-point ensemble statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "InsufficientDataError",
    "PeakSequence",
    "EnsembleCurve",
    "equilibrium_offset",
    "find_peaks",
    "log_decrement",
    "damping_history",
    "vibration_period",
    "loop_area",
    "ensemble_stats",
    "write_columns",
]


class InsufficientDataError(ValueError):
    pass


@dataclass
class PeakSequence:
    """Same-sign extrema of a record measured from its equilibrium offset.

    ``amplitude`` holds ``|u - offset|`` at the refined peak times; ``sign``
    tells whether each peak lies above (+1) or below (-1) the offset.
    """

    t: np.ndarray
    amplitude: np.ndarray
    sign: int
    offset: float

    def __len__(self) -> int:
        return self.t.size


def equilibrium_offset(u, tail: float = 0.2) -> float:
    """Mean of the final ``tail`` share of the record."""
    u = np.asarray(u, dtype=float)
    n = max(1, int(math.ceil(tail * u.size)))
    return float(u[-n:].mean())


def _refine(t, y, i):
    """Vertex of the parabola through samples ``i-1, i, i+1``."""
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    den = y0 - 2 * y1 + y2
    if den == 0:
        return t[i], y1
    p = 0.5 * (y0 - y2) / den
    dt = t[i + 1] - t[i]
    return t[i] + p * dt, y1 - 0.25 * (y0 - y2) * p


def find_peaks(t, u, t_start: float | None = None, sign: int = 1,
               offset: float | None = None) -> PeakSequence:
    """Local extrema of ``sign * (u - offset)`` after ``t_start``.

    ``t`` must be uniformly sampled.  ``offset`` defaults to
    :func:`equilibrium_offset` of the record after ``t_start``.  Each peak
    is refined by a 3-point parabola.
    """
    t = np.asarray(t, dtype=float)
    u = np.asarray(u, dtype=float)
    if t_start is not None:
        sel = t >= t_start
        t, u = t[sel], u[sel]
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if t.size < 3:
        raise InsufficientDataError("record too short for peak detection")
    if offset is None:
        offset = equilibrium_offset(u)
    y = sign * (u - offset)
    idx = np.flatnonzero((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]) & (y[1:-1] > 0)) + 1
    if idx.size < 2:
        raise InsufficientDataError(f"found {idx.size} peak(s), need at least 2")
    tp = np.empty(idx.size)
    ap = np.empty(idx.size)
    for j, i in enumerate(idx):
        tp[j], ap[j] = _refine(t, y, i)
    return PeakSequence(tp, ap, sign, float(offset))


def log_decrement(peaks: PeakSequence, n1: int, n_c: int) -> float:
    """Viscous-like damping ratio from peaks ``n1`` and ``n1 + n_c``."""
    if n_c < 1:
        raise ValueError("n_c must be >= 1")
    if n1 < 0 or n1 + n_c >= len(peaks):
        raise InsufficientDataError(f"peaks {n1} and {n1 + n_c} not both available")
    a1, a2 = peaks.amplitude[n1], peaks.amplitude[n1 + n_c]
    if not (a1 > 0 and a2 > 0):
        raise ValueError("peak amplitudes must be positive")
    return math.log(a1 / a2) / (2 * math.pi * n_c)


def damping_history(peaks: PeakSequence, n_c: int = 5):
    """Sliding-window log decrement: ``(t_peak[n1], xi)`` for every ``n1``."""
    if len(peaks) < n_c + 1:
        raise InsufficientDataError(f"need {n_c + 1} peaks, have {len(peaks)}")
    n = len(peaks) - n_c
    xi = np.array([log_decrement(peaks, i, n_c) for i in range(n)])
    return peaks.t[:n].copy(), xi


def vibration_period(peaks: PeakSequence) -> float:
    """Mean spacing of consecutive same-sign peaks."""
    if len(peaks) < 2:
        raise InsufficientDataError("need 2 peaks for a period")
    return float(np.mean(np.diff(peaks.t)))


def loop_area(E, Sigma, atol: float = 0.0) -> float:
    """Area enclosed by a closed ``(E, Sigma)`` cycle (shoelace formula)."""
    E = np.asarray(E, dtype=float)
    S = np.asarray(Sigma, dtype=float)
    if E.shape != S.shape or E.ndim != 1 or E.size < 2:
        raise ValueError("E and Sigma must be 1D arrays of equal length")
    scale = max(np.abs(E).max(), 1e-300)
    if abs(E[-1] - E[0]) > atol + 1e-12 * scale:
        raise ValueError("cycle is not closed in strain")
    area = 0.5 * np.sum(E[:-1] * S[1:] - E[1:] * S[:-1])
    return abs(float(area))


@dataclass
class EnsembleCurve:
    grid: np.ndarray
    values: np.ndarray
    mean: np.ndarray
    std: np.ndarray

    @property
    def count(self) -> int:
        return self.values.shape[0]


def ensemble_stats(grids, values=None) -> EnsembleCurve:
    """Sample mean and unbiased standard deviation per grid point.

    Either pass a list of grids and a matching list of value arrays, or a
    single grid plus a 2D ``(n, len(grid))`` array.
    """
    if values is None:
        raise TypeError("values are required")
    vals = np.asarray(values, dtype=float)
    g = np.asarray(grids, dtype=float)
    if g.ndim == 1:
        g = np.broadcast_to(g, vals.shape)
    if g.shape != vals.shape:
        raise ValueError("each curve needs a grid of its own length")
    if vals.shape[0] < 2:
        raise ValueError("need at least 2 curves")
    if not np.all(g == g[0]):
        raise ValueError("curves are not on a common grid")
    return EnsembleCurve(g[0].copy(), vals, vals.mean(axis=0), vals.std(axis=0, ddof=1))


def write_columns(path, columns, header: str | None = None) -> None:
    """Whitespace-separated columns at 9 significant digits."""
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    with open(path, "w", encoding="ascii") as fh:
        if header:
            fh.write(f"# {header}\n")
        for row in data:
            fh.write(" ".join(f"{x:.8e}" for x in row) + "\n")
