"""Experiment configuration: flat ``key = value`` text with unit suffixes.

Lines starting with ``#`` (and anything after a ``#``) are comments.
Numeric values may carry a unit suffix (``Pa``, ``kPa``, ``MPa``, ``GPa``,
``N``, ``kN``, ``MN``) and are stored in SI.  List-valued keys take
comma-separated values.  Every error names the offending key.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field, fields

import numpy as np

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "SCENARIOS",
    "parse_config",
    "load_config",
    "strain_history",
    "cyclic_segments",
]

SCENARIOS = ("genfield", "material-test", "oracle", "column-sim", "damping")

_UNITS = {
    "pa": 1.0, "kpa": 1e3, "mpa": 1e6, "gpa": 1e9,
    "n": 1.0, "kn": 1e3, "mn": 1e6,
}
_NUM = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]*)\s*$")


class ConfigError(ValueError):
    def __init__(self, key: str | None, message: str):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


@dataclass
class ExperimentConfig:
    """Resolved experiment settings (SI units)."""

    scenario: str = "material-test"
    # material
    C: float = 27.5e9
    H: float = 0.0
    m: float | None = None
    s: float | None = None
    s_over_m: list = field(default_factory=list)
    lc_over_d: list = field(default_factory=lambda: [0.1])
    # random field discretization
    N: int = 10
    M: int = 64
    N_f: int = 64
    lc: float = 0.1
    # material driving
    E_max: float = -5e-3
    n_steps: int = 500
    cycles: list = field(default_factory=lambda: [-1e-3, -2e-3, -3e-3, -4e-3])
    strain_step: float = 1e-5
    strain_history: list = field(default_factory=list)
    # ensemble
    count: int = 100
    seed: int = 0
    # column
    F0: list = field(default_factory=lambda: [5e3, 15e3])
    mass: float = 500.0
    T: float = 5.0
    dt: float = 1e-3
    N_l: int = 2
    N_F: int = 6
    w: float = 0.15
    h: float = 0.15
    L: float = 1.5
    cover: float = 0.03
    bar_diameter: float = 0.016
    bars_per_face: int = 2
    C_s: float = 224.6e9
    f_y: float = 438e6
    f_u: float = 601e6
    eps_u: float = 0.1
    elastic: bool = False
    shared_seed: bool = False
    # post-processing
    N_c: int = 5
    histories: list = field(default_factory=list)
    out: str = "out"

    def marginals(self) -> list[tuple[float, float]]:
        """``(m, s)`` pairs: one per ``s_over_m`` entry, or the single pair."""
        if not self.s_over_m:
            return [(self.m, self.s)]
        out = []
        for r in self.s_over_m:
            if self.m is not None:
                out.append((self.m, r * self.m))
            else:
                out.append((self.s / r, self.s))
        return out

    def echo(self) -> str:
        """Canonical ``key = value`` listing of every resolved setting."""
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, list):
                txt = ", ".join(_fmt(x) for x in v)
            else:
                txt = _fmt(v)
            lines.append(f"{f.name} = {txt}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        """Hash of every setting except the output directory."""
        body = "".join(ln + "\n" for ln in self.echo().splitlines() if not ln.startswith("out ="))
        return hashlib.sha256(body.encode("ascii")).hexdigest()[:16]


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.9g}"
    if isinstance(v, tuple):
        return "/".join(_fmt(x) for x in v)
    return str(v)


def _number(key: str, text: str) -> float:
    mt = _NUM.match(text)
    if not mt:
        raise ConfigError(key, f"not a number: {text!r}")
    val = float(mt.group(1))
    unit = mt.group(2).lower()
    if unit:
        if unit not in _UNITS:
            raise ConfigError(key, f"unknown unit {mt.group(2)!r}")
        val *= _UNITS[unit]
    if not math.isfinite(val):
        raise ConfigError(key, "value must be finite")
    return val


def _integer(key, text):
    v = _number(key, text)
    if v != int(v):
        raise ConfigError(key, f"expected an integer, got {text!r}")
    return int(v)


def _boolean(key, text):
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ConfigError(key, f"expected true/false, got {text!r}")


def _split(text):
    return [p for p in (x.strip() for x in text.split(",")) if p]


def _segments(key, text):
    segs = []
    for part in _split(text):
        try:
            target, steps = part.split("/")
        except ValueError:
            raise ConfigError(key, f"segment {part!r} must read <strain>/<steps>") from None
        segs.append((_number(key, target), _integer(key, steps)))
    return segs


# key -> (parser, check) ; check returns an error message or None
_POS = lambda v: None if v > 0 else "must be > 0"  # noqa: E731
_NONNEG = lambda v: None if v >= 0 else "must be >= 0"  # noqa: E731
_ANY = lambda v: None  # noqa: E731


def _each(check):
    def f(vals):
        for v in vals:
            msg = check(v)
            if msg:
                return msg
        return None
    return f


_KEYS = {
    "scenario": (str.strip, lambda v: None if v in SCENARIOS else f"unknown scenario {v!r}"),
    "C": (_number, _POS),
    "H": (_number, _NONNEG),
    "m": (_number, _POS),
    "s": (_number, _NONNEG),
    "s_over_m": (lambda k, t: [_number(k, x) for x in _split(t)], _each(_POS)),
    "lc_over_d": (lambda k, t: [_number(k, x) for x in _split(t)], _each(_NONNEG)),
    "N": (_integer, _POS),
    "M": (_integer, _POS),
    "N_f": (_integer, _POS),
    "lc": (_number, _POS),
    "E_max": (_number, lambda v: None if v != 0 else "must be nonzero"),
    "n_steps": (_integer, _POS),
    "cycles": (lambda k, t: [_number(k, x) for x in _split(t)],
               _each(lambda v: None if v < 0 else "cycle peaks must be compressive (< 0)")),
    "strain_step": (_number, _POS),
    "strain_history": (_segments, _ANY),
    "count": (_integer, _POS),
    "seed": (_integer, _NONNEG),
    "F0": (lambda k, t: [_number(k, x) for x in _split(t)], _each(_NONNEG)),
    "mass": (_number, _POS),
    "T": (_number, _POS),
    "dt": (_number, _POS),
    "N_l": (_integer, _POS),
    "N_F": (_integer, _POS),
    "w": (_number, _POS),
    "h": (_number, _POS),
    "L": (_number, _POS),
    "cover": (_number, _POS),
    "bar_diameter": (_number, _POS),
    "bars_per_face": (_integer, _POS),
    "C_s": (_number, _POS),
    "f_y": (_number, _POS),
    "f_u": (_number, _POS),
    "eps_u": (_number, _POS),
    "elastic": (_boolean, _ANY),
    "shared_seed": (_boolean, _ANY),
    "N_c": (_integer, _POS),
    "histories": (lambda k, t: _split(t), _ANY),
    "out": (str.strip, _ANY),
}

_SINGLE_ARG = {"scenario", "out"}

_REQUIRED = {
    "genfield": (),
    "material-test": ("m",),
    "oracle": ("C", "H"),
    "column-sim": (),
    "damping": ("histories",),
}


def parse_config(text: str, scenario: str | None = None) -> ExperimentConfig:
    """Parse and validate configuration text.

    ``scenario`` (from the command line) takes precedence over a
    ``scenario`` key in the text; both must agree when both are given.
    """
    raw: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(None, f"line {n}: expected 'key = value'")
        key, val = (p.strip() for p in body.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(key, "unknown key")
        if key in raw:
            raise ConfigError(key, "given more than once")
        raw[key] = val

    values = {}
    for key, val in raw.items():
        parser, check = _KEYS[key]
        v = parser(val) if key in _SINGLE_ARG else parser(key, val)
        msg = check(v)
        if msg:
            raise ConfigError(key, msg)
        values[key] = v

    if scenario is not None:
        if "scenario" in values and values["scenario"] != scenario:
            raise ConfigError("scenario", f"config says {values['scenario']!r}, "
                                          f"command line says {scenario!r}")
        if scenario not in SCENARIOS:
            raise ConfigError("scenario", f"unknown scenario {scenario!r}")
        values["scenario"] = scenario
    elif "scenario" not in values:
        raise ConfigError("scenario", "missing required key")

    if values["scenario"] == "genfield":
        values.setdefault("count", 1)
    cfg = ExperimentConfig(**values)
    _validate(cfg, values)
    return cfg


def _validate(cfg: ExperimentConfig, given: dict) -> None:
    for key in _REQUIRED[cfg.scenario]:
        if key not in given:
            raise ConfigError(key, f"missing required key for scenario {cfg.scenario}")
    if cfg.M < 2 * cfg.N:
        raise ConfigError("M", f"must be >= 2N = {2 * cfg.N} to avoid aliasing")
    needs_marginal = cfg.scenario in ("material-test", "oracle")
    if needs_marginal or given.keys() & {"m", "s", "s_over_m"}:
        if cfg.s_over_m:
            if cfg.m is None and cfg.s is None:
                raise ConfigError("s_over_m", "needs either m or s")
            if cfg.m is not None and cfg.s is not None:
                raise ConfigError("s_over_m", "give m or s alongside s_over_m, not both")
        elif needs_marginal:
            for key in ("m", "s"):
                if getattr(cfg, key) is None:
                    raise ConfigError(key, "missing required key")
    if cfg.scenario == "oracle" and cfg.s_over_m == [] and cfg.s == 0:
        raise ConfigError("s", "the closed form needs s > 0")
    for r in cfg.lc_over_d:
        # fiber edge d must fit in one period L0 = N * lc
        if r > 0 and r * cfg.N < 1.0 * (1 - 1e-12):
            raise ConfigError("lc_over_d", f"{r:g} gives d > L0 = N*lc; the fiber must "
                                           f"fit in one period (need lc_over_d >= 1/N)")
    if cfg.f_u < cfg.f_y:
        raise ConfigError("f_u", "must be >= f_y")
    if cfg.cover >= cfg.h / 2:
        raise ConfigError("cover", "bars must lie inside the section")
    if cfg.T <= 2.0 and cfg.scenario == "column-sim":
        raise ConfigError("T", "must exceed the 2 s loading phase")


def load_config(path, scenario: str | None = None) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), scenario)


def cyclic_segments(peaks, strain_step: float = 1e-5, E_return: float = 0.0):
    """Unload-reload protocol: compress to each peak, then unload to ``E_return``.

    Unloading to zero strain always passes the tension cut-off of a
    concrete fiber, so each cycle unloads to the ``Sigma = 0`` state.
    """
    segs = []
    prev = 0.0
    for p in peaks:
        segs.append((p, max(1, int(round(abs(p - prev) / strain_step)))))
        segs.append((E_return, max(1, int(round(abs(p - E_return) / strain_step)))))
        prev = E_return
    return segs


def strain_history(segments) -> np.ndarray:
    """Piecewise-linear strain path from ``[(target, steps), ...]``, starting at 0."""
    segments = list(segments)
    if not segments:
        raise ValueError("strain history needs at least one segment")
    path = [np.zeros(1)]
    start = 0.0
    for target, steps in segments:
        if steps < 1:
            raise ValueError("each segment needs at least one step")
        path.append(np.linspace(start, target, steps + 1)[1:])
        start = target
    return np.concatenate(path)
