"""Closed-form macro response for i.i.d. log-normal yield stresses under
monotonic loading from a virgin state.

With zero correlation length a meso point is still elastic at strain ``E``
iff its yield stress exceeds ``|C E|``, so the elastic area fraction is the
log-normal survival function and the macro tangent follows from the
convex combination of ``C`` and ``CH/(C+H)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .random_field import MarginalSpec

__all__ = [
    "OracleParams",
    "lognormal_cdf",
    "elastic_fraction",
    "tangent",
    "monotonic_curve",
    "stress_closed_form",
    "plateau_stress",
]


@dataclass(frozen=True)
class OracleParams:
    C: float
    H: float
    m: float
    s: float

    def __post_init__(self):
        if not self.C > 0 or self.H < 0:
            raise ValueError("need C > 0 and H >= 0")
        MarginalSpec(self.m, self.s)

    @property
    def marginal(self) -> MarginalSpec:
        return MarginalSpec(self.m, self.s)

    @property
    def plastic_tangent(self) -> float:
        return self.C * self.H / (self.C + self.H)


def lognormal_cdf(sigma_y, m: float, s: float):
    """Probability that a log-normal yield stress (mean m, std s) is <= sigma_y."""
    mg = MarginalSpec(m, s)
    sy = np.asarray(sigma_y, dtype=float)
    with np.errstate(divide="ignore"):
        z = (np.log(np.where(sy > 0, sy, 1.0)) - mg.m_G) / (math.sqrt(2.0) * mg.s_G)
    out = np.where(sy > 0, 0.5 * special.erfc(-z), 0.0)
    return float(out) if out.ndim == 0 else out


def elastic_fraction(E, p: OracleParams):
    """Share of the fiber area still elastic at monotonic strain ``E``."""
    a = np.abs(p.C * np.asarray(E, dtype=float))
    mg = p.marginal
    with np.errstate(divide="ignore"):
        z = (np.log(np.where(a > 0, a, 1.0)) - mg.m_G) / (math.sqrt(2.0) * mg.s_G)
    out = np.where(a > 0, 0.5 * special.erfc(z), 1.0)
    return float(out) if out.ndim == 0 else out


def tangent(E, p: OracleParams):
    """Macro tangent modulus along the monotonic curve."""
    f = elastic_fraction(E, p)
    D = p.C / (p.C + p.H) * (f * p.C + p.H)
    D = np.where(np.asarray(E) == 0, p.C, D)
    return float(D) if D.ndim == 0 else D


def monotonic_curve(p: OracleParams, E_max: float, n_steps: int, rtol: float = 1e-8):
    """``(E, Sigma)`` at ``n_steps + 1`` equally spaced strains in ``[0, E_max]``.

    ``Sigma`` integrates :func:`tangent` interval by interval with adaptive
    Gauss-Kronrod quadrature.  ``E_max`` may be negative (compression).
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    E = np.linspace(0.0, E_max, n_steps + 1)
    # the knee of a near-deterministic law is a kink; tell quad where it is
    knee = p.marginal.median / p.C * np.sign(E_max)
    Sig = np.zeros_like(E)
    for i in range(n_steps):
        a, b = E[i], E[i + 1]
        pts = [knee] if min(a, b) < knee < max(a, b) else None
        val, _ = integrate.quad(lambda e: tangent(e, p), a, b, epsrel=rtol,
                                epsabs=0.0, points=pts, limit=200)
        Sig[i + 1] = Sig[i] + val
    return E, Sig


def stress_closed_form(E, p: OracleParams):
    """Monotonic macro stress from the log-normal partial expectation.

    ``int_0^a (1 - F(y)) dy = E[min(S, a)]``, so the curve needs no
    quadrature.  Used as an independent check of :func:`monotonic_curve`.
    """
    E = np.asarray(E, dtype=float)
    a = np.abs(p.C * E)
    mg = p.marginal
    with np.errstate(divide="ignore"):
        la = np.log(np.where(a > 0, a, 1.0))
    z0 = (la - mg.m_G) / mg.s_G
    z1 = z0 - mg.s_G
    e_min = np.where(a > 0, p.m * special.ndtr(z1) + a * special.ndtr(-z0), 0.0)
    # int_0^E D = C/(C+H) * (sign(E) * E[min(S, |CE|)] + H * E)
    out = p.C / (p.C + p.H) * (np.sign(E) * e_min + p.H * E)
    return float(out) if out.ndim == 0 else out


def plateau_stress(p: OracleParams) -> float:
    """``int_0^inf (1 - F(C e)) C de`` for H = 0, i.e. the mean yield stress,
    evaluated by quadrature of the survival function."""
    val, _ = integrate.quad(lambda e: elastic_fraction(e, p) * p.C, 0.0, np.inf,
                            epsrel=1e-10, limit=400)
    return val
