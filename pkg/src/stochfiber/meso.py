"""Uniaxial rate-independent elasto-plasticity with linear kinematic hardening.

All functions are elementwise over NumPy arrays, so one call advances every
meso point of a batch of fibers.  Sign convention: compression negative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ElastoPlasticParams",
    "MesoPointState",
    "InvalidStateError",
    "virgin_state",
    "trial_state",
    "return_map",
    "dissipation_increment",
    "YIELD_RTOL",
]

YIELD_RTOL = 1e-9


class InvalidStateError(ValueError):
    pass


@dataclass(frozen=True)
class ElastoPlasticParams:
    C: float
    H: float = 0.0

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError(f"elastic modulus C must be > 0, got {self.C}")
        if self.H < 0:
            raise ValueError(f"hardening modulus H must be >= 0, got {self.H}")

    @property
    def plastic_tangent(self) -> float:
        return self.C * self.H / (self.C + self.H)


@dataclass
class MesoPointState:
    """Stress, back stress, plastic strain, total strain and yield stress.

    Fields are arrays of a common shape (scalars work too).
    """

    sigma: np.ndarray
    alpha: np.ndarray
    eps_p: np.ndarray
    eps: np.ndarray
    sigma_y: np.ndarray

    def copy(self) -> "MesoPointState":
        return MesoPointState(*(np.array(a, dtype=float, copy=True) for a in
                                (self.sigma, self.alpha, self.eps_p, self.eps, self.sigma_y)))

    def take(self, index) -> "MesoPointState":
        return MesoPointState(self.sigma[index], self.alpha[index], self.eps_p[index],
                              self.eps[index], self.sigma_y[index])

    def put(self, index, other: "MesoPointState") -> None:
        for name in ("sigma", "alpha", "eps_p", "eps", "sigma_y"):
            getattr(self, name)[index] = getattr(other, name)

    def yield_function(self) -> np.ndarray:
        return np.abs(self.sigma + self.alpha) - self.sigma_y


def virgin_state(sigma_y) -> MesoPointState:
    sy = np.array(sigma_y, dtype=float)
    z = np.zeros_like(sy)
    return MesoPointState(z.copy(), z.copy(), z.copy(), z.copy(), sy)


def trial_state(state: MesoPointState, deps, params: ElastoPlasticParams):
    """Elastic predictor: ``(sigma_tr, alpha_tr, phi_tr)``."""
    s_tr = state.sigma + params.C * np.asarray(deps, dtype=float)
    a_tr = state.alpha
    return s_tr, a_tr, np.abs(s_tr + a_tr) - state.sigma_y


def return_map(state: MesoPointState, deps, params: ElastoPlasticParams):
    """Advance ``state`` by the strain increment ``deps``.

    Returns the new state (the input is not modified) and the tangent
    modulus, ``C`` on elastic points and ``CH/(C+H)`` on yielding ones.
    A trial state exactly on the yield surface is treated as elastic.
    """
    sy = state.sigma_y
    if np.any(np.asarray(sy) <= 0):
        raise InvalidStateError("yield stress must be strictly positive")
    C, H = params.C, params.H
    deps = np.asarray(deps, dtype=float)
    s_tr, a_tr, phi = trial_state(state, deps, params)
    plastic = phi > 0
    # sign(0) -> +1; only reached where dgam == 0
    sgn = np.where(s_tr + a_tr >= 0, 1.0, -1.0)
    dgam = np.where(plastic, phi / (C + H), 0.0)
    eps_p = state.eps_p + dgam * sgn
    alpha = a_tr - dgam * H * sgn
    eps = state.eps + deps
    sigma = C * (eps - eps_p)
    tangent = np.where(plastic, params.plastic_tangent, C)
    if np.shape(sy) != np.shape(sigma):
        sy = np.broadcast_to(sy, np.shape(sigma)).copy()
    new = MesoPointState(sigma, alpha, eps_p, eps, sy)
    return new, tangent


def _stored_energy(st: MesoPointState, params: ElastoPlasticParams):
    e = st.sigma**2 / (2 * params.C)
    if params.H > 0:
        e = e + st.alpha**2 / (2 * params.H)
    return e


def dissipation_increment(old: MesoPointState, new: MesoPointState,
                          params: ElastoPlasticParams):
    """Energy density dissipated between two consecutive states.

    Trapezoidal work minus the change of stored (elastic plus hardening)
    energy.  Exact on steps that stay elastic or stay plastic, and a
    non-negative lower bound on steps that cross the yield surface.
    """
    work = 0.5 * (old.sigma + new.sigma) * (new.eps - old.eps)
    return work - (_stored_energy(new, params) - _stored_energy(old, params))

