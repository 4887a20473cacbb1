"""Homogenized concrete fiber: spatial averaging of meso points.

A :class:`FiberMesoStructure` holds a batch of fibers, each with its own
``N_f x N_f`` meso yield stresses.  Every meso point of a fiber sees the
fiber's macro strain; the macro stress and tangent are arithmetic means
over the points.  Concrete does not carry macro tension: when a trial
strain would make the mean stress positive, the strain ``E^c`` of zero
stress is located, the meso state is frozen there and the fiber reports
zero stress and stiffness until recompression.
"""

from __future__ import annotations

import numpy as np

from .meso import ElastoPlasticParams, MesoPointState, dissipation_increment, return_map, virgin_state

__all__ = [
    "FiberMesoStructure",
    "BracketError",
    "ConvergenceError",
    "macro_update",
    "tension_cutoff_resolve",
    "run_strain_path",
    "CUTOFF_RTOL",
    "STABILIZATION",
]

CUTOFF_RTOL = 1e-6
STABILIZATION = 1e-6


class BracketError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


class FiberMesoStructure:
    """Batch of concrete fibers sharing elastic and hardening moduli.

    Parameters
    ----------
    sigma_y : array, shape ``(N_f, N_f)`` or ``(n_fibers, N_f, N_f)``
        Meso yield stresses at mesh centroids.
    params : ElastoPlasticParams
    d : float
        Edge length of the fiber section (bookkeeping only).
    tension_cutoff : bool
        Disable to obtain a tension-capable material (test double).
    """

    def __init__(self, sigma_y, params: ElastoPlasticParams, d: float = 1.0,
                 tension_cutoff: bool = True):
        sy = np.asarray(sigma_y, dtype=float)
        self.single = sy.ndim == 2
        if self.single:
            sy = sy[None]
        if sy.ndim != 3:
            raise ValueError("sigma_y must have shape (N_f, N_f) or (n, N_f, N_f)")
        self.N_f = sy.shape[-1]
        self.params = params
        self.d = d
        self.tension_cutoff = tension_cutoff
        n = sy.shape[0]
        self.state = virgin_state(sy.reshape(n, -1))
        self.E = np.zeros(n)
        self.E_meso = np.zeros(n)
        self.cutoff_active = np.zeros(n, dtype=bool)
        self.Sigma = np.zeros(n)
        self.D = np.full(n, params.C)
        self.dissipated = np.zeros(n)
        self.tol_sigma = CUTOFF_RTOL * self.state.sigma_y.mean(axis=-1)
        self._trial = None

    @property
    def n_fibers(self) -> int:
        return self.E.shape[0]

    def _out(self, a):
        return a[0] if self.single else a

    def evaluate(self, E_new):
        """Trial macro stress and tangent at strain ``E_new`` (not committed)."""
        E_new = np.broadcast_to(np.asarray(E_new, dtype=float), self.E.shape).copy()
        new, Dm = return_map(self.state, (E_new - self.E_meso)[:, None], self.params)
        Sig = new.sigma.mean(axis=-1)
        D = Dm.mean(axis=-1)
        E_meso = E_new.copy()
        cutoff = np.zeros_like(self.cutoff_active)
        if self.tension_cutoff:
            tensile = Sig > 0
            stay = tensile & self.cutoff_active
            enter = tensile & ~self.cutoff_active
            if stay.any():
                new.put(stay, self.state.take(stay))
                E_meso[stay] = self.E_meso[stay]
            if enter.any():
                sub = self.state.take(enter)
                Ec = _zero_crossing(sub, self.E_meso[enter], E_new[enter], self.params,
                                    self.tol_sigma[enter])
                at_c, _ = return_map(sub, (Ec - self.E_meso[enter])[:, None], self.params)
                new.put(enter, at_c)
                E_meso[enter] = Ec
            cutoff = tensile
            Sig = np.where(tensile, 0.0, Sig)
            D = np.where(tensile, 0.0, D)
        self._trial = (E_new, E_meso, cutoff, new, Sig, D)
        return self._out(Sig), self._out(D)

    def commit(self) -> None:
        if self._trial is None:
            raise RuntimeError("no trial state to commit")
        E_new, E_meso, cutoff, new, Sig, D = self._trial
        self.dissipated += dissipation_increment(self.state, new, self.params).mean(axis=-1)
        self.E, self.E_meso, self.cutoff_active = E_new, E_meso, cutoff
        self.state, self.Sigma, self.D = new, Sig, D
        self._trial = None

    def jacobian_tangent(self):
        """Tangent for global stiffness assembly; cut-off fibers get a small
        positive value so that a fully cracked layer cannot zero a row."""
        if self._trial is not None:
            cut, D = self._trial[2], self._trial[5]
        else:
            cut, D = self.cutoff_active, self.D
        return self._out(np.where(cut, STABILIZATION * self.params.C, D))

    def yielding_fraction(self) -> np.ndarray:
        """Share of meso points currently on the yield surface."""
        phi = self.state.yield_function()
        return self._out((phi >= -1e-9 * self.state.sigma_y).mean(axis=-1))


def _zero_crossing(state: MesoPointState, E0, E1, params, tol,
                   max_newton: int = 50, max_bisect: int = 200):
    """Strain in ``[E0, E1]`` where the mean stress from ``state`` vanishes.

    Safeguarded Newton on the piecewise-linear, nondecreasing map
    ``E -> mean sigma``; falls back to bisection after ``max_newton`` steps.
    """
    lo = np.array(E0, dtype=float)
    hi = np.array(E1, dtype=float)
    x = hi.copy()
    done = np.zeros(lo.shape, dtype=bool)
    for it in range(max_newton + max_bisect):
        st, Dm = return_map(state, (x - E0)[:, None], params)
        s = st.sigma.mean(axis=-1)
        d = Dm.mean(axis=-1)
        done |= np.abs(s) <= tol
        if done.all():
            return x
        hi = np.where(s > 0, x, hi)
        lo = np.where(s <= 0, x, lo)
        mid = 0.5 * (lo + hi)
        if it < max_newton:
            with np.errstate(divide="ignore", invalid="ignore"):
                xn = x - s / d
            ok = (d > 0) & (xn > lo) & (xn < hi)
            xn = np.where(ok, xn, mid)
        else:
            xn = mid
        x = np.where(done, x, xn)
    raise ConvergenceError("tension cut-off strain not found")


def macro_update(fiber: FiberMesoStructure, dE):
    """Advance the fiber by a macro strain increment and commit."""
    out = fiber.evaluate(fiber.E + np.asarray(dE, dtype=float))
    fiber.commit()
    return out


def tension_cutoff_resolve(fiber: FiberMesoStructure, E_prev, E_next):
    """Locate the zero-stress strain between two macro strains and freeze there.

    ``fiber`` must be committed at ``E_prev`` with non-positive stress, and
    the stress at ``E_next`` must be tensile.  Returns ``E^c``; the fiber is
    left committed at ``E_next`` with the cut-off active.
    """
    E_prev = np.broadcast_to(np.asarray(E_prev, dtype=float), fiber.E.shape)
    if not np.allclose(E_prev, fiber.E, rtol=0, atol=1e-15):
        raise ValueError("fiber is not committed at E_prev")
    s0 = fiber.Sigma
    new, _ = return_map(fiber.state, (np.asarray(E_next) - fiber.E_meso)[..., None], fiber.params)
    s1 = new.sigma.mean(axis=-1)
    if np.any(s0 > fiber.tol_sigma) or np.any(s1 <= 0):
        raise BracketError("no compression-to-tension transition in the bracket")
    fiber.evaluate(E_next)
    Ec = fiber._trial[1].copy()
    fiber.commit()
    return fiber._out(Ec)


def run_strain_path(fiber: FiberMesoStructure, path):
    """Drive the fiber through total strains ``path`` (1D, shared by the batch).

    Returns ``(Sigma, D, events)``; ``Sigma`` and ``D`` have shape
    ``(len(path),)`` for a single fiber, else ``(n_fibers, len(path))``.
    ``events`` lists ``(step, fiber_index, E_c)`` cut-off entries.
    """
    path = np.asarray(path, dtype=float)
    Sig = np.empty((fiber.n_fibers, path.size))
    D = np.empty_like(Sig)
    events = []
    for k, E in enumerate(path):
        was = fiber.cutoff_active.copy()
        fiber.evaluate(E)
        fiber.commit()
        Sig[:, k] = fiber.Sigma
        D[:, k] = fiber.D
        for i in np.flatnonzero(fiber.cutoff_active & ~was):
            events.append((k, int(i), float(fiber.E_meso[i])))
    if fiber.single:
        return Sig[0], D[0], events
    return Sig, D, events
