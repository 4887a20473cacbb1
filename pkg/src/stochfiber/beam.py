"""2D displacement-based Euler-Bernoulli fiber beam element.

Axial displacement is interpolated linearly and transverse displacement
with cubic Hermite polynomials; nodal unknowns are ``(u1, u2, theta)`` at
each end with ``theta = du2/dx1``.  A fiber at ordinate ``x2`` sees the
strain ``eps - x2 * chi``; the section resultants are ``N = sum A Sigma``
and ``M = -sum A x2 Sigma``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .macro import FiberMesoStructure
from .meso import ElastoPlasticParams

__all__ = [
    "SectionLayout",
    "SectionState",
    "ElasticFibers",
    "FiberSection",
    "FiberBeamElement",
    "rc_layout",
    "layered_layout",
    "steel_params",
    "fiber_strain",
    "section_update",
    "element_assemble",
    "strain_matrix",
]

CONCRETE = "concrete"
STEEL = "steel"


@dataclass
class SectionLayout:
    x2: np.ndarray
    area: np.ndarray
    tags: list
    w: float
    h: float

    def __post_init__(self):
        self.x2 = np.asarray(self.x2, dtype=float)
        self.area = np.asarray(self.area, dtype=float)
        if len(self.tags) != self.x2.size or self.area.size != self.x2.size:
            raise ValueError("x2, area and tags must have equal length")
        if np.any(self.area <= 0):
            raise ValueError("fiber areas must be positive")
        if np.any(np.abs(self.x2) > self.h / 2 * (1 + 1e-12)):
            raise ValueError("fiber centroid outside the section height")
        if self.area.sum() > self.w * self.h * (1 + 1e-12):
            raise ValueError("fiber areas exceed the gross section")

    def mask(self, tag) -> np.ndarray:
        return np.array([t == tag for t in self.tags])

    @property
    def second_moment(self) -> float:
        return float(np.sum(self.area * self.x2**2))


def layered_layout(w: float, h: float, n_layers: int, tag=CONCRETE) -> SectionLayout:
    """``n_layers`` equal layers over the height of a ``w x h`` rectangle."""
    t = h / n_layers
    x2 = -h / 2 + (np.arange(n_layers) + 0.5) * t
    return SectionLayout(x2, np.full(n_layers, w * t), [tag] * n_layers, w, h)


def rc_layout(w: float, h: float, n_layers: int, bars) -> SectionLayout:
    """Concrete layers plus steel bar layers.

    ``bars`` is a sequence of ``(x2, area)``; each bar area is removed from
    the concrete layer that contains its centroid.
    """
    lay = layered_layout(w, h, n_layers)
    area = lay.area.copy()
    t = h / n_layers
    for x2, a in bars:
        k = min(int((x2 + h / 2) // t), n_layers - 1)
        area[k] -= a
    bx = [b[0] for b in bars]
    ba = [b[1] for b in bars]
    return SectionLayout(
        np.concatenate([lay.x2, bx]),
        np.concatenate([area, ba]),
        [CONCRETE] * n_layers + [STEEL] * len(bars),
        w,
        h,
    )


def steel_params(C_s=224.6e9, f_y=438e6, f_u=601e6, eps_u=0.1):
    """Kinematic-hardening steel whose bilinear branch reaches ``f_u`` at ``eps_u``."""
    E_t = (f_u - f_y) / (eps_u - f_y / C_s)
    H = C_s * E_t / (C_s - E_t)
    return ElastoPlasticParams(C_s, H), f_y


class ElasticFibers:
    """Linear elastic fibers with the material interface of
    :class:`~stochfiber.macro.FiberMesoStructure`."""

    def __init__(self, C: float, n: int):
        self.C = C
        self.E = np.zeros(n)
        self.dissipated = np.zeros(n)
        self._E_trial = None

    def evaluate(self, E_new):
        self._E_trial = np.array(E_new, dtype=float)
        return self.C * self._E_trial, np.full(self._E_trial.shape, self.C)

    def commit(self):
        self.E = self._E_trial
        self._E_trial = None

    def jacobian_tangent(self):
        return np.full(self.E.shape, self.C)


def fiber_strain(e_S, x2):
    """Fiber strain ``eps - x2 chi`` for section strains ``e_S = (eps, chi)``."""
    return e_S[0] - np.asarray(x2) * e_S[1]


@dataclass
class SectionState:
    e: np.ndarray = field(default_factory=lambda: np.zeros(2))
    q: np.ndarray = field(default_factory=lambda: np.zeros(2))
    K: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))


class FiberSection:
    """A control section: layout plus one material object per fiber group.

    ``materials`` maps a tag to an object exposing ``evaluate(E)``,
    ``commit()`` and ``jacobian_tangent()`` over the fibers with that tag,
    in layout order.
    """

    def __init__(self, layout: SectionLayout, materials: dict):
        self.layout = layout
        self.groups = []
        for tag, mat in materials.items():
            mask = layout.mask(tag)
            if mask.any():
                self.groups.append((np.flatnonzero(mask), mat))
        covered = np.zeros(layout.x2.size, dtype=bool)
        for idx, _ in self.groups:
            covered[idx] = True
        if not covered.all():
            raise ValueError("every fiber tag needs a material")
        self.state = SectionState()
        self._trial = None

    def evaluate(self, e):
        """Trial resultants ``q`` and tangent ``K^S`` at section strains ``e``."""
        e = np.asarray(e, dtype=float)
        lay = self.layout
        n = lay.x2.size
        Sig = np.empty(n)
        Dj = np.empty(n)
        E = fiber_strain(e, lay.x2)
        for idx, mat in self.groups:
            s, _ = mat.evaluate(E[idx])
            Sig[idx] = s
            Dj[idx] = mat.jacobian_tangent()
        A, x = lay.area, lay.x2
        q = np.array([np.sum(A * Sig), -np.sum(A * x * Sig)])
        k11 = np.sum(A * Dj)
        k12 = -np.sum(A * x * Dj)
        k22 = np.sum(A * x * x * Dj)
        K = np.array([[k11, k12], [k12, k22]])
        self._trial = SectionState(e.copy(), q, K)
        self._fiber_trial = (E, Sig)
        return q, K

    def commit(self):
        for _, mat in self.groups:
            mat.commit()
        self.state = self._trial
        self.fiber_strain, self.fiber_stress = self._fiber_trial
        self._trial = None


def section_update(section: FiberSection, de) -> SectionState:
    """Increment section strains by ``de``, commit, and return the new state."""
    section.evaluate(section.state.e + np.asarray(de, dtype=float))
    section.commit()
    return section.state


def strain_matrix(x: float, L: float) -> np.ndarray:
    """``B(x)`` mapping the 6 nodal displacements to ``(eps, chi)``."""
    xi = x / L
    return np.array([
        [-1.0 / L, 0.0, 0.0, 1.0 / L, 0.0, 0.0],
        [0.0, (-6 + 12 * xi) / L**2, (-4 + 6 * xi) / L,
         0.0, (6 - 12 * xi) / L**2, (-2 + 6 * xi) / L],
    ])


class FiberBeamElement:
    """Fiber beam element with ``len(sections)``-point Gauss-Legendre
    integration along its length."""

    def __init__(self, L: float, sections: list):
        self.L = L
        self.sections = sections
        xi, w = np.polynomial.legendre.leggauss(len(sections))
        self.x = 0.5 * L * (xi + 1.0)
        self.W = 0.5 * L * w
        self.B = [strain_matrix(x, L) for x in self.x]
        self.d = np.zeros(6)

    def assemble(self, d):
        """Trial tangent stiffness and internal force at nodal displacements ``d``."""
        d = np.asarray(d, dtype=float)
        K = np.zeros((6, 6))
        r = np.zeros(6)
        for sec, B, W in zip(self.sections, self.B, self.W):
            q, KS = sec.evaluate(B @ d)
            K += W * (B.T @ KS @ B)
            r += W * (B.T @ q)
        self._d_trial = d.copy()
        return 0.5 * (K + K.T), r

    def commit(self):
        for sec in self.sections:
            sec.commit()
        self.d = self._d_trial

    def snapshot(self) -> list[str]:
        lines = []
        for l, sec in enumerate(self.sections):
            e, q = sec.state.e, sec.state.q
            lines.append(
                f"section l={l} eps={e[0]:.9g} chi={e[1]:.9g} N={q[0]:.9g} M={q[1]:.9g}"
            )
        return lines


def element_assemble(elem: FiberBeamElement, dd):
    """Stiffness and internal force after a nodal increment ``dd`` (trial)."""
    return elem.assemble(elem.d + np.asarray(dd, dtype=float))


def concrete_section(layout: SectionLayout, yields, params: ElastoPlasticParams,
                     steel: tuple | None = None, elastic: bool = False) -> FiberSection:
    """Control section with homogenized concrete layers and steel bars.

    ``yields`` has shape ``(n_concrete, N_f, N_f)``.  With ``elastic`` every
    fiber is linear (concrete modulus ``params.C``, steel modulus from
    ``steel``).
    """
    n_c = int(layout.mask(CONCRETE).sum())
    n_s = int(layout.mask(STEEL).sum())
    sp, fy = steel if steel is not None else steel_params()
    if elastic:
        mats = {CONCRETE: ElasticFibers(params.C, n_c)}
        if n_s:
            mats[STEEL] = ElasticFibers(sp.C, n_s)
    else:
        mats = {CONCRETE: FiberMesoStructure(yields, params)}
        if n_s:
            mats[STEEL] = FiberMesoStructure(np.full((n_s, 1, 1), fy), sp, tension_cutoff=False)
    return FiberSection(layout, mats)
