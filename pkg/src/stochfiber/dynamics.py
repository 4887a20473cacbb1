"""Cantilever column: quasi-static loading then undamped free vibration.

The column stands on a fixed base along the vertical axis ``x1``.  A lumped
mass sits at the top node and carries gravity; a horizontal force is ramped
up and suddenly released.  Equilibrium is solved by Newton-Raphson; the free
vibration uses the average-acceleration Newmark rule, which adds no
algorithmic damping, and no damping matrix exists anywhere.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .beam import FiberBeamElement, concrete_section, rc_layout, steel_params
from .macro import ConvergenceError
from .meso import ElastoPlasticParams
from .random_field import MarginalSpec, fiber_yields

__all__ = [
    "LoadProgram",
    "DynamicState",
    "TimeHistory",
    "ColumnConfig",
    "ColumnModel",
    "build_column",
    "static_step",
    "dynamic_step",
    "run_program",
    "GRAVITY",
]

log = logging.getLogger(__name__)

GRAVITY = 9.81
TOL_F = 1e-8
TOL_ABS = 1e-6
MAX_ITER = 30
MAX_HALVINGS = 6
MAX_BACKTRACK = 8


@dataclass(frozen=True)
class LoadProgram:
    """Mass ramped over ``[0, t_mass]``, force over ``[t_mass, t_release]``,
    free vibration until ``T``."""

    mass: float = 500.0
    F0: float = 0.0
    t_mass: float = 1.0
    t_release: float = 2.0
    T: float = 4.0
    dt: float = 1e-3
    static_per_second: int = 100
    g: float = GRAVITY

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if not 0 < self.t_mass <= self.t_release <= self.T:
            raise ValueError("schedule times must satisfy 0 < t_mass <= t_release <= T")
        if self.static_per_second < 1:
            raise ValueError("static_per_second must be >= 1")

    def static_times(self) -> np.ndarray:
        n = int(round(self.t_release * self.static_per_second))
        return np.linspace(0.0, self.t_release, n + 1)[1:]

    def load_factors(self, t: float) -> tuple[float, float]:
        """Fractions of gravity and of ``F0`` applied at time ``t``."""
        lam_m = min(t / self.t_mass, 1.0)
        if t <= self.t_mass:
            lam_f = 0.0
        elif t <= self.t_release:
            lam_f = (t - self.t_mass) / (self.t_release - self.t_mass)
        else:
            lam_f = 0.0
        return lam_m, lam_f


@dataclass
class DynamicState:
    d: np.ndarray
    v: np.ndarray
    a: np.ndarray
    t: float = 0.0
    n: int = 0
    k: int = 0
    f_int: np.ndarray | None = None
    f_ext: np.ndarray | None = None


@dataclass
class TimeHistory:
    """Recorded response.  ``R_x`` is the horizontal (lateral) and ``R_y``
    the vertical internal force at the base node; ``M_base`` is the base
    moment.  The energy columns are kept in memory only."""

    t: np.ndarray
    u_top: np.ndarray
    R_x: np.ndarray
    R_y: np.ndarray
    M_base: np.ndarray
    dt: float
    F0: float
    seed: int
    t_release: float = 0.0
    kinetic: np.ndarray = field(default=None, repr=False)
    work_int: np.ndarray = field(default=None, repr=False)
    work_ext: np.ndarray = field(default=None, repr=False)
    dissipated: np.ndarray = field(default=None, repr=False)
    iterations: np.ndarray = field(default=None, repr=False)

    def write(self, path) -> None:
        rows = np.column_stack([self.t, self.u_top, self.R_x, self.R_y, self.M_base])
        with open(path, "w", encoding="ascii") as fh:
            fh.write(f"# dt={self.dt:.9g} F0={self.F0:.9g} seed={self.seed}\n")
            for r in rows:
                fh.write(" ".join(f"{x:.9e}" for x in r) + "\n")

    @classmethod
    def read(cls, path) -> "TimeHistory":
        with open(path, encoding="ascii") as fh:
            header = fh.readline()
        meta = dict(tok.split("=") for tok in header[1:].split())
        a = np.loadtxt(path, comments="#", ndmin=2)
        return cls(a[:, 0], a[:, 1], a[:, 2], a[:, 3], a[:, 4], float(meta["dt"]),
                   float(meta["F0"]), int(meta["seed"]))

    def free_vibration(self):
        """``(t, u_top)`` after release."""
        sel = self.t > self.t_release
        return self.t[sel], self.u_top[sel]


@dataclass
class ColumnConfig:
    """Geometry and materials of the reinforced concrete column.

    The geometry defaults (150 x 150 mm section, 1.5 m long, two 16 mm bars
    per face with 30 mm to the bar axis) are a chosen stand-in, sized so that
    a 15 kN lateral load takes the outer concrete layer well into the
    nonlinear range while the steel stays elastic.
    """

    C: float = 27.5e9
    H: float = 0.0
    m: float = 30.5e6
    s_over_m: float = 0.943
    lc_over_d: float = 0.1
    N: int = 10
    M: int = 64
    w: float = 0.15
    h: float = 0.15
    L: float = 1.5
    cover: float = 0.03
    bar_diameter: float = 0.016
    bars_per_face: int = 2
    n_layers: int = 6
    n_sections: int = 2
    n_elements: int = 1
    C_s: float = 224.6e9
    f_y: float = 438e6
    f_u: float = 601e6
    eps_u: float = 0.1
    shared_seed: bool = False
    elastic: bool = False

    def layout(self):
        a_bar = np.pi * self.bar_diameter**2 / 4
        y = self.h / 2 - self.cover
        bars = [(-y, self.bars_per_face * a_bar), (y, self.bars_per_face * a_bar)]
        return rc_layout(self.w, self.h, self.n_layers, bars)


class ColumnModel:
    """Vertical chain of fiber elements, fixed at the base, mass at the top."""

    def __init__(self, elements: list[FiberBeamElement], mass: float = 0.0):
        self.elements = elements
        self.n_dof = 3 * (len(elements) + 1)
        self.free = np.arange(3, self.n_dof)
        self.fixed = np.arange(3)
        self.mass = mass
        self.top = self.n_dof - 3

    def mass_vector(self, mass: float | None = None) -> np.ndarray:
        mv = np.zeros(self.n_dof)
        mv[self.top:self.top + 2] = self.mass if mass is None else mass
        return mv

    def assemble(self, d: np.ndarray):
        K = np.zeros((self.n_dof, self.n_dof))
        f = np.zeros(self.n_dof)
        for i, el in enumerate(self.elements):
            sl = slice(3 * i, 3 * i + 6)
            Ke, fe = el.assemble(d[sl])
            K[sl, sl] += Ke
            f[sl] += fe
        return K, f

    def commit(self) -> None:
        for el in self.elements:
            el.commit()

    def load_vector(self, program: LoadProgram, t: float) -> np.ndarray:
        lam_m, lam_f = program.load_factors(t)
        f = np.zeros(self.n_dof)
        f[self.top] = -lam_m * program.mass * program.g
        f[self.top + 1] = lam_f * program.F0
        return f

    def dissipated_energy(self) -> float:
        total = 0.0
        for el in self.elements:
            for sec, W in zip(el.sections, el.W):
                for idx, mat in sec.groups:
                    total += W * np.sum(sec.layout.area[idx] * mat.dissipated)
        return float(total)

    def fibers_yielding(self) -> int:
        """Number of concrete fibers holding at least one yielded meso point."""
        n = 0
        for el in self.elements:
            for sec in el.sections:
                for _, mat in sec.groups:
                    if hasattr(mat, "state") and getattr(mat, "tension_cutoff", False):
                        n += int(np.any(np.abs(mat.state.eps_p) > 0, axis=-1).sum())
        return n


def build_column(cfg: ColumnConfig, seed: int = 0, mass: float = 0.0) -> ColumnModel:
    """Column model with independent yield fields per concrete fiber
    (seed ``seed + k`` for fiber ``k``), or one shared field."""
    layout = cfg.layout()
    n_c = cfg.n_layers
    params = ElastoPlasticParams(cfg.C, cfg.H)
    steel = steel_params(cfg.C_s, cfg.f_y, cfg.f_u, cfg.eps_u)
    marginal = MarginalSpec(cfg.m, cfg.s_over_m * cfg.m)
    L_el = cfg.L / cfg.n_elements
    elements = []
    k = 0
    for _ in range(cfg.n_elements):
        sections = []
        for _ in range(cfg.n_sections):
            if cfg.elastic:
                ys = None
            elif cfg.shared_seed:
                y = fiber_yields(cfg.lc_over_d, marginal, seed, N=cfg.N, M=cfg.M)
                ys = np.broadcast_to(y, (n_c,) + y.shape).copy()
            else:
                ys = fiber_yields(cfg.lc_over_d, marginal, seed + k, count=n_c, N=cfg.N, M=cfg.M)
            k += n_c
            sections.append(concrete_section(layout, ys, params, steel, elastic=cfg.elastic))
        elements.append(FiberBeamElement(L_el, sections))
    return ColumnModel(elements, mass)


def _norm_ok(r, f_scale):
    return np.linalg.norm(r) <= TOL_F * f_scale + TOL_ABS


def _newton(model, d, residual, f_scale):
    """Newton-Raphson with backtracking on the residual norm.

    ``residual(d)`` assembles the model at ``d`` and returns
    ``(r_free, J_free, f_int)``.  Bilinear section responses (cracked or
    not) make undamped Newton cycle across the kink; halving the step
    until the residual norm decreases removes the cycling.
    """
    fr = model.free
    r, J, f_int = residual(d)
    for k in range(1, MAX_ITER + 1):
        if _norm_ok(r, f_scale):
            return d, f_int, k
        dd = np.linalg.solve(J, r)
        r0 = np.linalg.norm(r)
        step = 1.0
        for _ in range(MAX_BACKTRACK):
            trial = d.copy()
            trial[fr] += step * dd
            r_t, J_t, f_t = residual(trial)
            if np.linalg.norm(r_t) < r0:
                break
            step *= 0.5
        d, r, J, f_int = trial, r_t, J_t, f_t
    raise ConvergenceError(f"Newton did not converge in {MAX_ITER} iterations")


def static_step(model: ColumnModel, state: DynamicState, f_ext: np.ndarray) -> DynamicState:
    """Newton-Raphson equilibrium ``f_int(d) = f_ext``; commits on success."""
    fr = model.free

    def residual(d):
        K, f_int = model.assemble(d)
        return f_ext[fr] - f_int[fr], K[np.ix_(fr, fr)], f_int

    d, f_int, k = _newton(model, state.d.copy(), residual, np.linalg.norm(f_ext[fr]))
    model.commit()
    return DynamicState(d, state.v, state.a, state.t, state.n + 1, k, f_int, f_ext)


def _newmark(model, state, f_ext, dt, mv):
    fr = model.free
    c0 = 4.0 / dt**2
    massive = mv > 0
    d0 = state.d.copy()
    # massless DOFs carry meaningless Newmark velocities; predict them as fixed
    d0[massive] += dt * state.v[massive] + 0.25 * dt**2 * state.a[massive]
    M_free = np.diag(c0 * mv[fr])

    def accel(d):
        return c0 * (d - state.d - dt * state.v) - state.a

    def residual(d):
        K, f_int = model.assemble(d)
        r = (f_ext - f_int - mv * accel(d))[fr]
        return r, K[np.ix_(fr, fr)] + M_free, f_int

    d, f_int, k = _newton(model, d0, residual, np.linalg.norm(f_ext[fr]))
    model.commit()
    a = accel(d)
    v = state.v + 0.5 * dt * (state.a + a)
    return DynamicState(d, v, a, state.t + dt, state.n + 1, k, f_int, f_ext)


def dynamic_step(model: ColumnModel, state: DynamicState, dt: float,
                 f_ext: np.ndarray, level: int = 0) -> DynamicState:
    """One average-acceleration Newmark step, halving ``dt`` on failure."""
    mv = model.mass_vector()
    try:
        return _newmark(model, state, f_ext, dt, mv)
    except (ConvergenceError, np.linalg.LinAlgError):
        if level >= MAX_HALVINGS:
            raise
        log.info("halving time step at t=%.6g (level %d)", state.t, level + 1)
        half = dynamic_step(model, state, dt / 2, f_ext, level + 1)
        out = dynamic_step(model, half, dt / 2, f_ext, level + 1)
        out.n = state.n + 1
        return out


def _static_with_bisection(model, state, f_prev, f_next, level=0):
    try:
        return static_step(model, state, f_next)
    except (ConvergenceError, np.linalg.LinAlgError):
        if level >= MAX_HALVINGS:
            raise
        f_mid = 0.5 * (f_prev + f_next)
        mid = _static_with_bisection(model, state, f_prev, f_mid, level + 1)
        return _static_with_bisection(model, mid, f_mid, f_next, level + 1)


def run_program(model: ColumnModel, program: LoadProgram, seed: int = 0) -> TimeHistory:
    """Quasi-static ramp up to release, then free vibration until ``program.T``."""
    nd = model.n_dof
    model.mass = program.mass
    mv = model.mass_vector()
    state = DynamicState(np.zeros(nd), np.zeros(nd), np.zeros(nd), f_int=np.zeros(nd),
                         f_ext=np.zeros(nd))
    rec = {k: [] for k in ("t", "u", "Rx", "Ry", "Mb", "ke", "wi", "we", "diss", "it")}
    w_int = w_ext = 0.0

    def record(st, t):
        rec["t"].append(t)
        rec["u"].append(st.d[model.top + 1])
        rec["Ry"].append(st.f_int[0])
        rec["Rx"].append(st.f_int[1])
        rec["Mb"].append(st.f_int[2])
        rec["ke"].append(0.5 * np.sum(mv * st.v**2))
        rec["wi"].append(w_int)
        rec["we"].append(w_ext)
        rec["diss"].append(model.dissipated_energy())
        rec["it"].append(st.k)

    record(state, 0.0)
    for t in program.static_times():
        f = model.load_vector(program, t)
        new = _static_with_bisection(model, state, state.f_ext, f)
        dd = new.d - state.d
        w_int += 0.5 * np.dot(state.f_int + new.f_int, dd)
        w_ext += 0.5 * np.dot(state.f_ext + new.f_ext, dd)
        new.t = t
        state = new
        record(state, t)

    # release: horizontal force drops to zero, mass starts to act
    f = model.load_vector(program, program.t_release + program.dt)
    a0 = np.zeros(nd)
    has_mass = mv > 0
    r0 = f - state.f_int
    a0[has_mass] = r0[has_mass] / mv[has_mass]
    state = DynamicState(state.d, np.zeros(nd), a0, program.t_release, state.n, 0,
                         state.f_int, f)
    n_dyn = int(round((program.T - program.t_release) / program.dt))
    for i in range(n_dyn):
        new = dynamic_step(model, state, program.dt, f)
        dd = new.d - state.d
        w_int += 0.5 * np.dot(state.f_int + new.f_int, dd)
        w_ext += 0.5 * np.dot(state.f_ext + new.f_ext, dd)
        new.t = program.t_release + (i + 1) * program.dt
        state = new
        record(state, state.t)

    arr = {k: np.asarray(v) for k, v in rec.items()}
    return TimeHistory(arr["t"], arr["u"], arr["Rx"], arr["Ry"], arr["Mb"], program.dt,
                       program.F0, seed, program.t_release, arr["ke"], arr["wi"], arr["we"],
                       arr["diss"], arr["it"])
