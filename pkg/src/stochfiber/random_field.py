"""Periodic 2D Gaussian fields by spectral representation, log-normal
translation and mapping onto fiber meso-meshes.

The Gaussian field has a separable triangle power spectral density

    S(k1, k2) = Lambda(k1/ku) Lambda(k2/ku) / ku**2,   Lambda(k) = max(1 - |k|, 0)

whose Fourier pair is the sinc^2 autocorrelation.  Fields are synthesized
on an ``M x M`` grid with two 2D FFTs (one per quadrant pair of wave
vectors) from independent uniform phase angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FieldSpec",
    "MarginalSpec",
    "GaussianFieldGrid",
    "YieldField",
    "FiberYieldAssignment",
    "triangle_psd",
    "autocorrelation",
    "spectral_amplitudes",
    "generate_gaussian_field",
    "lognormal_transform",
    "fiber_mesh_count",
    "map_to_fiber_mesh",
    "white_noise_yields",
    "fiber_yields",
    "write_field",
    "read_field",
]


class FieldConfigError(ValueError):
    """Inconsistent discretization of a random field."""


@dataclass(frozen=True)
class FieldSpec:
    """Discretization of a periodic field with correlation length ``lc``.

    ``N`` wave numbers span ``[0, ku]`` and ``M`` grid points span one
    period ``L0 = N * lc``.  ``lc == 0`` denotes the white-noise limit,
    for which no grid exists.
    """

    lc: float
    N: int = 10
    M: int = 64

    def __post_init__(self):
        if self.lc < 0 or not math.isfinite(self.lc):
            raise FieldConfigError(f"correlation length must be >= 0, got {self.lc}")
        if self.N < 1 or self.M < 1:
            raise FieldConfigError("N and M must be positive integers")
        if self.lc > 0 and self.M < 2 * self.N:
            raise FieldConfigError(
                f"M={self.M} < 2N={2 * self.N}: spectral synthesis would alias"
            )

    @property
    def white_noise(self) -> bool:
        return self.lc == 0.0

    @property
    def ku(self) -> float:
        return 2.0 * math.pi / self.lc

    @property
    def dk(self) -> float:
        return self.ku / self.N

    @property
    def L0(self) -> float:
        return self.N * self.lc

    @property
    def dx(self) -> float:
        return self.L0 / self.M


@dataclass(frozen=True)
class MarginalSpec:
    """Mean ``m`` and standard deviation ``s`` of the log-normal yield stress."""

    m: float
    s: float

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError(f"mean yield stress must be > 0, got {self.m}")
        if self.s < 0:
            raise ValueError(f"standard deviation must be >= 0, got {self.s}")

    @property
    def s_G(self) -> float:
        return math.sqrt(math.log1p((self.s / self.m) ** 2))

    @property
    def m_G(self) -> float:
        return math.log(self.m) - 0.5 * math.log1p((self.s / self.m) ** 2)

    @property
    def median(self) -> float:
        return math.exp(self.m_G)


@dataclass
class GaussianFieldGrid:
    values: np.ndarray
    spec: FieldSpec
    seed: int


@dataclass
class YieldField:
    values: np.ndarray
    marginal: MarginalSpec
    source: GaussianFieldGrid | None = None


@dataclass
class FiberYieldAssignment:
    d: float
    N_f: int
    yields: np.ndarray
    centroids: np.ndarray = field(repr=False, default=None)


def triangle_psd(k1, k2, ku: float):
    """Separable triangle spectral density, zero outside ``|ki| <= ku``."""
    if not ku > 0:
        raise ValueError(f"cut-off wave number must be > 0, got {ku}")
    l1 = np.clip(1.0 - np.abs(np.asarray(k1, dtype=float) / ku), 0.0, None)
    l2 = np.clip(1.0 - np.abs(np.asarray(k2, dtype=float) / ku), 0.0, None)
    out = l1 * l2 / ku**2
    return float(out) if np.ndim(out) == 0 else out


def autocorrelation(z1, z2, ku: float):
    """Autocorrelation paired with :func:`triangle_psd`."""
    if not ku > 0:
        raise ValueError(f"cut-off wave number must be > 0, got {ku}")
    # np.sinc is the normalized sinc sin(pi x)/(pi x)
    out = np.sinc(ku * np.asarray(z1, dtype=float) / (2 * np.pi)) ** 2 * np.sinc(
        ku * np.asarray(z2, dtype=float) / (2 * np.pi)
    ) ** 2
    return float(out) if np.ndim(out) == 0 else out


def spectral_amplitudes(spec: FieldSpec) -> np.ndarray:
    """Real amplitudes ``|B[n1, n2]| = |B~[n1, n2]|`` on the ``M x M`` index grid.

    Wave vectors on the ``k1 = 0`` or ``k2 = 0`` axes are shared by the
    two synthesized quadrant sums, so they carry half the spectral weight
    (trapezoidal rule on the symmetric spectrum).  The ``(0, 0)`` term is
    dropped, which keeps the spatial mean over one period at zero.  With
    these weights the discrete variance is ``1 - 1/N**2``.
    """
    if spec.white_noise:
        raise FieldConfigError("white-noise fields have no spectral representation")
    k = np.arange(spec.M) * spec.dk
    lam = np.clip(1.0 - k / spec.ku, 0.0, None)
    w = np.ones(spec.M)
    w[0] = 0.5
    S = np.outer(lam * w, lam * w) / spec.ku**2
    S[0, 0] = 0.0
    return 2.0 * spec.dk * np.sqrt(S)


def _synthesize(amp: np.ndarray, phi: np.ndarray, psi: np.ndarray) -> np.ndarray:
    M = amp.shape[-1]
    B = amp * np.exp(1j * phi)
    Bt = amp * np.exp(1j * psi)
    # sum_n B exp(+i(n1 p1 + n2 p2)) and sum_n B~ exp(+i n1 p1 - i n2 p2)
    g = M * M * np.fft.ifft2(B, axes=(-2, -1))
    g += M * np.fft.ifft(np.fft.fft(Bt, axis=-1), axis=-2)
    return g.real


def _phases(seed: int, M: int, count: int | None = None):
    rng = np.random.Generator(np.random.Philox(seed))
    shape = (M, M) if count is None else (count, M, M)
    if count is None:
        phi = rng.uniform(0.0, 2 * np.pi, shape)
        psi = rng.uniform(0.0, 2 * np.pi, shape)
        return phi, psi
    # one stream per realization keeps batch draws identical to single draws
    phi = np.empty(shape)
    psi = np.empty(shape)
    for i in range(count):
        phi[i], psi[i] = _phases(seed + i, M)
    return phi, psi


def generate_gaussian_field(spec: FieldSpec, seed: int) -> GaussianFieldGrid:
    """One realization of the unit centered Gaussian field on the grid.

    Phase angles are drawn from a Philox stream keyed by ``seed``: first the
    ``M x M`` angles of the ``B`` sum in row-major order, then those of the
    ``B~`` sum.
    """
    amp = spectral_amplitudes(spec)
    phi, psi = _phases(seed, spec.M)
    return GaussianFieldGrid(_synthesize(amp, phi, psi), spec, seed)


def generate_gaussian_fields(spec: FieldSpec, seed: int, count: int) -> np.ndarray:
    """Stack of ``count`` realizations for seeds ``seed, seed+1, ...``.

    Slice ``i`` is bit-identical to ``generate_gaussian_field(spec, seed+i)``.
    """
    amp = spectral_amplitudes(spec)
    phi, psi = _phases(seed, spec.M, count)
    return _synthesize(amp, phi, psi)


def lognormal_transform(grid, marginal: MarginalSpec) -> YieldField:
    """Pointwise ``exp(m_G + s_G * G)``.  Accepts a grid or a raw array."""
    values = grid.values if isinstance(grid, GaussianFieldGrid) else np.asarray(grid)
    out = np.exp(marginal.m_G + marginal.s_G * values)
    return YieldField(out, marginal, grid if isinstance(grid, GaussianFieldGrid) else None)


def fiber_mesh_count(d: float, dx: float, rtol: float = 1e-9) -> int:
    """Number of meshes per side of a fiber section of edge ``d``."""
    ratio = d / dx
    nearest = round(ratio)
    if abs(ratio - nearest) <= rtol * max(ratio, 1.0):
        return max(int(nearest), 1)
    return int(math.floor(ratio)) + 1


def _bilinear_periodic(values: np.ndarray, x: np.ndarray, dx: float) -> np.ndarray:
    """Bilinear interpolation at coordinates ``x`` (1D, both axes) with wrap.

    ``values`` may carry leading batch axes; the last two are the grid.
    """
    M = values.shape[-1]
    u = x / dx
    p = np.floor(u).astype(int)
    t = u - p
    i0 = p % M
    i1 = (p + 1) % M
    v00 = values[..., i0[:, None], i0[None, :]]
    v10 = values[..., i1[:, None], i0[None, :]]
    v01 = values[..., i0[:, None], i1[None, :]]
    v11 = values[..., i1[:, None], i1[None, :]]
    ta = t[:, None]
    tb = t[None, :]
    return (
        (1 - ta) * (1 - tb) * v00
        + ta * (1 - tb) * v10
        + (1 - ta) * tb * v01
        + ta * tb * v11
    )


def map_to_fiber_mesh(field_, d: float, spec: FieldSpec | None = None) -> FiberYieldAssignment:
    """Interpolate a digitized yield field at the ``N_f**2`` mesh centroids.

    The fiber section is the square ``[0, d]^2`` anchored at the grid
    origin; it must fit in one period of the field.
    """
    if isinstance(field_, YieldField):
        values = field_.values
        spec = spec or (field_.source.spec if field_.source is not None else None)
    else:
        values = np.asarray(field_)
    if spec is None:
        raise FieldConfigError("a FieldSpec is needed to locate grid nodes")
    if d > spec.L0 * (1 + 1e-12):
        raise FieldConfigError(
            f"fiber edge d={d} exceeds the field period L0={spec.L0}; "
            "the section must be smaller or equal to a period"
        )
    n_f = fiber_mesh_count(d, spec.dx)
    xc = (np.arange(n_f) + 0.5) * (d / n_f)
    return FiberYieldAssignment(d, n_f, _bilinear_periodic(values, xc, spec.dx), xc)


def white_noise_yields(n_f: int, marginal: MarginalSpec, seed: int, count: int | None = None):
    """I.i.d. log-normal yields at ``n_f**2`` centroids (zero correlation length)."""
    shape = (n_f, n_f) if count is None else (count, n_f, n_f)
    if count is None:
        g = np.random.Generator(np.random.Philox(seed)).standard_normal(shape)
    else:
        g = np.stack(
            [np.random.Generator(np.random.Philox(seed + i)).standard_normal((n_f, n_f))
             for i in range(count)]
        )
    return np.exp(marginal.m_G + marginal.s_G * g)


def fiber_yields(
    lc_over_d: float,
    marginal: MarginalSpec,
    seed: int,
    count: int | None = None,
    N: int = 10,
    M: int = 64,
    n_f_white: int = 64,
) -> np.ndarray:
    """Yield stresses of one (or ``count``) fiber meso-structures of unit edge.

    Returns shape ``(N_f, N_f)`` or ``(count, N_f, N_f)``.  A zero
    ``lc_over_d`` draws white noise on ``n_f_white**2`` centroids.
    """
    if lc_over_d == 0:
        return white_noise_yields(n_f_white, marginal, seed, count)
    spec = FieldSpec(lc=lc_over_d, N=N, M=M)
    if count is None:
        g = generate_gaussian_field(spec, seed).values
    else:
        g = generate_gaussian_fields(spec, seed, count)
    y = np.exp(marginal.m_G + marginal.s_G * g)
    return map_to_fiber_mesh(y, 1.0, spec).yields


def write_field(path, grid: GaussianFieldGrid, values: np.ndarray | None = None) -> None:
    """Plain-text dump: one header line then ``M`` rows of ``M`` decimals."""
    v = grid.values if values is None else values
    s = grid.spec
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# M={s.M} dx={s.dx:.9g} lc={s.lc:.9g} seed={grid.seed}\n")
        for row in v:
            fh.write(" ".join(f"{x:.9g}" for x in row) + "\n")


def read_field(path) -> tuple[dict, np.ndarray]:
    with open(path, encoding="ascii") as fh:
        header = fh.readline()
    if not header.startswith("#"):
        raise ValueError(f"{path}: missing field header")
    meta = {}
    for tok in header[1:].split():
        key, _, val = tok.partition("=")
        meta[key] = int(val) if key in ("M", "seed") else float(val)
    values = np.loadtxt(path, comments="#", ndmin=2)
    if values.shape != (meta["M"], meta["M"]):
        raise ValueError(f"{path}: expected {meta['M']}x{meta['M']} values, got {values.shape}")
    return meta, values
