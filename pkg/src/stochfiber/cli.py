"""Command line entry point and scenario orchestration.

    stochfiber <scenario> --config <path> [--seed <int>] [--out <dir>] [--jobs <int>]

Realization ``i`` of an ensemble always uses seed ``base_seed + i``, so
results do not depend on ``--jobs``.  Every output directory receives a
``manifest.txt`` listing each file with its scenario, seeds and the hash
of the resolved configuration (also written, as ``config.resolved``).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from . import dynamics as dyn
from .config import ConfigError, ExperimentConfig, cyclic_segments, load_config, strain_history
from .macro import ConvergenceError, FiberMesoStructure, run_strain_path
from .meso import ElastoPlasticParams
from .oracle import OracleParams, elastic_fraction, monotonic_curve, tangent
from .random_field import (FieldConfigError, FieldSpec, MarginalSpec, fiber_yields,
                           generate_gaussian_field, lognormal_transform, write_field)
from .response import (InsufficientDataError, damping_history, ensemble_stats, find_peaks,
                       write_columns)

__all__ = ["run_scenario", "main", "Manifest", "monotonic_ensemble"]

log = logging.getLogger(__name__)


class Manifest:
    def __init__(self, out_dir: str, cfg: ExperimentConfig):
        self.out_dir = out_dir
        self.cfg = cfg
        self.entries: list[tuple[str, str]] = []

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def add(self, name: str, seeds: str) -> None:
        self.entries.append((name, seeds))

    def write(self) -> str:
        p = self.path("manifest.txt")
        h = self.cfg.digest()
        with open(p, "w", encoding="ascii") as fh:
            fh.write(f"# scenario={self.cfg.scenario} config={h}\n")
            for name, seeds in self.entries:
                fh.write(f"{name} scenario={self.cfg.scenario} seed={seeds} config={h}\n")
        return p


def _seed_range(base: int, count: int) -> str:
    return str(base) if count == 1 else f"{base}..{base + count - 1}"


def _variant(x: float) -> str:
    return f"{x:g}"


def _chunks(count: int, jobs: int):
    jobs = max(1, min(jobs, count))
    edges = np.linspace(0, count, jobs + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _monotonic_chunk(args):
    lc, m, s, C, H, N, M, N_f, seed, lo, hi, path = args
    ys = fiber_yields(lc, MarginalSpec(m, s), seed + lo, count=hi - lo, N=N, M=M, n_f_white=N_f)
    fib = FiberMesoStructure(ys, ElastoPlasticParams(C, H))
    Sig, _, _ = run_strain_path(fib, path)
    return lo, Sig


def monotonic_ensemble(cfg: ExperimentConfig, lc: float, m: float, s: float,
                       path: np.ndarray, jobs: int = 1) -> np.ndarray:
    """Macro stress along ``path`` for ``cfg.count`` realizations, shape ``(count, len(path))``."""
    tasks = [(lc, m, s, cfg.C, cfg.H, cfg.N, cfg.M, cfg.N_f, cfg.seed, lo, hi, path)
             for lo, hi in _chunks(cfg.count, jobs)]
    out = np.empty((cfg.count, path.size))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_monotonic_chunk, tasks))
    else:
        results = [_monotonic_chunk(t) for t in tasks]
    for lo, Sig in results:
        out[lo:lo + Sig.shape[0]] = Sig
    return out


def _run_genfield(cfg, man, jobs):
    spec = FieldSpec(lc=cfg.lc, N=cfg.N, M=cfg.M)
    marg = MarginalSpec(cfg.m, cfg.s if cfg.s is not None else 0.0) if cfg.m else None
    for i in range(cfg.count):
        seed = cfg.seed + i
        grid = generate_gaussian_field(spec, seed)
        name = f"field_s{seed}.dat"
        write_field(man.path(name), grid)
        man.add(name, str(seed))
        if marg is not None:
            name = f"yield_s{seed}.dat"
            write_field(man.path(name), grid, lognormal_transform(grid, marg).values)
            man.add(name, str(seed))


def _run_material_test(cfg, man, jobs):
    mono = strain_history([(cfg.E_max, cfg.n_steps)])
    segs = cfg.strain_history or cyclic_segments(cfg.cycles, cfg.strain_step)
    cyc = strain_history(segs)
    seeds = _seed_range(cfg.seed, cfg.count)
    for lc in cfg.lc_over_d:
        for m, s in cfg.marginals():
            var = f"lc{_variant(lc)}_sm{_variant(s / m)}"
            Sig = monotonic_ensemble(cfg, lc, m, s, mono, jobs)
            ens = ensemble_stats(mono, Sig)
            name = f"fig7_{var}.dat"
            write_columns(man.path(name), [ens.grid, ens.mean, ens.std], "E Sigma_mean Sigma_std")
            man.add(name, seeds)

            ys = fiber_yields(lc, MarginalSpec(m, s), cfg.seed, N=cfg.N, M=cfg.M,
                              n_f_white=cfg.N_f)
            fib = FiberMesoStructure(ys, ElastoPlasticParams(cfg.C, cfg.H))
            S, D, events = run_strain_path(fib, cyc)
            name = f"fig7_{var}_cyclic.dat"
            header = "E Sigma D" + "".join(
                f"\n# cutoff step={k} Ec={Ec:.9g}" for k, _, Ec in events)
            write_columns(man.path(name), [cyc, S, D], header)
            man.add(name, str(cfg.seed))


def _run_oracle(cfg, man, jobs):
    for m, s in cfg.marginals():
        p = OracleParams(cfg.C, cfg.H, m, s)
        E, Sig = monotonic_curve(p, cfg.E_max, cfg.n_steps)
        name = f"fig6_sm{_variant(s / m)}.dat"
        write_columns(man.path(name), [E, Sig, tangent(E, p), elastic_fraction(E, p)],
                      "E Sigma D fraction")
        man.add(name, "none")


def _column_cfg(cfg: ExperimentConfig) -> dyn.ColumnConfig:
    m = cfg.m if cfg.m is not None else 30.5e6
    sm = cfg.s_over_m[0] if cfg.s_over_m else (cfg.s / m if cfg.s is not None else 0.943)
    return dyn.ColumnConfig(
        C=cfg.C, H=cfg.H, m=m, s_over_m=sm, lc_over_d=cfg.lc_over_d[0], N=cfg.N, M=cfg.M,
        w=cfg.w, h=cfg.h, L=cfg.L, cover=cfg.cover, bar_diameter=cfg.bar_diameter,
        bars_per_face=cfg.bars_per_face, n_layers=cfg.N_F, n_sections=cfg.N_l,
        C_s=cfg.C_s, f_y=cfg.f_y, f_u=cfg.f_u, eps_u=cfg.eps_u,
        shared_seed=cfg.shared_seed, elastic=cfg.elastic,
    )


def _simulate(args):
    col_cfg, F0, mass, T, dt, seed = args
    model = dyn.build_column(col_cfg, seed=seed)
    return dyn.run_program(model, dyn.LoadProgram(mass=mass, F0=F0, T=T, dt=dt), seed=seed)


def _write_damping(man, hist, name, n_c, t_start, seeds):
    try:
        peaks = find_peaks(hist.t, hist.u_top, t_start=t_start)
        t, xi = damping_history(peaks, n_c)
    except InsufficientDataError as exc:
        log.warning("%s: no damping history (%s)", name, exc)
        return
    write_columns(man.path(name), [t, xi], "t xi")
    man.add(name, seeds)


def _run_column_sim(cfg, man, jobs):
    col = _column_cfg(cfg)
    tasks = [(col, F0, cfg.mass, cfg.T, cfg.dt, cfg.seed) for F0 in cfg.F0]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as ex:
            hists = list(ex.map(_simulate, tasks))
    else:
        hists = [_simulate(t) for t in tasks]
    for F0, h in zip(cfg.F0, hists):
        var = f"F{_variant(F0 / 1e3)}kN"
        name = f"fig11_{var}.dat"
        h.write(man.path(name))
        man.add(name, str(cfg.seed))
        _write_damping(man, h, f"fig12_{var}.dat", cfg.N_c, h.t_release, str(cfg.seed))


def _run_damping(cfg, man, jobs):
    t_release = dyn.LoadProgram().t_release
    for path in cfg.histories:
        h = dyn.TimeHistory.read(path)
        stem = os.path.splitext(os.path.basename(path))[0]
        _write_damping(man, h, f"fig12_{stem}.dat", cfg.N_c, t_release, str(h.seed))


_RUNNERS = {
    "genfield": _run_genfield,
    "material-test": _run_material_test,
    "oracle": _run_oracle,
    "column-sim": _run_column_sim,
    "damping": _run_damping,
}


def run_scenario(cfg: ExperimentConfig, jobs: int = 1) -> Manifest:
    """Execute ``cfg.scenario``; write outputs, the resolved config and the manifest."""
    os.makedirs(cfg.out, exist_ok=True)
    man = Manifest(cfg.out, cfg)
    with open(man.path("config.resolved"), "w", encoding="ascii") as fh:
        fh.write(cfg.echo())
    man.add("config.resolved", str(cfg.seed))
    _RUNNERS[cfg.scenario](cfg, man, jobs)
    man.write()
    return man


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stochfiber", description=__doc__.split("\n\n")[0])
    p.add_argument("scenario", choices=list(_RUNNERS))
    p.add_argument("--config", required=True, help="key = value configuration file")
    p.add_argument("--seed", type=int, help="base seed (overrides the config)")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.scenario)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("seed", "must be >= 0")
            cfg = replace(cfg, seed=args.seed)
        if args.out is not None:
            cfg = replace(cfg, out=args.out)
        if args.jobs < 1:
            raise ConfigError("jobs", "must be >= 1")
    except (ConfigError, FieldConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        man = run_scenario(cfg, args.jobs)
    except (ConvergenceError, np.linalg.LinAlgError, FieldConfigError, ValueError) as exc:
        print(f"{cfg.scenario} failed: {exc}", file=sys.stderr)
        return 1
    print(man.path("manifest.txt"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
