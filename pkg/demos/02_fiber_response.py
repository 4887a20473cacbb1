"""
Macro response of a heterogeneous fiber
=======================================

Each meso point of a fiber is a 1D elasto-plastic element with its own yield
stress.  Averaging gives a smooth macro curve.  With independent yields the
ensemble mean matches the closed-form curve, and wide yield distributions
open hysteresis loops under partial unloading.
"""

import numpy as np

from stochfiber import ElastoPlasticParams, FiberMesoStructure, MarginalSpec, OracleParams
from stochfiber.macro import run_strain_path
from stochfiber.oracle import monotonic_curve
from stochfiber.random_field import fiber_yields
from stochfiber.response import loop_area

MPa = 1e6
p = OracleParams(C=30e9, H=10e9, m=30 * MPa, s=30 * MPa)
E, S_closed = monotonic_curve(p, E_max=-5e-3, n_steps=10)

ys = fiber_yields(0.0, MarginalSpec(p.m, p.s), seed=0, count=20)
S_sim, D_sim, _ = run_strain_path(FiberMesoStructure(ys, ElastoPlasticParams(p.C, p.H)), E)
print("     E     closed form   20-fiber mean   (MPa)")
for e, a, b in zip(E, S_closed, S_sim.mean(axis=0)):
    print(f"{e:9.1e}  {a / MPa:10.3f}   {b / MPa:10.3f}")

# partial unload-reload loops for a narrow and a wide distribution
path = np.r_[np.linspace(0, -2e-3, 201), np.linspace(-2e-3, -1e-3, 101)[1:],
             np.linspace(-1e-3, -2e-3, 101)[1:]]
for sm in (0.1, 1.0):
    y = fiber_yields(0.1, MarginalSpec(30 * MPa, sm * 30 * MPa), seed=0)
    S, _, _ = run_strain_path(FiberMesoStructure(y, ElastoPlasticParams(27.5e9, 0.0)), path)
    print(f"s/m = {sm}: loop area {loop_area(path[200:], S[200:]):.1f} J/m^3")

# unloading all the way back passes the tension cut-off
cyc = np.r_[np.linspace(0, -3e-3, 31), np.linspace(-3e-3, 0, 31)[1:]]
S, D, events = run_strain_path(FiberMesoStructure(fiber_yields(0.1, MarginalSpec(30 * MPa, 30 * MPa), 1),
                                                  ElastoPlasticParams(27.5e9, 0.0)), cyc)
for step, _, Ec in events:
    print(f"cut-off reached at step {step}, E^c = {Ec:.4e}; stress stays 0 until recompression")
