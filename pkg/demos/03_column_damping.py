"""
Damping that comes from the material alone
==========================================

A reinforced concrete cantilever carries a 500 kg top mass.  A lateral
force is ramped up quasi-statically and released at t = 2 s.  No damping
matrix exists, so any decay of the free vibration is hysteretic.  Runs take
about 20 s each.
"""

from stochfiber import ColumnConfig, LoadProgram, build_column, run_program
from stochfiber.response import damping_history, find_peaks, vibration_period

cfg = ColumnConfig()
print(f"section {cfg.w * 1e3:.0f} x {cfg.h * 1e3:.0f} mm, length {cfg.L} m, "
      f"{cfg.n_layers} concrete layers, {cfg.n_sections} control sections")

for F0 in (5e3, 15e3):
    model = build_column(cfg, seed=0)
    hist = run_program(model, LoadProgram(mass=500.0, F0=F0, T=5.0))
    t, u = hist.free_vibration()
    peaks = find_peaks(t, u)
    tt, xi = damping_history(peaks, n_c=5)
    print(f"\nF0 = {F0 / 1e3:.0f} kN: {model.fibers_yielding()} fibers yielded, "
          f"period {vibration_period(peaks):.4f} s")
    for k in range(0, len(xi), max(1, len(xi) // 5)):
        print(f"  t = {tt[k]:.2f} s  xi = {100 * xi[k]:.4f} %")

elastic = run_program(build_column(ColumnConfig(elastic=True)), LoadProgram(F0=15e3, T=3.0))
t, u = elastic.free_vibration()
_, xi = damping_history(find_peaks(t, u, offset=0.0))
print(f"\nelastic column: largest |xi| {abs(xi).max():.1e}")
