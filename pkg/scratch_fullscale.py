import numpy as np, time
from periodica import build_medium, TorusGrid
from periodica.evolve import run_damped_wave, heat_comparator
from periodica.homogenize import homogenize
from periodica.analysis import (WeightSpec, weighted_norm, compare_wave_heat,
                                fit_decay_exponent, spectral_gradient)

ref = {"dimension": 1,
       "G": {"type": "cosine-series", "mean": 1.0, "terms": [{"amplitude": 0.5, "wavevector": [1]}]},
       "w": {"type": "expression", "expr": "1 + 0.25*sin(2*pi*x)"},
       "a": {"type": "cosine-series", "mean": 1.0, "terms": [{"amplitude": 0.9, "wavevector": [1]}]}}
m = build_medium(ref)
grid = TorusGrid(1, 32, 1024)
t_wrap = grid.wrap_time(m.bounds.w_min, m.bounds.g_max)
print("t_wrap:", t_wrap, flush=True)
xb = grid.centered_coords()[..., 0]
u0 = np.exp(-xb**2 / (2 * 2.0**2))
v0 = np.zeros_like(u0)
snaps = np.unique(np.concatenate([[0.0], np.geomspace(40.0, t_wrap, 18)]))
t0 = time.time()
run = run_damped_wave(m, grid, (u0, v0), t_wrap, snapshot_times=snaps)
print("wave run:", time.time() - t0, "s", flush=True)
hd = homogenize(m, 256)
heat = heat_comparator(m, hd, (u0, v0), grid, run.times)
spec = WeightSpec(s1=0.5, s2=0.5, kappa=1.5)
rep = compare_wave_heat(run, heat, hd, spec, grid)
win = (50.0, t_wrap)
for k in ["heat_u", "diff_u", "heat_dt", "diff_dt", "heat_grad", "diff_grad", "diff_grad_id"]:
    f = rep.fit(k, win)
    print(f"{k:14s} exponent {f.fitted_exponent:+.3f} resid {f.fit_residual:.3f}", flush=True)
delta = -spec.kappa * spec.s1
wave_u = [weighted_norm(s.u, grid, delta) for s in run.states]
wave_dt = [weighted_norm(s.v, grid, delta) for s in run.states]
wave_grad = []
for s in run.states:
    g = spectral_gradient(s.u, grid)[0]
    wave_grad.append(weighted_norm(g, grid, -spec.kappa * spec.s1 - 1.0))
for name, vals in [("wave_u", wave_u), ("wave_dt", wave_dt), ("wave_grad", wave_grad)]:
    f = fit_decay_exponent(run.times, vals, win)
    print(f"{name:14s} exponent {f.fitted_exponent:+.3f} resid {f.fit_residual:.3f}", flush=True)
np.savez("/tmp/fullscale.npz", times=run.times,
         wave_u=wave_u, wave_dt=wave_dt, wave_grad=wave_grad,
         **{k: rep.series[k] for k in rep.series})
print("saved /tmp/fullscale.npz", flush=True)
