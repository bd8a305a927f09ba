import numpy as np, time
from periodica import build_medium, TorusGrid
from periodica.evolve import run_damped_wave, cfl_limit
from periodica.analysis import weighted_norm, fit_decay_exponent

ref = {"dimension": 1,
       "G": {"type": "cosine-series", "mean": 1.0, "terms": [{"amplitude": 0.5, "wavevector": [1]}]},
       "w": {"type": "expression", "expr": "1 + 0.25*sin(2*pi*x)"},
       "a": {"type": "cosine-series", "mean": 1.0, "terms": [{"amplitude": 0.9, "wavevector": [1]}]}}
pert_cfg = dict(ref)
pert_cfg["perturbation"] = {"G": {"profile": "bump", "amplitude": 0.3, "radius": 4.0}}
mp = build_medium(pert_cfg)
grid = TorusGrid(1, 32, 1024)
t_wrap = grid.wrap_time(mp.bounds.w_min, mp.bounds.g_max)
print("t_wrap (perturbed bounds):", t_wrap, flush=True)
xb = grid.centered_coords()[..., 0]
u0 = np.exp(-xb**2 / 8.0)
v0 = np.zeros_like(u0)
dtv = cfl_limit(mp, grid)
snaps = np.unique(np.concatenate([[0.0], np.geomspace(45.0, t_wrap, 14)]))
t0 = time.time()
runp = run_damped_wave(mp, grid, (u0, v0), t_wrap, dt=dtv, snapshot_times=snaps)
runf = run_damped_wave(mp.without_perturbation(), grid, (u0, v0), t_wrap, dt=dtv, snapshot_times=snaps)
print("pair:", time.time() - t0, flush=True)
delta = -1.5 * 0.4
diffs = [weighted_norm(sp.u - sf.u, grid, delta) for sp, sf in zip(runp.states, runf.states)]
bases = [weighted_norm(sf.u, grid, delta) for sf in runf.states]
ts = runp.times
win = (44.0, t_wrap + 1.0)
fd = fit_decay_exponent(ts, diffs, win)
fb = fit_decay_exponent(ts, bases, win)
print("diff exp:", fd.fitted_exponent, "resid", fd.fit_residual, flush=True)
print("base exp:", fb.fitted_exponent, "resid", fb.fit_residual, flush=True)
print("gap:", fb.fitted_exponent - fd.fitted_exponent, flush=True)
for t, dnorm, bnorm in zip(ts, diffs, bases):
    print(f"  t={t:7.2f} diff={dnorm:.4e} base={bnorm:.4e}", flush=True)
