import numpy as np, time
from periodica import build_medium, TorusGrid
from periodica.evolve import (run_damped_wave, BandPropagator, band_sigma_grid)
from periodica.bloch import first_band
from periodica.analysis import weighted_norm
from periodica.medium import sample_on_grid

ref = {"dimension": 1,
       "G": {"type": "cosine-series", "mean": 1.0, "terms": [{"amplitude": 0.5, "wavevector": [1]}]},
       "w": {"type": "expression", "expr": "1 + 0.25*sin(2*pi*x)"},
       "a": {"type": "cosine-series", "mean": 1.0, "terms": [{"amplitude": 0.9, "wavevector": [1]}]}}
m = build_medium(ref)
grid = TorusGrid(1, 32, 1024)
t_wrap = grid.wrap_time(m.bounds.w_min, m.bounds.g_max)
xb = grid.centered_coords()[..., 0]
u0 = np.exp(-xb**2 / 8.0)
v0 = np.zeros_like(u0)
snaps = np.unique(np.concatenate([[0.0], np.geomspace(50.0, t_wrap, 8)]))

t0 = time.time()
run = run_damped_wave(m, grid, (u0, v0), t_wrap, snapshot_times=snaps)
print("wave:", time.time() - t0, flush=True)

# criterion 9: band propagator
t0 = time.time()
sig = band_sigma_grid(grid, 0.45)
print("sigma points:", len(sig), flush=True)
band = first_band(m, 32, sig)
print("band:", time.time() - t0, "r_est:", band.radius, "g2:", band.gamma2, flush=True)
t0 = time.time()
prop = BandPropagator(band, grid, radius=0.45)
tables = sample_on_grid(m, grid)
F = (u0.astype(complex), 1j * tables.w * v0)
ball = np.abs(xb) <= 16.0
hd = grid.cell_volume
for st in run.states:
    if st.t < 49.0:
        continue
    pu, pv = prop(F, st.t)
    diff = np.sqrt(np.sum(np.abs(st.u - pu.real)[ball] ** 2) * hd)
    ref_n = np.sqrt(np.sum(np.abs(st.u)[ball] ** 2) * hd)
    print(f"t={st.t:7.2f} |wave-band|/|wave| = {diff / ref_n:.4f}", flush=True)
print("propagate:", time.time() - t0, flush=True)

# criterion 10: compact G bump perturbation
pert_cfg = dict(ref)
pert_cfg["perturbation"] = {"G": {"profile": "bump", "amplitude": 0.3, "radius": 4.0}}
mp = build_medium(pert_cfg)
dt = None
from periodica.evolve import cfl_limit
dtv = cfl_limit(mp, grid)
snaps10 = np.unique(np.concatenate([[0.0], np.geomspace(50.0, t_wrap, 12)]))
t0 = time.time()
runp = run_damped_wave(mp, grid, (u0, v0), t_wrap, dt=dtv, snapshot_times=snaps10)
runf = run_damped_wave(mp.without_perturbation(), grid, (u0, v0), t_wrap, dt=dtv, snapshot_times=snaps10)
print("perturb pair:", time.time() - t0, flush=True)
from periodica.analysis import fit_decay_exponent
delta = -1.5 * 0.4
diffs = [weighted_norm(sp.u - sf.u, grid, delta) for sp, sf in zip(runp.states, runf.states)]
bases = [weighted_norm(sf.u, grid, delta) for sf in runf.states]
ts = runp.times
fd = fit_decay_exponent(ts, diffs, (50.0, t_wrap))
fb = fit_decay_exponent(ts, bases, (50.0, t_wrap))
print("diff exp:", fd.fitted_exponent, "base exp:", fb.fitted_exponent,
      "gap:", fb.fitted_exponent - fd.fitted_exponent, flush=True)
