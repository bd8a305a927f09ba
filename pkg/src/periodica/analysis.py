"""Weighted norms, energies, power-law decay fits, and wave/heat comparisons.

Weighted spaces use the bracket weight <x> = (1 + |x|^2)^(1/2) measured from
the torus center: the delta-weighted norm is

    ||f||_delta = ( sum <x>^(2 delta) |f(x)|^2 h^d )^(1/2),

so negative delta measures local size and positive delta data localization.
The energy of a state is the quadrature of w |u_t|^2 + <G grad u, grad u>
(optionally with the weight <x>^(-2 delta)), with spectral gradients.

Decay exponents come from least squares on log(norm) vs log(t) over a fit
window; the window must contain at least 8 snapshots spanning at least 0.8
decades of time.  All reductions use numpy's pairwise summation, so results
do not depend on threading.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import (
    ConfigError,
    GridMismatch,
    NonPositiveValues,
    WindowTooShort,
)
from .evolve import HeatState, WaveRun, WaveState
from .homogenize import HomogenizedData
from .medium import Medium, TorusGrid

MIN_FIT_SNAPSHOTS = 8
MIN_FIT_DECADES = 0.8


@dataclass(frozen=True)
class WeightSpec:
    """Weight/localization parameters for decay experiments.

    ``s1`` weights the observed norm, ``s2`` the initial data, ``s`` the
    extra gradient weight, ``kappa > 1`` the bracket exponent scale and
    ``eta`` the perturbation gain.
    """

    s1: float = 0.5
    s2: float = 0.5
    s: float = 0.0
    kappa: float = 1.5
    eta: float = 0.0

    def __post_init__(self):
        if not self.kappa > 1.0:
            raise ConfigError(f"kappa must exceed 1, got {self.kappa}")
        if not (0.0 <= self.s <= 1.0):
            raise ConfigError(f"s must lie in [0, 1], got {self.s}")
        if self.s1 < 0 or self.s2 < 0 or self.eta < 0:
            raise ConfigError("s1, s2, eta must be non-negative")

    def admissible_for(self, dimension: int, rho_G: float, rho_a: float) -> bool:
        bound = min(dimension / 2.0, rho_G, rho_a + 1.0)
        return max(self.s1, self.s2) + self.eta < bound


def bracket_weight(grid: TorusGrid, delta: float) -> np.ndarray:
    """<x>^(2 delta) at the grid nodes, x measured from the torus center."""
    c = grid.centered_coords()
    r2 = np.sum(c * c, axis=-1)
    return (1.0 + r2) ** delta


def weighted_norm(f: np.ndarray, grid: TorusGrid, delta: float = 0.0) -> float:
    if f.shape != grid.shape:
        raise GridMismatch(f"field shape {f.shape} != grid shape {grid.shape}")
    w = bracket_weight(grid, delta)
    return float(np.sqrt(np.sum(w * np.abs(f) ** 2) * grid.cell_volume))


def spectral_gradient(f: np.ndarray, grid: TorusGrid) -> list[np.ndarray]:
    ks = grid.wavenumbers()
    fh = sfft.fftn(f)
    out = []
    for axis in range(grid.dimension):
        shape = [1] * grid.dimension
        shape[axis] = -1
        g = sfft.ifftn(fh * (1j * ks[axis].reshape(shape)))
        out.append(g.real if np.isrealobj(f) else g)
    return out


def energy(state: WaveState, medium: Medium, grid: TorusGrid,
           delta: float | None = None) -> float:
    """Quadrature of w |u_t|^2 + <G grad u, grad u>, weighted by <x>^(-2 delta)."""
    from .medium import sample_on_grid

    tables = sample_on_grid(medium, grid)
    return energy_from_tables(state, tables, delta)


def energy_from_tables(state: WaveState, tables, delta: float | None = None) -> float:
    grid = tables.grid
    grads = spectral_gradient(state.u, grid)
    d = grid.dimension
    density = tables.w * np.abs(state.v) ** 2
    for i in range(d):
        for j in range(d):
            density = density + tables.G[i, j] * grads[i] * np.conj(grads[j])
    density = np.real(density)
    if delta is not None:
        density = density * bracket_weight(grid, -delta)
    return float(np.sum(density) * grid.cell_volume)


@dataclass(frozen=True)
class DecayReport:
    times: np.ndarray
    values: np.ndarray
    fit_window: tuple[float, float]
    fitted_exponent: float
    fit_residual: float          # RMS of log-residuals over the window
    predicted_exponent: float | None = None

    def matches_prediction(self, tol: float) -> bool:
        if self.predicted_exponent is None:
            return False
        return abs(self.fitted_exponent - self.predicted_exponent) <= tol

    def to_dict(self) -> dict:
        return {
            "exponent": self.fitted_exponent,
            "predicted": self.predicted_exponent,
            "residual": self.fit_residual,
            "window": list(self.fit_window),
        }


def fit_decay_exponent(times, values, window=None,
                       predicted: float | None = None) -> DecayReport:
    """Least-squares slope of log(value) vs log(t) over the window.

    Raises
    ------
    NonPositiveValues
        If a value inside the window is not strictly positive.
    WindowTooShort
        Fewer than 8 snapshots or less than 0.8 decades of time.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is None:
        positive = times > 0
        if not positive.any():
            raise WindowTooShort("no positive times to fit")
        window = (times[positive].min(), times.max())
    t0, t1 = window
    mask = (times >= t0) & (times <= t1) & (times > 0)
    if mask.sum() < MIN_FIT_SNAPSHOTS:
        raise WindowTooShort(
            f"{int(mask.sum())} snapshots in window, need {MIN_FIT_SNAPSHOTS}")
    tw = times[mask]
    vw = values[mask]
    if np.any(vw <= 0.0):
        raise NonPositiveValues("fit window contains non-positive values")
    decades = np.log10(tw.max() / tw.min())
    if decades < MIN_FIT_DECADES:
        raise WindowTooShort(
            f"window spans {decades:.2f} decades, need {MIN_FIT_DECADES}")
    logt = np.log(tw)
    logv = np.log(vw)
    slope, intercept = np.polyfit(logt, logv, 1)
    resid = logv - (slope * logt + intercept)
    rms = float(np.sqrt(np.mean(resid**2)))
    return DecayReport(times, values, (float(t0), float(t1)), float(slope),
                       rms, predicted)


def exponent_consistency(times, values, window_a, window_b) -> float:
    """Absolute difference between fits over two (overlapping) windows."""
    fa = fit_decay_exponent(times, values, window_a)
    fb = fit_decay_exponent(times, values, window_b)
    return abs(fa.fitted_exponent - fb.fitted_exponent)


# ---------------------------------------------------------------------------
# wave vs heat comparison
# ---------------------------------------------------------------------------

@dataclass
class ComparisonReport:
    """Time series and decay fits of the wave-heat differences.

    Series keys: 'diff_u', 'diff_dt', 'diff_grad' for the three comparison
    metrics (solution, time derivative, corrector-dressed gradient), plus
    the heat baselines 'heat_u', 'heat_dt', 'heat_grad' and, for reference,
    'diff_grad_id' (gradient comparison without the corrector).
    """

    times: np.ndarray
    series: dict
    fits: dict = field(default_factory=dict)
    spec: WeightSpec = None

    def fit(self, key: str, window, predicted=None) -> DecayReport:
        rep = fit_decay_exponent(self.times, self.series[key], window, predicted)
        self.fits[key] = rep
        return rep

    def to_rows(self):
        keys = sorted(self.series)
        for i, t in enumerate(self.times):
            yield {"t": float(t), **{k: float(self.series[k][i]) for k in keys}}


def corrector_on_grid(homog: HomogenizedData, grid: TorusGrid) -> np.ndarray:
    """W resampled to the grid cell resolution and tiled periodically."""
    W = homog.W_at_resolution(grid.cells_per_period)
    reps = (1,) * 2 + (grid.periods,) * grid.dimension
    return np.tile(W, reps)


def compare_wave_heat(run: WaveRun, heat_states: list[HeatState],
                      homog: HomogenizedData, spec: WeightSpec,
                      grid: TorusGrid) -> ComparisonReport:
    """Weighted differences between a wave run and its heat comparator.

    Both inputs must share the grid and snapshot times.  The gradient metric
    compares grad u_p against W grad u_h (and, for contrast, against
    grad u_h without the corrector).
    """
    if run.grid != grid:
        raise GridMismatch("wave run lives on a different grid")
    times_w = run.times
    times_h = np.array([h.t for h in heat_states])
    if len(times_w) != len(times_h) or not np.allclose(times_w, times_h):
        raise GridMismatch("wave and heat snapshots are at different times")

    delta = -spec.kappa * spec.s1
    W = corrector_on_grid(homog, grid)
    d = grid.dimension

    keys = ["diff_u", "diff_dt", "diff_grad", "diff_grad_id",
            "heat_u", "heat_dt", "heat_grad"]
    series = {k: np.zeros(len(times_w)) for k in keys}
    for i, (ws, hs) in enumerate(zip(run.states, heat_states)):
        series["diff_u"][i] = weighted_norm(ws.u - hs.u, grid, delta)
        series["diff_dt"][i] = weighted_norm(ws.v - hs.dudt, grid, delta)
        gu = spectral_gradient(ws.u, grid)
        gh = spectral_gradient(hs.u, grid)
        Wgh = [sum(W[a, b] * gh[b] for b in range(d)) for a in range(d)]
        diff2 = sum(np.abs(gu[a] - Wgh[a]) ** 2 for a in range(d))
        diff2_id = sum(np.abs(gu[a] - gh[a]) ** 2 for a in range(d))
        base2 = sum(np.abs(gh[a]) ** 2 for a in range(d))
        wgt = bracket_weight(grid, delta)
        hd = grid.cell_volume
        series["diff_grad"][i] = float(np.sqrt(np.sum(wgt * diff2) * hd))
        series["diff_grad_id"][i] = float(np.sqrt(np.sum(wgt * diff2_id) * hd))
        series["heat_grad"][i] = float(np.sqrt(np.sum(wgt * base2) * hd))
        series["heat_u"][i] = weighted_norm(hs.u, grid, delta)
        series["heat_dt"][i] = weighted_norm(hs.dudt, grid, delta)
    return ComparisonReport(times_w, series, {}, spec)
