"""Time-domain propagation on the large torus.

Damped wave
-----------
The stepper integrates

    w(x) u_tt + P_G u + b(x) u_t = 0,     P_G = -div(G grad .),  b = w a,

with P_G applied pseudospectrally (FFT gradient, pointwise G, FFT
divergence) and a kick-drift-kick update with trapezoidal damping: writing
acc = -P_G u / w,

    kick:   v+ = (1 - dt/2 a) v + dt/2 acc(u)
    drift:  u' = u + dt v+
    kick:   v' = (v+ + dt/2 acc(u')) / (1 + dt/2 a).

The two kicks are mutually adjoint, so the scheme is time-symmetric and
second order; the closing division keeps the update contractive for any
dt * a, leaving only the usual CFL bound dt <= c * h * sqrt(w_min / G_max).

Heat comparator
---------------
The homogenized diffusion flow  b_h dt(u_h) + P_h u_h = 0  with initial datum
u_h(0) = w_p (a_p u_0 + u_1) / b_h  is propagated exactly in Fourier space by
the multiplier exp(-t <G_h k, k>/b_h) on the torus frequencies.

Floquet transform
-----------------
On a torus of L unit cells the transform

    u_#^sigma(x_c) = sum_j u(x_c + j) e^{-i (x_c + j) . sigma}

over cell indices j is a block DFT; its discrete inverse and the Plancherel
identity ||u||^2 = L^-d sum_sigma ||u_#^sigma||^2 hold exactly.  The first
band propagator synthesizes e^{-it lambda_sigma} <F_#^sigma, Psi_sigma>
Phi_sigma over the grid quasi-momenta inside a ball, zero outside.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .bloch import FirstBand, modes_to_grid
from .errors import BandUnavailable, CFLViolation, GridIncompatibility, NonFiniteState
from .homogenize import HomogenizedData
from .medium import CoefficientTables, Medium, TorusGrid, sample_on_grid

BLOWUP_CHECK_INTERVAL = 64


@dataclass
class WaveState:
    """(u, du/dt) on the torus grid at time t."""

    u: np.ndarray
    v: np.ndarray
    t: float


@dataclass
class WaveRun:
    """Snapshot record of one damped-wave simulation."""

    grid: TorusGrid
    states: list
    dt: float
    dissipation: np.ndarray   # cumulative 2 int int a w |v|^2 at snapshot times
    tables: CoefficientTables

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])


def cfl_limit(medium: Medium, grid: TorusGrid, cfl_fraction: float = 0.5) -> float:
    b = medium.bounds
    return cfl_fraction * grid.spacing * np.sqrt(b.w_min / b.g_max)


class _SpectralOperator:
    """-div(G grad .) on the torus grid, with real and complex FFT paths."""

    def __init__(self, tables: CoefficientTables):
        self.G = tables.G
        grid = tables.grid
        self.d = grid.dimension
        self.shape = grid.shape
        ks = grid.wavenumbers()
        # broadcastable wavenumber arrays for the full (complex) transform
        self.k_full = []
        for axis in range(self.d):
            shape = [1] * self.d
            shape[axis] = -1
            self.k_full.append(ks[axis].reshape(shape))
        # and for the real transform (last axis halved)
        n = grid.points_per_axis
        k_half = 2.0 * np.pi * np.fft.rfftfreq(n, d=grid.spacing)
        self.k_real = []
        for axis in range(self.d):
            shape = [1] * self.d
            shape[axis] = -1
            k = ks[axis] if axis < self.d - 1 else k_half
            self.k_real.append(k.reshape(shape))
        self._ik1 = 1j * self.k_real[0] if self.d == 1 else None

    def __call__(self, u: np.ndarray) -> np.ndarray:
        if self.d == 1 and np.isrealobj(u):
            # hot path for long 1D runs: 1-D transforms, in-place multipliers
            n = self.shape[0]
            fh = sfft.rfft(u)
            fh *= self._ik1
            g = sfft.irfft(fh, n=n)
            g *= self.G[0, 0]
            fh = sfft.rfft(g, overwrite_x=True)
            fh *= self._ik1
            out = sfft.irfft(fh, n=n)
            np.negative(out, out=out)
            return out
        if np.isrealobj(u):
            fh = sfft.rfftn(u)
            grads = [sfft.irfftn(fh * (1j * k), s=self.shape) for k in self.k_real]
            flux_hat = None
            for i in range(self.d):
                flux = sum(self.G[i, j] * grads[j] for j in range(self.d))
                term = sfft.rfftn(flux) * (1j * self.k_real[i])
                flux_hat = term if flux_hat is None else flux_hat + term
            return -sfft.irfftn(flux_hat, s=self.shape)
        fh = sfft.fftn(u)
        grads = [sfft.ifftn(fh * (1j * k)) for k in self.k_full]
        flux_hat = None
        for i in range(self.d):
            flux = sum(self.G[i, j] * grads[j] for j in range(self.d))
            term = sfft.fftn(flux) * (1j * self.k_full[i])
            flux_hat = term if flux_hat is None else flux_hat + term
        return -sfft.ifftn(flux_hat)


def run_damped_wave(medium: Medium, grid: TorusGrid, init, t_end: float,
                    dt: float | None = None, snapshot_times=None,
                    cfl_fraction: float = 0.5,
                    track_dissipation: bool = True) -> WaveRun:
    """Propagate (u_0, u_1) up to t_end, recording states at snapshot times.

    Parameters
    ----------
    init : (u_0, u_1)
        Initial displacement and velocity on the grid (real or complex).
    dt : float, optional
        Defaults to the CFL bound ``cfl_fraction * h * sqrt(w_min/G_max)``;
        larger values raise :class:`CFLViolation`.
    snapshot_times : array_like, optional
        Times at which to record states (rounded to whole steps; the stored
        time stamp is the actual step time).  Defaults to [t_end].
    """
    u0, v0 = init
    dtype = complex if np.iscomplexobj(u0) or np.iscomplexobj(v0) else float
    u = np.array(u0, dtype=dtype, copy=True)
    v = np.array(v0, dtype=dtype, copy=True)
    if u.shape != grid.shape or v.shape != grid.shape:
        raise GridIncompatibility(f"initial data shape {u.shape} != grid shape {grid.shape}")
    limit = cfl_limit(medium, grid, cfl_fraction)
    if dt is None:
        dt = limit
    elif dt > limit * (1.0 + 1e-12):
        raise CFLViolation(f"dt={dt:.3e} exceeds the stability bound {limit:.3e}")

    tables = sample_on_grid(medium, grid)
    apply_P = _SpectralOperator(tables)
    w = tables.w
    a = tables.a
    b = tables.b
    neg_inv_w = -1.0 / w
    damped = bool(np.any(a != 0.0))
    # trapezoidal damping: explicit factor in the first half-kick, implicit
    # division in the second; the pair is time-symmetric (second order) and
    # contractive for any dt * a
    damp_mul = 1.0 - 0.5 * dt * a if damped else None
    damp_div = 1.0 / (1.0 + 0.5 * dt * a) if damped else None
    hd = grid.cell_volume

    if snapshot_times is None:
        snapshot_times = [t_end]
    snap = np.unique(np.asarray(snapshot_times, dtype=float))
    n_total = int(round(t_end / dt))
    snap_steps = np.unique(np.clip(np.rint(snap / dt).astype(int), 0, n_total))

    states = []
    dissip = []
    D = 0.0
    track = track_dissipation and damped

    def dissip_rate():
        return 2.0 * hd * float(np.sum(b * np.abs(v) ** 2))

    rate_prev = dissip_rate() if track else 0.0
    if 0 in snap_steps:
        states.append(WaveState(u.copy(), v.copy(), 0.0))
        dissip.append(D)

    acc = apply_P(u)
    acc *= neg_inv_w
    snap_set = set(int(s) for s in snap_steps)
    half_dt = 0.5 * dt
    for step in range(1, n_total + 1):
        if damped:
            v *= damp_mul
        v += half_dt * acc
        u += dt * v
        acc = apply_P(u)
        acc *= neg_inv_w
        v += half_dt * acc
        if damped:
            v *= damp_div
        if track:
            rate = dissip_rate()
            D += 0.5 * dt * (rate_prev + rate)
            rate_prev = rate
        if step % BLOWUP_CHECK_INTERVAL == 0 and not np.isfinite(v[(0,) * v.ndim]):
            if not np.isfinite(v).all():
                raise NonFiniteState(f"state blew up near t={step * dt:.3f}")
        if step in snap_set:
            if not np.isfinite(v).all():
                raise NonFiniteState(f"state blew up near t={step * dt:.3f}")
            states.append(WaveState(u.copy(), v.copy(), step * dt))
            dissip.append(D)

    return WaveRun(grid, states, dt, np.asarray(dissip), tables)


# ---------------------------------------------------------------------------
# homogenized heat flow
# ---------------------------------------------------------------------------

@dataclass
class HeatState:
    u: np.ndarray
    dudt: np.ndarray
    t: float


def heat_initial_data(medium: Medium, homog: HomogenizedData, init, grid: TorusGrid):
    """v_0 = w_p (a_p u_0 + u_1) / b_h, formed pointwise from the periodic part."""
    u0, u1 = init
    x = grid.coords()
    w = medium.w_p(x)
    a = medium.a_p(x)
    return w * (a * u0 + u1) / homog.b_h


def heat_comparator(medium: Medium, homog: HomogenizedData, init, grid: TorusGrid,
                    times) -> list[HeatState]:
    """Exact Fourier propagation of the homogenized diffusion comparator.

    Returns u_h and its time derivative at each requested time; at t=0 the
    field is exactly the prepared initial datum.
    """
    if medium.dimension != grid.dimension:
        raise GridIncompatibility("medium and grid dimensions differ")
    v0 = heat_initial_data(medium, homog, init, grid)
    real_input = np.isrealobj(v0)
    v0_hat = sfft.fftn(v0)
    ks = grid.wavenumbers()
    quad = np.zeros(grid.shape)
    d = grid.dimension
    for i in range(d):
        si = [1] * d
        si[i] = -1
        for j in range(d):
            sj = [1] * d
            sj[j] = -1
            quad = quad + homog.G_h[i, j] * ks[i].reshape(si) * ks[j].reshape(sj)
    decay = quad / homog.b_h
    out = []
    for t in np.atleast_1d(np.asarray(times, dtype=float)):
        mult = np.exp(-t * decay)
        uh = sfft.ifftn(v0_hat * mult)
        duh = sfft.ifftn(v0_hat * (-decay) * mult)
        if real_input:
            uh = uh.real
            duh = duh.real
        out.append(HeatState(uh, duh, float(t)))
    return out


# ---------------------------------------------------------------------------
# Floquet transform
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FloquetSlice:
    sigma: np.ndarray
    values: np.ndarray


@dataclass
class FloquetField:
    """All quasi-momentum slices of a grid field.

    ``data`` has one leading axis per dimension (length L, FFT mode order)
    followed by the cell axes (length n); ``sigma_axes`` holds the matching
    per-axis quasi-momenta in 2*pi*(-1/2, 1/2].
    """

    grid: TorusGrid
    data: np.ndarray
    sigma_axes: list

    def sigma_at(self, index) -> np.ndarray:
        index = (index,) if np.isscalar(index) else tuple(index)
        return np.array([ax[i] for ax, i in zip(self.sigma_axes, index)])

    def slices(self):
        L_axes = tuple(range(self.grid.dimension))
        for idx in np.ndindex(*self.data.shape[: self.grid.dimension]):
            yield FloquetSlice(self.sigma_at(idx), self.data[idx])


def _sigma_axis(L: int) -> np.ndarray:
    m = np.rint(np.fft.fftfreq(L) * L).astype(int)
    m = np.where(m == -L // 2, L // 2, m)   # representative in (-1/2, 1/2]
    return 2.0 * np.pi * m / L


def floquet_transform(u: np.ndarray, grid: TorusGrid) -> FloquetField:
    """Block-DFT over the cell index; exact discrete transform."""
    if u.shape != grid.shape:
        raise GridIncompatibility(f"field shape {u.shape} != grid shape {grid.shape}")
    d = grid.dimension
    n = grid.cells_per_period
    L = grid.periods
    # split each axis N -> (L, n): index x = j*n + c
    work = u.reshape(*([L, n] * d))
    j_axes = tuple(2 * ax for ax in range(d))
    work = np.fft.fft(work, axis=j_axes[0]) if d == 1 else np.fft.fftn(work, axes=j_axes)
    if d == 1:
        pass
    sigma_axes = [_sigma_axis(L) for _ in range(d)]
    xc = np.arange(n) * grid.spacing
    for ax in range(d):
        phase = np.exp(-1j * np.outer(sigma_axes[ax], xc))       # (L, n)
        shape = [1] * (2 * d)
        shape[2 * ax] = L
        shape[2 * ax + 1] = n
        work = work * phase.reshape(shape)
    # reorder to sigma axes first, cell axes last
    perm = [2 * ax for ax in range(d)] + [2 * ax + 1 for ax in range(d)]
    data = np.transpose(work, perm)
    return FloquetField(grid, np.ascontiguousarray(data), sigma_axes)


def inverse_floquet(field: FloquetField) -> np.ndarray:
    """Exact inverse of :func:`floquet_transform`."""
    grid = field.grid
    d = grid.dimension
    n = grid.cells_per_period
    L = grid.periods
    xc = np.arange(n) * grid.spacing
    work = field.data
    for ax in range(d):
        phase = np.exp(1j * np.outer(field.sigma_axes[ax], xc))
        shape = [1] * (2 * d)
        shape[ax] = L
        shape[d + ax] = n
        work = work * phase.reshape(shape)
    # back to interleaved (j1, c1, j2, c2, ...) layout
    perm = []
    for ax in range(d):
        perm.extend([ax, d + ax])
    work = np.transpose(work, perm)
    j_axes = tuple(2 * ax for ax in range(d))
    work = np.fft.ifft(work, axis=j_axes[0]) if d == 1 else np.fft.ifftn(work, axes=j_axes)
    return work.reshape(grid.shape)


def cell_pairing(field: FloquetField, psi: np.ndarray) -> np.ndarray:
    """<u_#^sigma, psi>_cell for every sigma; psi is a cell-grid function."""
    grid = field.grid
    d = grid.dimension
    cell_axes = tuple(range(d, 2 * d))
    return np.sum(field.data * np.conj(psi), axis=cell_axes) * grid.cell_volume


# ---------------------------------------------------------------------------
# first-band spectral propagator
# ---------------------------------------------------------------------------

class BandPropagator:
    """Synthesis of the first-band contribution on a fixed grid.

    Matches band samples to the grid quasi-momenta once, then evaluates

        F  ->  L^-d sum_{|sigma| <= r} e^{-it lambda_sigma}
               <F_#^sigma, Psi_sigma> e^{i x.sigma} Phi_sigma

    for arbitrary times.  Quasi-momenta outside the ball contribute zero.
    """

    def __init__(self, band: FirstBand, grid: TorusGrid, radius: float | None = None):
        if band.dimension != grid.dimension:
            raise GridIncompatibility("band and grid dimensions differ")
        n = grid.cells_per_period
        if n < band.cutoff:
            raise BandUnavailable(
                f"grid cell resolution {n} cannot represent cutoff {band.cutoff} band data")
        self.grid = grid
        self.band = band
        self.radius = band.radius if radius is None else radius
        d = grid.dimension
        L = grid.periods
        axes = [_sigma_axis(L) for _ in range(d)]

        # band lookup keyed by integer sigma * L / (2 pi)
        key_of = {}
        for i in range(band.sigmas.shape[0]):
            key = tuple(np.rint(band.sigmas[i] * L / (2.0 * np.pi)).astype(int))
            key_of[key] = i

        self.indices = []      # flat indices into the sigma axes
        self.band_rows = []
        missing = []
        for idx in np.ndindex(*([L] * d)):
            sigma = np.array([axes[ax][idx[ax]] for ax in range(d)])
            if np.linalg.norm(sigma) > self.radius + 1e-12:
                continue
            key = tuple(np.rint(sigma * L / (2.0 * np.pi)).astype(int))
            row = key_of.get(key)
            if row is None:
                missing.append(sigma)
            else:
                self.indices.append(idx)
                self.band_rows.append(row)
        if missing:
            raise BandUnavailable(
                f"band data missing at {len(missing)} grid quasi-momenta inside "
                f"radius {self.radius:.3f} (first: {missing[0]})")
        if not self.indices:
            raise BandUnavailable("no band samples match the grid quasi-momenta")

        rows = np.asarray(self.band_rows)
        self.lambdas = band.lambdas[rows]
        self.Phi_grid = np.stack([
            np.stack([modes_to_grid(band.Phi[r, c], band.modes, n) for c in range(2)])
            for r in rows
        ])                                           # (K, 2) + cell
        self.Psi_grid = np.stack([
            np.stack([modes_to_grid(band.Psi[r, c], band.modes, n) for c in range(2)])
            for r in rows
        ])

    def coefficients(self, F) -> np.ndarray:
        """<F_#^sigma, Psi_sigma> at the matched quasi-momenta."""
        F1, F2 = F
        t1 = floquet_transform(np.asarray(F1, dtype=complex), self.grid)
        t2 = floquet_transform(np.asarray(F2, dtype=complex), self.grid)
        hd = self.grid.cell_volume
        d = self.grid.dimension
        cell_axes = tuple(range(-d, 0))
        out = np.empty(len(self.indices), dtype=complex)
        for k, idx in enumerate(self.indices):
            out[k] = hd * (
                np.sum(t1.data[idx] * np.conj(self.Psi_grid[k, 0]))
                + np.sum(t2.data[idx] * np.conj(self.Psi_grid[k, 1]))
            )
        return out

    def __call__(self, F, t: float) -> tuple[np.ndarray, np.ndarray]:
        """Approximate (u(t), i w du/dt(t)) from F = (u_0, i w u_1)."""
        coeff = self.coefficients(F) * np.exp(-1j * self.lambdas * t)
        d = self.grid.dimension
        L = self.grid.periods
        n = self.grid.cells_per_period
        shape = (L,) * d + (n,) * d
        out = []
        for comp in range(2):
            data = np.zeros(shape, dtype=complex)
            for k, idx in enumerate(self.indices):
                data[idx] = coeff[k] * self.Phi_grid[k, comp]
            field = FloquetField(self.grid, data, [_sigma_axis(L) for _ in range(d)])
            out.append(inverse_floquet(field))
        return out[0], out[1]


def first_band_propagate(band: FirstBand, F, grid: TorusGrid, t: float,
                         radius: float | None = None):
    """One-shot first-band propagation; see :class:`BandPropagator`."""
    return BandPropagator(band, grid, radius)(F, t)


def band_sigma_grid(grid: TorusGrid, radius: float) -> np.ndarray:
    """Grid quasi-momenta inside the ball, for feeding the band continuation."""
    d = grid.dimension
    axes = [_sigma_axis(grid.periods) for _ in range(d)]
    pts = []
    for idx in np.ndindex(*([grid.periods] * d)):
        sigma = np.array([axes[ax][idx[ax]] for ax in range(d)])
        if np.linalg.norm(sigma) <= radius + 1e-12:
            pts.append(sigma)
    return np.asarray(pts)
