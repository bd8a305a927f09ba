"""Floquet fiber operators, the dissipative quadratic pencil, and the first band.

At quasi-momentum sigma in 2*pi*(-1/2, 1/2]^d the fiber operator acting on
unit-periodic functions is

    P^sigma = -(div + i sigma^T) G_p(x) (grad + i sigma),

and time-harmonic damped waves solve the quadratic pencil

    (P^sigma - i lambda b_p - lambda^2 w_p) u = 0,       b_p = w_p a_p.

Everything here lives on the truncated Fourier basis e^{2 pi i m.x},
m in {-N/2, ..., N/2-1}^d: multiplication operators become convolution
matrices, and P^sigma has entries

    P[k', k] = (2 pi k' + sigma)^T Ghat_p(k' - k) (2 pi k + sigma).

The pencil is linearized by the block matrix acting on (u, v),

    A^sigma (u, v) = ( w_p^{-1} v,  P^sigma u - i a_p v ),

whose eigenpairs (lambda, (u, lambda w_p u)) match the pencil.  Every
reported eigenvalue is polished with one inverse-iteration step on the
pencil followed by a Rayleigh-functional update, which also pins
Im(lambda) <= 0 up to rounding.

The first band is tracked by continuation from sigma = 0 (where lambda = 0
with constant eigenfunction) and carries right/left eigenvectors normalized
to cell-mean-one phi and <Phi, Psi> = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    AliasingError,
    BandCrossing,
    EigensolverFailure,
    InsufficientSamples,
    LostTracking,
    NearSingular,
)
from .homogenize import HomogenizedData
from .medium import Medium

DEFAULT_ALIASING_TOL = 1e-6


def fourier_modes(cutoff: int, dimension: int) -> np.ndarray:
    """Integer mode vectors in FFT order, shape (cutoff^d, d)."""
    one = np.rint(np.fft.fftfreq(cutoff) * cutoff).astype(int)
    grids = np.meshgrid(*([one] * dimension), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def modes_to_grid(coeffs: np.ndarray, modes: np.ndarray, n: int) -> np.ndarray:
    """Evaluate sum_m c_m e^{2 pi i m.x} on the n^d cell grid."""
    d = modes.shape[1]
    if n < 2 * int(np.abs(modes).max()):
        raise ValueError(f"grid resolution {n} cannot hold modes up to {int(np.abs(modes).max())}")
    out = np.zeros((n,) * d, dtype=complex)
    idx = tuple((modes[:, j] % n) for j in range(d))
    out[idx] = coeffs
    return np.fft.ifftn(out) * n**d


def grid_to_modes(values: np.ndarray, modes: np.ndarray) -> np.ndarray:
    """Fourier coefficients of a cell-grid table at the given mode vectors."""
    n = values.shape[-1]
    fh = np.fft.fftn(values) / values.size
    idx = tuple((modes[:, j] % n) for j in range(modes.shape[1]))
    return fh[idx]


def _coefficient_table(cell_values: np.ndarray) -> np.ndarray:
    return np.fft.fftn(cell_values) / cell_values.size


def _convolution_matrix(table: np.ndarray, modes: np.ndarray) -> np.ndarray:
    ns = table.shape[0]
    d = modes.shape[1]
    diff = modes[:, None, :] - modes[None, :, :]
    idx = tuple((diff[..., j] % ns) for j in range(d))
    return table[idx]


def _check_aliasing(table: np.ndarray, cutoff: int, tol: float, name: str):
    ns = table.shape[0]
    mags = np.abs(table)
    peak = mags.max()
    if peak == 0.0:
        return
    half = cutoff // 2
    mask = np.zeros(table.shape, dtype=bool)
    for axis in range(table.ndim):
        m = np.abs(np.rint(np.fft.fftfreq(ns) * ns).astype(int))
        shape = [1] * table.ndim
        shape[axis] = -1
        mask |= (m.reshape(shape) > half) & (m.reshape(shape) <= 2 * half)
    tail = mags[mask].max() if mask.any() else 0.0
    if tail > tol * peak:
        raise AliasingError(
            f"{name}: coefficient spectrum carries {tail / peak:.2e} (rel.) beyond "
            f"mode {half}; increase the cutoff or sampling resolution")


@dataclass(frozen=True)
class BlochFiber:
    """Truncated-Fourier fiber at one quasi-momentum."""

    sigma: np.ndarray
    cutoff: int
    modes: np.ndarray                # (M, d) integers
    P: np.ndarray                    # Hermitian PSD
    B: np.ndarray                    # convolution with b_p
    W: np.ndarray                    # convolution with w_p
    inv_w: np.ndarray = field(repr=False)   # convolution with 1/w_p
    absorption: np.ndarray = field(repr=False)  # convolution with a_p
    sample_resolution: int = 0

    @property
    def size(self) -> int:
        return self.modes.shape[0]

    def pencil(self, lam: complex) -> np.ndarray:
        return self.P - 1j * lam * self.B - lam**2 * self.W

    def companion(self) -> np.ndarray:
        M = self.size
        A = np.zeros((2 * M, 2 * M), dtype=complex)
        A[:M, M:] = self.inv_w
        A[M:, :M] = self.P
        A[M:, M:] = -1j * self.absorption
        return A


@dataclass(frozen=True)
class EigenPair:
    lam: complex
    u: np.ndarray
    residual: float


def assemble_fiber(medium: Medium, sigma, cutoff: int,
                   sample_resolution: int | None = None,
                   aliasing_tol: float = DEFAULT_ALIASING_TOL) -> BlochFiber:
    """Assemble P^sigma and the multiplication matrices at Fourier cutoff N.

    Coefficients are sampled on a cell grid of at least 2N points per axis so
    that all mode differences |k'-k| < N are alias-free; a residual tail in
    the sampled spectra raises :class:`AliasingError`.
    """
    d = medium.dimension
    if cutoff % 2 != 0 or cutoff <= 0:
        raise ValueError("cutoff must be a positive even integer")
    sigma = np.asarray(sigma, dtype=float).reshape(d)
    ns = max(2 * cutoff, sample_resolution or 0)

    w = medium.w_p.sample_cell(ns)
    a = medium.a_p.sample_cell(ns)
    G = np.moveaxis(medium.G_p.sample_cell(ns), (-2, -1), (0, 1))

    tables = {
        "w_p": _coefficient_table(w),
        "a_p": _coefficient_table(a),
        "b_p": _coefficient_table(w * a),
        "1/w_p": _coefficient_table(1.0 / w),
    }
    g_tables = {(i, j): _coefficient_table(G[i, j]) for i in range(d) for j in range(d)}
    for name, tb in tables.items():
        _check_aliasing(tb, cutoff, aliasing_tol, name)
    for (i, j), tb in g_tables.items():
        _check_aliasing(tb, cutoff, aliasing_tol, f"G_p[{i},{j}]")

    modes = fourier_modes(cutoff, d)
    kp = 2.0 * np.pi * modes + sigma          # (M, d)
    P = np.zeros((modes.shape[0],) * 2, dtype=complex)
    for i in range(d):
        for j in range(d):
            conv = _convolution_matrix(g_tables[(i, j)], modes)
            P += kp[:, i, None] * conv * kp[None, :, j]
    fiber = BlochFiber(
        sigma=sigma,
        cutoff=cutoff,
        modes=modes,
        P=P,
        B=_convolution_matrix(tables["b_p"], modes),
        W=_convolution_matrix(tables["w_p"], modes),
        inv_w=_convolution_matrix(tables["1/w_p"], modes),
        absorption=_convolution_matrix(tables["a_p"], modes),
        sample_resolution=ns,
    )
    return fiber


def _rayleigh_roots(fiber: BlochFiber, u: np.ndarray) -> tuple[complex, complex]:
    p = max(float(np.real(np.vdot(u, fiber.P @ u))), 0.0)
    b = max(float(np.real(np.vdot(u, fiber.B @ u))), 0.0)
    w = float(np.real(np.vdot(u, fiber.W @ u)))
    s = np.sqrt(complex(4.0 * p * w - b * b))
    return ((-1j * b + s) / (2.0 * w), (-1j * b - s) / (2.0 * w))


def refine_eigenpair(fiber: BlochFiber, lam: complex, u: np.ndarray,
                     steps: int = 1) -> tuple[complex, np.ndarray, float]:
    """Inverse iteration on the pencil plus a Rayleigh-functional root update.

    The updated eigenvalue solves the scalar quadratic built from the
    (non-negative) Rayleigh quotients of P, B, W, so its imaginary part is
    non-positive by construction.
    """
    u = u / np.linalg.norm(u)
    for _ in range(steps):
        pencil = fiber.pencil(lam)
        try:
            cand = np.linalg.solve(pencil, u)
        except np.linalg.LinAlgError:
            cand, *_ = np.linalg.lstsq(pencil, u, rcond=None)
        nrm = np.linalg.norm(cand)
        if not np.isfinite(nrm) or nrm == 0.0:
            break
        u = cand / nrm
        roots = _rayleigh_roots(fiber, u)
        lam = min(roots, key=lambda r: abs(r - lam))
    residual = float(np.linalg.norm(fiber.pencil(lam) @ u))
    return lam, u, residual


def fiber_spectrum(fiber: BlochFiber, region=None, refine: bool = True) -> list[EigenPair]:
    """All companion eigenpairs, optionally restricted to a rectangle in C.

    Parameters
    ----------
    region : tuple, optional
        (re_min, re_max, im_min, im_max); None keeps everything.
    """
    try:
        vals, vecs = scipy.linalg.eig(fiber.companion())
    except Exception as exc:  # pragma: no cover - lapack failure
        raise EigensolverFailure(str(exc)) from exc
    M = fiber.size
    pairs = []
    for lam, z in zip(vals, vecs.T):
        u = z[:M]
        nrm = np.linalg.norm(u)
        if nrm < 1e-13:
            continue
        u = u / nrm
        if refine:
            lam, u, residual = refine_eigenpair(fiber, lam, u)
        else:
            residual = float(np.linalg.norm(fiber.pencil(lam) @ u))
        if region is not None:
            re_min, re_max, im_min, im_max = region
            if not (re_min <= lam.real <= re_max and im_min <= lam.imag <= im_max):
                continue
        pairs.append(EigenPair(lam, u, residual))
    pairs.sort(key=lambda p: abs(p.lam))
    return pairs


def fiber_resolvent_solve(fiber: BlochFiber, z: complex, rhs: np.ndarray,
                          residual_tol: float = 1e-8) -> np.ndarray:
    """Direct dense solve of (P^sigma - i z B - z^2 W) u = rhs."""
    pencil = fiber.pencil(z)
    try:
        u = np.linalg.solve(pencil, rhs)
    except np.linalg.LinAlgError:
        raise NearSingular(z, np.inf) from None
    res = np.linalg.norm(pencil @ u - rhs) / max(np.linalg.norm(rhs), 1e-300)
    if not np.isfinite(res) or res > residual_tol:
        raise NearSingular(z, float(np.linalg.cond(pencil)))
    return u


# ---------------------------------------------------------------------------
# first-band continuation
# ---------------------------------------------------------------------------

@dataclass
class FirstBand:
    """First Bloch branch lambda_sigma with biorthogonal eigenvector pairs.

    ``phi`` is normalized to cell mean one (real positive), the pair form is
    Phi = (phi, lambda w_p phi), and the left vectors satisfy
    <Phi, Psi> = 1 in the product cell space.  Coefficients are indexed by
    ``modes``.
    """

    sigmas: np.ndarray               # (K, d)
    lambdas: np.ndarray              # (K,)
    phi: np.ndarray                  # (K, M) Fourier coefficients
    Phi: np.ndarray                  # (K, 2, M)
    Psi: np.ndarray                  # (K, 2, M)
    residuals: np.ndarray            # (K,)
    second_gaps: np.ndarray          # (K,) -Im of nearest other eigenvalue (nan if unknown)
    modes: np.ndarray                # (M, d)
    cutoff: int
    gamma1: float
    gamma2: float
    radius: float

    @property
    def dimension(self) -> int:
        return self.sigmas.shape[1]

    def radii(self) -> np.ndarray:
        return np.linalg.norm(self.sigmas, axis=1)

    def pair_on_grid(self, index: int, n: int) -> tuple[np.ndarray, np.ndarray]:
        """(Phi, Psi) evaluated on the n^d cell grid, shapes (2,) + grid."""
        Phi = np.stack([modes_to_grid(self.Phi[index, c], self.modes, n) for c in range(2)])
        Psi = np.stack([modes_to_grid(self.Psi[index, c], self.modes, n) for c in range(2)])
        return Phi, Psi

    def projection(self, index: int, F_pair: np.ndarray) -> np.ndarray:
        """Rank-one spectral projection <F, Psi> Phi of pair coefficients (2, M)."""
        c = np.sum(F_pair * np.conj(self.Psi[index]))
        return c * self.Phi[index]


def _left_vector(A: np.ndarray, lam: complex, seed: np.ndarray, steps: int = 2) -> np.ndarray:
    """Left eigenvector of A at lam by inverse iteration on the adjoint.

    A tiny off-axis shift keeps the factorization away from the exactly
    singular point while still amplifying the target direction.
    """
    eps = 1e-12 * max(1.0, abs(lam))
    shifted = A.conj().T - (np.conj(lam) + eps * (1.0 + 1.0j)) * np.eye(A.shape[0])
    y = seed / np.linalg.norm(seed)
    for _ in range(steps):
        try:
            cand = np.linalg.solve(shifted, y)
        except np.linalg.LinAlgError:
            cand, *_ = np.linalg.lstsq(shifted, y, rcond=None)
        nrm = np.linalg.norm(cand)
        if not np.isfinite(nrm) or nrm == 0.0:
            break
        y = cand / nrm
    return y


def first_band(medium: Medium, cutoff: int, sigmas, *,
               sample_resolution: int | None = None,
               dense_limit: int | None = None,
               gap_window: float = 3.0,
               crossing_guard: float = 10.0,
               residual_tol: float = 1e-8) -> FirstBand:
    """Track the first eigenvalue branch over a set of quasi-momenta.

    Samples are processed by increasing |sigma|; each eigenvalue is located
    by continuation from the nearest already-computed sample (shift-invert
    targeting the previous value on large problems, selection from the dense
    companion spectrum otherwise).

    Raises
    ------
    BandCrossing
        When another eigenvalue approaches the tracked one within ten times
        the continuation step.
    LostTracking
        When the branch jumps by more than half the sigma=0 spectral gap or
        the eigenfunction loses its nonzero cell mean.
    """
    d = medium.dimension
    sig = np.atleast_2d(np.asarray(sigmas, dtype=float))
    if sig.shape[1] != d:
        raise ValueError(f"sigma samples must have dimension {d}")
    if not np.any(np.linalg.norm(sig, axis=1) < 1e-14):
        sig = np.vstack([np.zeros((1, d)), sig])
    order = np.argsort(np.linalg.norm(sig, axis=1), kind="stable")
    sig = sig[order]
    K = sig.shape[0]

    if dense_limit is None:
        dense_limit = 64 if d == 1 else 576  # modes, i.e. N<=64 (d=1), N<=24 (d=2)

    modes = fourier_modes(cutoff, d)
    M = modes.shape[0]
    use_dense = M <= dense_limit

    lambdas = np.zeros(K, dtype=complex)
    phi = np.zeros((K, M), dtype=complex)
    Phi = np.zeros((K, 2, M), dtype=complex)
    Psi = np.zeros((K, 2, M), dtype=complex)
    residuals = np.zeros(K)
    second_gaps = np.full(K, np.nan)

    done_sigmas: list[np.ndarray] = []
    gamma_gap0 = None

    for k in range(K):
        s = sig[k]
        fiber = assemble_fiber(medium, s, cutoff, sample_resolution)
        if done_sigmas:
            dists = [np.linalg.norm(s - t) for t in done_sigmas]
            nearest = int(np.argmin(dists))
            lam_pred = lambdas[nearest]
            u_seed = phi[nearest] / np.linalg.norm(phi[nearest])
            psi_seed = Psi[nearest].reshape(-1)
        else:
            lam_pred = 0.0 + 0.0j
            u_seed = np.zeros(M, dtype=complex)
            u_seed[0] = 1.0
            psi_seed = np.zeros(2 * M, dtype=complex)
            psi_seed[0] = 1.0   # roughly (b_p, i): refined by inverse iteration
            psi_seed[M] = 1.0j

        if use_dense:
            pairs = fiber_spectrum(fiber, refine=False)
            if not pairs:
                raise EigensolverFailure(f"no eigenvalues at sigma={s}")
            by_dist = sorted(pairs, key=lambda p: abs(p.lam - lam_pred))
            best = by_dist[0]
            lam, u, res = refine_eigenpair(fiber, best.lam, best.u)
            others = [p.lam for p in by_dist[1:] if abs(p.lam.real) <= gap_window]
            if others:
                step = abs(lam - lam_pred)
                nearest_other = min(abs(o - lam) for o in others)
                if step > 0 and nearest_other < crossing_guard * step:
                    raise BandCrossing(
                        f"at sigma={s}: |lambda2-lambda1|={nearest_other:.3e} "
                        f"< {crossing_guard} x step {step:.3e}")
                second_gaps[k] = -max(o.imag for o in others)
        else:
            lam, u, res = refine_eigenpair(fiber, lam_pred, u_seed, steps=4)

        if res > residual_tol * max(1.0, abs(lam) ** 2):
            raise EigensolverFailure(f"pencil residual {res:.3e} at sigma={s}")
        if lam.imag > 1e-10:
            raise EigensolverFailure(f"eigenvalue {lam} above the real axis at sigma={s}")

        if gamma_gap0 is None:
            gamma_gap0 = second_gaps[0] if np.isfinite(second_gaps[0]) else np.inf
        elif np.isfinite(gamma_gap0) and abs(lam - lam_pred) > gamma_gap0 / 2.0:
            raise LostTracking(
                f"branch jumped by {abs(lam - lam_pred):.3e} at sigma={s} "
                f"(gap {gamma_gap0:.3e})")

        mean = u[0]
        if abs(mean) < 1e-8:
            raise LostTracking(f"cell mean of the eigenfunction vanished at sigma={s}")
        u = u / mean          # cell mean one, real positive

        pair = np.stack([u, lam * (fiber.W @ u)])
        A = fiber.companion()
        y = _left_vector(A, lam, psi_seed)
        Y = y.reshape(2, M)
        c = np.sum(pair * np.conj(Y))
        if abs(c) < 1e-10:
            raise LostTracking(f"left/right eigenvectors nearly orthogonal at sigma={s}")
        Y = Y / np.conj(c)

        lambdas[k] = lam
        phi[k] = u
        Phi[k] = pair
        Psi[k] = Y
        residuals[k] = res
        done_sigmas.append(s)

    # spectral-gap heuristics from the monitored samples
    radii = np.linalg.norm(sig, axis=1)
    if np.isfinite(second_gaps).any():
        gap0 = second_gaps[0] if np.isfinite(second_gaps[0]) else np.nanmin(second_gaps)
        gamma2 = gap0 / 2.0
        ok = np.isfinite(second_gaps) & (second_gaps >= gamma2)
        admissible = radii[ok | (radii == 0.0)]
        radius = float(admissible.max()) if admissible.size else 0.0
    else:
        gamma2 = np.nan
        radius = float(radii.max())
    gamma1 = float(min(1.05 * np.abs(lambdas).max(), min(1.0, gamma2) if np.isfinite(gamma2) else 1.0))

    return FirstBand(sig, lambdas, phi, Phi, Psi, residuals, second_gaps,
                     modes, cutoff, gamma1, float(gamma2), radius)


# ---------------------------------------------------------------------------
# dispersion verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DispersionReport:
    n_samples: int
    decades: float
    max_cubic_ratio: float        # |lambda + i <G_h s, s>/b_h| / |s|^3
    residual_slope: float         # log-log slope of that residual vs |s|
    corrector_ratio_max: float    # ||phi - 1 - i psi_sigma|| / |s|^2
    ratio_min: float              # decay rate -Im(lambda) over <G_h s,s>/b_h
    ratio_max: float
    bounds_ok: bool


def verify_dispersion(band: FirstBand, homog: HomogenizedData,
                      margin: float = 0.2, min_decades: float = 2.0,
                      eval_resolution: int | None = None) -> DispersionReport:
    """Check the small-sigma expansion of the first eigenvalue and eigenvector.

    Verifies that lambda_sigma = -i <G_h sigma, sigma>/b_h up to a cubic
    remainder (log-log slope of the remainder >= ~3), that
    Re(-i lambda_sigma) stays within (1 -/+ margin) <G_h sigma, sigma>/b_h,
    and that phi_sigma - 1 - i psi_sigma is quadratically small, with
    psi_sigma the corrector combination for the direction sigma
    (mean-aligned on both sides).
    """
    nz = band.radii() > 0.0
    if nz.sum() < 8:
        raise InsufficientSamples(f"need >= 8 nonzero samples, have {int(nz.sum())}")
    radii = band.radii()[nz]
    decades = float(np.log10(radii.max() / radii.min()))
    if decades < min_decades:
        raise InsufficientSamples(
            f"samples span {decades:.2f} decades of |sigma|, need {min_decades}")

    sig = band.sigmas[nz]
    lam = band.lambdas[nz]
    quad = np.einsum("kd,de,ke->k", sig, homog.G_h, sig) / homog.b_h
    resid = np.abs(lam + 1j * quad)
    cubic_ratio = resid / radii**3
    good = resid > 1e-14    # below that the remainder drowns in round-off
    if good.sum() >= 4:
        slope = float(np.polyfit(np.log(radii[good]), np.log(resid[good]), 1)[0])
    else:
        slope = np.inf

    # decay rate of e^{-it lambda} relative to the predicted <G_h s, s>/b_h
    ratios = -np.imag(lam) / quad
    ratio_min, ratio_max = float(ratios.min()), float(ratios.max())
    bounds_ok = (ratio_min >= 1.0 - margin) and (ratio_max <= 1.0 + margin)

    n_eval = eval_resolution or homog.cell_resolution
    corr_max = 0.0
    psi_tables = [c.values for c in homog.correctors]
    for i in np.nonzero(nz)[0]:
        s = band.sigmas[i]
        phi_grid = modes_to_grid(band.phi[i], band.modes, n_eval)
        psi_grid = sum(s[j] * psi_tables[j] for j in range(band.dimension))
        if psi_tables[0].shape[0] != n_eval:
            from ._spectral import resample_periodic

            psi_grid = resample_periodic(psi_grid, n_eval)
        diff = (phi_grid - np.mean(phi_grid)) - 1j * (psi_grid - np.mean(psi_grid))
        err = np.sqrt(np.mean(np.abs(diff) ** 2))
        corr_max = max(corr_max, err / np.linalg.norm(s) ** 2)

    return DispersionReport(
        n_samples=int(nz.sum()),
        decades=decades,
        max_cubic_ratio=float(cubic_ratio.max()),
        residual_slope=slope,
        corrector_ratio_max=float(corr_max),
        ratio_min=ratio_min,
        ratio_max=ratio_max,
        bounds_ok=bool(bounds_ok),
    )
