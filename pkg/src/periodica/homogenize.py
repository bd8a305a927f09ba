"""Periodic cell problems, the corrector matrix and the homogenized coefficients.

For each basis direction xi the cell problem asks for the unit-periodic
corrector psi_xi with

    -div( G_p(x) (xi + grad psi_xi) ) = 0      on the unit cell,

fixed to cell mean zero (the solution is otherwise defined up to a constant).
The corrector matrix W has columns W(x) e_j = e_j + grad psi_{e_j}(x), the
homogenized metric is the cell mean

    <G_h xi, xi> = integral_cell <G_p (xi + grad psi_xi), (xi + grad psi_xi)>,

equivalently G_h = mean(W^T G_p W), and the mean damping is
b_h = integral_cell w_p * a_p.

Discretization is Fourier pseudospectral on the unit cell; integrals are cell
means (the trapezoidal rule, spectrally accurate for smooth periodic
integrands).  The elliptic solve runs conjugate gradients on the mean-zero
subspace with a constant-coefficient inverse-Laplacian preconditioner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._spectral import cell_wavenumbers, divergence, gradient, resample_periodic
from .errors import NoConvergence, ResolutionMismatch, SingularOperator, ZeroDamping
from .medium import Medium


@dataclass(frozen=True)
class CorrectorField:
    """Mean-zero periodic corrector for one direction, with residual certificate."""

    direction: np.ndarray
    values: np.ndarray
    resolution: int
    residual_norm: float


@dataclass(frozen=True)
class HomogenizedData:
    G_h: np.ndarray               # (d, d) symmetric positive definite
    b_h: float
    correctors: tuple[CorrectorField, ...]
    W: np.ndarray                 # (d, d) + cell grid
    cell_resolution: int

    @property
    def dimension(self) -> int:
        return self.G_h.shape[0]

    def corrector_for(self, xi: np.ndarray) -> np.ndarray:
        """psi_xi for a general direction by linearity in xi."""
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(self.correctors[0].values.shape)
        for c, comp in zip(self.correctors, xi):
            out = out + comp * c.values
        return out

    def W_at_resolution(self, n: int) -> np.ndarray:
        return resample_periodic(self.W, n)

    def to_dict(self) -> dict:
        return {
            "G_h": self.G_h.tolist(),
            "b_h": self.b_h,
            "cell_resolution": self.cell_resolution,
            "residuals": [c.residual_norm for c in self.correctors],
            "correctors": [c.values.tolist() for c in self.correctors],
            "W": self.W.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HomogenizedData":
        G_h = np.asarray(data["G_h"], dtype=float)
        d = G_h.shape[0]
        n = int(data["cell_resolution"])
        correctors = tuple(
            CorrectorField(np.eye(d)[j], np.asarray(data["correctors"][j], dtype=float),
                           n, float(data["residuals"][j]))
            for j in range(d)
        )
        return cls(G_h, float(data["b_h"]), correctors,
                   np.asarray(data["W"], dtype=float), n)


def _cell_tables(medium: Medium, n: int) -> np.ndarray:
    """G_p on the n^d cell grid, shape (d, d) + grid."""
    G = medium.G_p.sample_cell(n)
    return np.ascontiguousarray(np.moveaxis(G, (-2, -1), (0, 1)))


def _cell_mean(f: np.ndarray) -> float:
    return float(np.mean(f))


def solve_cell_problem(medium: Medium, direction, resolution: int,
                       tol: float = 1e-12, max_iterations: int = 2000) -> CorrectorField:
    """Solve the corrector problem for one direction.

    Parameters
    ----------
    medium : Medium
        Only its periodic part enters.
    direction : array_like
        The direction xi (typically a basis vector).
    resolution : int
        Even number of cell nodes per axis.
    tol : float
        Target for ||div G_p (xi + grad psi)|| relative to ||G_p xi||.

    Returns
    -------
    CorrectorField
        Mean-zero corrector with its certified relative residual.
    """
    d = medium.dimension
    if resolution % 2 != 0 or resolution <= 0:
        raise ValueError("cell resolution must be a positive even integer")
    xi = np.asarray(direction, dtype=float).reshape(d)
    G = _cell_tables(medium, resolution)
    freqs = cell_wavenumbers(resolution, d)

    # forcing: div(G xi); operator: A psi = -div(G grad psi)
    flux0 = [sum(G[i, j] * xi[j] for j in range(d)) for i in range(d)]
    f = divergence(flux0, freqs)
    scale = np.sqrt(_cell_mean(sum(fl**2 for fl in flux0)))
    if scale == 0.0:
        scale = 1.0

    def apply_operator(psi):
        dpsi = gradient(psi, freqs)
        flux = [sum(G[i, j] * dpsi[j] for j in range(d)) for i in range(d)]
        return -divergence(flux, freqs)

    g0 = _cell_mean(sum(G[i, i] for i in range(d))) / d
    ksq = np.zeros((resolution,) * d)
    for axis, k in enumerate(freqs):
        shape = [1] * d
        shape[axis] = -1
        ksq = ksq + k.reshape(shape) ** 2

    def precondition(r):
        rh = np.fft.fftn(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            rh = np.where(ksq > 0, rh / (g0 * ksq), 0.0)
        return np.fft.ifftn(rh).real

    # preconditioned CG restricted to mean-zero functions
    psi = np.zeros_like(f)
    r = f.copy()
    z = precondition(r)
    p = z.copy()
    rz = float(np.sum(r * z))
    target = tol * scale * np.sqrt(f.size)  # unnormalized 2-norm target
    n_iter = 0
    res_norm = float(np.linalg.norm(r))
    while res_norm > target and n_iter < max_iterations:
        Ap = apply_operator(p)
        pAp = float(np.sum(p * Ap))
        if pAp <= 0.0:
            raise SingularOperator("cell operator lost positive definiteness")
        alpha = rz / pAp
        psi += alpha * p
        r -= alpha * Ap
        res_norm = float(np.linalg.norm(r))
        z = precondition(r)
        rz_new = float(np.sum(r * z))
        p = z + (rz_new / rz) * p
        rz = rz_new
        n_iter += 1
    if res_norm > target:
        raise NoConvergence(n_iter, res_norm / (scale * np.sqrt(f.size)))

    psi -= np.mean(psi)
    # independent residual certificate on the dual grid
    dpsi = gradient(psi, freqs)
    flux = [flux0[i] + sum(G[i, j] * dpsi[j] for j in range(d)) for i in range(d)]
    res = divergence(flux, freqs)
    residual = float(np.sqrt(_cell_mean(res**2))) / scale
    return CorrectorField(xi, psi, resolution, residual)


def corrector_matrix(correctors) -> np.ndarray:
    """W(x) with columns e_j + grad psi_{e_j}(x); gradients spectral."""
    correctors = list(correctors)
    d = len(correctors)
    n = correctors[0].resolution
    if any(c.resolution != n for c in correctors):
        raise ResolutionMismatch("correctors tabulated at different resolutions")
    freqs = cell_wavenumbers(n, d)
    W = np.zeros((d, d) + (n,) * d)
    for j, c in enumerate(correctors):
        dpsi = gradient(c.values, freqs)
        for i in range(d):
            W[i, j] = (1.0 if i == j else 0.0) + dpsi[i]
    return W


def homogenized_matrix(medium: Medium, W: np.ndarray) -> np.ndarray:
    """Cell mean of W^T G_p W, symmetrized against round-off."""
    d = medium.dimension
    n = W.shape[-1]
    G = _cell_tables(medium, n)
    GW = np.einsum("kl...,lj...->kj...", G, W)
    Gh = np.empty((d, d))
    for i in range(d):
        for j in range(d):
            Gh[i, j] = _cell_mean(np.sum(W[:, i] * GW[:, j], axis=0))
    return 0.5 * (Gh + Gh.T)


def mean_damping(medium: Medium, resolution: int) -> float:
    """Cell average of w_p * a_p."""
    w = medium.w_p.sample_cell(resolution)
    a = medium.a_p.sample_cell(resolution)
    b_h = _cell_mean(w * a)
    if b_h <= 1e-14:
        raise ZeroDamping(f"mean damping {b_h:.3e} is numerically zero")
    return b_h


def homogenize(medium: Medium, resolution: int = 256, tol: float = 1e-12) -> HomogenizedData:
    """Solve every basis cell problem and assemble the homogenized data."""
    d = medium.dimension
    correctors = tuple(
        solve_cell_problem(medium, np.eye(d)[j], resolution, tol) for j in range(d)
    )
    W = corrector_matrix(correctors)
    G_h = homogenized_matrix(medium, W)
    eigs = np.linalg.eigvalsh(G_h)
    if eigs.min() <= 0.0:
        raise SingularOperator(f"homogenized matrix not positive definite: eigs={eigs}")
    b_h = mean_damping(medium, resolution)
    return HomogenizedData(G_h, b_h, correctors, W, resolution)
