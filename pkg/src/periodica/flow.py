"""Classical Hamiltonian flow of p(x, xi) = <G(x) xi, xi> / w(x) and damping audit.

Hamilton's equations

    dx/dt = grad_xi p = 2 G(x) xi / w(x),
    dxi/dt = -grad_x p = -( <G'(x) xi, xi> w(x) - <G(x) xi, xi> w'(x) ) / w(x)^2,

are integrated with classical RK4 using the analytic coefficient gradients.
The flow conserves p; the integrator halves its step (up to six times) until
the observed drift of p stays within tolerance.

The damping audit draws an ensemble on the level set p = 1 (uniform base
point in one period cell, uniform direction rescaled onto the ellipsoid
<G(x) xi, xi> = w(x)) and reports statistics of the accumulated absorption
integral_0^T a(x(t)) dt along each trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyEnsemble, StepUnderflow
from .medium import Medium

P_DRIFT_TOL = 1e-6
MAX_HALVINGS = 6


@dataclass(frozen=True)
class PhasePoint:
    x: np.ndarray
    xi: np.ndarray


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray          # (n+1,)
    positions: np.ndarray      # (n+1, d)
    momenta: np.ndarray        # (n+1, d)
    p_values: np.ndarray       # (n+1,)
    damping_integral: np.ndarray   # running integral of a(x(t)), trapezoidal

    @property
    def p_drift(self) -> float:
        return float(np.max(np.abs(self.p_values - self.p_values[0])))


def hamiltonian(medium: Medium, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
    G = medium.G(x)
    w = medium.w(x)
    quad = np.einsum("...i,...ij,...j->...", xi, G, xi)
    return quad / w


def _rhs(medium: Medium, x: np.ndarray, xi: np.ndarray):
    """(dx/dt, dxi/dt) for a batch of phase points."""
    G = medium.G(x)
    w = medium.w(x)
    Gxi = np.einsum("...ij,...j->...i", G, xi)
    quad = np.einsum("...i,...i->...", xi, Gxi)
    dx = 2.0 * Gxi / w[..., None]
    dG = medium.grad_G(x)                      # (..., d, d, d): d/dx_l G_ij
    dw = medium.grad_w(x)                      # (..., d)
    quad_grad = np.einsum("...i,...ijl,...j->...l", xi, dG, xi)
    dxi = -(quad_grad * w[..., None] - quad[..., None] * dw) / (w[..., None] ** 2)
    return dx, dxi


def _rk4_batch(medium, x, xi, dt, n_steps, record=None, a_accum=False):
    """Integrate a batch; optionally record states and accumulate int a dt."""
    d = x.shape[-1]
    if record is not None:
        record["x"][0] = x
        record["xi"][0] = xi
    a_prev = medium.a(x) if a_accum else None
    integral = np.zeros(x.shape[:-1]) if a_accum else None
    for step in range(n_steps):
        k1x, k1v = _rhs(medium, x, xi)
        k2x, k2v = _rhs(medium, x + 0.5 * dt * k1x, xi + 0.5 * dt * k1v)
        k3x, k3v = _rhs(medium, x + 0.5 * dt * k2x, xi + 0.5 * dt * k2v)
        k4x, k4v = _rhs(medium, x + dt * k3x, xi + dt * k3v)
        x = x + (dt / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
        xi = xi + (dt / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
        if a_accum:
            a_now = medium.a(x)
            integral = integral + 0.5 * dt * (a_prev + a_now)
            a_prev = a_now
        if record is not None:
            record["x"][step + 1] = x
            record["xi"][step + 1] = xi
            if a_accum:
                record["a_int"][step + 1] = integral
    return x, xi, integral


def integrate_flow(medium: Medium, start: PhasePoint, t_end: float, dt: float,
                   drift_tol: float = P_DRIFT_TOL) -> Trajectory:
    """Integrate one trajectory on [0, t_end], halving dt until p is conserved.

    Raises
    ------
    StepUnderflow
        If six halvings of dt do not bring the drift of p below
        ``drift_tol * p(0)``.
    """
    x0 = np.asarray(start.x, dtype=float).reshape(1, -1)
    xi0 = np.asarray(start.xi, dtype=float).reshape(1, -1)
    p0 = float(hamiltonian(medium, x0, xi0)[0])
    if p0 <= 0.0:
        raise ValueError("starting point must have positive p")
    if dt <= 0.0 or t_end <= 0.0:
        raise ValueError("dt and t_end must be positive")

    for halving in range(MAX_HALVINGS + 1):
        n_steps = max(1, int(np.ceil(t_end / dt)))
        dt_eff = t_end / n_steps
        record = {
            "x": np.zeros((n_steps + 1, 1, x0.shape[1])),
            "xi": np.zeros((n_steps + 1, 1, x0.shape[1])),
            "a_int": np.zeros((n_steps + 1, 1)),
        }
        _rk4_batch(medium, x0, xi0, dt_eff, n_steps, record=record, a_accum=True)
        xs = record["x"][:, 0, :]
        xis = record["xi"][:, 0, :]
        ps = hamiltonian(medium, xs, xis)
        drift = float(np.max(np.abs(ps - p0)))
        if drift <= drift_tol * p0:
            times = np.arange(n_steps + 1) * dt_eff
            return Trajectory(times, xs, xis, ps, record["a_int"][:, 0])
        dt = dt / 2.0
    raise StepUnderflow(
        f"p drift {drift:.3e} still above {drift_tol:.1e} * p(0) after {MAX_HALVINGS} halvings")


@dataclass(frozen=True)
class DampingAudit:
    horizon: float
    ensemble_size: int
    min_integral: float
    mean_integral: float
    histogram: tuple          # (counts, bin_edges)
    threshold: float | None
    passed: bool | None

    def to_dict(self) -> dict:
        counts, edges = self.histogram
        return {
            "horizon": self.horizon,
            "ensemble_size": self.ensemble_size,
            "min_integral": self.min_integral,
            "mean_integral": self.mean_integral,
            "histogram_counts": list(map(int, counts)),
            "histogram_edges": list(map(float, edges)),
            "threshold": self.threshold,
            "passed": self.passed,
        }


def sample_level_set(medium: Medium, n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Ensemble on p^{-1}({1}): x uniform in the cell, xi direction rescaled."""
    rng = np.random.default_rng(seed)
    d = medium.dimension
    x = rng.random((n, d))
    direction = rng.normal(size=(n, d))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    p = hamiltonian(medium, x, direction)
    xi = direction / np.sqrt(p)[:, None]
    return x, xi


def gcc_audit(medium: Medium, horizon: float, ensemble_size: int, seed: int = 0,
              dt: float | None = None, threshold: float | None = None,
              bins: int = 32) -> DampingAudit:
    """Statistics of int_0^T a(x(t)) dt over a unit-level-set ensemble.

    The audit passes when the smallest integral over the ensemble meets the
    user threshold; without a threshold only the statistics are reported.
    """
    if ensemble_size <= 0:
        raise EmptyEnsemble("ensemble_size must be positive")
    x, xi = sample_level_set(medium, ensemble_size, seed)
    if dt is None:
        dt = 0.01
    n_steps = max(1, int(np.ceil(horizon / dt)))
    dt_eff = horizon / n_steps
    _, _, integral = _rk4_batch(medium, x, xi, dt_eff, n_steps, a_accum=True)
    counts, edges = np.histogram(integral, bins=bins)
    min_int = float(integral.min())
    passed = None if threshold is None else bool(min_int >= threshold)
    return DampingAudit(horizon, ensemble_size, min_int, float(integral.mean()),
                        (counts, edges), threshold, passed)
