"""Coefficient fields of the damped wave equation in (asymptotically) periodic media.

The equation under study is

    w(x) u_tt - div(G(x) grad u) + b(x) u_t = 0,      b(x) = w(x) a(x),

with a symmetric uniformly elliptic metric G, a bounded positive weight w and
a non-negative absorption index a.  Each coefficient splits into a
unit-periodic part and an optional decaying perturbation,

    G = G_p + G_0,   w = w_p + w_0,   a = a_p + a_0,

where the perturbations obey envelopes |G_0(x)| <= C_G <x>^-rho_G and
|w_0| + |a_0| <= C_a <x>^-rho_a with <x> = (1 + |x|^2)^(1/2).

Conventions
-----------
* Periodic parts have period 1 in every coordinate and are always evaluated
  modulo 1.
* Perturbations live on R^d and are centered at the origin.  On a
  computational torus of ``L`` periods the origin sits at the torus center,
  so grid tables combine ``G_p(x mod 1)`` with ``G_0(x - L/2)``.
* Media are validated at construction on a fixed low-discrepancy (Halton)
  sample; the sampled ellipticity and positivity bounds are stored on the
  medium and reused as CFL and audit constants downstream.

Configuration documents are plain JSON; see :func:`build_medium`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import sympy as sp
from scipy.stats import qmc

from .errors import (
    ConfigError,
    DimensionMismatch,
    EllipticityViolation,
    NegativeAbsorption,
    ZeroDamping,
)

VALIDATION_SAMPLES = 10_000
WRAP_TOLERANCE = 1e-8


# ---------------------------------------------------------------------------
# scalar building blocks
# ---------------------------------------------------------------------------

class ScalarProfile:
    """Closed-form scalar function of x in R^d with an analytic gradient."""

    dimension: int

    def value(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantProfile(ScalarProfile):
    constant: float
    dimension: int = 1

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return np.full(x.shape[:-1], self.constant)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape)


@dataclass(frozen=True)
class CosineSeriesProfile(ScalarProfile):
    """mean + sum_k amp_k * cos(2*pi* k.x + phase_k) with integer wavevectors k."""

    mean: float
    amplitudes: tuple[float, ...]
    wavevectors: tuple[tuple[int, ...], ...]
    phases: tuple[float, ...]
    dimension: int = 1

    def value(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape[:-1], self.mean)
        for amp, k, ph in zip(self.amplitudes, self.wavevectors, self.phases):
            out = out + amp * np.cos(2.0 * np.pi * (x @ np.asarray(k, dtype=float)) + ph)
        return out

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for amp, k, ph in zip(self.amplitudes, self.wavevectors, self.phases):
            kv = np.asarray(k, dtype=float)
            s = np.sin(2.0 * np.pi * (x @ kv) + ph)
            out = out - (2.0 * np.pi * amp) * s[..., None] * kv
        return out


class ExpressionProfile(ScalarProfile):
    """Profile parsed from a symbolic expression in the variables x (and y for d=2)."""

    _ALLOWED = {"sin", "cos", "tan", "exp", "sqrt", "pi", "Abs", "tanh", "cosh", "sinh"}

    def __init__(self, expr: str, dimension: int):
        self.dimension = dimension
        self.expr_text = expr
        symbols = sp.symbols("x y z")[:dimension]
        local = {name: getattr(sp, name if name != "pi" else "pi") for name in self._ALLOWED}
        local.update({str(s): s for s in symbols})
        try:
            parsed = sp.sympify(expr, locals=local)
        except (sp.SympifyError, SyntaxError, TypeError) as exc:
            raise ConfigError(f"cannot parse expression {expr!r}: {exc}") from None
        free = parsed.free_symbols - set(symbols)
        if free:
            raise ConfigError(f"unknown symbols {sorted(map(str, free))} in {expr!r}")
        undefined = parsed.atoms(sp.core.function.AppliedUndef)
        if undefined:
            raise ConfigError(f"unknown functions {sorted(map(str, undefined))} in {expr!r}")
        self._symbols = symbols
        self._value = sp.lambdify(symbols, parsed, modules="numpy")
        self._grads = [sp.lambdify(symbols, sp.diff(parsed, s), modules="numpy") for s in symbols]

    def value(self, x):
        x = np.asarray(x, dtype=float)
        coords = [x[..., j] for j in range(self.dimension)]
        return np.broadcast_to(np.asarray(self._value(*coords), dtype=float), x.shape[:-1]).copy()

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        coords = [x[..., j] for j in range(self.dimension)]
        parts = [np.broadcast_to(np.asarray(g(*coords), dtype=float), x.shape[:-1]) for g in self._grads]
        return np.stack(parts, axis=-1)


# ---------------------------------------------------------------------------
# periodic fields
# ---------------------------------------------------------------------------

def _wrap(x):
    return np.asarray(x, dtype=float) % 1.0


@dataclass(frozen=True)
class PeriodicField:
    """Unit-periodic scalar or matrix field, evaluated modulo 1 per coordinate.

    Matrix fields are stored as a full symmetric profile table
    (``profiles[i][j]`` with ``i <= j`` populated and mirrored), so symmetry
    holds by construction at every sample point.
    """

    kind: str                      # "scalar" | "matrix"
    dimension: int
    profiles: tuple                # scalar: (profile,); matrix: d x d nested tuple

    def __call__(self, x):
        xw = _wrap(x)
        if self.kind == "scalar":
            return self.profiles[0].value(xw)
        d = self.dimension
        out = np.empty(xw.shape[:-1] + (d, d))
        for i in range(d):
            for j in range(d):
                out[..., i, j] = self.profiles[i][j].value(xw)
        return out

    def gradient(self, x):
        """d/dx_l of the field; scalar -> (..., d), matrix -> (..., d, d, d)."""
        xw = _wrap(x)
        if self.kind == "scalar":
            return self.profiles[0].gradient(xw)
        d = self.dimension
        out = np.empty(xw.shape[:-1] + (d, d, d))
        for i in range(d):
            for j in range(d):
                out[..., i, j, :] = self.profiles[i][j].gradient(xw)
        return out

    def sample_cell(self, n: int):
        """Tabulate on the uniform n^d grid of the unit cell (spacing 1/n)."""
        axes = [np.arange(n) / n for _ in range(self.dimension)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        return self(mesh)


def scalar_field(profile: ScalarProfile) -> PeriodicField:
    return PeriodicField("scalar", profile.dimension, (profile,))


def matrix_field_isotropic(profile: ScalarProfile) -> PeriodicField:
    d = profile.dimension
    zero = ConstantProfile(0.0, d)
    rows = tuple(tuple(profile if i == j else zero for j in range(d)) for i in range(d))
    return PeriodicField("matrix", d, rows)


def matrix_field_diagonal(profiles) -> PeriodicField:
    d = profiles[0].dimension
    zero = ConstantProfile(0.0, d)
    rows = tuple(tuple(profiles[i] if i == j else zero for j in range(d)) for i in range(d))
    return PeriodicField("matrix", d, rows)


# ---------------------------------------------------------------------------
# decaying perturbations
# ---------------------------------------------------------------------------

class DecayProfile:
    """Radial profile of a perturbation centered at the origin."""

    def value(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError


@dataclass(frozen=True)
class PowerDecay(DecayProfile):
    amplitude: float
    rate: float

    def value(self, x):
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x * x, axis=-1)
        return self.amplitude * (1.0 + r2) ** (-self.rate / 2.0)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x * x, axis=-1)
        fac = -self.rate * self.amplitude * (1.0 + r2) ** (-self.rate / 2.0 - 1.0)
        return fac[..., None] * x


@dataclass(frozen=True)
class GaussianDecay(DecayProfile):
    amplitude: float
    width: float

    def value(self, x):
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x * x, axis=-1)
        return self.amplitude * np.exp(-r2 / (2.0 * self.width**2))

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        return self.value(x)[..., None] * (-x / self.width**2)


@dataclass(frozen=True)
class BumpDecay(DecayProfile):
    """Smooth bump supported in |x| < radius (compactly supported perturbation)."""

    amplitude: float
    radius: float

    def value(self, x):
        x = np.asarray(x, dtype=float)
        s = np.sum(x * x, axis=-1) / self.radius**2
        out = np.zeros(s.shape)
        inside = s < 1.0
        with np.errstate(divide="ignore", over="ignore"):
            out[inside] = self.amplitude * np.exp(1.0 - 1.0 / (1.0 - s[inside]))
        return out

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        s = np.sum(x * x, axis=-1) / self.radius**2
        out = np.zeros(x.shape)
        inside = s < 1.0
        if np.any(inside):
            v = self.value(x)[inside]
            fac = -v / (1.0 - s[inside]) ** 2 * (2.0 / self.radius**2)
            out[inside] = fac[..., None] * x[inside]
        return out


@dataclass(frozen=True)
class DecayingField:
    """Perturbation field on R^d with certified envelope C <x>^-rho.

    Matrix-valued perturbations are the scalar profile times the identity.
    """

    kind: str
    dimension: int
    profile: DecayProfile
    decay_rate: float
    decay_constant: float

    def __call__(self, x):
        vals = self.profile.value(np.asarray(x, dtype=float))
        if self.kind == "scalar":
            return vals
        d = self.dimension
        eye = np.eye(d)
        return vals[..., None, None] * eye

    def gradient(self, x):
        g = self.profile.gradient(np.asarray(x, dtype=float))
        if self.kind == "scalar":
            return g
        d = self.dimension
        out = np.zeros(g.shape[:-1] + (d, d, d))
        for i in range(d):
            out[..., i, i, :] = g
        return out

    def envelope(self, x):
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x * x, axis=-1)
        return self.decay_constant * (1.0 + r2) ** (-self.decay_rate / 2.0)


# ---------------------------------------------------------------------------
# grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid on a torus of ``periods`` unit cells, ``cells_per_period`` nodes each.

    Node coordinates are x_j = j * h with h = 1/cells_per_period, covering
    [0, periods) per axis.  Centered coordinates x_j - periods/2 locate the
    perturbation and the norm weights.  Dual frequencies are the discrete
    wavenumbers 2*pi*m/periods of the large torus.
    """

    dimension: int
    cells_per_period: int
    periods: int

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ConfigError(f"dimension must be 1 or 2, got {self.dimension}")
        if self.cells_per_period <= 0 or self.cells_per_period % 2 != 0:
            raise ConfigError("cells_per_period must be a positive even integer")
        if self.periods < 1:
            raise ConfigError("periods must be a positive integer")

    @property
    def spacing(self) -> float:
        return 1.0 / self.cells_per_period

    @property
    def points_per_axis(self) -> int:
        return self.cells_per_period * self.periods

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dimension

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dimension

    def axis_coords(self) -> np.ndarray:
        return np.arange(self.points_per_axis) * self.spacing

    def coords(self) -> np.ndarray:
        """Node coordinates, shape grid_shape + (d,)."""
        ax = self.axis_coords()
        mesh = np.meshgrid(*([ax] * self.dimension), indexing="ij")
        return np.stack(mesh, axis=-1)

    def centered_coords(self) -> np.ndarray:
        return self.coords() - self.periods / 2.0

    def wavenumbers(self) -> list[np.ndarray]:
        """Per-axis angular frequencies 2*pi*m/periods in FFT order."""
        N = self.points_per_axis
        return [2.0 * np.pi * np.fft.fftfreq(N, d=self.spacing) for _ in range(self.dimension)]

    def wrap_time(self, w_min: float, g_max: float) -> float:
        """Time before a wave launched at the center can wrap around the seam."""
        return 0.5 * self.periods * np.sqrt(w_min / g_max)


# ---------------------------------------------------------------------------
# medium
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SampledBounds:
    g_min: float
    g_max: float
    w_min: float
    w_max: float
    a_min: float
    a_max: float
    b_p_mean: float
    max_fd_derivative: float


@dataclass(frozen=True)
class Medium:
    """Validated coefficient set (periodic parts plus optional perturbations)."""

    dimension: int
    G_p: PeriodicField
    w_p: PeriodicField
    a_p: PeriodicField
    G_0: DecayingField | None = None
    w_0: DecayingField | None = None
    a_0: DecayingField | None = None
    bounds: SampledBounds = field(default=None, repr=False)
    config: dict = field(default=None, repr=False)

    @property
    def has_perturbation(self) -> bool:
        return any(f is not None for f in (self.G_0, self.w_0, self.a_0))

    # total fields; x in "physics" coordinates (perturbation centered at 0,
    # periodic lattice aligned with the integers)
    def G(self, x):
        out = self.G_p(x)
        if self.G_0 is not None:
            out = out + self.G_0(x)
        return out

    def w(self, x):
        out = self.w_p(x)
        if self.w_0 is not None:
            out = out + self.w_0(x)
        return out

    def a(self, x):
        out = self.a_p(x)
        if self.a_0 is not None:
            out = out + self.a_0(x)
        return out

    def b(self, x):
        return self.w(x) * self.a(x)

    def b_p(self, x):
        return self.w_p(x) * self.a_p(x)

    def grad_G(self, x):
        out = self.G_p.gradient(x)
        if self.G_0 is not None:
            out = out + self.G_0.gradient(x)
        return out

    def grad_w(self, x):
        out = self.w_p.gradient(x)
        if self.w_0 is not None:
            out = out + self.w_0.gradient(x)
        return out

    def without_perturbation(self) -> "Medium":
        return Medium(self.dimension, self.G_p, self.w_p, self.a_p,
                      None, None, None, self.bounds, self.config)


@dataclass(frozen=True)
class CoefficientTables:
    """Coefficients tabulated at the nodes of a torus grid.

    ``G`` has shape (d, d) + grid_shape; the scalars have grid_shape.
    """

    grid: TorusGrid
    G: np.ndarray
    w: np.ndarray
    a: np.ndarray
    b: np.ndarray


# ---------------------------------------------------------------------------
# configuration parsing
# ---------------------------------------------------------------------------

def _scalar_profile_from_config(spec, dimension) -> ScalarProfile:
    if isinstance(spec, (int, float)):
        return ConstantProfile(float(spec), dimension)
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError(f"field spec must be a number or a dict with 'type': {spec!r}")
    kind = spec["type"]
    if kind == "constant":
        return ConstantProfile(float(spec["value"]), dimension)
    if kind == "cosine-series":
        terms = spec.get("terms", [])
        amps, kvecs, phases = [], [], []
        for term in terms:
            amps.append(float(term["amplitude"]))
            kv = term["wavevector"]
            kv = [kv] if isinstance(kv, (int, float)) else list(kv)
            if len(kv) != dimension:
                raise ConfigError(f"wavevector {kv} has wrong dimension (expected {dimension})")
            kvecs.append(tuple(int(c) for c in kv))
            phases.append(float(term.get("phase", 0.0)))
        return CosineSeriesProfile(float(spec.get("mean", 0.0)), tuple(amps),
                                   tuple(kvecs), tuple(phases), dimension)
    if kind == "expression":
        return ExpressionProfile(str(spec["expr"]), dimension)
    raise ConfigError(f"unknown field type {kind!r}")


def _matrix_field_from_config(spec, dimension) -> PeriodicField:
    if isinstance(spec, dict) and spec.get("type") == "diagonal":
        entries = spec["entries"]
        if len(entries) != dimension:
            raise ConfigError("diagonal metric needs one entry per dimension")
        return matrix_field_diagonal([_scalar_profile_from_config(e, dimension) for e in entries])
    return matrix_field_isotropic(_scalar_profile_from_config(spec, dimension))


def _decay_profile_from_config(spec) -> DecayProfile:
    kind = spec.get("profile", "gaussian")
    amp = float(spec["amplitude"])
    if kind == "gaussian":
        return GaussianDecay(amp, float(spec.get("width", 1.0)))
    if kind == "power":
        return PowerDecay(amp, float(spec.get("rate", spec.get("decay_rate"))))
    if kind == "bump":
        return BumpDecay(amp, float(spec.get("radius", 1.0)))
    raise ConfigError(f"unknown perturbation profile {kind!r}")


def _envelope_constant(profile: DecayProfile, rate: float) -> float:
    """Smallest C with |profile| <= C <x>^-rate, found on a fine radial probe."""
    r = np.linspace(0.0, 64.0, 4097)
    vals = np.abs(profile.value(r[:, None]))   # profiles are radial
    bracket = (1.0 + r**2) ** (rate / 2.0)
    return float(np.max(vals * bracket)) * (1.0 + 1e-9)


def _decaying_field_from_config(spec, dimension, kind) -> DecayingField:
    profile = _decay_profile_from_config(spec)
    if isinstance(profile, PowerDecay):
        rate = float(spec.get("decay_rate", profile.rate))
    else:
        # bump and gaussian profiles beat any power; 16 is a non-binding default
        rate = float(spec.get("decay_rate", 16.0))
    if rate <= 0:
        raise ConfigError("decay_rate must be positive")
    constant = float(spec.get("decay_constant", _envelope_constant(profile, rate)))
    if constant < 0:
        raise ConfigError("decay_constant must be non-negative")
    return DecayingField(kind, dimension, profile, rate, constant)


def _halton_sample(n_points, dimension, seed=12345):
    sampler = qmc.Halton(d=dimension, scramble=True, seed=seed)
    return sampler.random(n_points)


def _validate(medium: Medium) -> SampledBounds:
    d = medium.dimension
    pts = _halton_sample(VALIDATION_SAMPLES, d)
    # mix of cell points (far field) and centered points where the
    # perturbation is active
    far = pts
    near = (pts - 0.5) * 16.0
    sample = np.concatenate([far, near], axis=0)

    Gv = medium.G(sample) if medium.G_0 is not None else medium.G_p(sample)
    if medium.G_0 is not None:
        # the perturbed metric must stay elliptic near the center AND the
        # periodic part alone governs the far field
        Gv = np.concatenate([Gv, medium.G_p(far)], axis=0)
    if d == 1:
        eig_min = Gv[..., 0, 0]
        eig_max = eig_min
    else:
        tr = Gv[..., 0, 0] + Gv[..., 1, 1]
        det = Gv[..., 0, 0] * Gv[..., 1, 1] - Gv[..., 0, 1] * Gv[..., 1, 0]
        disc = np.sqrt(np.maximum((tr / 2.0) ** 2 - det, 0.0))
        eig_min = tr / 2.0 - disc
        eig_max = tr / 2.0 + disc
    g_min = float(np.min(eig_min))
    g_max = float(np.max(eig_max))
    if g_min <= 0.0:
        raise EllipticityViolation(f"sampled minimal metric eigenvalue {g_min:.3e} <= 0")

    wv = medium.w(sample)
    w_min, w_max = float(np.min(wv)), float(np.max(wv))
    if w_min <= 0.0:
        raise EllipticityViolation(f"sampled weight minimum {w_min:.3e} <= 0")

    av = medium.a(sample)
    a_min, a_max = float(np.min(av)), float(np.max(av))
    if a_min < -1e-13:
        raise NegativeAbsorption(f"absorption index reaches {a_min:.3e} < 0")
    apv = medium.a_p(far)
    if float(np.min(apv)) < -1e-13:
        raise NegativeAbsorption("periodic absorption index takes negative values")
    b_p_mean = float(np.mean(medium.b_p(far)))
    if float(np.max(np.abs(apv))) <= 1e-14 or b_p_mean <= 1e-14:
        raise ZeroDamping("periodic absorption vanishes on the sample; mean damping is zero")

    # decaying envelopes, spot-checked on log-spaced radii
    for name, f in (("G_0", medium.G_0), ("w_0", medium.w_0), ("a_0", medium.a_0)):
        if f is None:
            continue
        radii = np.logspace(-1, 3, 64)
        dirs = _halton_sample(64, d, seed=999) - 0.5
        dirs /= np.maximum(np.linalg.norm(dirs, axis=-1, keepdims=True), 1e-12)
        xs = radii[:, None] * dirs
        vals = f(xs)
        mags = np.abs(vals) if f.kind == "scalar" else np.linalg.norm(vals, axis=(-2, -1))
        env = f.envelope(xs)
        if np.any(mags > env * (1.0 + 1e-9) + 1e-15):
            raise ConfigError(f"perturbation {name} exceeds its decay envelope")

    # boundedness of first finite-difference derivatives (smoothness proxy)
    eps = 1e-5
    fd_max = 0.0
    probe = far[:256]
    for j in range(d):
        step = np.zeros(d)
        step[j] = eps
        for fld in (medium.G_p, medium.w_p, medium.a_p):
            delta = (np.asarray(fld(probe + step), dtype=float) - np.asarray(fld(probe), dtype=float)) / eps
            m = float(np.max(np.abs(delta)))
            if not np.isfinite(m):
                raise ConfigError("periodic coefficients have unbounded finite-difference derivatives")
            fd_max = max(fd_max, m)

    return SampledBounds(g_min, g_max, w_min, w_max, a_min, a_max, b_p_mean, fd_max)


def build_medium(config) -> Medium:
    """Build and validate a medium from a configuration document.

    Parameters
    ----------
    config : dict | str | Path
        Either the parsed JSON document or a path to one.  Required keys:
        ``dimension`` (1 or 2) and the periodic fields ``G``, ``w``, ``a``.
        Each field spec is a number (constant) or a dict with ``type`` in
        ``{"constant", "cosine-series", "expression", "diagonal"}`` (the
        latter only for ``G``).  The optional ``perturbation`` block maps any
        of ``G``, ``w``, ``a`` to a decaying profile spec with keys
        ``profile`` (gaussian | power | bump), ``amplitude``, shape
        parameters, and the envelope ``decay_rate`` / ``decay_constant``.

    Raises
    ------
    ConfigError, EllipticityViolation, NegativeAbsorption, ZeroDamping
    """
    if isinstance(config, (str, Path)):
        with open(config, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    if not isinstance(config, dict):
        raise ConfigError("medium config must be a JSON object")
    try:
        d = int(config["dimension"])
    except KeyError:
        raise ConfigError("medium config is missing 'dimension'") from None
    if d not in (1, 2):
        raise ConfigError(f"only dimensions 1 and 2 are supported, got {d}")
    for key in ("G", "w", "a"):
        if key not in config:
            raise ConfigError(f"medium config is missing periodic field {key!r}")

    G_p = _matrix_field_from_config(config["G"], d)
    w_p = scalar_field(_scalar_profile_from_config(config["w"], d))
    a_p = scalar_field(_scalar_profile_from_config(config["a"], d))

    pert = config.get("perturbation", {}) or {}
    G_0 = _decaying_field_from_config(pert["G"], d, "matrix") if "G" in pert else None
    w_0 = _decaying_field_from_config(pert["w"], d, "scalar") if "w" in pert else None
    a_0 = _decaying_field_from_config(pert["a"], d, "scalar") if "a" in pert else None

    medium = Medium(d, G_p, w_p, a_p, G_0, w_0, a_0, None, dict(config))
    bounds = _validate(medium)
    return Medium(d, G_p, w_p, a_p, G_0, w_0, a_0, bounds, dict(config))


def sample_on_grid(medium: Medium, grid: TorusGrid) -> CoefficientTables:
    """Tabulate G, w, a, b at the grid nodes.

    Periodic parts are evaluated modulo 1 at the node coordinates; the
    perturbations at the coordinates centered on the torus.  Warns when the
    perturbation envelope at the torus seam exceeds the wrap-around budget.
    """
    if medium.dimension != grid.dimension:
        raise DimensionMismatch(
            f"medium dimension {medium.dimension} != grid dimension {grid.dimension}")
    x = grid.coords()
    c = grid.centered_coords()
    G = medium.G_p(x)
    w = medium.w_p(x)
    a = medium.a_p(x)
    half = grid.periods / 2.0
    seam = np.full((1, grid.dimension), half)
    for f, name in ((medium.G_0, "G"), (medium.w_0, "w"), (medium.a_0, "a")):
        if f is None:
            continue
        if float(f.envelope(seam)[0]) > WRAP_TOLERANCE:
            import warnings

            warnings.warn(
                f"perturbation of {name} is {float(f.envelope(seam)[0]):.2e} at the torus seam; "
                f"increase the number of periods to keep wrap-around below {WRAP_TOLERANCE:.0e}",
                stacklevel=2,
            )
    if medium.G_0 is not None:
        G = G + medium.G_0(c)
    if medium.w_0 is not None:
        w = w + medium.w_0(c)
    if medium.a_0 is not None:
        a = a + medium.a_0(c)
    # move matrix axes in front: (d, d) + grid_shape
    G = np.moveaxis(G, (-2, -1), (0, 1))
    return CoefficientTables(grid, np.ascontiguousarray(G), w, a, w * a)
