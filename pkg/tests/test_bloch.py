import numpy as np
import pytest

from periodica import build_medium
from periodica.bloch import (
    assemble_fiber,
    fiber_resolvent_solve,
    fiber_spectrum,
    first_band,
    fourier_modes,
    modes_to_grid,
    verify_dispersion,
)
from periodica.errors import (
    AliasingError,
    InsufficientSamples,
    NearSingular,
)
from periodica.homogenize import homogenize

from conftest import constant_config, reference_config


def small_root(g, w, a, sigma):
    """Closed-form small eigenvalue of the constant-coefficient pencil.

    lambda^2 w + i lambda w a - g sigma^2 = 0, root continuous to 0.
    """
    disc = np.sqrt(complex(a * a / 4.0 - (g / w) * sigma**2))
    r1 = -1j * (a / 2.0 - disc)
    r2 = -1j * (a / 2.0 + disc)
    return r1 if abs(r1) <= abs(r2) else r2


@pytest.fixture(scope="module")
def ref_fiber(ref_medium):
    return assemble_fiber(ref_medium, [0.3], 32)


def test_constant_fiber_is_diagonal():
    m = build_medium(constant_config())
    f = assemble_fiber(m, [0.1], 16)
    modes = fourier_modes(16, 1)[:, 0]
    expected = (2 * np.pi * modes + 0.1) ** 2
    np.testing.assert_allclose(np.diag(f.P).real, expected, atol=1e-12)
    off = f.P - np.diag(np.diag(f.P))
    assert np.max(np.abs(off)) < 1e-14


def test_fiber_hermitian(ref_fiber):
    scale = max(1.0, np.abs(ref_fiber.P).max())
    assert np.max(np.abs(ref_fiber.P - ref_fiber.P.conj().T)) < 1e-13 * scale
    assert np.max(np.abs(ref_fiber.B - ref_fiber.B.conj().T)) < 1e-13
    assert np.max(np.abs(ref_fiber.W - ref_fiber.W.conj().T)) < 1e-13


def test_kernel_at_zero_momentum(const_medium):
    f = assemble_fiber(const_medium, [0.0], 16)
    vals = np.linalg.eigvalsh(f.P)
    assert vals[0] == pytest.approx(0.0, abs=1e-12)
    assert vals[1] > 1.0


def test_constant_small_eigenvalue_closed_form():
    m = build_medium(constant_config(a=2.0))
    f = assemble_fiber(m, [0.1], 16)
    pairs = fiber_spectrum(f)
    lam = pairs[0].lam
    # roots of lambda^2 + 2 i lambda - sigma^2 = 0
    assert lam == pytest.approx(-1j * (1.0 - np.sqrt(1.0 - 0.01)), abs=1e-12)
    assert pairs[0].residual < 1e-10


def test_spectrum_in_lower_half_plane(ref_medium, rng):
    for sigma in rng.uniform(-np.pi, np.pi, size=5):
        f = assemble_fiber(ref_medium, [sigma], 16)
        for p in fiber_spectrum(f):
            if abs(p.lam.real) <= 3.0:
                assert p.lam.imag <= 1e-10


def test_zero_eigenvalue_simple_no_jordan_block(ref_medium):
    f = assemble_fiber(ref_medium, [0.0], 16)
    A = f.companion()
    svals = np.linalg.svd(A, compute_uv=False)
    assert svals[-1] < 1e-10          # rank deficient ...
    assert svals[-2] > 1e-3           # ... by exactly one
    # no generalized eigenvector: A y = Phi_0 is unsolvable
    M = f.size
    phi0 = np.zeros(2 * M, dtype=complex)
    phi0[0] = 1.0
    y, residual, *_ = np.linalg.lstsq(A, phi0, rcond=None)
    assert np.linalg.norm(A @ y - phi0) > 0.1


def test_resolvent_diagonal_for_constant_coefficients():
    m = build_medium(constant_config(a=2.0))
    f = assemble_fiber(m, [0.1], 16)
    modes = fourier_modes(16, 1)[:, 0]
    rhs = np.zeros(16, dtype=complex)
    k_index = int(np.nonzero(modes == 3)[0][0])
    rhs[k_index] = 1.0
    z = 1.0 + 0.5j
    u = fiber_resolvent_solve(f, z, rhs)
    symbol = (2 * np.pi * 3 + 0.1) ** 2 - 1j * z * 2.0 - z**2
    expected = rhs / symbol
    np.testing.assert_allclose(u, expected, atol=1e-12)


def test_resolvent_upper_half_plane_and_inverse(ref_fiber, rng):
    rhs = rng.normal(size=32) + 1j * rng.normal(size=32)
    for z in (0.5 + 0.2j, -1.0 + 1e-3j, 2.0j):
        u = fiber_resolvent_solve(ref_fiber, z, rhs)
        back = ref_fiber.pencil(z) @ u
        assert np.linalg.norm(back - rhs) < 1e-10 * np.linalg.norm(rhs)


def test_resolvent_near_eigenvalue_raises(ref_medium):
    f = assemble_fiber(ref_medium, [0.1], 16)
    lam = fiber_spectrum(f)[0].lam
    rhs = np.zeros(16, dtype=complex)
    rhs[0] = 1.0
    with pytest.raises(NearSingular):
        fiber_resolvent_solve(f, lam, rhs)


def test_first_band_constant_medium_matches_closed_form():
    m = build_medium(constant_config(a=1.0))
    radii = np.linspace(0.02, 0.4, 12)
    band = first_band(m, 16, radii[:, None])
    for sigma, lam in zip(band.radii(), band.lambdas):
        if sigma == 0:
            continue
        assert lam == pytest.approx(small_root(1.0, 1.0, 1.0, sigma), abs=1e-10)


def test_band_zero_values(ref_medium):
    band = first_band(ref_medium, 32, np.array([[0.0], [0.01]]))
    assert abs(band.lambdas[0]) < 1e-10
    # Phi_0 = (1, 0)
    Phi, Psi = band.pair_on_grid(0, 64)
    np.testing.assert_allclose(Phi[0], 1.0, atol=1e-10)
    np.testing.assert_allclose(Phi[1], 0.0, atol=1e-10)
    # Psi_0 = (b_p, i) / b_h
    x = (np.arange(64) / 64)[:, None]
    b_p = ref_medium.b_p(x)[:, 0] if ref_medium.b_p(x).ndim > 1 else ref_medium.b_p(x)
    b_h = homogenize(ref_medium, 128).b_h
    np.testing.assert_allclose(Psi[0], b_p / b_h, atol=1e-8)
    np.testing.assert_allclose(Psi[1], 1j / b_h * np.ones(64), atol=1e-8)


def test_band_biorthonormal(ref_medium):
    radii = np.geomspace(1e-3, 0.3, 10)
    band = first_band(ref_medium, 16, radii[:, None])
    for k in range(band.sigmas.shape[0]):
        inner = np.sum(band.Phi[k] * np.conj(band.Psi[k]))
        assert inner == pytest.approx(1.0, abs=1e-10)
        # phase convention: cell mean of phi is one
        assert band.phi[k][0] == pytest.approx(1.0, abs=1e-12)


def test_projection_idempotent(ref_medium, rng):
    band = first_band(ref_medium, 16, np.array([[0.15]]))
    k = 1 if band.sigmas.shape[0] > 1 else 0
    lam = band.lambdas[k]
    fiber = assemble_fiber(ref_medium, band.sigmas[k], 16)
    A = fiber.companion()
    for _ in range(10):
        F = rng.normal(size=(2, 16)) + 1j * rng.normal(size=(2, 16))
        PF = band.projection(k, F)
        PPF = band.projection(k, PF)
        np.testing.assert_allclose(PPF, PF, atol=1e-10 * np.linalg.norm(F))
        # projected vectors live in the eigenspace
        out = (A @ PF.reshape(-1)) - lam * PF.reshape(-1)
        assert np.linalg.norm(out) <= 1e-8 * np.linalg.norm(F)


def test_spectrum_reflection_symmetry(ref_medium):
    for sigma in (0.1, 0.45):
        lp = sorted(fiber_spectrum(assemble_fiber(ref_medium, [sigma], 16)),
                    key=lambda p: abs(p.lam))[:6]
        lm = sorted(fiber_spectrum(assemble_fiber(ref_medium, [-sigma], 16)),
                    key=lambda p: abs(p.lam))[:6]
        got = sorted((-np.conj(p.lam) for p in lm), key=abs)
        want = sorted((p.lam for p in lp), key=abs)
        np.testing.assert_allclose(got, want, atol=1e-9)


def test_dispersion_reference_medium(ref_medium):
    radii = np.geomspace(1e-3, 1e-1, 24)
    band = first_band(ref_medium, 32, radii[:, None])
    homog = homogenize(ref_medium, 256)
    report = verify_dispersion(band, homog)
    assert report.residual_slope >= 2.8
    assert report.bounds_ok
    assert report.corrector_ratio_max < 1.0


def test_dispersion_constant_medium_is_quartic():
    m = build_medium(constant_config(a=1.0))
    radii = np.geomspace(1e-3, 1e-1, 16)
    band = first_band(m, 16, radii[:, None])
    homog = homogenize(m, 64)
    report = verify_dispersion(band, homog)
    assert report.residual_slope >= 3.0   # exactly quartic remainder


def test_eigenvector_expansion_quadratic(ref_medium):
    radii = np.geomspace(1e-2, 1e-1, 8)
    band = first_band(ref_medium, 32, radii[:, None])
    homog = homogenize(ref_medium, 256)
    psi = homog.correctors[0].values
    errs = []
    for k in range(1, band.sigmas.shape[0]):
        phi = modes_to_grid(band.phi[k], band.modes, 256)
        target = 1.0 + 1j * band.sigmas[k, 0] * psi
        diff = (phi - phi.mean()) - (target - target.mean())
        errs.append(np.sqrt(np.mean(np.abs(diff) ** 2)))
    slope = np.polyfit(np.log(band.radii()[1:]), np.log(errs), 1)[0]
    assert slope >= 1.8


def test_aliasing_detection():
    cfg = {"dimension": 1,
           "G": {"type": "cosine-series", "mean": 1.0,
                 "terms": [{"amplitude": 0.4, "wavevector": [7]}]},
           "w": 1.0, "a": 1.0}
    m = build_medium(cfg)
    with pytest.raises(AliasingError):
        assemble_fiber(m, [0.0], 8)      # metric oscillates beyond the cutoff
    assemble_fiber(m, [0.0], 32)          # resolved at a larger cutoff


def test_dispersion_needs_enough_samples(ref_medium):
    band = first_band(ref_medium, 16, np.geomspace(0.05, 0.1, 9)[:, None])
    homog = homogenize(ref_medium, 64)
    with pytest.raises(InsufficientSamples):
        verify_dispersion(band, homog)
