import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from periodica import build_medium, sample_on_grid
from periodica.bloch import first_band
from periodica.errors import (
    BandUnavailable,
    CFLViolation,
    GridIncompatibility,
    NonFiniteState,
)
from periodica.evolve import (
    BandPropagator,
    band_sigma_grid,
    cell_pairing,
    cfl_limit,
    floquet_transform,
    heat_comparator,
    inverse_floquet,
    run_damped_wave,
)
from periodica.homogenize import homogenize
from periodica.medium import TorusGrid

from conftest import constant_config


@pytest.fixture(scope="module")
def small_grid():
    return TorusGrid(1, 16, 16)


def gaussian(grid, width=1.5):
    c = grid.centered_coords()
    return np.exp(-np.sum(c * c, axis=-1) / (2 * width**2))


def test_cfl_violation(ref_medium, small_grid):
    u0 = gaussian(small_grid)
    with pytest.raises(CFLViolation):
        run_damped_wave(ref_medium, small_grid, (u0, 0 * u0), 1.0,
                        dt=10 * cfl_limit(ref_medium, small_grid))


def test_blowup_detector(ref_medium, small_grid):
    u0 = gaussian(small_grid)
    u0[3] = np.nan
    with pytest.raises(NonFiniteState):
        run_damped_wave(ref_medium, small_grid, (u0, 0 * u0), 1.0)


def test_shape_mismatch(ref_medium, small_grid):
    with pytest.raises(GridIncompatibility):
        run_damped_wave(ref_medium, small_grid, (np.zeros(7), np.zeros(7)), 1.0)


def test_single_mode_oracle():
    # constant coefficients: each Fourier mode solves u'' + a u' + k^2 u = 0
    m = build_medium(constant_config(a=0.5))
    grid = TorusGrid(1, 32, 8)
    x = grid.axis_coords()
    k = 2 * np.pi * 2 / grid.periods
    u0 = np.cos(k * x)
    run = run_damped_wave(m, grid, (u0, 0 * u0), 5.0,
                          dt=cfl_limit(m, grid) / 64, snapshot_times=[5.0])
    t = run.states[-1].t
    om = np.sqrt(k**2 - 0.25**2)
    exact = np.exp(-0.25 * t) * (np.cos(om * t) + 0.25 / om * np.sin(om * t)) * u0
    assert np.max(np.abs(run.states[-1].u - exact)) < 1e-6


def test_energy_balance_is_second_order(ref_medium):
    grid = TorusGrid(1, 16, 16)
    u0 = gaussian(grid)
    residuals = []
    for divisor in (2, 4):
        dt = cfl_limit(ref_medium, grid) / divisor
        run = run_damped_wave(ref_medium, grid, (u0, 0 * u0), 4.0, dt=dt,
                              snapshot_times=[0.0, 4.0])
        from periodica.analysis import energy_from_tables

        e0 = energy_from_tables(run.states[0], run.tables)
        e1 = energy_from_tables(run.states[-1], run.tables)
        residuals.append(abs(e1 - e0 + (run.dissipation[-1] - run.dissipation[0])) / e0)
    assert residuals[0] < 1e-4
    assert residuals[1] < residuals[0] / 2.5   # ~ dt^2 scaling


def test_energy_monotone_under_damping(ref_medium):
    grid = TorusGrid(1, 16, 16)
    u0 = gaussian(grid)
    snaps = np.linspace(0, 8, 9)
    run = run_damped_wave(ref_medium, grid, (u0, 0 * u0), 8.0, snapshot_times=snaps)
    from periodica.analysis import energy_from_tables

    energies = [energy_from_tables(s, run.tables) for s in run.states]
    diffs = np.diff(energies)
    assert np.all(diffs <= 1e-8 * energies[0])


def test_heat_initial_datum_and_mass(ref_medium):
    grid = TorusGrid(1, 16, 32)
    u0 = gaussian(grid)
    u1 = 0.3 * gaussian(grid, width=2.5)
    hd = homogenize(ref_medium, 128)
    states = heat_comparator(ref_medium, hd, (u0, u1), grid, [0.0, 3.0, 11.0])
    x = grid.coords()
    expected0 = ref_medium.w_p(x) * (ref_medium.a_p(x) * u0 + u1) / hd.b_h
    np.testing.assert_allclose(states[0].u, expected0, atol=1e-13)
    masses = [np.sum(s.u) for s in states]
    np.testing.assert_allclose(masses, masses[0], rtol=1e-12)


def test_heat_semigroup_property(ref_medium):
    grid = TorusGrid(1, 16, 32)
    u0 = gaussian(grid)
    hd = homogenize(ref_medium, 128)
    s, t = 2.0, 5.0
    direct = heat_comparator(ref_medium, hd, (u0, 0 * u0), grid, [s + t])[0]
    middle = heat_comparator(ref_medium, hd, (u0, 0 * u0), grid, [s])[0]
    # restart from u_h(s): choose (0, u1') so that the prepared datum is u_h(s)
    x = grid.coords()
    u1 = middle.u * hd.b_h / ref_medium.w_p(x)
    restart = heat_comparator(ref_medium, hd, (0 * u0, u1), grid, [t])[0]
    np.testing.assert_allclose(restart.u, direct.u, atol=1e-12)


def test_heat_gaussian_variance():
    m = build_medium(constant_config(a=1.0))
    grid = TorusGrid(1, 16, 64)
    width = 1.2
    u0 = gaussian(grid, width)
    hd = homogenize(m, 64)
    t = 4.0
    out = heat_comparator(m, hd, (u0, 0 * u0), grid, [t])[0]
    c = grid.centered_coords()[..., 0]
    var = width**2 + 2.0 * hd.G_h[0, 0] * t / hd.b_h
    exact = width / np.sqrt(var) * np.exp(-c**2 / (2 * var))
    np.testing.assert_allclose(out.u, exact, atol=1e-10)


def test_floquet_roundtrip_and_plancherel(rng):
    grid = TorusGrid(1, 8, 32)
    u = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    f = floquet_transform(u, grid)
    np.testing.assert_allclose(inverse_floquet(f), u, atol=1e-12)
    total = np.sum(np.abs(u) ** 2) * grid.cell_volume
    slices = np.sum(np.abs(f.data) ** 2) * grid.cell_volume / grid.periods
    assert slices / grid.periods == pytest.approx(total / grid.periods, rel=1e-13)
    assert total == pytest.approx(slices / grid.periods, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=7))
def test_floquet_pairing_is_fourier_transform(index):
    grid = TorusGrid(1, 4, 8)
    rng = np.random.default_rng(index)
    u = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    f = floquet_transform(u, grid)
    pair = cell_pairing(f, np.ones(grid.cells_per_period))
    x = grid.axis_coords()
    sigma = f.sigma_axes[0][index]
    manual = np.sum(u * np.exp(-1j * sigma * x)) * grid.cell_volume
    assert pair[index] == pytest.approx(manual, abs=1e-12)


def test_floquet_2d_roundtrip(rng):
    grid = TorusGrid(2, 4, 6)
    u = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    f = floquet_transform(u, grid)
    np.testing.assert_allclose(inverse_floquet(f), u, atol=1e-12)
    total = np.sum(np.abs(u) ** 2)
    slices = np.sum(np.abs(f.data) ** 2) / grid.periods**2
    assert total == pytest.approx(slices, rel=1e-12)


def test_floquet_shape_check(rng):
    grid = TorusGrid(1, 8, 4)
    with pytest.raises(GridIncompatibility):
        floquet_transform(np.zeros(33), grid)


@pytest.fixture(scope="module")
def const_band_setup():
    m = build_medium(constant_config(a=1.0))
    grid = TorusGrid(1, 16, 64)
    sig = band_sigma_grid(grid, 0.45)
    band = first_band(m, 16, sig)
    return m, grid, band


def test_propagator_matches_modal_solution(const_band_setup):
    m, grid, band = const_band_setup
    u0 = gaussian(grid, width=3.0).astype(complex)
    tables = sample_on_grid(m, grid)
    F = (u0, 1j * tables.w * np.zeros_like(u0))
    prop = BandPropagator(band, grid, radius=0.45)
    t = 12.0
    got_u, got_v = prop(F, t)
    # modal oracle: small-root part of u'' + u' + sigma^2 u = 0 per slice
    f = floquet_transform(u0, grid)
    data = np.zeros_like(f.data)
    for i, sigma in enumerate(f.sigma_axes[0]):
        if abs(sigma) > 0.45:
            continue
        disc = np.sqrt(complex(0.25 - sigma**2))
        lam1 = -1j * (0.5 - disc)     # small root (in the -i lambda convention)
        lam2 = -1j * (0.5 + disc)
        # u(0)=g, u'(0)=0 -> coefficient of the small branch
        c1 = -lam2 / (lam1 - lam2)
        data[i] = c1 * np.exp(-1j * lam1 * t) * f.data[i]
    from periodica.evolve import FloquetField

    oracle = inverse_floquet(FloquetField(grid, data, f.sigma_axes))
    scale = np.max(np.abs(oracle))
    assert np.max(np.abs(got_u - oracle)) < 1e-6 * scale


def test_propagator_linearity(const_band_setup, rng):
    m, grid, band = const_band_setup
    prop = BandPropagator(band, grid, radius=0.45)
    F1 = (rng.normal(size=grid.shape) + 0j, rng.normal(size=grid.shape) + 0j)
    F2 = (rng.normal(size=grid.shape) + 0j, rng.normal(size=grid.shape) + 0j)
    a, b = 1.3, -0.4j
    lhs = prop((a * F1[0] + b * F2[0], a * F1[1] + b * F2[1]), 3.0)
    r1 = prop(F1, 3.0)
    r2 = prop(F2, 3.0)
    np.testing.assert_allclose(lhs[0], a * r1[0] + b * r2[0], atol=1e-11)
    np.testing.assert_allclose(lhs[1], a * r1[1] + b * r2[1], atol=1e-11)


def test_propagator_flow_property(const_band_setup):
    m, grid, band = const_band_setup
    prop = BandPropagator(band, grid, radius=0.45)
    u0 = gaussian(grid, width=3.0).astype(complex)
    F = (u0, np.zeros_like(u0))
    coeff = prop.coefficients(F)
    fac_ts = np.exp(-1j * band.lambdas[np.asarray(prop.band_rows)] * 7.0)
    fac_t = np.exp(-1j * band.lambdas[np.asarray(prop.band_rows)] * 3.0)
    fac_s = np.exp(-1j * band.lambdas[np.asarray(prop.band_rows)] * 4.0)
    np.testing.assert_allclose(fac_ts, fac_t * fac_s, rtol=1e-12)


def test_propagator_cross_validates_against_stepper(const_band_setup):
    m, grid, band = const_band_setup
    u0 = gaussian(grid, width=2.0)
    tables = sample_on_grid(m, grid)
    t_end = 16.0
    run = run_damped_wave(m, grid, (u0, 0 * u0), t_end, snapshot_times=[t_end])
    prop = BandPropagator(band, grid, radius=0.45)
    pu, _ = prop((u0.astype(complex), np.zeros(grid.shape, complex)), t_end)
    ball = np.abs(grid.centered_coords()[..., 0]) <= 8.0
    num = np.sqrt(np.sum(np.abs(run.states[-1].u - pu.real)[ball] ** 2))
    den = np.sqrt(np.sum(np.abs(run.states[-1].u)[ball] ** 2))
    assert num <= 0.1 * den


def test_propagator_needs_matching_band(const_band_setup):
    m, grid, band = const_band_setup
    other = TorusGrid(1, 16, 32)
    with pytest.raises(BandUnavailable):
        BandPropagator(band, other, radius=0.45)


def test_band_sigma_grid_radius():
    grid = TorusGrid(1, 8, 16)
    pts = band_sigma_grid(grid, 1.0)
    assert np.all(np.linalg.norm(pts, axis=1) <= 1.0 + 1e-12)
    assert any(np.linalg.norm(p) == 0 for p in pts)
