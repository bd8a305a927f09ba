import json

import numpy as np
import pytest

from periodica import build_medium, sample_on_grid
from periodica.errors import (
    ConfigError,
    DimensionMismatch,
    EllipticityViolation,
    NegativeAbsorption,
    ZeroDamping,
)
from periodica.medium import TorusGrid

from conftest import constant_config, reference_config


def test_constant_medium_bounds():
    m = build_medium(constant_config())
    assert m.bounds.g_min == pytest.approx(1.0, abs=1e-12)
    assert m.bounds.g_max == pytest.approx(1.0, abs=1e-12)
    assert m.bounds.w_min == pytest.approx(1.0, abs=1e-12)


def test_cosine_metric_extrema():
    m = build_medium(reference_config())
    assert m.bounds.g_min == pytest.approx(0.5, abs=1e-6)
    assert m.bounds.g_max == pytest.approx(1.5, abs=1e-6)
    assert m.bounds.w_min == pytest.approx(0.75, abs=1e-6)
    assert m.bounds.w_max == pytest.approx(1.25, abs=1e-6)


def test_sign_changing_absorption_rejected():
    cfg = constant_config()
    cfg["a"] = {"type": "cosine-series", "mean": 0.0,
                "terms": [{"amplitude": 1.0, "wavevector": [1]}]}
    with pytest.raises(NegativeAbsorption):
        build_medium(cfg)


def test_zero_absorption_rejected():
    with pytest.raises(ZeroDamping):
        build_medium(constant_config(a=0.0))


def test_nonpositive_metric_rejected():
    cfg = constant_config()
    cfg["G"] = {"type": "cosine-series", "mean": 1.0,
                "terms": [{"amplitude": 1.5, "wavevector": [1]}]}
    with pytest.raises(EllipticityViolation):
        build_medium(cfg)


def test_missing_field_is_config_error():
    with pytest.raises(ConfigError):
        build_medium({"dimension": 1, "G": 1.0, "w": 1.0})


def test_bad_expression_is_config_error():
    cfg = constant_config()
    cfg["w"] = {"type": "expression", "expr": "1 + import_os(x)"}
    with pytest.raises(ConfigError):
        build_medium(cfg)


def test_periodicity_to_machine_precision(ref_medium, rng):
    x = rng.random((50, 1)) * 3.0 - 1.0
    for field in (ref_medium.G_p, ref_medium.w_p, ref_medium.a_p):
        np.testing.assert_allclose(field(x), field(x + 1.0), rtol=0, atol=1e-13)


def test_expression_gradient_matches_finite_differences(ref_medium):
    x = np.linspace(0.05, 0.95, 7)[:, None]
    eps = 1e-6
    fd = (ref_medium.w_p(x + eps) - ref_medium.w_p(x - eps)) / (2 * eps)
    np.testing.assert_allclose(ref_medium.w_p.gradient(x)[:, 0], fd, rtol=1e-7)


def test_constant_tables_on_grid(const_medium):
    grid = TorusGrid(1, 8, 4)
    tables = sample_on_grid(const_medium, grid)
    assert np.all(tables.G == 1.0)
    assert np.all(tables.w == 1.0)
    assert np.all(tables.a == 1.0)
    assert np.all(tables.b == 1.0)


def test_cosine_table_node_zero(ref_medium):
    grid = TorusGrid(1, 8, 1)
    tables = sample_on_grid(ref_medium, grid)
    assert tables.G[0, 0][0] == pytest.approx(1.5, abs=1e-14)


def test_b_table_is_w_times_a(ref_medium):
    grid = TorusGrid(1, 16, 2)
    t = sample_on_grid(ref_medium, grid)
    np.testing.assert_allclose(t.b, t.w * t.a, rtol=0, atol=1e-15)


def test_perturbation_centered_on_torus():
    cfg = reference_config()
    cfg["perturbation"] = {"a": {"profile": "power", "amplitude": 1.0, "rate": 2.0}}
    m = build_medium(cfg)
    grid = TorusGrid(1, 8, 64)
    with pytest.warns(UserWarning):
        tables = sample_on_grid(m, grid)
    x = grid.coords()
    c = grid.centered_coords()
    expected = m.a_p(x) + 1.0 / (1.0 + np.sum(c * c, axis=-1))
    np.testing.assert_allclose(tables.a, expected, rtol=0, atol=1e-14)
    # the perturbation contribution peaks at the torus center
    contrib = tables.a - m.a_p(x)
    assert np.argmax(contrib) == grid.points_per_axis // 2


def test_compact_bump_has_valid_envelope():
    cfg = reference_config()
    cfg["perturbation"] = {"G": {"profile": "bump", "amplitude": 0.3, "radius": 4.0}}
    m = build_medium(cfg)   # envelope spot-check happens inside validation
    assert m.G_0 is not None
    r = np.linspace(0, 10, 301)[:, None]
    vals = np.abs(m.G_0(r)[..., 0, 0])
    assert np.all(vals <= m.G_0.envelope(r) + 1e-12)
    assert vals[-1] == 0.0   # compact support


def test_envelope_violation_rejected():
    cfg = reference_config()
    cfg["perturbation"] = {"a": {"profile": "power", "amplitude": 1.0, "rate": 2.0,
                                 "decay_rate": 5.0, "decay_constant": 1.0}}
    with pytest.raises(ConfigError):
        build_medium(cfg)


def test_dimension_mismatch(ref_medium):
    with pytest.raises(DimensionMismatch):
        sample_on_grid(ref_medium, TorusGrid(2, 8, 4))


def test_grid_invariants():
    with pytest.raises(ConfigError):
        TorusGrid(1, 7, 4)       # odd cells per period
    with pytest.raises(ConfigError):
        TorusGrid(3, 8, 4)       # unsupported dimension
    grid = TorusGrid(1, 4, 8)
    assert grid.points_per_axis == 32
    ks = grid.wavenumbers()[0]
    assert ks[1] == pytest.approx(2 * np.pi / 8)


def test_config_roundtrip_through_file(tmp_path):
    path = tmp_path / "medium.json"
    path.write_text(json.dumps(reference_config()))
    m = build_medium(path)
    assert m.dimension == 1


def test_two_dimensional_diagonal_metric():
    cfg = {
        "dimension": 2,
        "G": {"type": "diagonal", "entries": [
            {"type": "expression", "expr": "1 + 0.5*cos(2*pi*x)"},
            {"type": "constant", "value": 2.0},
        ]},
        "w": 1.0,
        "a": 1.0,
    }
    m = build_medium(cfg)
    val = m.G_p(np.array([[0.0, 0.3]]))[0]
    assert val[0, 0] == pytest.approx(1.5)
    assert val[1, 1] == pytest.approx(2.0)
    assert val[0, 1] == 0.0
