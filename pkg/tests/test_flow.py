import numpy as np
import pytest

from periodica import build_medium
from periodica.errors import EmptyEnsemble, StepUnderflow
from periodica.flow import (
    PhasePoint,
    gcc_audit,
    hamiltonian,
    integrate_flow,
    sample_level_set,
)

from conftest import constant_config, reference_config


def test_free_flow_is_exact(const_medium):
    start = PhasePoint(np.array([0.2]), np.array([0.7]))
    traj = integrate_flow(const_medium, start, 4.0, 0.05)
    exact = 0.2 + 2.0 * traj.times * 0.7
    np.testing.assert_allclose(traj.positions[:, 0], exact, atol=1e-12)
    np.testing.assert_allclose(traj.momenta[:, 0], 0.7, atol=1e-14)


def test_hamiltonian_conserved_reference(ref_medium):
    traj = integrate_flow(ref_medium, PhasePoint(np.array([0.13]), np.array([1.1])),
                          10.0, 0.01)
    assert traj.p_drift <= 1e-6 * traj.p_values[0]


def test_time_reversal(ref_medium):
    fwd = integrate_flow(ref_medium, PhasePoint(np.array([0.3]), np.array([0.9])),
                         5.0, 0.005)
    back = integrate_flow(ref_medium,
                          PhasePoint(fwd.positions[-1], -fwd.momenta[-1]),
                          5.0, 0.005)
    assert abs(back.positions[-1, 0] - 0.3) < 1e-5
    assert abs(back.momenta[-1, 0] + 0.9) < 1e-5


def test_step_underflow(ref_medium):
    with pytest.raises(StepUnderflow):
        integrate_flow(ref_medium, PhasePoint(np.array([0.3]), np.array([0.9])),
                       5.0, 0.5, drift_tol=1e-16)


def test_lattice_shift_invariance(ref_medium):
    a = integrate_flow(ref_medium, PhasePoint(np.array([0.3]), np.array([0.9])),
                       3.0, 0.01)
    b = integrate_flow(ref_medium, PhasePoint(np.array([1.3]), np.array([0.9])),
                       3.0, 0.01)
    np.testing.assert_allclose(b.positions - 1.0, a.positions, atol=1e-12)
    np.testing.assert_allclose(b.damping_integral, a.damping_integral, atol=1e-12)


def test_constant_absorption_integral(const_medium):
    audit = gcc_audit(const_medium, 3.0, 128, seed=11)
    assert audit.min_integral == pytest.approx(3.0, abs=1e-10)
    assert audit.mean_integral == pytest.approx(3.0, abs=1e-10)


def test_line_integral_oracle():
    # straight flow x(t) = x0 + t at xi = 1/2; integral of 1 + cos over a
    # whole period is exactly the period
    cfg = constant_config()
    cfg["a"] = {"type": "cosine-series", "mean": 1.0,
                "terms": [{"amplitude": 1.0, "wavevector": [1]}]}
    m = build_medium(cfg)
    traj = integrate_flow(m, PhasePoint(np.array([0.123]), np.array([0.5])),
                          1.0, 0.001)
    assert traj.damping_integral[-1] == pytest.approx(1.0, abs=1e-9)
    # absorption vanishes at isolated points but transverse rays still collect
    audit = gcc_audit(m, 1.0, 64, seed=3)
    assert audit.min_integral > 0.5


def test_level_set_sampling(ref_medium):
    x, xi = sample_level_set(ref_medium, 200, seed=5)
    p = hamiltonian(ref_medium, x, xi)
    np.testing.assert_allclose(p, 1.0, atol=1e-12)


def test_empty_ensemble(ref_medium):
    with pytest.raises(EmptyEnsemble):
        gcc_audit(ref_medium, 1.0, 0)


def test_audit_threshold_and_report(ref_medium):
    audit = gcc_audit(ref_medium, 2.0, 64, seed=9, threshold=0.05)
    assert audit.passed is True
    doc = audit.to_dict()
    assert doc["ensemble_size"] == 64
    assert len(doc["histogram_counts"]) == 32


def test_two_dimensional_flow_conserves():
    cfg = {"dimension": 2,
           "G": {"type": "expression", "expr": "1 + 0.3*cos(2*pi*x)*cos(2*pi*y)"},
           "w": {"type": "expression", "expr": "1 + 0.2*sin(2*pi*y)"},
           "a": 1.0}
    m = build_medium(cfg)
    traj = integrate_flow(m, PhasePoint(np.array([0.1, 0.2]), np.array([0.5, 0.3])),
                          3.0, 0.01)
    assert traj.p_drift <= 1e-6 * traj.p_values[0]
