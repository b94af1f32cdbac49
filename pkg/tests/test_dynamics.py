import numpy as np
import pytest
import scipy.linalg

from gibbslab import dynamics
from gibbslab.dynamics import TimeSamplingPlan
from gibbslab.hamiltonians import eigendecompose
from gibbslab.perturbation import ProjectorCensus, theorem1_bound
from gibbslab.states import (EnergyWindow, PureState, dephase, partial_trace_bath, rectangular_pure_state,
                             reduced_pure)


def _system(rng, d_s=2, d_b=16):
    a = rng.standard_normal((d_s * d_b,) * 2) + 1j * rng.standard_normal((d_s * d_b,) * 2)
    return eigendecompose(0.5 * (a + a.conj().T), dims=(d_s, d_b), shift=True)


def test_evolve_matches_expm(rng):
    eigs = _system(rng)
    w = EnergyWindow(float(eigs.eigenvalues[5]), 3.0)
    psi = rectangular_pure_state(eigs, w, seed=0)
    t = 0.37
    ref = scipy.linalg.expm(-1j * t * eigs.matrix()) @ psi.amplitudes
    out = dynamics.evolve(psi, eigs, t)
    assert np.allclose(out.amplitudes, ref, atol=1e-10)
    assert np.allclose(dynamics.evolve(psi, eigs, 0.0).amplitudes, psi.amplitudes)


def test_reduced_trajectory_matches_pointwise(rng):
    eigs = _system(rng)
    psi = rectangular_pure_state(eigs, EnergyWindow(float(eigs.eigenvalues[3]), 4.0), seed=1)
    times = np.linspace(0, 5, 7)
    traj = dynamics.reduced_trajectory(psi, eigs, times)
    for t, red in zip(times, traj):
        assert np.allclose(red, reduced_pure(dynamics.evolve(psi, eigs, t)), atol=1e-12)


def test_long_time_average_approaches_dephased(rng):
    eigs = _system(rng, d_b=32)
    w = EnergyWindow(float(eigs.eigenvalues[10]), 3.0)
    psi = rectangular_pure_state(eigs, w, seed=2)
    target = partial_trace_bath(dephase(psi, eigs)).matrix
    plan = TimeSamplingPlan(horizon=2e4, n_times=4000, seed=3)
    traj = dynamics.reduced_trajectory(psi, eigs, plan.times())
    assert np.abs(traj.mean(axis=0) - target).max() < 0.02


def test_time_average_reports_series(rng):
    eigs = _system(rng)
    psi = rectangular_pure_state(eigs, EnergyWindow(float(eigs.eigenvalues[3]), 4.0), seed=1)
    ref = np.eye(2) / 2
    plan = TimeSamplingPlan(50.0, 200, seed=4)
    mean, err, times, dist = dynamics.time_averaged_distance(psi, eigs, ref, plan, return_series=True)
    assert np.isclose(mean, dist.mean()) and err > 0 and times.size == 200
    assert (mean, err) == dynamics.time_averaged_distance(psi, eigs, ref, plan)


def test_sampling_plan():
    plan = TimeSamplingPlan(10.0, 100, seed=5)
    assert np.array_equal(plan.times(), plan.times())
    t = plan.times()
    assert t.min() >= 0 and t.max() < 10 and np.all(np.diff(t) >= 0)
    eq = TimeSamplingPlan(10.0, 100, scheme="equispaced").times()
    assert eq[0] == 0 and np.isclose(eq[1], 0.1)
    with pytest.raises(ValueError):
        TimeSamplingPlan(0.0)
    with pytest.raises(ValueError):
        TimeSamplingPlan(1.0, 10)
    with pytest.raises(ValueError):
        TimeSamplingPlan(1.0, scheme="sobol")
    d = TimeSamplingPlan.default_for([0.0, 1.0, 3.0])
    assert np.isclose(d.horizon, 100 * 2 * np.pi / 1.5)
    with pytest.raises(ValueError):
        TimeSamplingPlan.default_for([1.0, 1.0])


def _census(omega):
    return ProjectorCensus(epsilon=0.1, omega_g=omega, omega_f=omega, omega_eps=2, norm_g_fbar=0.0,
                           norm_gbar_f=0.0, norm_gi_fbar_inf=0.0, omega_ge=1, omega_fe=1)


def test_dynamic_bounds():
    c = _census(400)
    assert np.isclose(dynamics.corollary2_dynamic_bound(2, c, 0.01), 2 / 40 + theorem1_bound(c, 0.01))
    assert np.isclose(dynamics.kinematic_threshold(2, c, 0.01, 0.1), 4 / 20 + theorem1_bound(c, 0.01) + 0.1)
    with pytest.raises(ValueError):
        dynamics.corollary2_dynamic_bound(2, _census(0), 0.01)


def test_haar_states(rng):
    eigs = _system(rng)
    w = EnergyWindow(float(eigs.eigenvalues[4]), 5.0)
    z, vecs = dynamics.haar_window_states(eigs, w, 300, seed=1)
    assert np.allclose(np.linalg.norm(z, axis=0), 1.0)
    red = dynamics.haar_reduced_states(eigs, w, eigs.dims, 300, seed=1)
    assert np.allclose(np.trace(red, axis1=1, axis2=2), 1.0)
    frac = dynamics.kinematic_tail_sample(eigs, w, 2, 300, 0.1, _census(eigs.in_window(w).size), 1e-3,
                                          np.eye(2) / 2, seed=1)
    assert 0.0 <= frac <= 1.0
    with pytest.raises(ValueError):
        dynamics.kinematic_tail_sample(eigs, w, 2, 50, 0.1, _census(10), 1e-3, np.eye(2) / 2)


def test_nondegenerate_gaps():
    ok, sep = dynamics.nondegenerate_gaps([0.0, 1.0, 2.0])
    assert not ok and sep == 0.0
    ok, sep = dynamics.nondegenerate_gaps([0.0, 1.0, 2.5, 4.7])
    assert ok and sep > 0
    assert dynamics.subsystem_distance(np.eye(2) / 2, np.diag([1.0, 0.0])) == pytest.approx(0.5)
