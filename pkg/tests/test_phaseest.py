import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gibbslab import phaseest as pe
from gibbslab.hamiltonians import BathSpec, SystemHamiltonian, bath_energies_bitorder, bath_fields, compose_h0
from gibbslab.phaseest import PhaseEstimationConfig
from gibbslab.states import EnergyWindow


def _h0(m=4, eta=0.7, seed=0):
    bath = bath_energies_bitorder(bath_fields(BathSpec(m, eta, 0.05, seed=seed)))
    return compose_h0(SystemHamiltonian.two_level(1.0), bath)


def test_config_validation():
    with pytest.raises(ValueError):
        PhaseEstimationConfig(3, 4)
    with pytest.raises(ValueError):
        PhaseEstimationConfig(29, 3)
    with pytest.raises(ValueError):
        PhaseEstimationConfig(5, 2, target="HS")
    cfg = PhaseEstimationConfig(7, 3)
    assert cfg.delta_star == 16 and cfg.n_outcomes == 8


def test_outcome_distribution_against_amplitudes():
    h0 = _h0(m=3)
    cfg = PhaseEstimationConfig(5, 2)
    table = pe.outcome_distribution(h0, cfg)
    phi = pe.phases(h0, table.scale)
    brute = np.zeros(cfg.n_outcomes)
    for p in phi:
        for s in range(1 << cfg.r):
            brute[s >> (cfg.r - cfg.q)] += abs(pe.alpha_amplitude(p, s, cfg.r)) ** 2
    assert np.allclose(table.probabilities, brute / h0.dim, atol=1e-12)
    assert np.isclose(table.probabilities.sum(), 1.0)
    for s in range(cfg.n_outcomes):
        assert np.allclose(pe.outcome_weights(h0, cfg, s), table.weights[:, s], atol=1e-14)
    with pytest.raises(ValueError):
        pe.outcome_weights(h0, cfg, 4)


def test_scale_and_phase_guards():
    h0 = _h0()
    assert pe.default_scale(h0, 3) > h0.eigenvalues.max()
    with pytest.raises(ValueError):
        pe.phases(h0, float(h0.eigenvalues.max()))


def test_omega_qc_is_state_and_converges_to_window():
    h0 = _h0(m=8, eta=0.6)
    dists = []
    for x in (2, 6, 10):
        cfg = PhaseEstimationConfig(3 + x, 3)
        table = pe.outcome_distribution(h0, cfg)
        s = 3
        rho = pe.omega_qc(h0, cfg, s, scale=table.scale)
        assert np.isclose(np.trace(rho.matrix).real, 1.0)
        w = EnergyWindow(table.energy(s), table.width)
        rect = np.zeros(h0.dim)
        idx = h0.in_window(w)
        rect[idx] = 1.0 / idx.size
        dists.append(0.5 * np.abs(pe.omega_qc_weights(table.weights[:, s]) - rect).sum())
    assert dists[0] > dists[1] > dists[2]
    p = pe.reduced_diagonal_weights(h0, pe.omega_qc_weights(table.weights[:, 3]))
    assert np.isclose(p.sum(), 1.0)


@pytest.mark.parametrize("r,q", [(3, 1), (4, 2), (5, 2), (6, 3), (5, 5)])
def test_fg_numeric_against_bruteforce(r, q):
    cfg = PhaseEstimationConfig(r, q)
    numeric, closed = pe.fg_one_norm(cfg)
    assert np.isclose(numeric, pe.fg_one_norm_bruteforce(cfg), atol=1e-9)
    assert numeric <= closed


def test_fg_reference_value():
    numeric, closed = pe.fg_one_norm(PhaseEstimationConfig(16, 4))
    assert numeric <= 3.18e-3
    assert np.isclose(closed, 2.0 ** -10 * (0.5 + 1 / np.pi ** 2 + 12 * np.log(2) / np.pi))
    assert np.isclose(numeric, 6.8138e-4, rtol=1e-4)


def test_fg_kernels_normalized():
    cfg = PhaseEstimationConfig(6, 2)
    x = (np.arange(20000) + 0.5) / 20000
    f, big_f, g = pe.fg_kernels(x, cfg)
    assert np.isclose(f.mean(), 1.0, atol=1e-3) and np.isclose(big_f.mean(), 1.0, atol=1e-3)
    assert np.isclose(g.mean(), 1.0)


@settings(max_examples=60)
@given(st.floats(0.05, 1.9), st.integers(3, 8), st.integers(8, 16))
def test_temperature_round_trip(frac, q, m):
    bath = BathSpec.from_lambda(20.0, m, 1.0)
    beta = frac / bath.eta
    s = pe.s_star_for_beta(beta, q, bath, 1.0)
    assert abs(pe.beta_from_outcome(s, q, bath, 1.0) - beta) <= pe.delta_beta_bound(q, bath, 1.0)


def test_beta_grid_spacing_and_range():
    bath = BathSpec.from_lambda(20.0, 10, 1.0)
    q = 4
    db = pe.delta_beta_bound(q, bath, 1.0)
    assert np.isclose(pe.beta_from_outcome(3, q, bath, 1.0) - pe.beta_from_outcome(4, q, bath, 1.0), db)
    with pytest.raises(ValueError):
        pe.s_star_for_beta(10.0, q, bath, 1.0)
    assert pe.q_for_delta_beta(db, bath, 1.0) <= q + 1


def test_lambda_form_of_delta_beta():
    # the two printed forms agree when lambda = m
    bath = BathSpec.from_lambda(10.0, 10, 1.0)
    assert np.isclose(pe.delta_beta_bound_lambda(5, 10.0, 10, 1.0), pe.delta_beta_bound(5, bath, 1.0))


def test_algorithm_error_terms():
    t1, t2 = pe.algorithm_error_bound(PhaseEstimationConfig(16, 4), 20.0, 0.0, 1.0)
    assert np.isclose(t1, 2.0 ** -10 * (1 + 12 * np.log(2) / np.pi ** 2) * np.exp(0.1))
    assert np.isclose(t1, 1.98884e-3, rtol=1e-4)
    assert np.isclose(t2, 0.5 * (np.exp(0.1) - 1))
    eta = np.sqrt(20.0 / 10)
    assert np.isclose(pe.circuit_error_bound(PhaseEstimationConfig(16, 4), eta, 10, 0.3, 1.0),
                      pe.algorithm_error_bound(PhaseEstimationConfig(16, 4), 20.0, 0.3, 1.0)[0])
    with pytest.raises(ValueError):
        pe.algorithm_error_bound(PhaseEstimationConfig(4, 2), 0.0, 0.0, 1.0)


def test_expected_runs_forms():
    lam, m, q = 20.0, 12, 4
    assert np.isclose(pe.expected_runs_bound(q, m, lam, 0.0, 1.0), 16 * np.sqrt(np.pi / 24) * np.exp(0.1))
    # the width form with delta = ||H|| / 2**q and ||H|| ~ eta m
    eta = np.sqrt(lam / m)
    assert np.isclose(pe.expected_runs_bound_width(eta * m / 2 ** q, lam, 0.5, 1.0),
                      pe.expected_runs_bound(q, m, lam, 0.5, 1.0))
    assert np.isclose(pe.expected_runs_lower(2, 50.0, 1.0), 2.0, rtol=1e-12)
    h0 = _h0(m=8)
    table = pe.outcome_distribution(h0, PhaseEstimationConfig(8, 3))
    bound, emp = pe.expected_runs(table, 2, 8, lam, 0.5, 1.0)
    assert np.isclose(emp, 1 / table.probabilities[2])
