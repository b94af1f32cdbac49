import numpy as np
import pytest
from hypothesis import given, strategies as st

from gibbslab import counting
from gibbslab.counting import DosModel
from gibbslab.hamiltonians import BathSpec, SystemHamiltonian, build_bath, compose_h0
from gibbslab.states import EnergyWindow


def test_dos_defaults_and_fit():
    model = DosModel(0.5, 12)
    assert model.center == 3.0 and model.variance == 0.75 and model.total == 4096
    fit = DosModel.from_fields(0.5, np.full(12, 0.5))
    assert np.isclose(fit.center, model.center) and np.isclose(fit.variance, model.variance)
    with pytest.raises(ValueError):
        DosModel(0.0, 4)


@given(st.floats(-3, 10), st.floats(0.05, 4.0))
def test_quadrature_matches_closed_form(E, delta):
    model = DosModel(0.7, 10)
    assert np.isclose(counting.smoothed_count(model, E, delta), model.count_closed(E, delta), rtol=1e-10,
                      atol=1e-12 * model.total)


def test_cumulative_consistency():
    model = DosModel(1.0, 8)
    assert np.isclose(model.cumulative(1e6), model.total)
    assert np.isclose(model.cumulative(2.5) - model.cumulative(1.0), model.count_closed(1.0, 1.5))


def test_beta_is_log_derivative():
    model = DosModel(0.8, 14)
    E, delta, h = 2.0, 1.0, 1e-5
    num = (np.log(model.count_closed(E + h, delta)) - np.log(model.count_closed(E - h, delta))) / (2 * h)
    assert np.isclose(model.beta(E, delta), num, rtol=1e-6)


def test_narrow_window_curvature_limit():
    model = DosModel(0.8, 14)
    assert np.isclose(model.curvature(3.0, 1e-4), model.curvature_limit, rtol=1e-4)


def test_bath_counts_against_brute_force(rng):
    e = np.sort(rng.uniform(0, 10, 500))
    for lo in (0.0, 2.5, 9.9):
        assert counting.bath_count(e, lo, 1.0) == np.sum((e >= lo) & (e < lo + 1.0))
    lows = np.array([0.0, 2.5, 9.9])
    assert list(counting.bath_counts(e, lows, 1.0)) == [np.sum((e >= x) & (e < x + 1.0)) for x in lows]
    with pytest.raises(ValueError):
        counting.bath_count(e, 0.0, 0.0)


def test_decoupled_probabilities_match_full_spectrum():
    hs = SystemHamiltonian(np.array([0.0, 0.3, 0.8, 1.0]))
    bath, _ = build_bath(BathSpec(8, 0.6, 0.05, seed=3))
    w = EnergyWindow(2.0, 0.9)
    h0 = compose_h0(hs, bath, shift=False)
    idx = h0.in_window(w)
    expected = np.bincount(h0.permutation[idx] // bath.size, minlength=4) / idx.size
    assert np.allclose(counting.decoupled_reduced_probabilities(hs, bath, w), expected)


def test_exact_gammas_reconstruct_counts():
    hs = SystemHamiltonian.two_level(1.0)
    bath, _ = build_bath(BathSpec(12, 0.5, 0.05, seed=1))
    w = EnergyWindow(2.0, 1.0)
    beta = 0.9
    g = counting.exact_gammas(hs, bath, w, beta)
    p = np.exp(-beta * hs.energies + g)
    assert np.allclose(p / p.sum(), counting.decoupled_reduced_probabilities(hs, bath, w))


@given(st.floats(0.5, 50.0), st.integers(4, 20))
def test_lambda_and_spin_bath_bounds_agree(lam, m):
    eta = np.sqrt(lam / m)
    assert np.isclose(counting.counting_bound_lambda(lam), counting.counting_bound_spin_bath(1.0, eta, m))


@pytest.mark.parametrize("m,lam", [(12, 5.0), (14, 10.0), (16, 20.0)])
def test_smoothed_model_obeys_bound(m, lam):
    hs = SystemHamiltonian.two_level(1.0)
    bath = BathSpec.from_lambda(lam, m, 1.0, seed=2)
    energies, _ = build_bath(bath)
    model = DosModel.from_spec(bath)
    sigma = np.sqrt(model.variance)
    for E in np.linspace(model.center - 2 * sigma, model.center - 2 * bath.eta, 5):
        res = counting.gibbs_comparison(hs, energies, model, EnergyWindow(float(E), 2 * bath.eta), bath.eta, m)
        assert res.beta > 0
        assert res.smoothed_distance <= min(res.counting_bound, res.gamma_bound) + 1e-12
        assert res.distance <= res.smoothed_distance + res.slack + 1e-12
        assert np.isclose(res.lam, lam)


def test_comparison_warns_below_system_norm():
    hs = SystemHamiltonian.two_level(1.0)
    bath = BathSpec.from_lambda(10.0, 12, 1.0)
    energies, _ = build_bath(bath)
    with pytest.warns(UserWarning):
        counting.gibbs_comparison(hs, energies, DosModel.from_spec(bath), EnergyWindow(0.5, 1.0), bath.eta, 12)
    with pytest.raises(ValueError):
        counting.gibbs_comparison(hs, energies, DosModel.from_spec(bath), EnergyWindow(2.0, 1.0), bath.eta, 12,
                                  beta_at="upper")


def test_boltzmann_any_sign():
    e = np.array([0.0, 1.0])
    assert np.allclose(counting.boltzmann_weights(e, -1.0), counting.boltzmann_weights(e[::-1], 1.0))
    assert np.allclose(counting.boltzmann_weights(e, 0.0), 0.5)


def test_curvature_and_gamma_ranges():
    model = DosModel(0.5, 12)
    lo, hi = counting.curvature_range(model, 1.0, [1.0, 2.0, 3.0])
    assert lo <= hi < 0
    hs = SystemHamiltonian.two_level(1.0)
    g_lo, g_hi = counting.gamma_range(model, hs, EnergyWindow(2.0, 1.0))
    assert g_lo <= g_hi <= 0
