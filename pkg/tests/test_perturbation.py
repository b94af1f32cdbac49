import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gibbslab import perturbation as pt
from gibbslab.hamiltonians import (BathSpec, CouplingSpec, SystemHamiltonian, bath_energies_bitorder,
                                   bath_fields, compose_h0, coupled_eigensystem, eigendecompose,
                                   sample_coupling)
from gibbslab.states import EnergyWindow, microcanonical_state, partial_trace_bath, trace_distance


def _instance(seed, n=1, m=5, v_norm=0.05):
    rng = np.random.default_rng(seed)
    hs = SystemHamiltonian.random(n, 1.0, rng)
    bath = bath_energies_bitorder(bath_fields(BathSpec(m, 1.0, 0.05, seed=seed)))
    h0 = compose_h0(hs, bath)
    v = sample_coupling(h0.dim, CouplingSpec(v_norm, seed=seed + 1))
    h = coupled_eigensystem(hs, bath, v, offset=h0.offset)
    center = 0.5 * (h0.eigenvalues[0] + h0.eigenvalues[-1])
    w = EnergyWindow(float(center - 0.5 - rng.uniform(0, 0.5)), float(rng.uniform(1.0, 2.0)))
    return h0, h, w, v_norm


def _trace_norm(a):
    return float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (a + a.conj().T)))))


def _dense_oracle(h0, h, w, eps):
    """Projector norms from full d x d matrices."""
    uf = h0.columns(h0.in_window(w))
    ug_idx = h.in_window(w)
    ug = h.columns(ug_idx)
    d = h0.dim
    f = uf @ uf.conj().T
    g = ug @ ug.conj().T
    vals = h.eigenvalues[ug_idx]
    ui = ug[:, (vals >= w.E + eps) & (vals < w.upper - eps)]
    gi = ui @ ui.conj().T
    eye = np.eye(d)
    return {
        "g_fbar": float(np.sum(np.linalg.svd(g @ (eye - f), compute_uv=False))),
        "gbar_f": float(np.sum(np.linalg.svd((eye - g) @ f, compute_uv=False))),
        "gi_fbar_inf": float(np.linalg.norm(gi @ (eye - f), 2)) if ui.shape[1] else 0.0,
        "g_minus_f": _trace_norm(g - f),
        "full": 0.5 * _trace_norm(g / ug.shape[1] - f / uf.shape[1]),
    }


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_low_rank_norms_match_dense(seed):
    h0, h, w, v = _instance(seed)
    wp = pt.WindowProjectors(h0, h, w)
    eps = 0.1 * w.delta
    ref = _dense_oracle(h0, h, w, eps)
    c = wp.census(eps)
    assert np.isclose(c.norm_g_fbar, ref["g_fbar"], atol=1e-9)
    assert np.isclose(c.norm_gbar_f, ref["gbar_f"], atol=1e-9)
    assert np.isclose(c.norm_gi_fbar_inf, ref["gi_fbar_inf"], atol=1e-9)
    assert np.isclose(wp.norm_g_minus_f(), ref["g_minus_f"], atol=1e-9)
    assert np.isclose(wp.microcanonical_distance(), ref["full"], atol=1e-12)
    assert np.isclose(wp.microcanonical_distance(),
                      trace_distance(microcanonical_state(h, w), microcanonical_state(h0, w)), atol=1e-12)
    red = trace_distance(partial_trace_bath(microcanonical_state(h, w)), partial_trace_bath(microcanonical_state(h0, w)))
    assert np.isclose(wp.reduced_distance(), red, atol=1e-12)


def test_census_counts():
    h0, h, w, v = _instance(4)
    wp = pt.WindowProjectors(h0, h, w)
    eps = 0.2
    c = wp.census(eps)
    assert c.omega_g == h.in_window(w).size and c.omega_f == h0.in_window(w).size
    assert c.omega_eps == c.omega_ge + c.omega_fe
    assert c.omega_ge == pt.edge_count(h.eigenvalues, w, eps)
    assert c.omega_max == max(c.omega_g, c.omega_f) and c.delta_omega == abs(c.omega_g - c.omega_f)
    for bad in (0.0, w.delta / 2, -1.0):
        with pytest.raises(ValueError):
            wp.census(bad)


@settings(max_examples=15)
@given(st.integers(0, 10 ** 6), st.sampled_from([1e-3, 1e-2, 1e-1]))
def test_theorem_bound_and_proof_steps(seed, ratio):
    h0, _, w, _ = _instance(seed, m=5)
    v = ratio * w.delta
    h = eigendecompose(h0.matrix() + sample_coupling(h0.dim, CouplingSpec(v, seed=seed)), dims=h0.dims)
    eps = pt.epsilon_grid(pt.default_epsilon_floor(h0, w), w.delta, 32)
    sweep = pt.theorem1_sweep(h0, h, w, v, eps)
    assert sweep.bound_ok().all()
    assert sweep.bhatia_ok().all()
    for c in sweep.censuses:
        assert sweep.full_distance <= pt.proof_chain_bound(sweep.norm_g_minus_f, c) + 1e-12
        assert sweep.norm_g_minus_f <= c.norm_g_fbar + c.norm_gbar_f + 1e-9


def test_zero_coupling_is_exact():
    h0, _, w, _ = _instance(3)
    wp = pt.WindowProjectors(h0, h0, w)
    assert wp.microcanonical_distance() < 1e-12 and wp.norm_g_fbar < 1e-6


def test_flat_heuristic():
    c = pt.optimal_epsilon_flat(0.02, 2.0)
    assert np.isclose(c.epsilon, np.sqrt(0.02)) and np.isclose(c.bound, 0.4)
    assert np.isclose(c.bound_alt, 1.5 * np.sqrt(2) * 0.1)
    assert pt.optimal_epsilon_flat(0.0, 1.0).flags == ("degenerate",)
    assert "invalid-regime" in pt.optimal_epsilon_flat(1.0, 1.0).flags
    with pytest.raises(ValueError):
        pt.optimal_epsilon_flat(0.1, 0.0)


def test_exponential_dos_bound():
    c = pt.exponential_dos_bound(0.01, 4.0, 1.0)
    assert np.isclose(c.epsilon, 0.05)
    assert np.isclose(c.bound, 2 * np.sqrt(0.04) / (1 - np.exp(-4.0)))
    with pytest.raises(ValueError):
        pt.exponential_dos_bound(0.01, 0.0, 1.0)


def test_bound_formula():
    c = pt.ProjectorCensus(epsilon=0.1, omega_g=100, omega_f=98, omega_eps=6, norm_g_fbar=0, norm_gbar_f=0,
                           norm_gi_fbar_inf=0, omega_ge=3, omega_fe=3)
    assert np.isclose(pt.theorem1_bound(c, 0.001), 0.01 + 8 / 200)
    assert np.isclose(pt.proof_chain_bound(4.0, c), 6 / 200)


def test_epsilon_grid_inside():
    g = pt.epsilon_grid(0.01, 1.0, 32)
    assert g.size == 32 and g[0] > 0.01 and g[-1] < 0.5 and np.all(np.diff(g) > 0)
    with pytest.raises(ValueError):
        pt.epsilon_grid(0.6, 1.0)
