import numpy as np
import pytest

from gibbslab import circuit, phaseest as pe
from gibbslab.circuit import CircuitPlan, run_gate_level
from gibbslab.hamiltonians import BathSpec, SystemHamiltonian, bath_energies_bitorder, bath_fields, compose_h0
from gibbslab.states import trace_distance_matrix


@pytest.mark.parametrize("r", [1, 2, 3, 4, 5])
def test_qft_decomposition(r):
    u = circuit.gates_unitary(circuit.inverse_qft_gates(r), r)
    assert np.allclose(u, circuit.inverse_qft(r), atol=1e-12)
    f = circuit.inverse_qft(r)
    assert np.allclose(f @ f.conj().T, np.eye(1 << r), atol=1e-12)


def _kron_gate(op, qubit, nq):
    return np.kron(np.kron(np.eye(1 << qubit), op), np.eye(1 << (nq - qubit - 1)))


@pytest.mark.parametrize("qubit", [0, 1, 2])
def test_hadamard_on_density(rng, qubit):
    nq = 3
    a = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    rho = a @ a.conj().T
    h = _kron_gate(circuit.HADAMARD, qubit, nq)
    out = circuit._apply_to_density(rho.copy(), ("h", qubit), nq)
    assert np.allclose(out, h @ rho @ h.conj().T)


def test_swap_and_cphase_on_density(rng):
    nq = 3
    a = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    rho = a @ a.conj().T
    for gate in (("swap", 0, 2), ("cphase", 0, 1, 0.7)):
        u = circuit.gates_unitary([gate], nq)
        assert np.allclose(circuit._apply_to_density(rho.copy(), gate, nq), u @ rho @ u.conj().T)
    with pytest.raises(ValueError):
        circuit._gate_action(("cnot", 0, 1), nq)


def _plan(n, m, r, q, seed=0, **kw):
    rng = np.random.default_rng(seed)
    hs = SystemHamiltonian.random(n, 1.0, rng)
    bath = bath_energies_bitorder(bath_fields(BathSpec(m, 0.8, 0.05, seed=seed)))
    return CircuitPlan(hs, bath, r, q, **kw), compose_h0(hs, bath)


@pytest.mark.parametrize("n,m,r,q", [(1, 1, 2, 1), (1, 2, 3, 2), (2, 2, 3, 3), (1, 3, 4, 2)])
def test_gate_level_matches_spectral(n, m, r, q):
    plan, h0 = _plan(n, m, r, q, check_invariants=(n + m + r <= 6))
    res = run_gate_level(plan)
    table = pe.outcome_distribution(h0, pe.PhaseEstimationConfig(r, q), scale=plan.scale)
    assert np.max(np.abs(res.probabilities - table.probabilities)) <= 1e-12
    for s, state in res.states.items():
        diag = np.zeros(h0.dim)
        diag[h0.permutation] = pe.omega_qc_weights(table.weights[:, s])
        assert trace_distance_matrix(state, np.diag(diag)) <= 1e-12


def test_controlled_phases_layout():
    e = np.array([0.0, 0.25])
    v = circuit.controlled_power_phases(e, 1.0, 1, 2).reshape(2, 4)
    # control bit 1 is set for s in {2, 3}
    assert np.allclose(v[1], [1, 1, np.exp(2j * np.pi * 0.5), np.exp(2j * np.pi * 0.5)])
    assert np.allclose(v[0], 1)


def test_plan_guards():
    hs = SystemHamiltonian.two_level(1.0)
    with pytest.raises(MemoryError):
        CircuitPlan(hs, np.zeros(1 << 8), 6, 2)
    with pytest.raises(ValueError):
        CircuitPlan(hs, np.zeros(3), 3, 1)
    with pytest.raises(ValueError):
        CircuitPlan(hs, np.zeros(4), 2, 3)
    basis = np.eye(2)
    with pytest.raises(ValueError):
        CircuitPlan(SystemHamiltonian(np.array([0.0, 1.0]), basis=basis), np.zeros(4), 3, 1)
    plan = CircuitPlan(hs, np.array([0.0, 0.5]), 3, 1)
    assert plan.total_qubits == 5 and plan.ancilla_qubit(0) == 4 and plan.m == 1
