"""Gate-level density-matrix simulation of the rectangular-state preparation circuit.

Qubit 0 is the most significant. Register Q (system then bath qubits) comes
first, register R (``r`` ancillas) last, and ancilla bit ``tau`` (value
``2**tau`` in the outcome ``s``) is global qubit ``n_q + r - 1 - tau``. The
controlled evolution applies ``U**(2**tau)`` with ``U = exp(2 pi i H_0 / scale)``,
so standard phase estimation yields outcome ``s`` with probability
``|alpha_s(E/scale)|**2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .hamiltonians import SystemHamiltonian

MAX_QUBITS = 14
MAX_STATE_BYTES = 2 << 30

HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)


def inverse_qft(r: int) -> np.ndarray:
    """``F^dagger[s, j] = exp(-2 pi i s j / 2**r) / sqrt(2**r)``."""
    if r > MAX_QUBITS:
        raise ValueError(f"r={r} exceeds {MAX_QUBITS}")
    n = 1 << r
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def inverse_qft_gates(r: int) -> list:
    """Textbook decomposition of ``F^dagger`` on ``r`` qubits (qubit 0 most significant).

    Entries are ``("h", q)``, ``("cphase", control, target, angle)`` and
    ``("swap", a, b)``.
    """
    gates = [("swap", i, r - 1 - i) for i in range(r // 2)]
    for j in range(r - 1, -1, -1):
        for k in range(r - 1, j, -1):
            gates.append(("cphase", k, j, -np.pi / (1 << (k - j))))
        gates.append(("h", j))
    return gates


def gates_unitary(gates, nqubits: int) -> np.ndarray:
    """Multiply out a gate list on a pure ``nqubits`` register (used to check decompositions)."""
    u = np.eye(1 << nqubits, dtype=np.complex128)
    for g in gates:
        u = _apply_rows(u, g, nqubits)
    return u


def _bits(nq, qubit):
    return (np.arange(1 << nq) >> (nq - 1 - qubit)) & 1


def _gate_action(gate, nq):
    """``("hadamard", qubit)``, ``("diag", vector)`` or ``("perm", index)`` for a gate on ``nq`` qubits."""
    kind = gate[0]
    if kind == "h":
        return "hadamard", gate[1]
    if kind == "cphase":
        on = (_bits(nq, gate[1]) & _bits(nq, gate[2])).astype(bool)
        return "diag", np.where(on, np.exp(1j * gate[3]), 1.0)
    if kind == "swap":
        idx = np.arange(1 << nq)
        ba, bb = _bits(nq, gate[1]), _bits(nq, gate[2])
        sa, sb = nq - 1 - gate[1], nq - 1 - gate[2]
        return "perm", idx ^ ((ba ^ bb) << sa) ^ ((ba ^ bb) << sb)
    raise ValueError(f"unknown gate {kind!r}")


def _hadamard_inplace(mat, lead):
    """Hadamard on the middle axis of ``mat.reshape(lead, 2, -1)``, in place."""
    view = mat.reshape(lead, 2, -1)
    upper = view[:, 0] + view[:, 1]
    view[:, 1] = view[:, 0] - view[:, 1]
    view[:, 0] = upper
    view *= 1 / np.sqrt(2)
    return mat


def _hadamard_rows(mat, qubit, nq):
    return _hadamard_inplace(mat.copy(), 1 << qubit)


def _apply_rows(mat, gate, nq):
    kind, arg = _gate_action(gate, nq)
    if kind == "hadamard":
        return _hadamard_rows(mat, arg, nq)
    if kind == "diag":
        return arg[:, None] * mat
    return mat[arg]


def _apply_to_density(rho, gate, nq):
    """``rho -> g rho g^dagger`` for a dense ``2**nq`` square matrix; may overwrite ``rho``."""
    kind, arg = _gate_action(gate, nq)
    if kind == "hadamard":
        rho = _hadamard_inplace(rho, 1 << arg)
        # column index splits as (lead, 2, rest) inside each row
        return _hadamard_inplace(rho, rho.shape[0] << arg)
    if kind == "diag":
        return arg[:, None] * rho * arg.conj()[None, :]
    return rho[np.ix_(arg, arg)]


def _shift(gate, offset):
    """Relabel the qubits of a register-local gate by ``offset``."""
    if gate[0] == "cphase":
        return ("cphase", gate[1] + offset, gate[2] + offset, gate[3])
    return (gate[0],) + tuple(x + offset for x in gate[1:])


@dataclass
class CircuitPlan:
    """System spectrum, bath fields and register sizes for one circuit run."""

    hs: SystemHamiltonian
    bath_energies: np.ndarray
    r: int
    q: int
    scale: Optional[float] = None
    check_invariants: bool = False
    max_qubits: int = MAX_QUBITS
    gates: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.bath_energies = np.asarray(self.bath_energies, dtype=np.float64)
        if self.hs.basis is not None:
            raise ValueError("gate-level simulation needs a diagonal system Hamiltonian")
        d_b = self.bath_energies.size
        if d_b & (d_b - 1):
            raise ValueError("bath dimension must be a power of two")
        if not 1 <= self.q <= self.r:
            raise ValueError("need 1 <= q <= r")
        if self.total_qubits > self.max_qubits:
            raise MemoryError(f"{self.total_qubits} qubits exceed the dense cap {self.max_qubits}")
        if (1 << (2 * self.total_qubits)) * 16 > MAX_STATE_BYTES:
            raise MemoryError("density matrix would exceed the memory budget")
        if self.scale is None:
            top = float(self.q_energies.max())
            self.scale = top * (1 + 2.0 ** -self.q) if top > 0 else 1.0
        if not self.gates:
            self.gates = self.build_gates()

    @property
    def n(self) -> int:
        return self.hs.n

    @property
    def m(self) -> int:
        return int(self.bath_energies.size).bit_length() - 1

    @property
    def n_q(self) -> int:
        return self.n + self.m

    @property
    def total_qubits(self) -> int:
        return self.n_q + self.r

    @property
    def q_energies(self) -> np.ndarray:
        """``H_0`` diagonal in the computational basis of Q, shifted so the minimum is 0."""
        e = (self.hs.energies[:, None] + self.bath_energies[None, :]).ravel()
        return e - e.min()

    def ancilla_qubit(self, tau: int) -> int:
        return self.n_q + self.r - 1 - tau

    def build_gates(self) -> list:
        gates = [("h", self.n_q + j) for j in range(self.r)]
        gates += [("cu", tau) for tau in range(self.r)]
        gates += [_shift(g, self.n_q) for g in inverse_qft_gates(self.r)]
        return gates


def controlled_power_phases(q_energies, scale, tau, r) -> np.ndarray:
    """Diagonal of controlled-``U**(2**tau)`` on Q (x) R, flattened in ``(x, s)`` order."""
    s = np.arange(1 << r)
    control = (s >> tau) & 1
    phase = np.exp(2j * np.pi * (2.0 ** tau) * np.asarray(q_energies) / scale)
    return np.where(control[None, :] == 1, phase[:, None], 1.0).ravel()


def _check(rho, tol=1e-9):
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise AssertionError("state lost hermiticity")
    if abs(np.trace(rho).real - 1) > tol:
        raise AssertionError("state lost unit trace")
    if np.linalg.eigvalsh(rho)[0] < -tol:
        raise AssertionError("state lost positivity")


@dataclass
class GateLevelResult:
    probabilities: np.ndarray
    states: dict
    scale: float


def run_gate_level(plan: CircuitPlan, min_probability: float = 1e-14) -> GateLevelResult:
    """Evolve the full density matrix through the gate list and measure the top ``q`` ancillas.

    ``states[s*]`` is the reduced state of Q (computational basis) for every
    outcome with probability above ``min_probability``.
    """
    nq = plan.total_qubits
    d_q = 1 << plan.n_q
    n_r = 1 << plan.r
    dim = d_q * n_r
    rho = np.zeros((dim, dim), dtype=np.complex128)
    # maximally mixed Q, ancillas in |0>
    diag = np.arange(d_q) * n_r
    rho[diag, diag] = 1.0 / d_q
    energies = plan.q_energies
    for gate in plan.gates:
        if gate[0] == "cu":
            v = controlled_power_phases(energies, plan.scale, gate[1], plan.r)
            rho = v[:, None] * rho * v.conj()[None, :]
        else:
            rho = _apply_to_density(rho, gate, nq)
        if plan.check_invariants:
            _check(rho)
    block = 1 << (plan.r - plan.q)
    rho4 = rho.reshape(d_q, n_r, d_q, n_r)
    probs = np.zeros(1 << plan.q)
    states = {}
    for s_star in range(1 << plan.q):
        sl = slice(s_star * block, (s_star + 1) * block)
        sub = rho4[:, sl, :, sl]
        red = np.einsum("asbs->ab", sub)
        p = float(np.trace(red).real)
        probs[s_star] = p
        if p > min_probability:
            states[s_star] = red / p
    return GateLevelResult(probs, states, float(plan.scale))
