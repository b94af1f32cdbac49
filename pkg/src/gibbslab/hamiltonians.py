"""System, bath, uncoupled and coupled Hamiltonians and their eigensystems.

Conventions
-----------
The total Hilbert space is ``H_S (x) H_B`` with the system as the most
significant tensor factor. Computational index ``i = a * d_B + b`` labels
system basis state ``a`` and bath basis state ``b``. For the spin bath,
bath basis state ``b`` is the bit string of site excitations with site 0 as
the most significant bit, matching the qubit order used by the circuit
simulator.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

MAX_BATH_SPINS = 20
MAX_DENSE_DIM = 1 << 14
HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class SystemHamiltonian:
    """Spectrum of the system Hamiltonian, optionally in a non-computational eigenbasis."""

    energies: np.ndarray
    basis: Optional[np.ndarray] = None

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=np.float64)
        if e.ndim != 1 or e.size == 0:
            raise ValueError("energies must be a nonempty 1-D sequence")
        d = e.size
        if d & (d - 1):
            raise ValueError(f"system dimension must be a power of two, got {d}")
        if not np.all(np.isfinite(e)):
            raise ValueError("energies must be finite")
        if np.any(np.diff(e) < 0):
            raise ValueError("energies must be sorted ascending")
        object.__setattr__(self, "energies", e)
        if self.basis is not None:
            u = np.asarray(self.basis, dtype=np.complex128)
            if u.shape != (d, d) or not np.allclose(u.conj().T @ u, np.eye(d), atol=1e-10):
                raise ValueError("basis must be a d_S x d_S unitary")
            object.__setattr__(self, "basis", u)

    @property
    def n(self) -> int:
        return int(self.energies.size).bit_length() - 1

    @property
    def dim(self) -> int:
        return int(self.energies.size)

    @property
    def norm(self) -> float:
        """Operator norm ``max |E_k|``."""
        return float(np.max(np.abs(self.energies)))

    def matrix(self) -> np.ndarray:
        if self.basis is None:
            return np.diag(self.energies).astype(np.complex128)
        return (self.basis * self.energies) @ self.basis.conj().T

    @classmethod
    def two_level(cls, norm=1.0):
        return cls(np.array([0.0, float(norm)]))

    @classmethod
    def random(cls, n, norm, rng):
        """Random spectrum on ``n`` qubits pinned to ``[0, norm]`` at both ends."""
        d = 1 << n
        if d == 1:
            return cls(np.array([0.0]))
        inner = np.sort(rng.uniform(0.0, norm, size=d - 2))
        return cls(np.concatenate([[0.0], inner, [float(norm)]]))


@dataclass(frozen=True)
class BathSpec:
    """Disordered bath of ``m`` uncoupled spins with mean local gap ``eta``."""

    m: int
    eta: float
    disorder_rel: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not self.eta > 0:
            raise ValueError("eta must be > 0")
        if not 0 <= self.disorder_rel < 1:
            raise ValueError("disorder_rel must lie in [0, 1)")

    @property
    def norm(self) -> float:
        """Nominal ``||H_B|| = eta * m``."""
        return self.eta * self.m

    @classmethod
    def from_lambda(cls, lam, m, hs_norm, disorder_rel=0.05, seed=0):
        """Bath with ``eta = sqrt(lam / m) * ||H_S||``."""
        if not lam > 0:
            raise ValueError("lambda must be > 0")
        return cls(m=m, eta=float(np.sqrt(lam / m) * hs_norm), disorder_rel=disorder_rel, seed=seed)


@dataclass(frozen=True)
class CouplingSpec:
    norm_target: float
    model: str = "dense-random"
    seed: int = 0

    def __post_init__(self):
        if self.norm_target < 0:
            raise ValueError("norm_target must be >= 0")
        if self.model not in ("dense-random", "local-random"):
            raise ValueError(f"unknown coupling model {self.model!r}")


@dataclass
class Eigensystem:
    """Sorted eigenvalues with matching eigenvectors.

    Either ``eigenvectors`` holds a dense ``d x d`` unitary (column ``k`` for
    eigenvalue ``k``) or ``permutation`` maps eigenvalue ``k`` to the
    computational basis state ``permutation[k]``; the latter avoids storing
    identity-like matrices for uncoupled Hamiltonians.
    """

    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None
    permutation: Optional[np.ndarray] = None
    offset: float = 0.0
    dims: Optional[tuple] = None
    _dense: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=np.float64)
        if self.eigenvectors is None and self.permutation is None:
            raise ValueError("need eigenvectors or a permutation")
        if self.permutation is not None:
            self.permutation = np.asarray(self.permutation, dtype=np.int64)

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def norm(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))

    @property
    def vectors(self) -> np.ndarray:
        if self.eigenvectors is not None:
            return self.eigenvectors
        if self._dense is None:
            u = np.zeros((self.dim, self.dim), dtype=np.complex128)
            u[self.permutation, np.arange(self.dim)] = 1.0
            self._dense = u
        return self._dense

    def columns(self, idx) -> np.ndarray:
        """Eigenvectors for the eigenvalue indices ``idx`` as a ``d x len(idx)`` matrix."""
        idx = np.asarray(idx, dtype=np.int64)
        if self.eigenvectors is not None:
            return self.eigenvectors[:, idx]
        out = np.zeros((self.dim, idx.size), dtype=np.complex128)
        out[self.permutation[idx], np.arange(idx.size)] = 1.0
        return out

    def to_eigenbasis(self, vec) -> np.ndarray:
        """Coefficients ``<E_k|psi>`` of a computational-basis vector."""
        vec = np.asarray(vec, dtype=np.complex128)
        if self.eigenvectors is not None:
            return self.eigenvectors.conj().T @ vec
        return vec[self.permutation]

    def from_eigenbasis(self, coeffs) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if self.eigenvectors is not None:
            return self.eigenvectors @ coeffs
        out = np.zeros(self.dim, dtype=np.complex128)
        out[self.permutation] = coeffs
        return out

    def matrix(self) -> np.ndarray:
        u = self.vectors
        return (u * self.eigenvalues) @ u.conj().T

    def in_window(self, window) -> np.ndarray:
        """Indices of eigenvalues inside ``window`` (half-open)."""
        lo = np.searchsorted(self.eigenvalues, window.E, side="left")
        hi = np.searchsorted(self.eigenvalues, window.E + window.delta, side="left")
        return np.arange(lo, hi)


def bath_fields(spec: BathSpec, cap: int = MAX_BATH_SPINS) -> np.ndarray:
    """Per-site excitation energies ``h_i ~ Normal(eta, (disorder_rel * eta)**2)``."""
    if spec.m > cap:
        raise MemoryError(f"m={spec.m} exceeds the bath size cap {cap}")
    rng = np.random.default_rng(spec.seed)
    return spec.eta + spec.disorder_rel * spec.eta * rng.standard_normal(spec.m)


def bath_energies_bitorder(fields) -> np.ndarray:
    """Bath energies indexed by the site-excitation bit string (site 0 most significant)."""
    fields = np.asarray(fields, dtype=np.float64)
    e = np.zeros(1)
    for h in fields:
        e = (e[:, None] + np.array([0.0, h])[None, :]).ravel()
    return e - e.min()


def build_bath(spec: BathSpec, cap: int = MAX_BATH_SPINS):
    """Sorted bath spectrum (ground energy 0) and the per-site fields."""
    fields = bath_fields(spec, cap)
    return np.sort(bath_energies_bitorder(fields)), fields


def _uncoupled_diagonal(hs_energies, bath_energies):
    return (np.asarray(hs_energies, dtype=np.float64)[:, None]
            + np.asarray(bath_energies, dtype=np.float64)[None, :]).ravel()


def compose_h0(hs: SystemHamiltonian, bath_energies, shift: bool = True) -> Eigensystem:
    """Eigensystem of ``H_0 = H_S + H_B``; ``bath_energies`` are taken in bath-basis order."""
    bath_energies = np.asarray(bath_energies, dtype=np.float64)
    if not (np.all(np.isfinite(bath_energies)) and np.all(np.isfinite(hs.energies))):
        raise ValueError("spectra must be finite")
    diag = _uncoupled_diagonal(hs.energies, bath_energies)
    order = np.argsort(diag, kind="stable")
    values = diag[order]
    offset = float(values[0]) if shift else 0.0
    dims = (hs.dim, bath_energies.size)
    if hs.basis is None:
        return Eigensystem(values - offset, permutation=order, offset=offset, dims=dims)
    u = np.kron(hs.basis, np.eye(bath_energies.size))[:, order]
    return Eigensystem(values - offset, eigenvectors=u, offset=offset, dims=dims)


def h0_matrix(hs: SystemHamiltonian, bath_energies, offset: float = 0.0) -> np.ndarray:
    """Dense ``H_0 - offset`` in the computational product basis."""
    d_b = len(bath_energies)
    if hs.basis is None:
        return np.diag(_uncoupled_diagonal(hs.energies, bath_energies) - offset).astype(np.complex128)
    return (np.kron(hs.matrix(), np.eye(d_b)) + np.kron(np.eye(hs.dim), np.diag(bath_energies))
            - offset * np.eye(hs.dim * d_b))


def _spectral_norm(mat) -> float:
    w = scipy.linalg.eigh(mat, eigvals_only=True, driver="evr")
    return float(max(abs(w[0]), abs(w[-1])))


def sample_coupling(dim: int, spec: CouplingSpec, dims: Optional[tuple] = None) -> np.ndarray:
    """Random Hermitian coupling rescaled to ``||V||_inf = spec.norm_target``.

    ``dense-random`` draws a GUE-style matrix. ``local-random`` sums products
    of random single-qubit system and bath operators and needs ``dims``.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    if spec.norm_target == 0:
        return np.zeros((dim, dim), dtype=np.complex128)
    rng = np.random.default_rng(spec.seed)
    if spec.model == "dense-random":
        a = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
        v = 0.5 * (a + a.conj().T)
    else:
        if dims is None or dims[0] * dims[1] != dim:
            raise ValueError("local-random coupling needs dims=(d_S, d_B)")
        v = _local_coupling(dims, rng)
    v = 0.5 * (v + v.conj().T)
    return v * (spec.norm_target / _spectral_norm(v))


_PAULIS = (
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)


def _site_operator(n_sites, site, op):
    return np.kron(np.kron(np.eye(1 << site), op), np.eye(1 << (n_sites - site - 1)))


def _local_coupling(dims, rng):
    d_s, d_b = dims
    n_s = max(d_s.bit_length() - 1, 0)
    m = d_b.bit_length() - 1
    v = np.zeros((d_s * d_b, d_s * d_b), dtype=np.complex128)
    sys_sites = range(n_s) if n_s else [None]
    for i in sys_sites:
        a = sum(rng.standard_normal() * p for p in _PAULIS)
        a_full = np.eye(1) * a if i is None and d_s == 1 else (
            np.eye(d_s) if i is None else _site_operator(n_s, i, a))
        for j in range(m):
            b = sum(rng.standard_normal() * p for p in _PAULIS)
            v += np.kron(a_full, _site_operator(m, j, b))
    return v


def check_hermitian(h, tol=HERMITIAN_TOL) -> np.ndarray:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("expected a square matrix")
    scale = max(1.0, float(np.max(np.abs(h))) if h.size else 1.0)
    if np.max(np.abs(h - h.conj().T)) > tol * scale:
        raise ValueError("matrix is not Hermitian")
    return h


def eigendecompose(h, cap: int = MAX_DENSE_DIM, dims: Optional[tuple] = None,
                   shift: bool = False) -> Eigensystem:
    """Dense Hermitian eigendecomposition (LAPACK ``evr``)."""
    h = check_hermitian(h)
    if h.shape[0] > cap:
        raise MemoryError(f"dimension {h.shape[0]} exceeds the dense cap {cap}")
    h = 0.5 * (h + h.conj().T)
    w, u = scipy.linalg.eigh(h, driver="evr")
    offset = float(w[0]) if shift else 0.0
    return Eigensystem(w - offset, eigenvectors=u, offset=offset, dims=dims)


def coupled_eigensystem(hs: SystemHamiltonian, bath_energies, v, offset: float = 0.0,
                        cap: int = MAX_DENSE_DIM) -> Eigensystem:
    """Eigensystem of ``H_0 + V - offset``; pass the ``H_0`` offset to share its energy frame."""
    h = h0_matrix(hs, bath_energies, offset) + v
    return eigendecompose(h, cap=cap, dims=(hs.dim, len(bath_energies)))
