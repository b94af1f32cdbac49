"""Density matrices, pure states and the standard state constructions."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .hamiltonians import Eigensystem, SystemHamiltonian

STATE_TOL = 1e-10
NORM_TOL = 1e-12


@dataclass(frozen=True)
class EnergyWindow:
    """Half-open energy interval ``[E, E + delta)``."""

    E: float
    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("window width must be > 0")
        if not np.isfinite(self.E):
            raise ValueError("window edge must be finite")

    @property
    def upper(self) -> float:
        return self.E + self.delta

    def contains(self, energies) -> np.ndarray:
        energies = np.asarray(energies)
        return (energies >= self.E) & (energies < self.E + self.delta)

    def interior(self, epsilon) -> "EnergyWindow":
        """The window shrunk by ``epsilon`` on both sides."""
        return EnergyWindow(self.E + epsilon, self.delta - 2 * epsilon)


class DensityMatrix:
    """Hermitian, PSD, unit-trace matrix with ``(d_S, d_B)`` factorization metadata."""

    def __init__(self, matrix, dims: Optional[tuple] = None, validate: bool = True):
        m = np.asarray(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        if dims is not None:
            dims = (int(dims[0]), int(dims[1]))
            if dims[0] * dims[1] != m.shape[0]:
                raise ValueError(f"dims {dims} do not factor dimension {m.shape[0]}")
        self.matrix = m
        self.dims = dims
        if validate:
            self.validate()

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def validate(self, tol: float = STATE_TOL):
        m = self.matrix
        if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > tol:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        if self.eigenvalues()[0] < -tol:
            raise ValueError("density matrix is not positive semidefinite")

    def eigenvalues(self) -> np.ndarray:
        return scipy.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))

    def entropy(self) -> float:
        w = self.eigenvalues()
        w = w[w > 1e-15]
        return float(-np.sum(w * np.log(w)))

    def rank(self, tol: float = 1e-12) -> int:
        return int(np.sum(self.eigenvalues() > tol))

    @classmethod
    def from_eigenbasis(cls, weights, vectors, dims=None) -> "DensityMatrix":
        """``sum_k w_k |v_k><v_k|`` for columns ``v_k`` of ``vectors``."""
        w = np.asarray(weights, dtype=np.float64)
        v = np.asarray(vectors, dtype=np.complex128)
        return cls((v * w) @ v.conj().T, dims=dims)


@dataclass
class PureState:
    amplitudes: np.ndarray
    dims: Optional[tuple] = None

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=np.complex128)
        if a.ndim != 1:
            raise ValueError("amplitudes must be 1-D")
        if abs(np.linalg.norm(a) - 1.0) > NORM_TOL:
            raise ValueError("pure state must have unit norm")
        self.amplitudes = a

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> DensityMatrix:
        a = self.amplitudes
        return DensityMatrix(np.outer(a, a.conj()), dims=self.dims)


def gibbs_weights(energies, beta) -> np.ndarray:
    """``exp(-beta E_k) / Z`` evaluated with a max-shift so large ``beta`` cannot overflow."""
    if not np.isfinite(beta) or beta < 0:
        raise ValueError("beta must be finite and >= 0")
    x = -beta * np.asarray(energies, dtype=np.float64)
    w = np.exp(x - x.max())
    return w / w.sum()


def gibbs_state(hs: SystemHamiltonian, beta: float) -> DensityMatrix:
    w = gibbs_weights(hs.energies, beta)
    if hs.basis is None:
        return DensityMatrix(np.diag(w).astype(np.complex128))
    return DensityMatrix.from_eigenbasis(w, hs.basis)


def window_indices(eigsys: Eigensystem, w: EnergyWindow) -> np.ndarray:
    idx = eigsys.in_window(w)
    if idx.size == 0:
        raise ValueError(f"no eigenvalues in window [{w.E}, {w.upper})")
    return idx


def microcanonical_state(eigsys: Eigensystem, w: EnergyWindow) -> DensityMatrix:
    """Equal-weight mixture of the eigenvectors whose eigenvalue lies in ``w``."""
    idx = window_indices(eigsys, w)
    v = eigsys.columns(idx)
    return DensityMatrix((v @ v.conj().T) / idx.size, dims=eigsys.dims)


def rectangular_pure_state(eigsys: Eigensystem, w: EnergyWindow, seed) -> PureState:
    """Flat energy distribution on ``w`` with i.i.d. uniform phases."""
    idx = window_indices(eigsys, w)
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2 * np.pi, size=idx.size)
    coeffs = np.zeros(eigsys.dim, dtype=np.complex128)
    coeffs[idx] = np.exp(1j * phases) / np.sqrt(idx.size)
    vec = eigsys.from_eigenbasis(coeffs)
    return PureState(vec / np.linalg.norm(vec), dims=eigsys.dims)


def _as_matrix(state):
    if isinstance(state, PureState):
        return np.outer(state.amplitudes, state.amplitudes.conj()), state.dims
    if isinstance(state, DensityMatrix):
        return state.matrix, state.dims
    raise TypeError("expected a PureState or DensityMatrix")


def dephase(state, eigsys: Eigensystem) -> DensityMatrix:
    """Remove coherences between distinct eigenvectors of ``eigsys``."""
    mat, dims = _as_matrix(state)
    if mat.shape[0] != eigsys.dim:
        raise ValueError("state and eigensystem dimensions differ")
    u = eigsys.vectors
    diag = np.einsum("ik,ij,jk->k", u.conj(), mat, u).real
    return DensityMatrix.from_eigenbasis(diag, u, dims=dims)


def partial_trace_bath(rho) -> DensityMatrix:
    mat, dims = _as_matrix(rho)
    if dims is None:
        raise ValueError("partial trace needs (d_S, d_B) metadata")
    d_s, d_b = dims
    red = np.trace(mat.reshape(d_s, d_b, d_s, d_b), axis1=1, axis2=3)
    return DensityMatrix(red, dims=(d_s, 1))


def reduced_pure(psi: PureState) -> np.ndarray:
    """``Tr_B |psi><psi|`` without forming the full projector."""
    d_s, d_b = psi.dims
    a = psi.amplitudes.reshape(d_s, d_b)
    return a @ a.conj().T


def trace_distance_matrix(a, b) -> float:
    """``(1/2) sum |eig(a - b)|`` for Hermitian matrices."""
    diff = np.asarray(a) - np.asarray(b)
    diff = 0.5 * (diff + diff.conj().T)
    w = scipy.linalg.eigvalsh(diff)
    return float(0.5 * np.sum(np.abs(w)))


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch {a.dim} vs {b.dim}")
    return min(1.0, trace_distance_matrix(a.matrix, b.matrix))


def effective_dimension(psi: PureState, eigsys: Eigensystem) -> float:
    c = eigsys.to_eigenbasis(psi.amplitudes)
    p = np.abs(c) ** 2
    return float(1.0 / np.sum(p * p))


def export_spectrum_csv(rho: DensityMatrix, path) -> None:
    """Write the eigenvalues of ``rho`` (ascending) as ``index,eigenvalue`` rows."""
    w = rho.eigenvalues()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "eigenvalue"])
        for i, x in enumerate(w):
            writer.writerow([i, format(float(x), ".17g")])
