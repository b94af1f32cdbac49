"""Exact time evolution, time-averaged subsystem distances and Haar sampling in a window."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonians import Eigensystem
from .perturbation import ProjectorCensus, theorem1_bound
from .states import DensityMatrix, EnergyWindow, PureState, trace_distance_matrix

_TIME_CHUNK = 256


@dataclass(frozen=True)
class TimeSamplingPlan:
    horizon: float
    n_times: int = 1000
    scheme: str = "uniform-random"
    seed: int = 0

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError("horizon must be > 0")
        if self.n_times < 100:
            raise ValueError("need at least 100 sample times")
        if self.scheme not in ("uniform-random", "equispaced"):
            raise ValueError(f"unknown scheme {self.scheme!r}")

    def times(self) -> np.ndarray:
        if self.scheme == "equispaced":
            return np.linspace(0.0, self.horizon, self.n_times, endpoint=False)
        return np.sort(np.random.default_rng(self.seed).uniform(0.0, self.horizon, self.n_times))

    @classmethod
    def default_for(cls, levels, n_times=1000, seed=0) -> "TimeSamplingPlan":
        """Horizon of 100 periods of the median nearest-neighbour spacing of ``levels``."""
        gaps = np.diff(np.sort(np.asarray(levels)))
        gaps = gaps[gaps > 0]
        if gaps.size == 0:
            raise ValueError("need at least two distinct levels")
        return cls(100 * 2 * np.pi / float(np.median(gaps)), n_times, "uniform-random", seed)


def evolve(psi0: PureState, eigs: Eigensystem, t: float) -> PureState:
    """``exp(-i H t) |psi0>`` via the eigenbasis."""
    c = eigs.to_eigenbasis(psi0.amplitudes)
    out = eigs.from_eigenbasis(c * np.exp(-1j * eigs.eigenvalues * t))
    return PureState(out, dims=psi0.dims)


def _support(psi0: PureState, eigs: Eigensystem, tol=1e-14):
    c = eigs.to_eigenbasis(psi0.amplitudes)
    idx = np.nonzero(np.abs(c) > tol)[0]
    return idx, c[idx]


def reduced_trajectory(psi0: PureState, eigs: Eigensystem, times) -> np.ndarray:
    """System marginals ``Tr_B |psi_t><psi_t|`` for every time, shape ``(len(times), d_S, d_S)``."""
    if psi0.dims is None:
        raise ValueError("state needs (d_S, d_B) metadata")
    d_s, d_b = psi0.dims
    idx, c = _support(psi0, eigs)
    vecs = eigs.columns(idx)
    energies = eigs.eigenvalues[idx]
    times = np.asarray(times, dtype=np.float64)
    out = np.empty((times.size, d_s, d_s), dtype=np.complex128)
    for lo in range(0, times.size, _TIME_CHUNK):
        t = times[lo:lo + _TIME_CHUNK]
        coeff = c[:, None] * np.exp(-1j * np.outer(energies, t))
        amps = (vecs @ coeff).reshape(d_s, d_b, t.size)
        out[lo:lo + t.size] = np.einsum("abt,cbt->tac", amps, amps.conj())
    return out


def _batch_distance(states, reference) -> np.ndarray:
    diff = states - reference[None]
    diff = 0.5 * (diff + np.conj(np.swapaxes(diff, 1, 2)))
    return 0.5 * np.abs(np.linalg.eigvalsh(diff)).sum(axis=1)


def distance_series(psi0: PureState, eigs: Eigensystem, reference, times) -> np.ndarray:
    """Subsystem trace distance to ``reference`` at every time."""
    ref = reference.matrix if isinstance(reference, DensityMatrix) else np.asarray(reference)
    return _batch_distance(reduced_trajectory(psi0, eigs, times), ref)


def time_averaged_distance(psi0: PureState, eigs: Eigensystem, reference, plan: TimeSamplingPlan,
                           return_series: bool = False):
    """Sample mean and standard error of the subsystem trace distance to ``reference``."""
    times = plan.times()
    dist = distance_series(psi0, eigs, reference, times)
    out = float(dist.mean()), float(dist.std(ddof=1) / np.sqrt(dist.size))
    return out + (times, dist) if return_series else out


def corollary2_dynamic_bound(d_s: int, census: ProjectorCensus, v_norm: float) -> float:
    """``d_S / (2 sqrt(Omega_min))`` plus the interacting-vs-uncoupled bound at ``census.epsilon``."""
    if census.omega_min < 1:
        raise ValueError("Omega_min must be >= 1")
    return float(d_s / (2 * np.sqrt(census.omega_min)) + theorem1_bound(census, v_norm))


def kinematic_threshold(d_s: int, census: ProjectorCensus, v_norm: float, epsilon_prime: float) -> float:
    if census.omega_min < 1:
        raise ValueError("Omega_min must be >= 1")
    return float(2 * d_s / np.sqrt(census.omega_min) + theorem1_bound(census, v_norm) + epsilon_prime)


def haar_window_states(eigs: Eigensystem, w: EnergyWindow, n_samples: int, seed) -> tuple:
    """Coefficients of Haar-random states in the window subspace and the window eigenvectors."""
    idx = eigs.in_window(w)
    if idx.size == 0:
        raise ValueError("empty window")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((idx.size, n_samples)) + 1j * rng.standard_normal((idx.size, n_samples))
    z /= np.linalg.norm(z, axis=0, keepdims=True)
    return z, eigs.columns(idx)


def haar_reduced_states(eigs: Eigensystem, w: EnergyWindow, dims, n_samples: int, seed) -> np.ndarray:
    d_s, d_b = dims
    z, vecs = haar_window_states(eigs, w, n_samples, seed)
    out = np.empty((n_samples, d_s, d_s), dtype=np.complex128)
    for lo in range(0, n_samples, _TIME_CHUNK):
        amps = (vecs @ z[:, lo:lo + _TIME_CHUNK]).reshape(d_s, d_b, -1)
        out[lo:lo + amps.shape[2]] = np.einsum("abt,cbt->tac", amps, amps.conj())
    return out


def kinematic_tail_sample(eigs: Eigensystem, w: EnergyWindow, d_s: int, n_samples: int,
                          epsilon_prime: float, census: ProjectorCensus, v_norm: float,
                          reference, seed=0) -> float:
    """Fraction of Haar-random window states farther than the kinematic threshold from ``reference``."""
    if n_samples < 100:
        raise ValueError("need at least 100 samples")
    ref = reference.matrix if isinstance(reference, DensityMatrix) else np.asarray(reference)
    dims = eigs.dims or (d_s, eigs.dim // d_s)
    threshold = kinematic_threshold(d_s, census, v_norm, epsilon_prime)
    if threshold >= 1:
        return 0.0
    dist = _batch_distance(haar_reduced_states(eigs, w, dims, n_samples, seed), ref)
    return float(np.mean(dist > threshold))


def nondegenerate_gaps(levels, norm=None, rtol=1e-13) -> tuple:
    """Whether all pairwise gaps ``E_k - E_l`` (k > l) are distinct; also returns the closest pair separation.

    Distinct means separated by more than ``rtol * norm``, a few hundred times
    the eigensolver's rounding; with ``n`` levels the closest of the ``n**2/2``
    gaps is generically ``O(norm / n**4)`` apart, so looser tolerances flag
    generic spectra as degenerate.
    """
    e = np.sort(np.asarray(levels, dtype=np.float64))
    norm = float(np.max(np.abs(e))) if norm is None else norm
    k, l = np.triu_indices(e.size, 1)
    gaps = np.sort(e[l] - e[k])
    sep = float(np.min(np.diff(gaps))) if gaps.size > 1 else np.inf
    return sep > rtol * max(norm, 1e-300), sep


def subsystem_distance(a, b) -> float:
    return trace_distance_matrix(a, b)
