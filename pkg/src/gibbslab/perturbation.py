"""Spectral projectors of the coupled and uncoupled Hamiltonians on an energy window.

``G`` projects onto eigenvectors of ``H = H_0 + V`` in the window and ``F``
onto eigenvectors of ``H_0`` in the window. Every quantity here is computed
from the eigenvector blocks exactly (singular values of small Gram matrices),
never estimated.

Let ``C = U_0^dagger U_G`` be the coordinates of the ``G`` eigenvectors in the
``H_0`` eigenbasis, ``A`` its rows inside the window and ``K`` the rows
outside. Then ``||G Fbar||_1 = sum svd(K)`` and the singular values of
``Gbar F`` are ``sqrt(eig(I - A A^dagger))``. On the span of ``F`` and ``G``
an orthonormal basis is ``F``'s eigenvectors plus ``Q`` from ``K = Q R``;
there ``G = [A; R][A; R]^dagger`` and ``F = diag(I, 0)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.linalg

from .hamiltonians import Eigensystem
from .states import EnergyWindow, trace_distance_matrix


@dataclass
class ProjectorCensus:
    epsilon: float
    omega_g: int
    omega_f: int
    omega_eps: int
    norm_g_fbar: float
    norm_gbar_f: float
    norm_gi_fbar_inf: float
    omega_ge: int = 0
    omega_fe: int = 0

    def __post_init__(self):
        if self.omega_eps < 0 or self.omega_g < 0 or self.omega_f < 0:
            raise ValueError("counts must be nonnegative")

    @property
    def omega_max(self) -> int:
        return max(self.omega_g, self.omega_f)

    @property
    def omega_min(self) -> int:
        return min(self.omega_g, self.omega_f)

    @property
    def delta_omega(self) -> int:
        return self.omega_max - self.omega_min


def _window_slice(values, lo, hi):
    return np.arange(np.searchsorted(values, lo, side="left"), np.searchsorted(values, hi, side="left"))


def edge_count(values, w: EnergyWindow, epsilon) -> int:
    """Levels in ``[E, E+eps) U [E+delta-eps, E+delta)``."""
    lower = _window_slice(values, w.E, w.E + epsilon).size
    upper = _window_slice(values, w.upper - epsilon, w.upper).size
    return lower + upper


class WindowProjectors:
    """Precomputed blocks shared by every ``epsilon`` for one (H_0, H, window) triple."""

    def __init__(self, h0: Eigensystem, h: Eigensystem, w: EnergyWindow):
        if h0.dim != h.dim:
            raise ValueError("H_0 and H dimensions differ")
        self.h0, self.h, self.window = h0, h, w
        self.idx_f = h0.in_window(w)
        self.idx_g = h.in_window(w)
        if self.idx_f.size == 0 and self.idx_g.size == 0:
            raise ValueError("window is empty for both Hamiltonians")
        u_g = h.columns(self.idx_g)
        if h0.eigenvectors is None:
            coords = u_g[h0.permutation]
        else:
            coords = h0.eigenvectors.conj().T @ u_g
        inside = np.zeros(h0.dim, dtype=bool)
        inside[self.idx_f] = True
        self.a = coords[inside]
        self.k = coords[~inside]
        self.gram_k = self.k.conj().T @ self.k
        self.gram_k = 0.5 * (self.gram_k + self.gram_k.conj().T)
        self.u_g = u_g

    @property
    def omega_g(self) -> int:
        return int(self.idx_g.size)

    @property
    def omega_f(self) -> int:
        return int(self.idx_f.size)

    @cached_property
    def norm_g_fbar(self) -> float:
        w = scipy.linalg.eigvalsh(self.gram_k) if self.omega_g else np.zeros(0)
        return float(np.sum(np.sqrt(np.clip(w, 0.0, None))))

    @cached_property
    def norm_gbar_f(self) -> float:
        if self.omega_f == 0:
            return 0.0
        m = np.eye(self.omega_f) - self.a @ self.a.conj().T
        w = scipy.linalg.eigvalsh(0.5 * (m + m.conj().T))
        return float(np.sum(np.sqrt(np.clip(w, 0.0, None))))

    def interior_columns(self, epsilon) -> np.ndarray:
        vals = self.h.eigenvalues[self.idx_g]
        return np.nonzero((vals >= self.window.E + epsilon) & (vals < self.window.upper - epsilon))[0]

    def norm_gi_fbar_inf(self, epsilon) -> float:
        cols = self.interior_columns(epsilon)
        if cols.size == 0:
            return 0.0
        sub = self.gram_k[np.ix_(cols, cols)]
        return float(np.sqrt(max(scipy.linalg.eigvalsh(sub)[-1], 0.0)))

    def census(self, epsilon) -> ProjectorCensus:
        w = self.window
        if not 0 < epsilon < w.delta / 2:
            raise ValueError(f"epsilon={epsilon} outside (0, delta/2)")
        ge = edge_count(self.h.eigenvalues, w, epsilon)
        fe = edge_count(self.h0.eigenvalues, w, epsilon)
        return ProjectorCensus(
            epsilon=float(epsilon), omega_g=self.omega_g, omega_f=self.omega_f,
            omega_eps=ge + fe, norm_g_fbar=self.norm_g_fbar, norm_gbar_f=self.norm_gbar_f,
            norm_gi_fbar_inf=self.norm_gi_fbar_inf(epsilon), omega_ge=ge, omega_fe=fe,
        )

    def _span_blocks(self):
        """``G`` and ``F`` as matrices on the span of their ranges."""
        if self.omega_g:
            q, r = scipy.linalg.qr(self.k, mode="economic")
            diag = np.abs(np.diag(r))
            keep = diag > 1e-13 * max(1.0, diag.max(initial=0.0))
            r = r[keep]
            coords = np.vstack([self.a, r])
        else:
            coords = np.zeros((self.omega_f, 0))
        n = coords.shape[0]
        g = coords @ coords.conj().T
        f = np.zeros((n, n))
        f[: self.omega_f, : self.omega_f] = np.eye(self.omega_f)
        return g, f

    def norm_g_minus_f(self) -> float:
        g, f = self._span_blocks()
        return float(np.sum(np.abs(scipy.linalg.eigvalsh(g - f))))

    def microcanonical_distance(self) -> float:
        """Exact trace distance between the coupled and uncoupled microcanonical states."""
        if self.omega_g == 0 or self.omega_f == 0:
            return 1.0
        g, f = self._span_blocks()
        return trace_distance_matrix(g / self.omega_g, f / self.omega_f)

    def reduced_distance(self) -> float:
        """Exact trace distance of the system marginals."""
        dims = self.h.dims or self.h0.dims
        if dims is None:
            raise ValueError("reduced distance needs (d_S, d_B) metadata")
        d_s, d_b = dims
        if self.omega_g == 0 or self.omega_f == 0:
            return 1.0
        ug = self.u_g.reshape(d_s, d_b, self.omega_g)
        rho_g = np.einsum("abk,cbk->ac", ug, ug.conj()) / self.omega_g
        if self.h0.eigenvectors is None:
            sys_index = self.h0.permutation[self.idx_f] // d_b
            rho_f = np.diag(np.bincount(sys_index, minlength=d_s) / self.omega_f).astype(np.complex128)
        else:
            uf = self.h0.columns(self.idx_f).reshape(d_s, d_b, self.omega_f)
            rho_f = np.einsum("abk,cbk->ac", uf, uf.conj()) / self.omega_f
        return trace_distance_matrix(rho_g, rho_f)


def projector_census(h0: Eigensystem, h: Eigensystem, w: EnergyWindow, epsilon) -> ProjectorCensus:
    return WindowProjectors(h0, h, w).census(epsilon)


def theorem1_bound(census: ProjectorCensus, v_norm) -> float:
    """``||V||/eps + (Delta Omega + Omega_eps) / (2 Omega_max)``."""
    if census.omega_max == 0:
        raise ValueError("Omega_max is zero")
    return float(v_norm / census.epsilon + (census.delta_omega + census.omega_eps) / (2.0 * census.omega_max))


def proof_chain_bound(norm_g_minus_f, census: ProjectorCensus) -> float:
    """``(||G - F||_1 + Delta Omega) / (2 Omega_max)``."""
    return float((norm_g_minus_f + census.delta_omega) / (2.0 * census.omega_max))


@dataclass(frozen=True)
class EpsilonChoice:
    epsilon: float
    bound: float
    flags: tuple = ()
    bound_alt: Optional[float] = None


def optimal_epsilon_flat(v_norm, delta) -> EpsilonChoice:
    """Flat-density choice ``eps = sqrt(||V|| delta / 2)`` with heuristic ``4 sqrt(||V||/delta)``.

    ``bound_alt`` carries the alternative ``(3 sqrt 2 / 2) sqrt(||V||/delta)``
    constant quoted for the same heuristic.
    """
    if not delta > 0 or v_norm < 0:
        raise ValueError("need delta > 0 and v_norm >= 0")
    eps = float(np.sqrt(v_norm * delta / 2))
    ratio = np.sqrt(v_norm / delta)
    flags = []
    if v_norm == 0:
        flags.append("degenerate")
    if eps >= delta / 2:
        flags.append("invalid-regime")
    return EpsilonChoice(eps, float(4 * ratio), tuple(flags), float(1.5 * np.sqrt(2) * ratio))


def exponential_dos_bound(v_norm, beta, delta) -> EpsilonChoice:
    """``eps = sqrt(||V||/beta)`` and ``2 sqrt(beta ||V||) / (1 - exp(-beta delta))``."""
    if not beta > 0 or not v_norm > 0:
        raise ValueError("need beta > 0 and v_norm > 0")
    if not beta * delta > 0:
        raise ValueError("beta * delta must be > 0")
    eps = float(np.sqrt(v_norm / beta))
    return EpsilonChoice(eps, float(2 * np.sqrt(beta * v_norm) / -np.expm1(-beta * delta)))


def epsilon_grid(lower, delta, n=32) -> np.ndarray:
    """``n`` log-spaced points strictly inside ``(lower, delta/2)``."""
    if not 0 < lower < delta / 2:
        raise ValueError("need 0 < lower < delta/2")
    return np.geomspace(lower, delta / 2, n + 2)[1:-1]


def default_epsilon_floor(h0: Eigensystem, w: EnergyWindow) -> float:
    """Mean level spacing of ``H_0`` in the window, standing in for its gap scale."""
    omega = max(1, h0.in_window(w).size)
    return w.delta / omega


@dataclass
class Theorem1Sweep:
    epsilons: np.ndarray
    censuses: list
    bounds: np.ndarray
    full_distance: float
    reduced_distance: float
    norm_g_minus_f: float
    v_norm: float
    extra: dict = field(default_factory=dict)

    @property
    def best(self) -> int:
        return int(np.argmin(self.bounds))

    def bhatia_ok(self, rtol=1e-12) -> np.ndarray:
        return np.array([c.norm_gi_fbar_inf <= self.v_norm / c.epsilon * (1 + rtol) for c in self.censuses])

    def bound_ok(self) -> np.ndarray:
        return (self.reduced_distance <= self.full_distance + 1e-12) & (self.full_distance <= self.bounds)


def theorem1_sweep(h0: Eigensystem, h: Eigensystem, w: EnergyWindow, v_norm, epsilons) -> Theorem1Sweep:
    wp = WindowProjectors(h0, h, w)
    cens = [wp.census(e) for e in epsilons]
    bounds = np.array([theorem1_bound(c, v_norm) for c in cens])
    return Theorem1Sweep(np.asarray(epsilons, dtype=float), cens, bounds,
                         wp.microcanonical_distance(), wp.reduced_distance(),
                         wp.norm_g_minus_f(), float(v_norm))
