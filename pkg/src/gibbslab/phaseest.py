"""Eigenbasis-resolved simulation of partial phase estimation and its closed-form bounds.

Phases are ``phi_k = E_k / scale`` with every eigenvalue shifted into
``[0, scale)``. The ancilla outcome ``s`` has probability ``|alpha_s(phi)|**2``
and measuring the top ``q`` of ``r`` bits keeps the half-open block
``[s* D, (s*+1) D)`` with ``D = 2**(r-q)``, so outcomes partition the ancilla
strings exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import integrate

from . import kernels
from .hamiltonians import BathSpec, Eigensystem
from .states import DensityMatrix

MAX_R = 28


@dataclass(frozen=True)
class PhaseEstimationConfig:
    r: int
    q: int
    target: str = "H0"

    def __post_init__(self):
        if not 1 <= self.q <= self.r <= MAX_R:
            raise ValueError(f"need 1 <= q <= r <= {MAX_R}, got q={self.q}, r={self.r}")
        if self.target not in ("H0", "H"):
            raise ValueError("target must be 'H0' or 'H'")

    @property
    def delta_star(self) -> int:
        return 1 << (self.r - self.q)

    @property
    def n_outcomes(self) -> int:
        return 1 << self.q


def default_scale(eigs: Eigensystem, q: int) -> float:
    """Phase scale ``max(E) (1 + 2**-q)``, so the top level does not wrap onto outcome 0."""
    top = float(np.max(eigs.eigenvalues))
    if top <= 0:
        return 1.0
    return top * (1.0 + 2.0 ** -q)


def phases(eigs: Eigensystem, scale: float) -> np.ndarray:
    if np.min(eigs.eigenvalues) < 0:
        raise ValueError("spectrum must be shifted to be nonnegative")
    phi = eigs.eigenvalues / scale
    if np.max(phi) >= 1:
        raise ValueError("scale must exceed the largest eigenvalue")
    return phi


def alpha_weight(phi, s, r):
    """``|alpha_s(phi)|**2``; equals 1 at ``phi = s / 2**r``."""
    out = kernels.alpha_sq(phi, s, r)
    return float(out) if np.ndim(out) == 0 else out


def alpha_amplitude(phi, s, r):
    """Complex ``alpha_s(phi)`` from the geometric-series form, for oracle checks."""
    n = 1 << r
    k = np.arange(n)
    return np.sum(np.exp(2j * np.pi * k * (phi - s / n))) / n


@dataclass
class OutcomeTable:
    """Outcome probabilities and, optionally, per-level weights ``sum_{s in block} |alpha_s(phi_k)|**2``."""

    cfg: PhaseEstimationConfig
    scale: float
    probabilities: np.ndarray
    weights: Optional[np.ndarray] = None

    def energy(self, s_star) -> float:
        return self.scale * s_star / self.cfg.n_outcomes

    @property
    def width(self) -> float:
        return self.scale / self.cfg.n_outcomes


def outcome_distribution(eigs: Eigensystem, cfg: PhaseEstimationConfig, scale: Optional[float] = None,
                         keep_weights: bool = True) -> OutcomeTable:
    scale = default_scale(eigs, cfg.q) if scale is None else scale
    phi = phases(eigs, scale)
    w = kernels.outcome_weight_table(phi, cfg.r, cfg.q)
    probs = w.sum(axis=0) / eigs.dim
    return OutcomeTable(cfg, scale, probs, w if keep_weights else None)


def outcome_weights(eigs: Eigensystem, cfg: PhaseEstimationConfig, s_star: int,
                    scale: Optional[float] = None) -> np.ndarray:
    """Per-level block weights for a single outcome; costs ``d * 2**(r-q)``."""
    if not 0 <= s_star < cfg.n_outcomes:
        raise ValueError("outcome out of range")
    scale = default_scale(eigs, cfg.q) if scale is None else scale
    phi = phases(eigs, scale)
    return kernels.window_weight_sum(phi, cfg.r, s_star * cfg.delta_star, cfg.delta_star)


def omega_qc_weights(weights) -> np.ndarray:
    """Normalized eigenvalues of the post-measurement state of Q."""
    total = np.sum(weights)
    if not total > 0:
        raise ValueError("outcome has zero probability")
    return np.asarray(weights) / total


def omega_qc(eigs: Eigensystem, cfg: PhaseEstimationConfig, s_star: int,
             scale: Optional[float] = None) -> DensityMatrix:
    w = omega_qc_weights(outcome_weights(eigs, cfg, s_star, scale))
    if eigs.eigenvectors is None:
        diag = np.zeros(eigs.dim)
        diag[eigs.permutation] = w
        return DensityMatrix(np.diag(diag).astype(np.complex128), dims=eigs.dims)
    return DensityMatrix.from_eigenbasis(w, eigs.eigenvectors, dims=eigs.dims)


def reduced_diagonal_weights(eigs: Eigensystem, weights) -> np.ndarray:
    """System marginal of a state diagonal in a product eigenbasis (``eigs`` given by a permutation)."""
    if eigs.permutation is None or eigs.dims is None:
        raise ValueError("needs a product-basis eigensystem with dims")
    d_s, d_b = eigs.dims
    return np.bincount(eigs.permutation // d_b, weights=weights, minlength=d_s)


def fg_kernels(phi, cfg: PhaseEstimationConfig):
    """``(f_r, F_{r,q}, G_q)`` at the phases ``phi`` (taken mod 1)."""
    phi = np.atleast_1d(np.asarray(phi, dtype=np.float64)) % 1.0
    f = (1 << cfg.r) * kernels.alpha_sq(phi, 0, cfg.r)
    big_f = cfg.n_outcomes * kernels.window_weight_sum(phi, cfg.r, 0, cfg.delta_star)
    g = np.where(phi < 2.0 ** -cfg.q, float(cfg.n_outcomes), 0.0)
    return f, big_f, g


@lru_cache(maxsize=64)
def _lobes(r: int, count: int) -> np.ndarray:
    """``L_i = int_0^1 |alpha_0((i+t)/2**r)|**2 dt`` for ``i < count``."""
    i = np.arange(count, dtype=np.float64)

    def integrand(t):
        return kernels.alpha_sq((i + t) / float(1 << r), np.zeros(count, dtype=np.int64), r)

    val, _ = integrate.quad_vec(integrand, 0.0, 1.0, epsabs=1e-15, epsrel=1e-13, limit=400)
    return val


def fg_inner_mass(cfg: PhaseEstimationConfig) -> float:
    """``int_0^{2**-q} F_{r,q}``, using the symmetry of the main lobe."""
    d = cfg.delta_star
    c = np.concatenate([[0.0], np.cumsum(_lobes(cfg.r, d))])
    return float(2.0 ** (cfg.q - cfg.r) * (2.0 * np.sum(c[1:d]) + c[d]))


def fg_closed_form(cfg: PhaseEstimationConfig) -> float:
    x = cfg.r - cfg.q
    return float(2.0 ** (-x + 2) * (0.5 + 1 / np.pi ** 2 + x * np.log(2) / np.pi))


def fg_one_norm(cfg: PhaseEstimationConfig):
    """``(numeric, closed_form)`` for ``int_0^1 |F_{r,q} - G_q|``.

    ``F <= G`` on ``[0, 2**-q)`` and ``int F = 1``, so the norm is
    ``2 (1 - int_0^{2**-q} F)``.
    """
    return 2.0 * (1.0 - fg_inner_mass(cfg)), fg_closed_form(cfg)


def fg_one_norm_bruteforce(cfg: PhaseEstimationConfig) -> float:
    """Direct adaptive quadrature of ``|F - G|`` on ``[0, 1]``; for small ``r`` only."""
    n = 1 << cfg.r
    cut = 2.0 ** -cfg.q

    def integrand(x):
        _, fv, gv = fg_kernels(np.array([x]), cfg)
        return abs(fv[0] - gv[0])

    pts = np.arange(1, n) / n
    total = 0.0
    edges = np.union1d(np.concatenate([[0.0, 1.0, cut], pts]), [])
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(integrand, a, b, epsabs=1e-13, epsrel=1e-11, limit=200)
        total += val
    return total


def _hb(bath: BathSpec) -> float:
    if not bath.norm > 0:
        raise ValueError("bath norm must be > 0")
    return bath.norm


def beta_from_outcome(s_star, q, bath: BathSpec, hs_norm, scale: Optional[float] = None) -> float:
    """Inverse temperature of outcome ``s*`` for the spin bath; negative means population inversion."""
    hb = _hb(bath)
    scale = hs_norm + hb if scale is None else scale
    energy = scale * s_star * 2.0 ** -q
    return float(4.0 / bath.eta * (0.5 - energy / hb))


def s_star_for_beta(beta, q, bath: BathSpec, hs_norm, scale: Optional[float] = None) -> int:
    hb = _hb(bath)
    scale = hs_norm + hb if scale is None else scale
    s = int(np.floor(2.0 ** q * hb / scale * (0.5 - bath.eta * beta / 4.0)))
    if not 0 <= s < (1 << q):
        raise ValueError(f"inverse temperature {beta} maps outside the outcome range")
    return s


def delta_beta_bound(q, bath: BathSpec, hs_norm, scale: Optional[float] = None) -> float:
    """Spacing of the inverse-temperature grid, ``2**(2-q) / eta * scale / ||H_B||``."""
    if q < 1:
        raise ValueError("q must be >= 1")
    hb = _hb(bath)
    scale = hs_norm + hb if scale is None else scale
    return float(2.0 ** (2 - q) / bath.eta * scale / hb)


def delta_beta_bound_lambda(q, lam, m, hs_norm) -> float:
    """The lambda-parametrized expression as printed alongside the algorithm statement.

    Substituting ``eta = sqrt(lam/m) ||H_S||`` into :func:`delta_beta_bound`
    gives ``sqrt(m/lam)`` rather than ``sqrt(lam/m)``; both agree at ``lam = m``.
    """
    return float(2.0 ** (2 - q) * np.sqrt(lam / m) / hs_norm * (1 + 1 / np.sqrt(m * lam)))


def q_for_delta_beta(dbeta, bath: BathSpec, hs_norm) -> int:
    hb = _hb(bath)
    return int(np.ceil(-np.log2(dbeta * bath.eta / (1 + hs_norm / hb)) + 2))


def _thermal_exponent(lam, beta, hs_norm) -> float:
    return 2.0 / lam + beta * hs_norm + lam * hs_norm ** 2 * beta ** 2 / 8.0


def expected_runs_bound(q, m, lam, beta, hs_norm) -> float:
    """``2**q sqrt(pi / (2m)) exp(2/lam + beta ||H_S|| + lam ||H_S||**2 beta**2 / 8)``."""
    return float(2.0 ** q * np.sqrt(np.pi / (2 * m)) * np.exp(_thermal_exponent(lam, beta, hs_norm)))


def expected_runs_bound_width(delta, lam, beta, hs_norm) -> float:
    """Width form ``sqrt(pi lam / 2) ||H_S|| / delta exp(...)``."""
    return float(np.sqrt(np.pi * lam / 2) * hs_norm / delta * np.exp(_thermal_exponent(lam, beta, hs_norm)))


def expected_runs_lower(d_s, beta, system_gap) -> float:
    """Low-temperature lower estimate ``1 / (1/d_S + exp(-beta gap))``."""
    return float(1.0 / (1.0 / d_s + np.exp(-beta * system_gap)))


def expected_runs(table: OutcomeTable, s_star, m, lam, beta, hs_norm):
    """``(bound, empirical)`` with ``empirical = 1 / P(s*)``."""
    p = table.probabilities[s_star]
    if not p > 0:
        raise ValueError("outcome has zero probability")
    return expected_runs_bound(table.cfg.q, m, lam, beta, hs_norm), float(1.0 / p)


def algorithm_error_bound(cfg: PhaseEstimationConfig, lam, beta, hs_norm):
    """``(circuit term, counting term)`` of the preparation error; the remainder is left to the caller."""
    if not lam > 0:
        raise ValueError("lambda must be > 0")
    x = cfg.r - cfg.q
    term1 = 2.0 ** (-x + 2) * (1 + x * np.log(2) / np.pi ** 2) * np.exp(_thermal_exponent(lam, beta, hs_norm))
    term2 = 0.5 * np.expm1(2.0 / lam)
    return float(term1), float(term2)


def circuit_error_bound(cfg: PhaseEstimationConfig, eta, m, beta, hs_norm) -> float:
    """Circuit term written with ``eta`` and ``m`` instead of ``lambda``."""
    x = cfg.r - cfg.q
    expo = 2 * hs_norm ** 2 / (eta ** 2 * m) + beta * hs_norm + eta ** 2 * m * beta ** 2 / 8
    return float(np.exp(expo) * 2.0 ** (-x + 2) * (1 + x * np.log(2) / np.pi ** 2))
