"""Level counting for the decoupled microcanonical state and the Gaussian spin-bath model.

The smoothed bath density is a Gaussian of total weight ``2**m`` centred at
``eta*m/2`` with variance ``eta**2*m/4``. With ``s(E) = ln Xi(E)`` for a window
of width ``delta``, the exact derivatives used below are

    s'(E)  = (rho(E+delta) - rho(E)) / Xi(E)
    s''(E) = (rho'(E+delta) - rho'(E)) / Xi(E) - s'(E)**2
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate, special

from .hamiltonians import BathSpec, SystemHamiltonian
from .states import EnergyWindow

QUAD_EPSREL = 1e-12


@dataclass(frozen=True)
class DosModel:
    """Gaussian smoothed density of bath levels.

    ``center`` and ``variance`` default to the nominal ``eta*m/2`` and
    ``eta**2*m/4``; :meth:`from_fields` fits them to a realized bath instead.
    """

    eta: float
    m: int
    center: Optional[float] = None
    variance: Optional[float] = None

    def __post_init__(self):
        if not self.eta > 0 or self.m < 1:
            raise ValueError("need eta > 0 and m >= 1")
        if self.center is None:
            object.__setattr__(self, "center", 0.5 * self.eta * self.m)
        if self.variance is None:
            object.__setattr__(self, "variance", 0.25 * self.eta ** 2 * self.m)
        if not self.variance > 0:
            raise ValueError("variance must be > 0")

    @classmethod
    def from_spec(cls, spec: BathSpec) -> "DosModel":
        return cls(spec.eta, spec.m)

    @classmethod
    def from_fields(cls, eta, fields) -> "DosModel":
        """Moments of the realized bath: each site contributes ``h/2`` mean and ``h**2/4`` variance."""
        fields = np.asarray(fields, dtype=np.float64)
        return cls(eta, fields.size, center=0.5 * fields.sum(), variance=0.25 * np.sum(fields ** 2))

    @property
    def total(self) -> float:
        return 2.0 ** self.m

    @property
    def curvature_limit(self) -> float:
        """Narrow-window curvature of ``s``, ``-1/variance`` (``-4/(eta**2 m)`` for the nominal model)."""
        return -1.0 / self.variance

    def density(self, energy):
        x = np.asarray(energy, dtype=np.float64) - self.center
        return self.total * np.exp(-0.5 * x * x / self.variance) / np.sqrt(2 * np.pi * self.variance)

    def density_slope(self, energy):
        x = np.asarray(energy, dtype=np.float64) - self.center
        return -x / self.variance * self.density(energy)

    def cumulative(self, energy):
        """Closed-form ``int_{-inf}^{E} rho``."""
        z = (np.asarray(energy, dtype=np.float64) - self.center) / np.sqrt(2 * self.variance)
        return 0.5 * self.total * special.erfc(-z)

    def count_closed(self, E, delta):
        """Closed-form smoothed count on ``[E, E+delta)``, used as an independent check of the quadrature."""
        a = (np.asarray(E, dtype=np.float64) - self.center) / np.sqrt(2 * self.variance)
        b = a + np.asarray(delta, dtype=np.float64) / np.sqrt(2 * self.variance)
        return 0.5 * self.total * (special.erf(b) - special.erf(a))

    def beta(self, E, delta):
        """Smoothed inverse temperature ``d ln Xi / dE``."""
        xi = smoothed_count(self, E, delta)
        return float((self.density(E + delta) - self.density(E)) / xi)

    def curvature(self, E, delta):
        xi = smoothed_count(self, E, delta)
        b = (self.density(E + delta) - self.density(E)) / xi
        return float((self.density_slope(E + delta) - self.density_slope(E)) / xi - b * b)


def bath_count(bath_energies, E, delta) -> int:
    """Number of bath levels in ``[E, E+delta)``; ``bath_energies`` must be sorted."""
    if not delta > 0:
        raise ValueError("delta must be > 0")
    e = np.asarray(bath_energies)
    return int(np.searchsorted(e, E + delta, side="left") - np.searchsorted(e, E, side="left"))


def bath_counts(bath_energies, lower_edges, delta) -> np.ndarray:
    e = np.asarray(bath_energies)
    lo = np.asarray(lower_edges, dtype=np.float64)
    return np.searchsorted(e, lo + delta, side="left") - np.searchsorted(e, lo, side="left")


def smoothed_count(model: DosModel, E, delta) -> float:
    """Adaptive Gauss-Kronrod integral of the smoothed density over ``[E, E+delta)``."""
    if not delta > 0:
        raise ValueError("delta must be > 0")
    # split at the centre so the peak is always a breakpoint
    pts = [model.center] if E < model.center < E + delta else None
    val, _ = integrate.quad(model.density, E, E + delta, points=pts,
                            epsabs=0.0, epsrel=QUAD_EPSREL, limit=200)
    return float(val)


def decoupled_reduced_probabilities(hs: SystemHamiltonian, bath_energies, w: EnergyWindow) -> np.ndarray:
    """Spectrum of the reduced decoupled microcanonical state from bath level counts."""
    counts = bath_counts(bath_energies, w.E - hs.energies, w.delta)
    total = counts.sum()
    if total == 0:
        raise ValueError("window contains no levels of the uncoupled Hamiltonian")
    return counts / total


def smoothed_reduced_probabilities(hs: SystemHamiltonian, model: DosModel, w: EnergyWindow) -> np.ndarray:
    xi = np.array([smoothed_count(model, w.E - e, w.delta) for e in hs.energies])
    return xi / xi.sum()


def counting_bound_spin_bath(hs_norm, eta, m) -> float:
    """``(exp(2 ||H_S||**2 / (eta**2 m)) - 1) / 2``; the exponentially small remainder is not included."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return float(0.5 * np.expm1(2.0 * hs_norm ** 2 / (eta ** 2 * m)))


def counting_bound_lambda(lam) -> float:
    return float(0.5 * np.expm1(2.0 / lam))


def curvature_range(model: DosModel, delta, energies) -> tuple:
    """Minimum and maximum of ``s''`` over ``energies`` for windows of width ``delta``."""
    vals = np.array([model.curvature(E, delta) for E in np.atleast_1d(energies)])
    return float(vals.min()), float(vals.max())


def gamma_range(model: DosModel, hs: SystemHamiltonian, w: EnergyWindow, n_grid: int = 65) -> tuple:
    """Extremes of ``gamma_k(xi) = s''(xi) E_k**2 / 2`` over ``xi`` in ``[E - E_k, E]``, by grid search."""
    lo, hi = np.inf, -np.inf
    for ek in hs.energies:
        xs = np.linspace(w.E - ek, w.E, n_grid) if ek != 0 else np.array([w.E])
        g = 0.5 * ek * ek * np.array([model.curvature(x, w.delta) for x in xs])
        lo = min(lo, g.min())
        hi = max(hi, g.max())
    return float(lo), float(hi)


def exact_gammas(hs: SystemHamiltonian, bath_energies, w: EnergyWindow, beta) -> np.ndarray:
    """``gamma_k = ln Omega(E - E_k) - ln Omega(E) + beta E_k`` from exact counts."""
    counts = bath_counts(bath_energies, w.E - hs.energies, w.delta).astype(np.float64)
    ref = bath_count(bath_energies, w.E, w.delta)
    if ref == 0 or np.any(counts == 0):
        raise ValueError("exact gammas need nonzero counts in every shifted window")
    return np.log(counts) - np.log(ref) + beta * hs.energies


@dataclass
class CountingResult:
    E: float
    delta: float
    beta: float
    distance: float
    smoothed_distance: float
    gamma_min: float
    gamma_max: float
    gamma_bound: float
    counting_bound: float
    slack: float
    slack_literal: float
    lam: float


def gibbs_comparison(hs: SystemHamiltonian, bath_energies, model: DosModel, w: EnergyWindow,
                     eta: float, m: int, beta_at: str = "lower") -> CountingResult:
    """Compare the reduced decoupled microcanonical state with the Gibbs state at the smoothed ``beta``.

    ``slack`` is the distance between count-based and smoothed probabilities,
    which is exactly what the smoothing step contributes via the triangle
    inequality; ``slack_literal`` is ``2 sum_k |Xi_k - Omega_k| / sum_k Omega_k``.
    """
    if hs.norm > w.E:
        warnings.warn("window lower edge is below ||H_S||; the counting argument assumes otherwise")
    if beta_at == "lower":
        beta = model.beta(w.E, w.delta)
    elif beta_at == "midpoint":
        beta = model.beta(w.E + 0.5 * w.delta, w.delta)
    else:
        raise ValueError("beta_at must be 'lower' or 'midpoint'")
    counts = bath_counts(bath_energies, w.E - hs.energies, w.delta).astype(np.float64)
    if counts.sum() == 0:
        raise ValueError("empty window")
    p = counts / counts.sum()
    xi = np.array([smoothed_count(model, w.E - e, w.delta) for e in hs.energies])
    p_smooth = xi / xi.sum()
    q = boltzmann_weights(hs.energies, beta)
    g_lo, g_hi = gamma_range(model, hs, w)
    hs_norm = hs.norm
    return CountingResult(
        E=w.E, delta=w.delta, beta=beta,
        distance=float(0.5 * np.abs(p - q).sum()),
        smoothed_distance=float(0.5 * np.abs(p_smooth - q).sum()),
        gamma_min=g_lo, gamma_max=g_hi,
        gamma_bound=float(0.5 * np.expm1(g_hi - g_lo)),
        counting_bound=counting_bound_spin_bath(hs_norm, eta, m),
        slack=float(0.5 * np.abs(p - p_smooth).sum()),
        slack_literal=float(2.0 * np.abs(xi - counts).sum() / counts.sum()),
        lam=float(eta ** 2 * m / hs_norm ** 2) if hs_norm > 0 else float("inf"),
    )


def boltzmann_weights(energies, beta):
    """Normalized ``exp(-beta E)`` for any real ``beta``, including population-inverted negatives."""
    x = -beta * np.asarray(energies, dtype=np.float64)
    w = np.exp(x - x.max())
    return w / w.sum()
