"""Instance builders and the verification pipelines behind the CLI and the acceptance suite.

Each pipeline returns plain dict rows whose keys are the documented CSV
columns. All randomness comes from :mod:`gibbslab.seeding` keyed by the
experiment name and instance index, so rows are independent of evaluation
order and worker count.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import counting, dynamics, perturbation, phaseest, seeding
from .circuit import CircuitPlan, run_gate_level
from .counting import DosModel
from .hamiltonians import (BathSpec, CouplingSpec, Eigensystem, SystemHamiltonian, bath_energies_bitorder,
                           bath_fields, build_bath, compose_h0, coupled_eigensystem, sample_coupling)
from .phaseest import PhaseEstimationConfig
from .states import EnergyWindow, rectangular_pure_state, trace_distance_matrix


@dataclass
class Instance:
    hs: SystemHamiltonian
    bath: BathSpec
    fields: np.ndarray
    bath_bitorder: np.ndarray
    h0: Eigensystem
    v_norm: float
    h: Optional[Eigensystem]
    window: EnergyWindow

    @property
    def dims(self):
        return self.h0.dims


def bath_center(hs: SystemHamiltonian, fields) -> float:
    """Centre of the uncoupled spectrum: mean system energy plus half the summed fields."""
    return float(np.mean(hs.energies) + 0.5 * np.sum(fields))


def build_instance(root: int, kind: str, index: int, n: int, m: int, v_ratio: float,
                   eta: float = 1.0, disorder_rel: float = 0.05, hs_norm: float = 1.0,
                   delta_range=(1.0, 2.0), spread: float = 1.0, model: str = "dense-random") -> Instance:
    """Random system spectrum, disordered bath, bulk window and dense coupling with ``||V|| = v_ratio * delta``."""
    gen = seeding.rng(root, kind, index)
    hs = SystemHamiltonian.random(n, hs_norm, gen)
    bath = BathSpec(m, eta, disorder_rel, seeding.derive_seed(root, kind, index, "bath"))
    fields = bath_fields(bath)
    bitorder = bath_energies_bitorder(fields)
    h0 = compose_h0(hs, bitorder)
    delta = float(gen.uniform(*delta_range)) * eta
    sigma = 0.5 * eta * np.sqrt(m)
    center = bath_center(hs, fields) - h0.offset
    lo = max(0.0, center - spread * sigma - 0.5 * delta)
    hi = max(lo, center + spread * sigma - 0.5 * delta)
    window = EnergyWindow(float(gen.uniform(lo, hi)), delta)
    v_norm = float(v_ratio * delta)
    h = None
    if v_norm > 0:
        v = sample_coupling(h0.dim, CouplingSpec(v_norm, model, seeding.derive_seed(root, kind, index, "coupling")),
                            dims=h0.dims)
        h = coupled_eigensystem(hs, bitorder, v, offset=h0.offset)
    return Instance(hs, bath, fields, bitorder, h0, v_norm, h, window)


def window_beta(inst: Instance) -> float:
    """Smoothed inverse temperature of the uncoupled spectrum at the window, from the realized bath moments."""
    model = DosModel.from_fields(inst.bath.eta, inst.fields)
    lo = inst.window.E + inst.h0.offset - inst.hs.energies
    num = np.sum(model.density(lo + inst.window.delta) - model.density(lo))
    den = np.sum(model.count_closed(lo, inst.window.delta))
    return float(num / den)


THEOREM1_COLUMNS = [
    "seed", "d_S", "m", "v_norm", "delta", "E", "epsilon", "omega_max", "delta_omega", "omega_eps",
    "distance_full", "distance_reduced", "bound", "heuristic_flat", "heuristic_alt", "epsilon_flat",
    "bound_at_flat", "beta", "exp_dos_bound", "bhatia_max_ratio", "chain_satisfied", "bhatia_satisfied",
    "bound_satisfied",
]
THEOREM1_EPS_COLUMNS = [
    "seed", "epsilon", "omega_eps", "norm_gi_fbar_inf", "v_over_eps", "bound", "distance_full",
    "distance_reduced",
]


def theorem1_row(root: int, index: int, n: int, m: int, v_ratio: float, n_eps: int = 32,
                 disorder_rel: float = 0.05, eta: float = 1.0):
    """One instance of the interacting-vs-uncoupled check over an ``n_eps``-point epsilon grid."""
    inst = build_instance(root, "theorem1", index, n, m, v_ratio, eta=eta, disorder_rel=disorder_rel)
    w = inst.window
    eps = perturbation.epsilon_grid(perturbation.default_epsilon_floor(inst.h0, w), w.delta, n_eps)
    sweep = perturbation.theorem1_sweep(inst.h0, inst.h, w, inst.v_norm, eps)
    best = sweep.best
    c = sweep.censuses[best]
    flat = perturbation.optimal_epsilon_flat(inst.v_norm, w.delta)
    bound_at_flat = (perturbation.theorem1_bound(perturbation.WindowProjectors(inst.h0, inst.h, w).census(flat.epsilon),
                                                 inst.v_norm) if 0 < flat.epsilon < w.delta / 2 else float("nan"))
    chain = True
    for cen in sweep.censuses:
        gi = cen.omega_g - cen.omega_ge  # interior rank
        chain &= sweep.full_distance <= perturbation.proof_chain_bound(sweep.norm_g_minus_f, cen) + 1e-12
        chain &= sweep.norm_g_minus_f <= cen.norm_g_fbar + cen.norm_gbar_f + 1e-9
        chain &= cen.norm_g_fbar <= max(gi, 0) * cen.norm_gi_fbar_inf + cen.omega_ge + 1e-9
    ratios = [cen.norm_gi_fbar_inf * cen.epsilon / inst.v_norm for cen in sweep.censuses]
    beta = window_beta(inst)
    exp_bound = (perturbation.exponential_dos_bound(inst.v_norm, beta, w.delta).bound
                 if beta > 0 else float("nan"))
    row = {
        "seed": index, "d_S": inst.hs.dim, "m": m, "v_norm": inst.v_norm, "delta": w.delta, "E": w.E,
        "epsilon": float(eps[best]), "omega_max": c.omega_max, "delta_omega": c.delta_omega,
        "omega_eps": c.omega_eps, "distance_full": sweep.full_distance,
        "distance_reduced": sweep.reduced_distance, "bound": float(sweep.bounds[best]),
        "heuristic_flat": flat.bound, "heuristic_alt": flat.bound_alt, "epsilon_flat": flat.epsilon,
        "bound_at_flat": bound_at_flat, "beta": beta, "exp_dos_bound": exp_bound,
        "bhatia_max_ratio": float(max(ratios)), "chain_satisfied": bool(chain),
        "bhatia_satisfied": bool(sweep.bhatia_ok().all()), "bound_satisfied": bool(sweep.bound_ok().all()),
    }
    eps_rows = [{
        "seed": index, "epsilon": cen.epsilon, "omega_eps": cen.omega_eps,
        "norm_gi_fbar_inf": cen.norm_gi_fbar_inf, "v_over_eps": inst.v_norm / cen.epsilon,
        "bound": float(b), "distance_full": sweep.full_distance, "distance_reduced": sweep.reduced_distance,
    } for cen, b in zip(sweep.censuses, sweep.bounds)]
    return row, eps_rows


COUNTING_COLUMNS = [
    "m", "lambda", "seed", "E", "delta", "beta", "distance", "smoothed_distance", "gamma_bound",
    "counting_bound", "slack", "slack_literal", "passed", "smoothed_passed",
]
COUNTING_SLACK_CAP = 0.02


def counting_rows(root: int, m: int, lam: float, seed_index: int, n_positions: int = 12,
                  widths=(1, 2, 3, 4), disorder_rel: float = 0.05, hs_norm: float = 1.0, bulk_sigmas: float = 2.0):
    """Decoupled reduced state vs Gibbs for bulk windows at positive temperature."""
    eta = float(np.sqrt(lam / m) * hs_norm)
    bath = BathSpec(m, eta, disorder_rel, seeding.derive_seed(root, "counting", m, str(lam), seed_index))
    energies, _ = build_bath(bath)
    model = DosModel.from_spec(bath)
    hs = SystemHamiltonian.two_level(hs_norm)
    sigma = np.sqrt(model.variance)
    rows = []
    for width in widths:
        delta = width * eta
        lo = max(hs_norm, model.center - bulk_sigmas * sigma)
        hi = model.center - delta
        if hi <= lo:
            continue
        for E in np.linspace(lo, hi, n_positions):
            res = counting.gibbs_comparison(hs, energies, model, EnergyWindow(float(E), delta), eta, m)
            if res.beta <= 0:
                continue
            rows.append({
                "m": m, "lambda": lam, "seed": seed_index, "E": res.E, "delta": res.delta, "beta": res.beta,
                "distance": res.distance, "smoothed_distance": res.smoothed_distance,
                "gamma_bound": res.gamma_bound, "counting_bound": res.counting_bound, "slack": res.slack,
                "slack_literal": res.slack_literal,
                "passed": bool(res.distance <= res.counting_bound + min(res.slack, COUNTING_SLACK_CAP)),
                "smoothed_passed": bool(res.smoothed_distance <= min(res.counting_bound, res.gamma_bound) + 1e-12),
            })
    return rows


ALGORITHM_COLUMNS = [
    "m", "seed", "r", "q", "s_star", "E", "delta", "probability", "beta_outcome", "beta_window",
    "delta_beta", "beta_within", "distance_measured", "distance_circuit", "distance_circuit_reduced",
    "distance_counting", "triangle_satisfied", "bound_circuit", "bound_counting", "bound_total", "slack",
    "passed", "runs_empirical", "runs_bound", "runs_bound_width", "runs_satisfied",
]
ALGORITHM_SLACK_CAP = 0.02


def algorithm_instance(root: int, m: int, lam: float, seed_index: int, n: int = 1, disorder_rel: float = 0.05,
                       hs_norm: float = 1.0):
    """Two-level (or random ``n``-qubit) system coupled to nothing, spin bath tuned by ``lam``."""
    if n == 1:
        hs = SystemHamiltonian.two_level(hs_norm)
    else:
        hs = SystemHamiltonian.random(n, hs_norm, seeding.rng(root, "algorithm-system", m, seed_index))
    eta = float(np.sqrt(lam / m) * hs_norm)
    bath = BathSpec(m, eta, disorder_rel, seeding.derive_seed(root, "algorithm", m, str(lam), seed_index))
    fields = bath_fields(bath)
    bitorder = bath_energies_bitorder(fields)
    return hs, bath, fields, bitorder, compose_h0(hs, bitorder)


def algorithm_rows(root: int, m: int, lam: float, seed_index: int, r_minus_q=(8, 10, 12), q: int = 3,
                   positive_only: bool = True, beta_target: Optional[float] = None, n: int = 1):
    """Outcome-resolved comparison of the prepared state with the Gibbs state.

    The Gibbs reference and the closed-form bound use the inverse temperature
    the outcome reports; the smoothed window value is only compared with it
    through the discretization bound.
    """
    hs, bath, fields, bitorder, h0 = algorithm_instance(root, m, lam, seed_index, n=n)
    hs_norm = hs.norm
    model = DosModel.from_spec(bath)
    rows = []
    for x in r_minus_q:
        cfg = PhaseEstimationConfig(q + x, q)
        table = phaseest.outcome_distribution(h0, cfg)
        scale = table.scale
        width = table.width
        outcomes = range(cfg.n_outcomes)
        if beta_target is not None:
            outcomes = [phaseest.s_star_for_beta(beta_target, q, bath, hs_norm, scale=scale)]
        for s_star in outcomes:
            E = table.energy(s_star)
            beta_s = phaseest.beta_from_outcome(s_star, q, bath, hs_norm, scale=scale)
            if positive_only and (beta_s <= 0 or E < hs_norm):
                continue
            w = EnergyWindow(E, width)
            beta_w = model.beta(E, width)
            if positive_only and beta_w <= 0:
                continue
            wqc = phaseest.omega_qc_weights(table.weights[:, s_star])
            idx = h0.in_window(w)
            if idx.size == 0:
                continue
            wrect = np.zeros(h0.dim)
            wrect[idx] = 1.0 / idx.size
            p_qc = phaseest.reduced_diagonal_weights(h0, wqc)
            p_rect = phaseest.reduced_diagonal_weights(h0, wrect)
            gibbs = counting.boltzmann_weights(hs.energies, beta_s)
            d_meas = 0.5 * np.abs(p_qc - gibbs).sum()
            d_circ = 0.5 * np.abs(wqc - wrect).sum()
            d_circ_red = 0.5 * np.abs(p_qc - p_rect).sum()
            d_count = 0.5 * np.abs(p_rect - gibbs).sum()
            t1, t2 = phaseest.algorithm_error_bound(cfg, lam, beta_s, hs_norm)
            slack = counting.gibbs_comparison(hs, np.sort(bitorder), model, w, bath.eta, m).slack
            dbeta = phaseest.delta_beta_bound(q, bath, hs_norm, scale=scale)
            runs_bound = phaseest.expected_runs_bound(q, m, lam, max(beta_s, 0.0), hs_norm)
            prob = float(table.probabilities[s_star])
            rows.append({
                "m": m, "seed": seed_index, "r": cfg.r, "q": q, "s_star": s_star, "E": E, "delta": width,
                "probability": prob, "beta_outcome": beta_s, "beta_window": beta_w, "delta_beta": dbeta,
                "beta_within": bool(abs(beta_w - beta_s) <= dbeta),
                "distance_measured": float(d_meas), "distance_circuit": float(d_circ),
                "distance_circuit_reduced": float(d_circ_red), "distance_counting": float(d_count),
                "triangle_satisfied": bool(d_meas <= d_circ_red + d_count + 1e-12 and d_circ_red <= d_circ + 1e-12),
                "bound_circuit": t1, "bound_counting": t2, "bound_total": t1 + t2, "slack": float(slack),
                "passed": bool(d_meas <= t1 + t2 + min(slack, ALGORITHM_SLACK_CAP)),
                "runs_empirical": float(1.0 / prob) if prob > 0 else float("inf"),
                "runs_bound": runs_bound,
                "runs_bound_width": phaseest.expected_runs_bound_width(width, lam, max(beta_s, 0.0), hs_norm),
                "runs_satisfied": bool(prob > 0 and 1.0 / prob <= runs_bound),
            })
    return rows


def runs_versus_beta(root: int, m: int = 14, lam: float = 20.0, q: int = 4, r: int = 12, n_beta: int = 5,
                     seed_index: int = 0, hs_norm: float = 1.0):
    """Empirical ``1/P(s*)`` on a grid of target inverse temperatures with distinct outcomes."""
    hs, bath, fields, bitorder, h0 = algorithm_instance(root, m, lam, seed_index)
    cfg = PhaseEstimationConfig(r, q)
    table = phaseest.outcome_distribution(h0, cfg, keep_weights=False)
    top = phaseest.beta_from_outcome(1, q, bath, hs_norm, scale=table.scale)
    outcomes = set()
    rows = []
    for beta in np.linspace(0.1 * top, 0.9 * top, n_beta * 4):
        s = phaseest.s_star_for_beta(beta, q, bath, hs_norm, scale=table.scale)
        if s in outcomes or s == 0:
            continue
        outcomes.add(s)
        p = float(table.probabilities[s])
        b_s = phaseest.beta_from_outcome(s, q, bath, hs_norm, scale=table.scale)
        rows.append({"beta": float(beta), "s_star": s, "beta_outcome": b_s, "probability": p,
                     "runs_empirical": 1.0 / p, "runs_bound": phaseest.expected_runs_bound(q, m, lam, b_s, hs_norm)})
        if len(rows) == n_beta:
            break
    return rows


ORACLE_COLUMNS = ["plan", "n", "m", "r", "q", "max_probability_deviation", "max_state_distance",
                  "max_offdiagonal"]


def oracle_plans(root: int, count: int, max_total: int = 12):
    """``count`` plans ``(n, m, r, q)`` with ``n + m + r <= max_total``; mostly mid-sized, a few at the cap."""
    gen = seeding.rng(root, "oracle-plans")
    sizes = np.arange(6, max_total + 1)
    weights = np.where(sizes == max_total, 0.5, 1.0)
    plans = []
    for _ in range(count):
        total = int(gen.choice(sizes, p=weights / weights.sum()))
        n = int(gen.integers(1, 3))
        r = int(gen.integers(2, total - n))
        m = total - n - r
        q = int(gen.integers(1, r + 1))
        plans.append((n, m, r, q))
    return plans


def oracle_row(root: int, index: int, n: int, m: int, r: int, q: int):
    hs = SystemHamiltonian.random(n, 1.0, seeding.rng(root, "oracle", index)) if n > 0 else SystemHamiltonian(
        np.array([0.0]))
    bath = BathSpec(m, 0.8, 0.05, seeding.derive_seed(root, "oracle", index, "bath"))
    bitorder = bath_energies_bitorder(bath_fields(bath))
    plan = CircuitPlan(hs, bitorder, r, q)
    res = run_gate_level(plan)
    h0 = compose_h0(hs, bitorder)
    table = phaseest.outcome_distribution(h0, PhaseEstimationConfig(r, q), scale=plan.scale)
    dev = float(np.max(np.abs(table.probabilities - res.probabilities)))
    dist = 0.0
    off = 0.0
    for s_star, state in res.states.items():
        diag = np.zeros(h0.dim)
        diag[h0.permutation] = phaseest.omega_qc_weights(table.weights[:, s_star])
        dist = max(dist, trace_distance_matrix(state, np.diag(diag)))
        off = max(off, float(np.max(np.abs(state - np.diag(np.diag(state))))))
    return {"plan": index, "n": n, "m": m, "r": r, "q": q, "max_probability_deviation": dev,
            "max_state_distance": dist, "max_offdiagonal": off}


FG_COLUMNS = ["r", "q", "r_minus_q", "numeric", "closed_form", "satisfied"]


def fg_rows(r_max: int = 20, x_max: int = 12):
    rows = []
    for r in range(1, r_max + 1):
        for x in range(0, min(x_max, r - 1) + 1):
            cfg = PhaseEstimationConfig(r, r - x)
            num, cf = phaseest.fg_one_norm(cfg)
            rows.append({"r": r, "q": r - x, "r_minus_q": x, "numeric": num, "closed_form": cf,
                         "satisfied": bool(num <= cf)})
    return rows


TEMPERATURE_COLUMNS = ["index", "beta", "s_star", "beta_outcome", "error", "delta_beta", "satisfied"]


def temperature_rows(root: int, n_samples: int = 100, m: int = 12, lam: float = 20.0, q: int = 6,
                     hs_norm: float = 1.0):
    eta = float(np.sqrt(lam / m) * hs_norm)
    bath = BathSpec(m, eta)
    gen = seeding.rng(root, "temperature")
    hb = bath.norm
    scale = hs_norm + hb
    # admissible: s* in [0, 2**q)
    beta_hi = 2.0 / eta
    beta_lo = 4.0 / eta * (0.5 - scale / hb * (1 - 2.0 ** -q))
    dbeta = phaseest.delta_beta_bound(q, bath, hs_norm)
    rows = []
    for i, beta in enumerate(gen.uniform(beta_lo, beta_hi, n_samples)):
        s = phaseest.s_star_for_beta(beta, q, bath, hs_norm)
        b2 = phaseest.beta_from_outcome(s, q, bath, hs_norm)
        rows.append({"index": i, "beta": float(beta), "s_star": s, "beta_outcome": b2,
                     "error": abs(b2 - beta), "delta_beta": dbeta, "satisfied": bool(abs(b2 - beta) <= dbeta)})
    return rows


DYNAMICS_COLUMNS = ["instance", "state", "d_S", "m", "v_norm", "epsilon", "omega_min", "mean_distance",
                    "stderr", "bound", "satisfied", "gaps_nondegenerate", "gap_separation", "kinematic_exceedance"]


DYNAMICS_SERIES_COLUMNS = ["instance", "state", "t", "distance"]


def dynamics_rows(root: int, index: int, n_states: int = 5, m: int = 10, v_ratio: float = 1e-3,
                  n_times: int = 1000, n_haar: int = 500, epsilon_prime: float = 0.1):
    """Summary rows and the sampled time series for one weakly coupled instance."""
    inst = build_instance(root, "dynamics", index, 1, m, v_ratio, delta_range=(1.5, 2.0), spread=0.5)
    w = inst.window
    wp = perturbation.WindowProjectors(inst.h0, inst.h, w)
    eps = perturbation.epsilon_grid(perturbation.default_epsilon_floor(inst.h0, w), w.delta)
    cens = [wp.census(e) for e in eps]
    bounds = [dynamics.corollary2_dynamic_bound(inst.hs.dim, c, inst.v_norm) for c in cens]
    best = int(np.argmin(bounds))
    census = cens[best]
    d_s, d_b = inst.dims
    sys_index = inst.h0.permutation[wp.idx_f] // d_b
    reference = np.diag(np.bincount(sys_index, minlength=d_s) / wp.omega_f).astype(np.complex128)
    levels = inst.h.eigenvalues[wp.idx_g]
    gaps_ok, gap_sep = dynamics.nondegenerate_gaps(levels, norm=float(np.max(np.abs(inst.h.eigenvalues))))
    plan_seed = seeding.derive_seed(root, "dynamics", index, "times")
    plan = dynamics.TimeSamplingPlan.default_for(levels, n_times=n_times, seed=plan_seed)
    exceed = dynamics.kinematic_tail_sample(inst.h, w, d_s, n_haar, epsilon_prime, census, inst.v_norm, reference,
                                            seed=seeding.derive_seed(root, "dynamics", index, "haar"))
    rows, series = [], []
    for j in range(n_states):
        psi = rectangular_pure_state(inst.h, w, seeding.derive_seed(root, "dynamics", index, "state", j))
        mean, err, times, dist = dynamics.time_averaged_distance(psi, inst.h, reference, plan, return_series=True)
        series += [{"instance": index, "state": j, "t": float(t), "distance": float(d)} for t, d in zip(times, dist)]
        rows.append({"instance": index, "state": j, "d_S": d_s, "m": m, "v_norm": inst.v_norm,
                     "epsilon": census.epsilon, "omega_min": census.omega_min, "mean_distance": mean,
                     "stderr": err, "bound": float(bounds[best]), "satisfied": bool(mean <= bounds[best]),
                     "gaps_nondegenerate": bool(gaps_ok), "gap_separation": gap_sep,
                     "kinematic_exceedance": exceed})
    return rows, series
