"""Command-line experiment runner.

Every run writes its CSV/JSON outputs plus ``manifest.json`` (resolved
config, software versions, SHA-256 of each output) into ``--out``. Exit
status: 0 on success, 1 when ``--strict`` and a hard check failed, 2 for an
invalid config or arguments, 3 when a size cap is exceeded.
"""
from __future__ import annotations

import argparse
import hashlib
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np
import scipy

from . import __version__, config as cfgmod, experiments as ex, kernels, plotting
from .serialize import write_csv, write_json

log = logging.getLogger("gibbslab")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3


def pool_map(fn, tasks, workers: int) -> list:
    """Ordered map; results do not depend on the worker count."""
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _star(fn, args):
    return fn(*args)


def theorem1_tasks(cfg):
    p = cfg.params
    schedule = [(d_s, m) for d_s, m, count in p["sizes"] for _ in range(count)]
    ratios = p["v_over_delta_ratios"]
    for i in range(p["instances"]):
        d_s, m = schedule[i % len(schedule)]
        yield (cfg.seed, i, int(d_s).bit_length() - 1, m, float(ratios[i % len(ratios)]), p["epsilon_points"],
               p["disorder_rel"], p["eta_energy"])


def run_theorem1(cfg):
    results = pool_map(partial(_star, ex.theorem1_row), theorem1_tasks(cfg), cfg.workers)
    rows = [r for r, _ in results]
    eps_rows = [e for _, es in results for e in es]
    summary = {
        "instances": len(rows),
        "bound_violations": sum(not r["bound_satisfied"] for r in rows),
        "bhatia_violations": sum(not r["bhatia_satisfied"] for r in rows),
        "chain_violations": sum(not r["chain_satisfied"] for r in rows),
    }
    ok = summary["bound_violations"] == summary["bhatia_violations"] == summary["chain_violations"] == 0
    return {"theorem1.csv": (ex.THEOREM1_COLUMNS, rows),
            "theorem1_epsilon.csv": (ex.THEOREM1_EPS_COLUMNS, eps_rows)}, summary, ok


def run_counting(cfg):
    p = cfg.params
    tasks = [(cfg.seed, m, float(lam), s, p["window_positions"], tuple(p["window_widths_eta_ratio"]),
              p["disorder_rel"], p["hs_norm_energy"])
             for m in p["bath_spins"] for lam in p["lambdas"] for s in range(p["realizations"])]
    rows = [r for chunk in pool_map(partial(_star, ex.counting_rows), tasks, cfg.workers) for r in chunk]
    passed = sum(r["passed"] for r in rows)
    summary = {"windows": len(rows), "pass_fraction": passed / len(rows) if rows else float("nan"),
               "smoothed_violations": sum(not r["smoothed_passed"] for r in rows),
               "slack_cap": ex.COUNTING_SLACK_CAP}
    ok = bool(rows) and summary["pass_fraction"] >= 0.95 and summary["smoothed_violations"] == 0
    return {"counting.csv": (ex.COUNTING_COLUMNS, rows)}, summary, ok


RUNS_GRID_COLUMNS = ["beta", "s_star", "beta_outcome", "probability", "runs_empirical", "runs_bound"]


def run_algorithm(cfg):
    p = cfg.params
    beta = p["beta_inverse_energy"]
    tasks = [(cfg.seed, m, float(p["lambda"]), s, tuple(p["r_minus_q"]), p["q"], beta is None, beta,
              p["system_qubits"]) for m in p["bath_spins"] for s in range(p["realizations"])]
    rows = [r for chunk in pool_map(partial(_star, ex.algorithm_rows), tasks, cfg.workers) for r in chunk]
    outputs = {"algorithm.csv": (ex.ALGORITHM_COLUMNS, rows)}
    summary = {
        "outcomes": len(rows),
        "triangle_violations": sum(not r["triangle_satisfied"] for r in rows),
        "pass_fraction": sum(r["passed"] for r in rows) / len(rows) if rows else float("nan"),
        "runs_violations": sum(not r["runs_satisfied"] for r in rows),
        "slack_cap": ex.ALGORITHM_SLACK_CAP,
    }
    ok = bool(rows) and summary["triangle_violations"] == 0 and summary["pass_fraction"] >= 0.95
    if beta is not None:
        summary["results"] = rows
    elif p["beta_grid_points"] > 0:
        grid = ex.runs_versus_beta(cfg.seed, m=p["beta_grid_bath_spins"], lam=float(p["lambda"]),
                                   q=p["beta_grid_q"], r=p["beta_grid_r"], n_beta=p["beta_grid_points"])
        runs = [g["runs_empirical"] for g in grid]
        summary["runs_monotone"] = bool(np.all(np.diff(runs) > 0))
        outputs["runs_vs_beta.csv"] = (RUNS_GRID_COLUMNS, grid)
    return outputs, summary, ok


def run_dynamics(cfg):
    p = cfg.params
    tasks = [(cfg.seed, i, p["states_per_instance"], p["bath_spins"], p["v_over_delta_ratio"], p["time_samples"],
              p["haar_samples"], p["epsilon_prime_ratio"]) for i in range(p["instances"])]
    results = pool_map(partial(_star, ex.dynamics_rows), tasks, cfg.workers)
    rows = [r for chunk, _ in results for r in chunk]
    series = [s for _, chunk in results for s in chunk]
    summary = {"states": len(rows), "bound_violations": sum(not r["satisfied"] for r in rows),
               "max_kinematic_exceedance": max(r["kinematic_exceedance"] for r in rows)}
    ok = summary["bound_violations"] == 0 and summary["max_kinematic_exceedance"] == 0
    return {"dynamics.csv": (ex.DYNAMICS_COLUMNS, rows),
            "dynamics_timeseries.csv": (ex.DYNAMICS_SERIES_COLUMNS, series)}, summary, ok


def run_oracle(cfg):
    p = cfg.params
    plans = ex.oracle_plans(cfg.seed, p["plans"], p["max_total_qubits"])
    tasks = [(cfg.seed, i) + plan for i, plan in enumerate(plans)]
    rows = pool_map(partial(_star, ex.oracle_row), tasks, cfg.workers)
    summary = {"plans": len(rows),
               "max_probability_deviation": max(r["max_probability_deviation"] for r in rows),
               "max_state_distance": max(r["max_state_distance"] for r in rows)}
    ok = summary["max_probability_deviation"] <= 1e-10 and summary["max_state_distance"] <= 1e-10
    return {"oracle.csv": (ex.ORACLE_COLUMNS, rows)}, summary, ok


def run_kernel(cfg):
    rows = ex.fg_rows(cfg.params["r_max"], cfg.params["r_minus_q_max"])
    summary = {"pairs": len(rows), "violations": sum(not r["satisfied"] for r in rows)}
    return {"fg.csv": (ex.FG_COLUMNS, rows)}, summary, summary["violations"] == 0


def run_temperature(cfg):
    p = cfg.params
    rows = ex.temperature_rows(cfg.seed, p["samples"], p["bath_spins"], float(p["lambda"]), p["q"],
                               p["hs_norm_energy"])
    summary = {"samples": len(rows), "violations": sum(not r["satisfied"] for r in rows)}
    return {"temperature.csv": (ex.TEMPERATURE_COLUMNS, rows)}, summary, summary["violations"] == 0


RUNNERS = {"theorem1": run_theorem1, "counting": run_counting, "algorithm": run_algorithm,
           "dynamics": run_dynamics, "oracle-compare": run_oracle, "kernel": run_kernel,
           "temperature": run_temperature}


def _sha256(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def software_versions() -> dict:
    return {"gibbslab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "kernel_backend": kernels.BACKEND,
            "python": ".".join(map(str, sys.version_info[:3]))}


def execute(cfg, out_dir, command) -> tuple:
    """Run one experiment and write its outputs; returns ``(summary, ok)``."""
    os.makedirs(out_dir, exist_ok=True)
    outputs, summary, ok = RUNNERS[cfg.kind](cfg)
    written = {}
    for name, (columns, rows) in outputs.items():
        path = os.path.join(out_dir, name)
        write_csv(path, columns, rows)
        written[name] = _sha256(path)
    summary_name = f"{cfg.kind.replace('-', '_')}_summary.json"
    summary = dict(summary, checks_passed=bool(ok))
    write_json(os.path.join(out_dir, summary_name), summary)
    written[summary_name] = _sha256(os.path.join(out_dir, summary_name))
    write_json(os.path.join(out_dir, "manifest.json"),
               {"command": command, "config": cfg.resolved(), "software": software_versions(), "outputs": written})
    return summary, ok


def _common(p):
    p.add_argument("--config", help="YAML experiment config; command-line flags override it")
    p.add_argument("--seed", type=int, help="root seed (default 0)")
    p.add_argument("--out", default="results", help="output directory (default: results)")
    p.add_argument("--workers", type=int, help="worker processes (default 1)")
    p.add_argument("--strict", action="store_true", help="exit 1 when a hard check fails")


def _int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text):
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gibbslab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gibbslab {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-theorem1", help="coupled vs uncoupled microcanonical states against the bound")
    _common(p)
    p.add_argument("--seeds", type=int, help="number of random instances")
    p.add_argument("--ratios", type=_float_list, help="comma-separated ||V||/Delta values")

    p = sub.add_parser("verify-counting", help="decoupled reduced state vs Gibbs on the spin bath")
    _common(p)
    p.add_argument("--m", type=_int_list, help="comma-separated bath sizes")
    p.add_argument("--lambda", dest="lam", type=_float_list, help="comma-separated lambda values")
    p.add_argument("--realizations", type=int)

    p = sub.add_parser("run-algorithm", help="spectral simulation of the preparation algorithm")
    _common(p)
    p.add_argument("--n", type=int, help="system qubits")
    p.add_argument("--m", type=_int_list, help="comma-separated bath sizes")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--r", type=int, help="ancilla qubits (sets r - q from --q)")
    p.add_argument("--q", type=int, help="measured ancilla qubits")
    p.add_argument("--beta", type=float, help="target inverse temperature; reports the matching outcome only")
    p.add_argument("--realizations", type=int)

    p = sub.add_parser("oracle-compare", help="gate-level circuit vs spectral simulation")
    _common(p)
    p.add_argument("--plans", type=int)

    p = sub.add_parser("dynamics", help="time-averaged subsystem distance of rectangular states")
    _common(p)
    p.add_argument("--instances", type=int)
    p.add_argument("--states", type=int, help="rectangular states per instance")

    p = sub.add_parser("verify-kernel", help="numeric kernel one-norm vs its closed form")
    _common(p)
    p.add_argument("--r-max", type=int)

    p = sub.add_parser("verify-temperature", help="inverse-temperature discretization round trip")
    _common(p)
    p.add_argument("--samples", type=int)

    p = sub.add_parser("plot", help="render SVG figures from a results directory or CSV")
    p.add_argument("results", help="results directory or a single CSV")
    p.add_argument("--out", help="output directory (default: next to the input)")
    return parser


COMMAND_KIND = {"verify-theorem1": "theorem1", "verify-counting": "counting", "run-algorithm": "algorithm",
                "oracle-compare": "oracle-compare", "dynamics": "dynamics", "verify-kernel": "kernel",
                "verify-temperature": "temperature"}


def _overrides(args) -> dict:
    c = args.command
    o = {}
    if c == "verify-theorem1":
        o = {"instances": args.seeds, "v_over_delta_ratios": args.ratios}
    elif c == "verify-counting":
        o = {"bath_spins": args.m, "lambdas": args.lam, "realizations": args.realizations}
    elif c == "run-algorithm":
        o = {"system_qubits": args.n, "bath_spins": args.m, "lambda": args.lam, "q": args.q,
             "beta_inverse_energy": args.beta, "realizations": args.realizations}
        if args.r is not None:
            if args.q is None:
                raise cfgmod.ConfigError("--r needs --q")
            o["r_minus_q"] = [args.r - args.q]
    elif c == "oracle-compare":
        o = {"plans": args.plans}
    elif c == "dynamics":
        o = {"instances": args.instances, "states_per_instance": args.states}
    elif c == "verify-kernel":
        o = {"r_max": args.r_max}
    elif c == "verify-temperature":
        o = {"samples": args.samples}
    return {k: v for k, v in o.items() if v is not None}


def resolve_config(args) -> cfgmod.ExperimentConfig:
    kind = COMMAND_KIND[args.command]
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data, lines = cfgmod.parse_text(fh.read(), args.config)
        if data.get("experiment", kind) != kind:
            raise cfgmod.ConfigError(f"config is for {data['experiment']!r}, not {kind!r}",
                                     lines.get(("experiment",)), args.config)
    else:
        data, lines = {}, {}
    data = dict(data, experiment=kind)
    section = dict(data.get(kind) or {})
    section.update(_overrides(args))
    data[kind] = section
    if args.seed is not None:
        data["seed"] = args.seed
    if args.workers is not None:
        data["workers"] = args.workers
    return cfgmod.from_mapping(data, lines, source=args.config)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "plot":
        try:
            written = plotting.plot_results(args.results, args.out)
        except (FileNotFoundError, ValueError, KeyError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        for path in written:
            print(path)
        return EXIT_OK
    try:
        cfg = resolve_config(args)
        summary, ok = execute(cfg, args.out, args.command)
    except cfgmod.ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (cfgmod.ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MemoryError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for key, value in summary.items():
        if key != "results":
            print(f"{key}: {value}")
    return EXIT_FAILED if args.strict and not ok else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
