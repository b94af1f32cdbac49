"""Deterministic SVG figures from result CSVs.

SVG output carries no date and uses a fixed hash salt for element ids, so
identical inputs give byte-identical files.
"""
from __future__ import annotations

import os
import warnings

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .serialize import read_csv  # noqa: E402

SVG_RC = {"svg.hashsalt": "gibbslab", "svg.fonttype": "none"}


class MissingColumnsError(KeyError):
    pass


def _need(header, columns, path):
    missing = [c for c in columns if c not in header]
    if missing:
        raise MissingColumnsError(f"{path}: missing columns {missing}")


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _load(path, columns):
    header, rows = read_csv(path)
    if not rows:
        warnings.warn(f"{path} has no data rows; nothing to plot")
        return None
    _need(header, columns, path)
    return rows


def plot_theorem1_epsilon(csv_path, svg_path, max_instances=6):
    """Bound and exact distance against epsilon on log axes, one colour per instance."""
    rows = _load(csv_path, ["seed", "epsilon", "bound", "distance_full"])
    if rows is None:
        return None
    seeds = sorted({int(r["seed"]) for r in rows})[:max_instances]
    with plt.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        for i, seed in enumerate(seeds):
            sel = [r for r in rows if int(r["seed"]) == seed]
            eps = [float(r["epsilon"]) for r in sel]
            colour = f"C{i % 10}"
            ax.plot(eps, [float(r["bound"]) for r in sel], color=colour, label=f"bound, instance {seed}")
            ax.plot(eps, [float(r["distance_full"]) for r in sel], color=colour, linestyle="--")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("epsilon")
        ax.set_ylabel("trace distance (dashed: exact)")
        ax.legend(fontsize=6)
        _save(fig, svg_path)
    return svg_path


def plot_fg(csv_path, svg_path, r=None):
    """Numeric kernel one-norm and its closed form against r - q at fixed r (default: largest r)."""
    rows = _load(csv_path, ["r", "r_minus_q", "numeric", "closed_form"])
    if rows is None:
        return None
    r = max(int(x["r"]) for x in rows) if r is None else r
    sel = sorted((x for x in rows if int(x["r"]) == r), key=lambda x: int(x["r_minus_q"]))
    with plt.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        xs = [int(x["r_minus_q"]) for x in sel]
        ax.semilogy(xs, [float(x["numeric"]) for x in sel], "o-", label="numeric")
        ax.semilogy(xs, [float(x["closed_form"]) for x in sel], "s--", label="closed form")
        ax.set_xlabel("r - q")
        ax.set_ylabel("kernel one-norm")
        ax.set_title(f"r = {r}")
        ax.legend()
        _save(fig, svg_path)
    return svg_path


def plot_measured_vs_bound(csv_path, svg_path, measured, bound, title):
    rows = _load(csv_path, [measured, bound])
    if rows is None:
        return None
    with plt.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(5, 5))
        xs = [float(r[bound]) for r in rows]
        ys = [float(r[measured]) for r in rows]
        ax.scatter(xs, ys, s=8)
        top = max(xs + ys)
        ax.plot([0, top], [0, top], color="k", linewidth=0.8)
        ax.set_xlabel(bound)
        ax.set_ylabel(measured)
        ax.set_title(title)
        _save(fig, svg_path)
    return svg_path


def plot_dynamics(csv_path, svg_path, max_series=5):
    rows = _load(csv_path, ["instance", "state", "t", "distance"])
    if rows is None:
        return None
    keys = sorted({(int(r["instance"]), int(r["state"])) for r in rows})[:max_series]
    with plt.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        for key in keys:
            sel = [r for r in rows if (int(r["instance"]), int(r["state"])) == key]
            ax.plot([float(r["t"]) for r in sel], [float(r["distance"]) for r in sel], linewidth=0.6,
                    label=f"instance {key[0]}, state {key[1]}")
        ax.set_xlabel("t")
        ax.set_ylabel("subsystem trace distance")
        ax.legend(fontsize=6)
        _save(fig, svg_path)
    return svg_path


PLOTTERS = {
    "theorem1_epsilon.csv": ("theorem1_epsilon.svg", plot_theorem1_epsilon),
    "fg.csv": ("fg.svg", plot_fg),
    "counting.csv": ("counting.svg", lambda c, s: plot_measured_vs_bound(
        c, s, "distance", "counting_bound", "decoupled reduced state vs Gibbs")),
    "algorithm.csv": ("algorithm.svg", lambda c, s: plot_measured_vs_bound(
        c, s, "distance_measured", "bound_total", "prepared state vs Gibbs")),
    "dynamics_timeseries.csv": ("dynamics.svg", plot_dynamics),
}


def plot_results(path, out_dir=None) -> list:
    """Render every known CSV in a results directory (or one CSV file); returns the SVG paths written."""
    if os.path.isdir(path):
        candidates = [os.path.join(path, name) for name in sorted(PLOTTERS) if os.path.exists(os.path.join(path, name))]
        out_dir = out_dir or path
    elif os.path.isfile(path):
        if os.path.basename(path) not in PLOTTERS:
            raise ValueError(f"no plot is defined for {os.path.basename(path)}")
        candidates = [path]
        out_dir = out_dir or os.path.dirname(path) or "."
    else:
        raise FileNotFoundError(path)
    if not candidates:
        warnings.warn(f"no known result files under {path}")
    written = []
    for csv_path in candidates:
        svg_name, fn = PLOTTERS[os.path.basename(csv_path)]
        out = fn(csv_path, os.path.join(out_dir, svg_name))
        if out:
            written.append(out)
    return written
