"""Compare the compiled and numpy phase-estimation kernels.

    python3 benchmarks/bench_kernels.py [--levels 8192] [--r 13] [--q 3] [--repeat 3]

Prints best-of-``repeat`` wall time per kernel and backend, plus the maximum
absolute difference between backends.
"""
import argparse
import time

import numpy as np

from gibbslab import kernels


def _best(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--levels", type=int, default=8192)
    p.add_argument("--r", type=int, default=13)
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    phi = np.sort(np.random.default_rng(args.seed).uniform(0, 1, args.levels))
    s = np.arange(1 << args.r)
    cases = {
        "outcome_weight_table": lambda: kernels.outcome_weight_table(phi, args.r, args.q),
        "window_weight_sum": lambda: kernels.window_weight_sum(phi, args.r, 0, 1 << (args.r - args.q)),
        "alpha_sq": lambda: kernels.alpha_sq(phi[:256, None], s[None, :], args.r),
    }
    backends = ["numpy"] + (["cython"] if kernels.compiled_available() else [])
    print(f"levels={args.levels} r={args.r} q={args.q} backends={','.join(backends)}")
    for name, fn in cases.items():
        times, outs = {}, {}
        for b in backends:
            kernels.use_backend(b)
            times[b], outs[b] = _best(fn, args.repeat)
        line = f"{name:22s}" + "".join(f"  {b}={times[b]:.4f}s" for b in backends)
        if len(backends) == 2:
            diff = float(np.max(np.abs(outs["cython"] - outs["numpy"])))
            line += f"  speedup={times['numpy'] / times['cython']:.1f}x  max|diff|={diff:.1e}"
        print(line)
    kernels.use_backend(backends[-1])


if __name__ == "__main__":
    main()
