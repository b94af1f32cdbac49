"""Backend selection for the phase-estimation weight kernels.

The compiled Cython module is used when it was built and importable;
otherwise the numpy implementation is used. Setting the environment
variable ``GIBBSLAB_PURE_PYTHON=1`` forces the numpy path.

All functions take phases as float64 arrays; ``r`` is the ancilla register
width, so outcomes ``s`` live in ``[0, 2**r)``.
"""
import os

import numpy as np

from . import _kernels_py

_compiled = None
if not os.environ.get("GIBBSLAB_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

_impl = _compiled if _compiled is not None else _kernels_py
BACKEND = "cython" if _compiled is not None else "numpy"


def alpha_sq(phi, s, r):
    """Phase-estimation outcome probability ``|alpha_s(phi)|**2``, elementwise."""
    phi, s = np.broadcast_arrays(np.asarray(phi, dtype=np.float64), np.asarray(s, dtype=np.int64))
    shape = phi.shape
    # broadcast views are read-only; the compiled kernel takes writable buffers
    out = _impl.alpha_sq(phi.flatten(), s.flatten(), int(r))
    return np.asarray(out).reshape(shape)


def window_weight_sum(phi, r, start, count):
    """Sum of ``|alpha_s(phi_k)|**2`` over ``s = start .. start+count-1`` for each phase."""
    phi = np.ascontiguousarray(np.atleast_1d(phi), dtype=np.float64)
    return np.asarray(_impl.window_weight_sum(phi, int(r), int(start), int(count)))


def outcome_weight_table(phi, r, q):
    """Array of shape ``(len(phi), 2**q)``; column ``b`` sums ``s`` in ``[b*2**(r-q), (b+1)*2**(r-q))``."""
    if not 0 <= q <= r:
        raise ValueError(f"need 0 <= q <= r, got q={q}, r={r}")
    phi = np.ascontiguousarray(np.atleast_1d(phi), dtype=np.float64)
    return np.asarray(_impl.outcome_weight_table(phi, int(r), int(q)))


def use_backend(name):
    """Switch backend at runtime (``"cython"`` or ``"numpy"``); used by the benchmark and tests."""
    global _impl, BACKEND
    if name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        _impl = _compiled
    elif name == "numpy":
        _impl = _kernels_py
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = name


def compiled_available():
    return _compiled is not None
