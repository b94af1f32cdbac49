"""Numpy implementation of the phase-estimation weight kernels.

Same arithmetic as the compiled ``_kernels`` module; the only difference is
that row sums use numpy's pairwise summation instead of Neumaier
compensation, so the two agree to a few ulp per term.
"""
import numpy as np

_CHUNK_ELEMS = 1 << 22
# offsets below this are grid phases; the dropped weight is O(delta**2) and 1/den**2 cannot overflow
EXACT_TOL = 1e-100


def angle_tables(r):
    n = 1 << r
    j = np.arange(n, dtype=np.int64)
    j[j >= n // 2] -= n
    ang = (np.pi * j.astype(np.float64)) / float(n)
    return np.sin(ang), np.cos(ang)


def _split(phi, n):
    phi = phi - np.floor(phi)
    t = phi * float(n)
    base = np.floor(t + 0.5)
    delta = t - base
    return base.astype(np.int64) & (n - 1), delta


def alpha_sq(phi, s, r):
    phi = np.ascontiguousarray(phi, dtype=np.float64)
    s = np.ascontiguousarray(s, dtype=np.int64)
    n = 1 << r
    base, delta = _split(phi, n)
    j = (base - s) & (n - 1)
    j = np.where(j >= n // 2, j - n, j)
    out = np.empty_like(phi)
    exact = np.abs(delta) < EXACT_TOL
    out[exact] = (j[exact] == 0).astype(np.float64)
    d = delta[~exact]
    num = np.sin(np.pi * d)
    den = np.sin(np.pi * (d + j[~exact]) / n)
    out[~exact] = num * num / (float(n) * float(n) * den * den)
    return out


def _rows(phi, r, s_values, reduce):
    n = 1 << r
    base, delta = _split(phi, n)
    st, ct = angle_tables(r)
    chunk = max(1, _CHUNK_ELEMS // max(1, len(s_values)))
    results = []
    for lo in range(0, len(phi), chunk):
        b = base[lo:lo + chunk]
        dl = delta[lo:lo + chunk]
        exact = np.abs(dl) < EXACT_TOL
        dl_safe = np.where(exact, 0.25, dl)
        sd = np.sin(np.pi * dl_safe / n)[:, None]
        cd = np.cos(np.pi * dl_safe / n)[:, None]
        j = (b[:, None] - s_values[None, :]) & (n - 1)
        den = sd * ct[j] + cd * st[j]
        terms = 1.0 / (den * den)
        num = np.sin(np.pi * dl_safe)
        scale = num * num / (float(n) * float(n))
        block = reduce(terms) * scale[:, None]
        # exact grid phases put all weight on s == base
        if exact.any():
            block[exact] = reduce((j[exact] == 0).astype(np.float64))
        results.append(block)
    return np.concatenate(results, axis=0) if results else np.zeros((0, 1))


def window_weight_sum(phi, r, start, count):
    phi = np.ascontiguousarray(phi, dtype=np.float64)
    s_values = np.arange(start, start + count, dtype=np.int64)
    out = _rows(phi, r, s_values, lambda t: t.sum(axis=1, keepdims=True))
    return out[:, 0] if len(phi) else np.zeros(0)


def outcome_weight_table(phi, r, q):
    phi = np.ascontiguousarray(phi, dtype=np.float64)
    n = 1 << r
    nout = 1 << q
    s_values = np.arange(n, dtype=np.int64)
    if not len(phi):
        return np.zeros((0, nout))
    return _rows(phi, r, s_values,
                 lambda t: t.reshape(t.shape[0], nout, n // nout).sum(axis=2))
