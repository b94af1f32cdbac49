"""Compiled phase-estimation weight kernels.

Mirrors :mod:`gibbslab._kernels_py` exactly; both are selected through
:mod:`gibbslab.kernels`.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, fabs, floor, M_PI

cnp.import_array()

# offsets below this are grid phases; the dropped weight is O(delta**2) and 1/den**2 cannot overflow
cdef double EXACT_TOL = 1e-100


def angle_tables(int r):
    """sin/cos of pi*j/2**r for every residue j, using the centered representative."""
    cdef long long n = 1LL << r
    j = np.arange(n, dtype=np.int64)
    j[j >= n // 2] -= n
    ang = (np.pi * j.astype(np.float64)) / float(n)
    return np.sin(ang), np.cos(ang)


cdef inline void _split(double phi, long long n, long long *base, double *delta) noexcept nogil:
    cdef double t
    phi = phi - floor(phi)
    t = phi * <double>n
    base[0] = <long long>floor(t + 0.5)
    delta[0] = t - <double>base[0]
    base[0] = base[0] & (n - 1)


def alpha_sq(double[::1] phi, long long[::1] s, int r):
    """|alpha_s(phi)|**2 elementwise."""
    cdef Py_ssize_t i, m = phi.shape[0]
    cdef long long n = 1LL << r
    cdef long long base, j
    cdef double delta, num, den, half = 0.5 * n
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(m):
            _split(phi[i], n, &base, &delta)
            j = (base - s[i]) & (n - 1)
            if fabs(delta) < EXACT_TOL:
                o[i] = 1.0 if j == 0 else 0.0
                continue
            if j >= half:
                j = j - n
            num = sin(M_PI * delta)
            den = sin(M_PI * (delta + <double>j) / <double>n)
            o[i] = (num * num) / ((<double>n * <double>n) * den * den)
    return out


def window_weight_sum(double[::1] phi, int r, long long start, long long count):
    """sum_{s=start}^{start+count-1} |alpha_s(phi_k)|**2 per k, Neumaier-compensated."""
    cdef Py_ssize_t k, d = phi.shape[0]
    cdef long long n = 1LL << r
    cdef long long base, j, s
    cdef double delta, sd, cd, den, term, acc, comp, tmp, num
    stab, ctab = angle_tables(r)
    cdef double[::1] st = stab
    cdef double[::1] ct = ctab
    out = np.empty(d, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for k in range(d):
            _split(phi[k], n, &base, &delta)
            if fabs(delta) < EXACT_TOL:
                # exact grid phase: all weight on s == base
                o[k] = 1.0 if ((base - start) & (n - 1)) < count else 0.0
                continue
            sd = sin(M_PI * delta / <double>n)
            cd = cos(M_PI * delta / <double>n)
            acc = 0.0
            comp = 0.0
            for s in range(start, start + count):
                j = (base - s) & (n - 1)
                den = sd * ct[j] + cd * st[j]
                term = 1.0 / (den * den)
                tmp = acc + term
                if abs(acc) >= abs(term):
                    comp = comp + ((acc - tmp) + term)
                else:
                    comp = comp + ((term - tmp) + acc)
                acc = tmp
            num = sin(M_PI * delta)
            o[k] = (num * num) * (acc + comp) / (<double>n * <double>n)
    return out


def outcome_weight_table(double[::1] phi, int r, int q):
    """Row k holds the window sums of |alpha_s(phi_k)|**2 for every q-bit outcome."""
    cdef Py_ssize_t k, d = phi.shape[0]
    cdef long long n = 1LL << r
    cdef long long nout = 1LL << q
    cdef int shift = r - q
    cdef long long base, j, s, b
    cdef double delta, sd, cd, den, term, tmp, num, scale
    stab, ctab = angle_tables(r)
    cdef double[::1] st = stab
    cdef double[::1] ct = ctab
    out = np.zeros((d, nout), dtype=np.float64)
    cdef double[:, ::1] o = out
    acc_arr = np.zeros(nout, dtype=np.float64)
    comp_arr = np.zeros(nout, dtype=np.float64)
    cdef double[::1] acc = acc_arr
    cdef double[::1] comp = comp_arr
    with nogil:
        for k in range(d):
            _split(phi[k], n, &base, &delta)
            if fabs(delta) < EXACT_TOL:
                o[k, base >> shift] = 1.0
                continue
            sd = sin(M_PI * delta / <double>n)
            cd = cos(M_PI * delta / <double>n)
            for b in range(nout):
                acc[b] = 0.0
                comp[b] = 0.0
            for s in range(n):
                j = (base - s) & (n - 1)
                den = sd * ct[j] + cd * st[j]
                term = 1.0 / (den * den)
                b = s >> shift
                tmp = acc[b] + term
                if abs(acc[b]) >= abs(term):
                    comp[b] = comp[b] + ((acc[b] - tmp) + term)
                else:
                    comp[b] = comp[b] + ((term - tmp) + acc[b])
                acc[b] = tmp
            num = sin(M_PI * delta)
            scale = (num * num) / (<double>n * <double>n)
            for b in range(nout):
                o[k, b] = scale * (acc[b] + comp[b])
    return out
