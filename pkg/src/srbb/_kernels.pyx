# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops.  Semantics (including summation order) mirror ``_fallback``."""
from libc.math cimport sqrt
cimport cython

DEF STEP = 0
DEF BUMP = 1
DEF TABLE = 2


cdef inline double _v(double r2, int kind, double eta, double R, double R2,
                      const double[::1] tab_r, const double[::1] tab_v) noexcept nogil:
    cdef double t, r
    cdef Py_ssize_t lo, hi, mid, n
    if r2 > R2:
        return 0.0
    if kind == STEP:
        return eta
    if kind == BUMP:
        t = 1.0 - r2 / R2
        return eta * t * t
    # linear interpolation, same convention as numpy.interp
    r = sqrt(r2)
    n = tab_r.shape[0]
    if r <= tab_r[0]:
        return tab_v[0]
    if r >= tab_r[n - 1]:
        return tab_v[n - 1]
    lo = 0
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if tab_r[mid] <= r:
            lo = mid
        else:
            hi = mid
    t = (r - tab_r[lo]) / (tab_r[hi] - tab_r[lo])
    return tab_v[lo] + t * (tab_v[hi] - tab_v[lo])


def pair_energies(const double[:, :, ::1] paths, int n_legs, int M, double dt,
                  int kind, double eta, double R,
                  const double[::1] tab_r, const double[::1] tab_v,
                  double[:, :, ::1] out):
    """Fill ``out[s, i, j]`` with the trapezoid leg-pair energy for every sample."""
    cdef Py_ssize_t n = paths.shape[0]
    cdef Py_ssize_t d = paths.shape[2]
    cdef Py_ssize_t s, i, j, t, c, a, b
    cdef double R2 = R * R
    # margin keeps pruning exact when the box gap and R agree to the last ulp
    cdef double prune = R * (1.0 + 1e-9)
    cdef double acc, r2, diff, w, gap
    cdef bint far
    cdef double[:, :, ::1] lo_box
    cdef double[:, :, ::1] hi_box
    import numpy as np
    lo_box = np.empty((n, n_legs, d))
    hi_box = np.empty((n, n_legs, d))
    with nogil:
        for s in range(n):
            for i in range(n_legs):
                for c in range(d):
                    lo_box[s, i, c] = paths[s, i * M, c]
                    hi_box[s, i, c] = paths[s, i * M, c]
                for t in range(1, M + 1):
                    for c in range(d):
                        if paths[s, i * M + t, c] < lo_box[s, i, c]:
                            lo_box[s, i, c] = paths[s, i * M + t, c]
                        if paths[s, i * M + t, c] > hi_box[s, i, c]:
                            hi_box[s, i, c] = paths[s, i * M + t, c]
            for i in range(n_legs):
                out[s, i, i] = 0.0
                for j in range(i + 1, n_legs):
                    far = False
                    for c in range(d):
                        gap = lo_box[s, j, c] - hi_box[s, i, c]
                        if lo_box[s, i, c] - hi_box[s, j, c] > gap:
                            gap = lo_box[s, i, c] - hi_box[s, j, c]
                        if gap > prune:
                            far = True
                            break
                    acc = 0.0
                    if not far:
                        a = i * M
                        b = j * M
                        for t in range(M + 1):
                            r2 = 0.0
                            for c in range(d):
                                diff = paths[s, a + t, c] - paths[s, b + t, c]
                                r2 = r2 + diff * diff
                            w = dt
                            if t == 0 or t == M:
                                w = 0.5 * dt
                            acc = acc + w * _v(r2, kind, eta, R, R2, tab_r, tab_v)
                    out[s, i, j] = acc
                    out[s, j, i] = acc


def signed_graph_sums(const double[:, ::1] u_edges, const long long[::1] masks,
                      const int[::1] group, double[:, ::1] out):
    """``out[s, group[g]] += prod_{e in masks[g]} (-u_edges[s, e])``, masks visited in order.

    Factors are multiplied from the highest set bit down, matching the subset
    recursion of the fallback.
    """
    cdef Py_ssize_t n = u_edges.shape[0]
    cdef Py_ssize_t E = u_edges.shape[1]
    cdef Py_ssize_t G = masks.shape[0]
    cdef Py_ssize_t s, g, e
    cdef long long m
    cdef double prod
    with nogil:
        for s in range(n):
            for g in range(G):
                m = masks[g]
                prod = 1.0
                for e in range(E - 1, -1, -1):
                    if (m >> e) & 1:
                        prod = prod * (-u_edges[s, e])
                out[s, group[g]] = out[s, group[g]] + prod


def sample_partitions(const double[:, ::1] cdf, const double[:, ::1] u, long long[:, ::1] out):
    """Sequential cycle removal.

    ``cdf[m, k-1]`` is the probability that the cycle through the largest of
    ``m`` remaining elements has length ``<= k``.  ``out[s, k]`` counts cycles of
    length ``k``.
    """
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t N = u.shape[1]
    cdef Py_ssize_t s, t, lo, hi, mid, m, k
    cdef double x
    with nogil:
        for s in range(n):
            m = N
            t = 0
            while m > 0:
                x = u[s, t]
                t += 1
                lo = 0
                hi = m - 1
                while lo < hi:
                    mid = (lo + hi) >> 1
                    if cdf[m, mid] > x:
                        hi = mid
                    else:
                        lo = mid + 1
                k = lo + 1
                out[s, k] += 1
                m -= k
