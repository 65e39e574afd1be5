# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Semantics mirror ``_fallback.py`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log2, INFINITY

cnp.import_array()

cdef double FEAS_RTOL = 1e-12


def harvest_energy(const double[:, ::1] q, const double[::1] p, const double[:, ::1] w,
                   double beta0, double eta, double dt):
    cdef Py_ssize_t K = w.shape[0], S = q.shape[0], k, n
    cdef double acc, dx, dy, dz
    out = np.empty(K)
    cdef double[::1] o = out
    cdef double scale = eta * beta0 * dt
    for k in range(K):
        acc = 0.0
        for n in range(S):
            dx = q[n, 0] - w[k, 0]
            dy = q[n, 1] - w[k, 1]
            dz = q[n, 2] - w[k, 2]
            acc += p[n] / (dx * dx + dy * dy + dz * dz)
        o[k] = scale * acc
    return out


cdef double _sum_rate(const double[:, ::1] G, double[::1] p, double noise) nogil:
    cdef Py_ssize_t n = p.shape[0], i, j
    cdef double total = 0.0, interf, sig
    for i in range(n):
        interf = noise
        for j in range(n):
            if j != i:
                interf += G[i, j] * p[j]
        sig = G[i, i] * p[i]
        total += log2(1.0 + sig / interf)
    return total


cdef double _floor0(const double[:, ::1] G, double[::1] p, double noise, double gamma) nogil:
    cdef Py_ssize_t j
    cdef double acc = 0.0
    for j in range(1, p.shape[0]):
        acc += G[0, j] * p[j]
    return gamma * (noise + acc) / G[0, 0]


cdef void _drop_interferers(const double[:, ::1] G, double[::1] p, double noise, double gamma,
                            double cap0) nogil:
    # Silence the strongest D2D interferers at the UAV user until the UAV's
    # minimum feasible power fits under its cap.
    cdef Py_ssize_t n = p.shape[0], j, worst
    cdef double w, wmax
    while _floor0(G, p, noise, gamma) > cap0:
        worst = -1
        wmax = -1.0
        for j in range(1, n):
            if p[j] > 0.0:
                w = G[0, j] * p[j]
                if w > wmax:
                    wmax = w
                    worst = j
        if worst < 0:
            return
        p[worst] = 0.0


def bs_power_solve(G_in, pmax_in, double noise, double gamma, int levels, int max_sweeps,
                   double tol):
    cdef const double[:, ::1] G = np.ascontiguousarray(G_in, dtype=np.float64)
    cdef const double[::1] pmax = np.ascontiguousarray(pmax_in, dtype=np.float64)
    cdef Py_ssize_t n = pmax.shape[0], i, c, s, start, variant
    cdef double cap0 = pmax[0] * (1.0 + FEAS_RTOL)
    cdef double v, v_sweep, val, best_val, floor, step, lat, best_v = -INFINITY
    cdef int sweeps, used = 0
    cdef Py_ssize_t best_c
    p_arr = np.empty(n)
    q_arr = np.empty(n)
    cand_arr = np.empty(n)
    best_arr = np.zeros(n)
    cdef double[::1] p = p_arr
    cdef double[::1] q = q_arr
    cdef double[::1] cand = cand_arr
    cdef double[::1] bestp = best_arr
    cdef bint found = False

    for start in range(2):
        if start == 0:
            p[0] = pmax[0]
            for i in range(1, n):
                p[i] = 0.0
        else:
            p[0] = 0.0
            for i in range(1, n):
                p[i] = pmax[i]
            _drop_interferers(G, p, noise, gamma, cap0)
        floor = _floor0(G, p, noise, gamma)
        if floor > cap0:
            continue
        if floor > p[0]:
            p[0] = floor
        v = _sum_rate(G, p, noise)
        sweeps = 0
        for s in range(max_sweeps):
            sweeps += 1
            v_sweep = v
            for i in range(n):
                best_val = -INFINITY
                best_c = -1
                step = pmax[i] / (levels - 1) if levels > 1 else 0.0
                for c in range(levels):
                    lat = c * step if c < levels - 1 else pmax[i]
                    # D2D levels are tried with the UAV power kept (raised if
                    # needed) and with it reset to its exact minimum.
                    for variant in range(1 if i == 0 else 2):
                        q[:] = p
                        q[i] = lat
                        floor = _floor0(G, q, noise, gamma)
                        if floor > cap0:
                            continue
                        if i == 0:
                            q[0] = lat if lat > floor else floor
                        elif variant == 1 or floor > q[0]:
                            q[0] = floor
                        if q[0] > pmax[0]:
                            q[0] = pmax[0]
                        val = _sum_rate(G, q, noise)
                        if val > best_val:
                            best_val = val
                            best_c = c
                            cand[:] = q
                if best_c >= 0 and best_val > v + tol:
                    v = best_val
                    p[:] = cand
            if v <= v_sweep + tol:
                break
        if sweeps > used:
            used = sweeps
        if v > best_v:
            best_v = v
            bestp[:] = p
            found = True
    if not found:
        return np.zeros(n), 0.0, False, used
    return best_arr, _sum_rate(G, bestp, noise), True, used


def dp_forward(reward_in, int window):
    cdef const double[:, ::1] reward = np.ascontiguousarray(reward_in, dtype=np.float64)
    cdef Py_ssize_t N = reward.shape[0], M = reward.shape[1], n, m, src, lo, hi
    value_arr = np.empty((N, M))
    back_arr = np.zeros((N, M), dtype=np.int64)
    cdef double[:, ::1] value = value_arr
    cdef cnp.int64_t[:, ::1] back = back_arr
    cdef double best
    cdef cnp.int64_t arg
    for m in range(M):
        value[0, m] = reward[0, m]
    for n in range(1, N):
        for m in range(M):
            lo = m - window
            if lo < 0:
                lo = 0
            hi = m + window
            if hi > M - 1:
                hi = M - 1
            best = -INFINITY
            arg = lo
            for src in range(lo, hi + 1):
                if value[n - 1, src] > best:
                    best = value[n - 1, src]
                    arg = src
            value[n, m] = best + reward[n, m]
            back[n, m] = arg
    return value_arr, back_arr
