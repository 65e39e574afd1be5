"""Pure numpy implementations of the hot kernels.

Every function here has a compiled twin in ``_kernels.pyx`` with the same
signature and semantics. The compiled one is preferred when importable.
"""

import numpy as np

# Relative slack used when testing the UAV-user SINR constraint.
FEAS_RTOL = 1e-12


def harvest_energy(q, p, w, beta0, eta, dt):
    """Per-node harvested energy; ``q`` (S, 3) slot positions, ``w`` (K, 3) nodes."""
    d2 = np.sum((w[:, None, :] - q[None, :, :]) ** 2, axis=2)
    return eta * beta0 * dt * np.sum(p[None, :] / d2, axis=1)


def _sum_rate(G, p, noise):
    rx_total = noise + G @ p
    sig = np.diag(G) * p
    return float(np.sum(np.log2(1.0 + sig / (rx_total - sig))))


def _starts(G, pmax, noise, gamma):
    """Two initial points: UAV at cap with D2D silent, and D2D on with the UAV
    at its minimum feasible power (strongest interferers at the user switched
    off until that minimum fits under the cap)."""
    n = pmax.shape[0]
    a = np.zeros(n)
    a[0] = pmax[0]
    b = pmax.copy()
    b[0] = 0.0
    order = sorted(range(1, n), key=lambda j: (-G[0, j] * pmax[j], j))
    cap0 = pmax[0] * (1.0 + FEAS_RTOL)
    for j in order:
        if gamma * (noise + G[0, 1:] @ b[1:]) / G[0, 0] <= cap0:
            break
        b[j] = 0.0
    return [a, b]


def bs_power_solve(G, pmax, noise, gamma, levels, max_sweeps, tol):
    """Block-coordinate power control for one flying-BS height.

    ``G[i, j]`` is the gain from transmitter ``j`` to receiver ``i``; link 0 is
    the UAV serving its user, links 1.. are D2D pairs. The UAV-user SINR must
    reach ``gamma``: whenever a move would break it, the UAV power is raised to
    the smallest feasible value (the move is rejected if that exceeds the cap).

    Ties between the two starting points keep the first.

    Returns ``(powers, value, feasible, sweeps_used)``.
    """
    G = np.asarray(G, dtype=float)
    pmax = np.asarray(pmax, dtype=float)
    n = pmax.shape[0]
    g00 = G[0, 0]
    cap0 = pmax[0] * (1.0 + FEAS_RTOL)

    def p0_floor(p):
        return gamma * (noise + G[0, 1:] @ p[1:]) / g00

    best_p, best_v, used = None, -np.inf, 0
    for start in _starts(G, pmax, noise, gamma):
        p = start
        floor = p0_floor(p)
        if floor > cap0:
            continue
        p[0] = max(p[0], floor)
        v = _sum_rate(G, p, noise)
        sweeps = 0
        for _ in range(max_sweeps):
            sweeps += 1
            v_sweep = v
            for i in range(n):
                lattice = np.linspace(0.0, pmax[i], levels)
                if i == 0:
                    Q = np.tile(p, (levels, 1))
                    Q[:, 0] = lattice
                else:
                    # Each D2D level is tried twice: UAV power kept (raised if
                    # needed) and UAV power reset to its exact minimum.
                    Q = np.tile(p, (2 * levels, 1))
                    Q[:, i] = np.repeat(lattice, 2)
                floors = gamma * (noise + Q[:, 1:] @ G[0, 1:]) / g00
                ok = floors <= cap0
                if i == 0:
                    Q[:, 0] = np.maximum(lattice, floors)
                else:
                    Q[0::2, 0] = np.maximum(p[0], floors[0::2])
                    Q[1::2, 0] = floors[1::2]
                Q[:, 0] = np.minimum(Q[:, 0], pmax[0])
                rx_total = noise + Q @ G.T
                sig = Q * np.diag(G)
                vals = np.sum(np.log2(1.0 + sig / (rx_total - sig)), axis=1)
                vals[~ok] = -np.inf
                c = int(np.argmax(vals))
                if vals[c] > v + tol:
                    v = float(vals[c])
                    p = Q[c].copy()
            if v <= v_sweep + tol:
                break
        used = max(used, sweeps)
        if v > best_v:
            best_v, best_p = v, p
    if best_p is None:
        return np.zeros(n), 0.0, False, used
    return best_p, _sum_rate(G, best_p, noise), True, used


def dp_forward(reward, window):
    """Max-sum path DP over a position lattice.

    ``reward`` is (N, M); consecutive lattice indices may differ by at most
    ``window``. Returns ``(value, back)`` where ``value[n, m]`` is the best
    cumulative reward of a path ending at ``m`` in slot ``n`` and ``back[n, m]``
    the predecessor index (smallest index on ties).
    """
    reward = np.asarray(reward, dtype=float)
    N, M = reward.shape
    value = np.empty((N, M))
    back = np.zeros((N, M), dtype=np.int64)
    value[0] = reward[0]
    idx = np.arange(M)
    for n in range(1, N):
        prev = value[n - 1]
        best = np.full(M, -np.inf)
        arg = np.zeros(M, dtype=np.int64)
        for off in range(-window, window + 1):
            src = idx + off
            valid = (src >= 0) & (src < M)
            cand = np.full(M, -np.inf)
            cand[valid] = prev[src[valid]]
            better = cand > best
            best = np.where(better, cand, best)
            arg = np.where(better, src, arg)
        value[n] = best + reward[n]
        back[n] = arg
    return value, back
