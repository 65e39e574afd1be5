"""Independent brute-force references used by the unit and acceptance tests.

Nothing here calls the package's solvers; each routine enumerates the
search space directly with numpy.
"""

import itertools

import numpy as np

from uavudn.optimizers import GameSpec


# --- games -----------------------------------------------------------------

def priced_game(seed, players=3):
    """Random power game with utility log2(1 + SINR_i) - c_i p_i.

    Cross gains are kept well below direct gains so best responses contract.
    """
    rng = np.random.default_rng(seed)
    direct = rng.uniform(0.5, 1.5, players)
    cross = rng.uniform(0.0, 0.05, (players, players))
    np.fill_diagonal(cross, 0.0)
    price = rng.uniform(0.2, 1.0, players)
    pmax = rng.uniform(1.0, 5.0, players)
    noise = 0.01

    def utility(i, p):
        interference = noise + cross[i] @ p
        return np.log2(1.0 + direct[i] * p[i] / interference) - price[i] * p[i]

    def closed_form_br(i, p):
        interference = noise + cross[i] @ p
        return float(np.clip(1.0 / (price[i] * np.log(2.0)) - interference / direct[i],
                             0.0, pmax[i]))

    return GameSpec(pmax, utility), closed_form_br


def grid_nash_points(game, points):
    """All pure Nash equilibria of a 2-player game restricted to a grid."""
    g0 = np.linspace(0.0, game.power_max[0], points)
    g1 = np.linspace(0.0, game.power_max[1], points)
    u0 = np.array([[game.utility(0, np.array([a, b])) for b in g1] for a in g0])
    u1 = np.array([[game.utility(1, np.array([a, b])) for b in g1] for a in g0])
    best0 = u0 >= u0.max(axis=0, keepdims=True) - 1e-15
    best1 = u1 >= u1.max(axis=1, keepdims=True) - 1e-15
    idx = np.argwhere(best0 & best1)
    return [(g0[i], g1[j]) for i, j in idx]


# --- flying base station ---------------------------------------------------

def bs_exhaustive(inst, cfg, height_levels=64, power_levels=16):
    """Best feasible throughput over heights x every power lattice point.

    Returns ``(value, height, powers)``; value is ``-inf`` when nothing is
    feasible.
    """
    caps = inst.power_caps(cfg)
    grids = [np.linspace(0.0, c, power_levels) for c in caps]
    P = np.array(list(itertools.product(*grids)))
    noise = cfg.channel.noise_power
    best = (-np.inf, None, None)
    for h in np.linspace(cfg.h_min, cfg.h_max, height_levels):
        G = inst.gain_matrix(h, cfg.channel)
        rx = noise + P @ G.T
        sig = P * np.diag(G)
        sinr = sig / (rx - sig)
        rate = np.sum(np.log2(1.0 + sinr), axis=1)
        rate[sinr[:, 0] < cfg.sinr_threshold * (1 - 1e-9)] = -np.inf
        k = int(np.argmax(rate))
        if rate[k] > best[0]:
            best = (float(rate[k]), float(h), P[k])
    return best


# --- relay -----------------------------------------------------------------

def relay_exhaustive(cfg):
    """Best delivered-data plan over every lattice position and power sequence.

    Positions come from ``cfg.positions_lattice()`` subject to the per-slot
    step cap; source and relay powers from ``power_levels`` evenly spaced
    levels each. Relay rates are cut back to the buffered backlog, so every
    enumerated allocation maps to its best causal schedule.
    """
    lat = cfg.positions_lattice()
    n = cfg.slots
    ps = np.linspace(0.0, cfg.source_power_max, cfg.power_levels)
    pr = np.linspace(0.0, cfg.relay_power_max, cfg.power_levels)
    combos = np.array(list(itertools.product(range(cfg.power_levels), repeat=n)))
    c = cfg.channel
    h2 = cfg.altitude ** 2
    best = 0.0
    for xs in itertools.product(lat, repeat=n):
        xs = np.array(xs)
        if np.any(np.abs(np.diff(xs)) > cfg.step_max * (1 + 1e-9) + 1e-9):
            continue
        g_sr = c.beta0 / (c.noise_power * (h2 + xs ** 2))
        g_rd = c.beta0 / (c.noise_power * (h2 + (cfg.separation - xs) ** 2))
        r_sr = np.log2(1.0 + ps[combos] * g_sr)
        r_rd = np.log2(1.0 + pr[combos] * g_rd)
        # Greedy forwarding, written as an explicit buffer recursion.
        backlog = np.zeros((r_sr.shape[0], r_rd.shape[0]))
        sent = np.zeros_like(backlog)
        for s in range(n):
            out = np.minimum(r_rd[None, :, s], backlog)
            sent += out
            backlog += r_sr[:, None, s] - out
        best = max(best, float(sent.max()) / n)
    return best
