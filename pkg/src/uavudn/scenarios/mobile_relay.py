"""Full-duplex UAV relay between a source at x = 0 and a destination at x = L.

The relay decodes and buffers. Data received in slot ``n`` can be forwarded
from slot ``n + 1`` on, so the cumulative forwarded amount may never exceed
what arrived in earlier slots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .. import _backend
from ..channel import ChannelParams
from ..energy import PropulsionParams, flight_energy
from ..errors import InfeasiblePlanError, InvalidParameterError
from ..geometry import Trajectory
from ..optimizers import Block, block_coordinate_max

COLUMNS = ("scenario", "V_mps", "T_s", "N_slots", "tput_bpshz", "static_tput_bpshz",
           "energy_J", "ee_bits_per_hz_per_J")

# Slack for the causality test, relative to the amount of data in flight.
CAUSALITY_RTOL = 1e-9
MIXTURE_STEPS = 16
LOCAL_SEARCH_SWEEPS = 50


@dataclass(frozen=True)
class RelayConfig:
    separation: float = 2000.0
    altitude: float = 100.0
    horizon: float = 200.0
    speed_max: float = 40.0
    slots: int = 100
    source_power_max: float = 5.0
    relay_power_max: float = 5.0
    position_levels: int = 101
    power_levels: int = 16
    max_sweeps: int = 10
    channel: ChannelParams = field(default_factory=ChannelParams)
    propulsion: PropulsionParams = field(default_factory=PropulsionParams)

    def __post_init__(self):
        if not (self.separation > 0 and self.altitude > 0 and self.horizon > 0):
            raise InvalidParameterError("separation, altitude and horizon must be > 0")
        # V = 0 is allowed and pins the relay in place.
        if not self.speed_max >= 0:
            raise InvalidParameterError("speed_max must be >= 0")
        if self.slots < 2:
            raise InvalidParameterError("need at least 2 slots")
        if not (self.source_power_max >= 0 and self.relay_power_max >= 0):
            raise InvalidParameterError("power caps must be >= 0")
        if self.position_levels < 2 or self.power_levels < 2:
            raise InvalidParameterError("lattices need at least 2 points")

    @property
    def slot_duration(self) -> float:
        return self.horizon / self.slots

    @property
    def step_max(self) -> float:
        """Largest horizontal move allowed within one slot."""
        return self.speed_max * self.slot_duration

    def positions_lattice(self) -> np.ndarray:
        return np.linspace(0.0, self.separation, self.position_levels)


@dataclass(frozen=True, eq=False)
class RelayPlan:
    x: np.ndarray
    p_s: np.ndarray
    p_r: np.ndarray

    def __post_init__(self):
        arrs = [np.array(a, dtype=float).reshape(-1) for a in (self.x, self.p_s, self.p_r)]
        if not arrs[0].shape == arrs[1].shape == arrs[2].shape:
            raise InvalidParameterError("x, p_s and p_r must have one entry per slot")
        for name, a in zip(("x", "p_s", "p_r"), arrs):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def slots(self) -> int:
        return self.x.shape[0]


def _gains(x, cfg: RelayConfig):
    """Per-watt SNR from the source and to the destination at positions ``x``."""
    c = cfg.channel
    h2 = cfg.altitude ** 2
    x = np.asarray(x, dtype=float)
    g_sr = c.beta0 / (c.noise_power * (h2 + x * x))
    g_rd = c.beta0 / (c.noise_power * (h2 + (cfg.separation - x) ** 2))
    return g_sr, g_rd


def check_plan(plan: RelayPlan, cfg: RelayConfig):
    if plan.slots != cfg.slots:
        raise InvalidParameterError(f"plan has {plan.slots} slots, config {cfg.slots}")
    if np.any(plan.x < -1e-9) or np.any(plan.x > cfg.separation + 1e-9):
        raise InvalidParameterError("relay positions must lie in [0, L]")
    if np.any(np.abs(np.diff(plan.x)) > cfg.step_max * (1 + 1e-9) + 1e-9):
        raise InvalidParameterError("plan exceeds the speed cap")
    for name, p, cap in (("p_s", plan.p_s, cfg.source_power_max),
                         ("p_r", plan.p_r, cfg.relay_power_max)):
        if np.any(p < 0) or np.any(p > cap * (1 + 1e-12)):
            raise InvalidParameterError(f"{name} outside [0, {cap}]")


def relay_rates(plan: RelayPlan, cfg: RelayConfig):
    """Per-slot source-relay and relay-destination spectral efficiencies."""
    check_plan(plan, cfg)
    g_sr, g_rd = _gains(plan.x, cfg)
    return np.log2(1.0 + plan.p_s * g_sr), np.log2(1.0 + plan.p_r * g_rd)


def causality_violation(r_sr, r_rd):
    """First slot where forwarded data exceeds data received earlier, else None."""
    received = np.concatenate([[0.0], np.cumsum(r_sr)[:-1]])
    sent = np.cumsum(r_rd)
    slack = CAUSALITY_RTOL * np.maximum(1.0, received)
    bad = np.nonzero(sent > received + slack)[0]
    return int(bad[0]) if bad.size else None


def throughput(plan: RelayPlan, cfg: RelayConfig) -> float:
    """Average delivered spectral efficiency; raises on a causality violation."""
    r_sr, r_rd = relay_rates(plan, cfg)
    slot = causality_violation(r_sr, r_rd)
    if slot is not None:
        raise InfeasiblePlanError(slot)
    return float(np.sum(r_rd) / plan.slots)


def forward_greedily(r_sr, r_cap):
    """Relay rates when each slot forwards as much backlog as its cap allows."""
    out = np.empty_like(r_cap)
    backlog = 0.0
    for n in range(r_cap.shape[0]):
        out[n] = min(r_cap[n], backlog)
        backlog += r_sr[n] - out[n]
    return out


def delivered(r_sr, r_cap):
    """Total delivered data under greedy forwarding.

    Equals ``min_j (sum_{i<j} r_sr[i] + sum_{i>j} r_cap[i])``, which is what
    this vectorized form computes. Works on stacked candidates along axis 0.
    """
    r_sr = np.atleast_2d(r_sr)
    r_cap = np.atleast_2d(r_cap)
    before = np.cumsum(r_sr, axis=1) - r_sr
    after = np.sum(r_cap, axis=1, keepdims=True) - np.cumsum(r_cap, axis=1)
    return np.min(before + after, axis=1)


def project_plan(x, p_s, p_r_alloc, cfg: RelayConfig) -> RelayPlan:
    """Cap every relay slot at its buffered backlog by lowering ``p_r``."""
    g_sr, g_rd = _gains(x, cfg)
    r_sr = np.log2(1.0 + p_s * g_sr)
    r_cap = np.log2(1.0 + p_r_alloc * g_rd)
    r_rd = forward_greedily(r_sr, r_cap)
    p_r = np.where(r_rd < r_cap, np.expm1(r_rd * math.log(2.0)) / g_rd, p_r_alloc)
    p_r = np.minimum(np.maximum(p_r, 0.0), cfg.relay_power_max)
    return RelayPlan(x, p_s, p_r)


def _objective(cfg: RelayConfig):
    n = cfg.slots

    def f(v):
        x, p_s, p_r = v[:n], v[n:2 * n], v[2 * n:]
        g_sr, g_rd = _gains(x, cfg)
        return float(delivered(np.log2(1.0 + p_s * g_sr), np.log2(1.0 + p_r * g_rd))[0] / n)

    return f


def _power_block(cfg: RelayConfig):
    """Per-slot lattice search over source then relay power.

    Each slot's level is chosen against the rest of the plan; ties go to the
    larger power, which never shrinks the buffer.
    """
    n = cfg.slots

    def solve(f, current, full):
        p = current.copy()
        levels = [np.linspace(0.0, cfg.source_power_max, cfg.power_levels),
                  np.linspace(0.0, cfg.relay_power_max, cfg.power_levels)]
        g_sr, g_rd = _gains(full[:n], cfg)
        for k in range(2 * n):
            lv = levels[k // n][::-1]
            cand = np.tile(p, (lv.size, 1))
            cand[:, k] = lv
            r_sr = np.log2(1.0 + cand[:, :n] * g_sr)
            r_cap = np.log2(1.0 + cand[:, n:] * g_rd)
            vals = delivered(r_sr, r_cap)
            p = cand[int(np.argmax(vals))]
        return p

    return solve


def switch_plans(r_sr_lat, r_rd_lat, window):
    """One DP path per switch slot ``j``.

    Path ``j`` maximizes source-relay rate before ``j`` plus relay-destination
    rate after ``j``; ``r_*_lat`` are ``(N, M)`` rate tables over the position
    lattice. Returns lattice indices, shape ``(N, N)``.
    """
    N, M = r_sr_lat.shape
    paths = np.empty((N, N), dtype=np.int64)
    slot = np.arange(N)[:, None]
    for j in range(N):
        reward = np.where(slot < j, r_sr_lat, np.where(slot > j, r_rd_lat, 0.0))
        value, back = _backend.kernels.dp_forward(np.ascontiguousarray(reward), window)
        m = int(np.argmax(value[-1]))
        for n in range(N - 1, -1, -1):
            paths[j, n] = m
            m = int(back[n, m])
    return paths


def _trajectory_block(cfg: RelayConfig, local_search: bool = True):
    n = cfg.slots
    lat = cfg.positions_lattice()
    dx = lat[1] - lat[0]
    window = int(math.floor(cfg.step_max / dx + 1e-9))

    def score(xs, p_s, p_r):
        g_sr, g_rd = _gains(xs, cfg)
        return delivered(np.log2(1.0 + p_s * g_sr), np.log2(1.0 + p_r * g_rd))

    def solve(f, current, full):
        p_s, p_r = full[n:2 * n], full[2 * n:]
        g_sr, g_rd = _gains(lat, cfg)
        r_sr_lat = np.log2(1.0 + p_s[:, None] * g_sr[None, :])
        r_rd_lat = np.log2(1.0 + p_r[:, None] * g_rd[None, :])
        paths = switch_plans(r_sr_lat, r_rd_lat, window)
        vals = score(lat[paths], p_s, p_r)
        j = int(np.argmax(vals))
        best_x, best_v = lat[paths[j]], vals[j]
        # Blends of neighbouring switch plans stay within the speed cap.
        theta = np.linspace(0.0, 1.0, MIXTURE_STEPS + 1)[1:-1, None]
        for a in range(n - 1):
            mix = (1 - theta) * lat[paths[a]] + theta * lat[paths[a + 1]]
            mv = score(mix, p_s, p_r)
            k = int(np.argmax(mv))
            if mv[k] > best_v:
                best_x, best_v = mix[k], mv[k]
        if local_search:
            best_x, best_v = _local_search(best_x, best_v, lat, window, score, p_s, p_r, cfg)
        cur_v = score(current, p_s, p_r)[0]
        return best_x if best_v > cur_v else current

    return solve


def _local_search(x, v, lat, window, score, p_s, p_r, cfg):
    """Single-slot lattice moves, kept only when they raise delivered data."""
    n = x.shape[0]
    dx = lat[1] - lat[0]
    step = cfg.step_max * (1 + 1e-12)
    for _ in range(LOCAL_SEARCH_SWEEPS):
        improved = False
        for s in range(n):
            centre = int(round(x[s] / dx))
            lo, hi = max(centre - window - 1, 0), min(centre + window + 1, lat.size - 1)
            opts = lat[lo:hi + 1]
            ok = np.ones(opts.size, dtype=bool)
            if s > 0:
                ok &= np.abs(opts - x[s - 1]) <= step
            if s < n - 1:
                ok &= np.abs(opts - x[s + 1]) <= step
            opts = opts[ok]
            if opts.size == 0:
                continue
            cand = np.tile(x, (opts.size, 1))
            cand[:, s] = opts
            cv = score(cand, p_s, p_r)
            k = int(np.argmax(cv))
            if cv[k] > v + 1e-12:
                x, v, improved = cand[k], cv[k], True
        if not improved:
            break
    return x, v


def optimize_relay(cfg: RelayConfig, local_search: bool = True):
    """Alternate trajectory and power blocks from the static midpoint plan.

    Returns ``(plan, throughput, trace)``; ``trace`` is the non-decreasing
    per-sweep objective.
    """
    n = cfg.slots
    x0 = np.concatenate([np.full(n, cfg.separation / 2.0),
                         np.full(n, cfg.source_power_max), np.full(n, cfg.relay_power_max)])
    blocks = [Block(range(n, 3 * n), [0.0] * 2 * n,
                    [cfg.source_power_max] * n + [cfg.relay_power_max] * n,
                    solver=_power_block(cfg)),
              Block(range(n), [0.0] * n, [cfg.separation] * n,
                    solver=_trajectory_block(cfg, local_search))]
    v, trace = block_coordinate_max(_objective(cfg), x0, blocks, sweeps=cfg.max_sweeps,
                                    tolerance=1e-9)
    plan = project_plan(v[:n], v[n:2 * n], v[2 * n:], cfg)
    return plan, throughput(plan, cfg), trace


def static_baseline(cfg: RelayConfig):
    """Relay parked at ``L / 2`` with powers from the power block."""
    n = cfg.slots
    x = np.full(n, cfg.separation / 2.0)
    v = np.concatenate([x, np.full(n, cfg.source_power_max), np.full(n, cfg.relay_power_max)])
    p = _power_block(cfg)(_objective(cfg), v[n:].copy(), v)
    plan = project_plan(x, p[:n], p[n:], cfg)
    return plan, throughput(plan, cfg)


def plan_trajectory(plan: RelayPlan, cfg: RelayConfig) -> Trajectory:
    """Flight path of a plan. The final position is held for the last slot."""
    x = np.concatenate([plan.x, plan.x[-1:]])
    pos = np.column_stack([x, np.zeros_like(x), np.full_like(x, cfg.altitude)])
    times = np.arange(x.size) * cfg.slot_duration
    return Trajectory(times, pos, cfg.slot_duration)


def plan_energy(plan: RelayPlan, cfg: RelayConfig) -> float:
    return flight_energy(plan_trajectory(plan, cfg), cfg.propulsion)


def energy_efficiency(plan: RelayPlan, cfg: RelayConfig) -> float:
    """Delivered bits per Hz per joule of propulsion energy."""
    tput = throughput(plan, cfg)
    return cfg.horizon * tput * cfg.channel.bandwidth / plan_energy(plan, cfg)


def run_point(cfg: RelayConfig) -> dict:
    plan, tput, _ = optimize_relay(cfg)
    _, static = static_baseline(cfg)
    energy = plan_energy(plan, cfg)
    return {"scenario": "relay", "V_mps": cfg.speed_max, "T_s": cfg.horizon,
            "N_slots": cfg.slots, "tput_bpshz": tput, "static_tput_bpshz": static,
            "energy_J": energy,
            "ee_bits_per_hz_per_J": cfg.horizon * tput * cfg.channel.bandwidth / energy}


def with_horizon(cfg: RelayConfig, horizon: float) -> RelayConfig:
    """Change ``T`` keeping the slot length fixed."""
    slots = max(2, int(round(cfg.slots * horizon / cfg.horizon)))
    return replace(cfg, horizon=horizon, slots=slots)
