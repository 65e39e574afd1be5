"""UAV flying base station sharing spectrum with D2D pairs.

A UAV hovers over the area midpoint and serves one ground user whose SINR
must reach ``sinr_threshold``. D2D pairs drawn from a Poisson process reuse
the band. Height and every link's power are tuned to maximize the sum of
spectral efficiencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import _backend
from ..channel import ChannelParams, db_to_linear
from ..errors import InvalidParameterError
from ..geometry import AreaSpec, sample_ppp
from ..seeding import child_seed

COLUMNS = ("scenario", "lambda", "height_m", "mean_tput_bpshz", "stderr",
           "outage_frac", "trials", "seed")

# Ground links shorter than the 1 m reference distance are clamped to it.
MIN_GROUND_DISTANCE = 1.0
# Relative slack when checking the user SINR against the threshold.
SINR_RTOL = 1e-9


@dataclass(frozen=True)
class BsConfig:
    area: AreaSpec = field(default_factory=AreaSpec)
    d2d_density: float = 1e-5
    d2d_max_distance: float = 30.0
    sinr_threshold: float = db_to_linear(5.0)
    uav_power_max: float = 5.0
    d2d_power_max: float = 0.1
    h_min: float = 50.0
    h_max: float = 1000.0
    height_levels: int = 64
    power_levels: int = 16
    max_sweeps: int = 20
    # Horizontal distance of the UAV user from the midpoint. None (default)
    # draws the user uniformly over the area.
    user_distance: float | None = None
    channel: ChannelParams = field(default_factory=ChannelParams)
    trials: int = 200
    seed: int = 0

    def __post_init__(self):
        if not self.sinr_threshold > 0:
            raise InvalidParameterError("sinr_threshold must be > 0")
        if not self.d2d_density >= 0:
            raise InvalidParameterError("d2d_density must be >= 0")
        if not self.d2d_max_distance > MIN_GROUND_DISTANCE:
            raise InvalidParameterError("d2d_max_distance must exceed 1 m")
        if not (self.uav_power_max > 0 and self.d2d_power_max > 0):
            raise InvalidParameterError("power caps must be > 0")
        if not 0 < self.h_min <= self.h_max:
            raise InvalidParameterError("need 0 < h_min <= h_max")
        if self.height_levels < 1 or self.power_levels < 2:
            raise InvalidParameterError("need height_levels >= 1 and power_levels >= 2")
        if self.user_distance is not None and not (
                0 <= self.user_distance <= min(self.area.width, self.area.height) / 2):
            raise InvalidParameterError("user_distance must keep the user inside the area")
        if self.trials < 1:
            raise InvalidParameterError("trials must be >= 1")

    def heights(self) -> np.ndarray:
        return np.linspace(self.h_min, self.h_max, self.height_levels)


@dataclass(frozen=True, eq=False)
class BsInstance:
    """One channel realization.

    ``ground_gain[i, j]`` is the realized Rayleigh gain from D2D transmitter
    ``j`` to receiver ``i`` (receiver 0 is the UAV user, ``i >= 1`` the D2D
    receiver of pair ``i - 1``).
    """

    uav_xy: np.ndarray
    user: np.ndarray
    d2d_tx: np.ndarray
    d2d_rx: np.ndarray
    ground_gain: np.ndarray

    @property
    def n_pairs(self) -> int:
        return self.d2d_tx.shape[0]

    @property
    def receivers(self) -> np.ndarray:
        return np.vstack([self.user[None, :], self.d2d_rx])

    def gain_matrix(self, height: float, channel: ChannelParams) -> np.ndarray:
        """Full ``(K+1, K+1)`` gain matrix with the UAV as transmitter 0."""
        rx = self.receivers
        r2 = np.sum((rx[:, :2] - self.uav_xy) ** 2, axis=1)
        G = np.empty((self.n_pairs + 1, self.n_pairs + 1))
        G[:, 0] = channel.beta0 / (height * height + r2)
        G[:, 1:] = self.ground_gain
        return G

    def power_caps(self, cfg: BsConfig) -> np.ndarray:
        return np.concatenate([[cfg.uav_power_max], np.full(self.n_pairs, cfg.d2d_power_max)])


def draw_instance(cfg: BsConfig, seed, n_pairs: int | None = None) -> BsInstance:
    """Random instance. ``n_pairs`` fixes the pair count instead of drawing it
    from the Poisson process (transmitters are then uniform over the area)."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    area = cfg.area
    if n_pairs is None:
        tx = sample_ppp(area, cfg.d2d_density, rng).positions
    else:
        if n_pairs < 0:
            raise InvalidParameterError("n_pairs must be >= 0")
        xy = rng.uniform(size=(n_pairs, 2)) * np.array([area.width, area.height])
        tx = np.column_stack([xy, np.zeros(n_pairs)])
    k = tx.shape[0]
    # Receiver uniform over the disk (radius floored at the reference distance).
    radius = np.sqrt(rng.uniform(MIN_GROUND_DISTANCE ** 2, cfg.d2d_max_distance ** 2, size=k))
    angle = rng.uniform(0.0, 2.0 * math.pi, size=k)
    rx = tx.copy()
    rx[:, 0] = np.clip(tx[:, 0] + radius * np.cos(angle), 0.0, area.width)
    rx[:, 1] = np.clip(tx[:, 1] + radius * np.sin(angle), 0.0, area.height)
    cx, cy = area.center
    if cfg.user_distance is None:
        user = np.array([rng.uniform(0.0, area.width), rng.uniform(0.0, area.height), 0.0])
    else:
        a = rng.uniform(0.0, 2.0 * math.pi)
        user = np.array([cx + cfg.user_distance * math.cos(a),
                         cy + cfg.user_distance * math.sin(a), 0.0])
    receivers = np.vstack([user[None, :], rx])
    d = np.sqrt(np.sum((receivers[:, None, :2] - tx[None, :, :2]) ** 2, axis=2))
    d = np.maximum(d, MIN_GROUND_DISTANCE)
    fade = rng.exponential(1.0, size=d.shape)
    gains = cfg.channel.beta0 * d ** (-cfg.channel.alpha_d2d) * fade
    return BsInstance(np.array([cx, cy]), user, tx, rx, gains)


def link_sinrs(inst: BsInstance, height: float, powers, channel: ChannelParams) -> np.ndarray:
    p = np.asarray(powers, dtype=float)
    G = inst.gain_matrix(height, channel)
    sig = np.diag(G) * p
    interf = channel.noise_power + G @ p - sig
    return sig / interf


def sum_throughput(inst: BsInstance, height: float, powers, cfg: BsConfig):
    """Sum spectral efficiency and whether the UAV user meets its SINR target."""
    p = np.asarray(powers, dtype=float)
    caps = inst.power_caps(cfg)
    if p.shape != caps.shape:
        raise InvalidParameterError(f"expected {caps.size} powers, got {p.size}")
    if np.any(p < 0) or np.any(p > caps * (1 + 1e-12)):
        raise InvalidParameterError("powers must lie within [0, cap]")
    s = link_sinrs(inst, height, p, cfg.channel)
    total = float(np.sum(np.log2(1.0 + s)))
    return total, bool(s[0] >= cfg.sinr_threshold * (1.0 - SINR_RTOL))


@dataclass(frozen=True)
class BsSolution:
    height: float
    powers: np.ndarray
    throughput: float
    feasible: bool


def solve_powers(inst: BsInstance, height: float, cfg: BsConfig):
    """Best power vector at a fixed height: ``(powers, throughput, feasible)``."""
    G = inst.gain_matrix(height, cfg.channel)
    p, v, ok, _ = _backend.kernels.bs_power_solve(
        G, inst.power_caps(cfg), cfg.channel.noise_power, cfg.sinr_threshold,
        cfg.power_levels, cfg.max_sweeps, 1e-12)
    return np.asarray(p), float(v), bool(ok)


def height_profile(inst: BsInstance, cfg: BsConfig):
    """Optimized throughput and feasibility at every lattice height."""
    hs = cfg.heights()
    tput = np.zeros(hs.size)
    feas = np.zeros(hs.size, dtype=bool)
    for k, h in enumerate(hs):
        _, v, ok = solve_powers(inst, h, cfg)
        tput[k] = v if ok else 0.0
        feas[k] = ok
    return tput, feas


def optimize_bs(inst: BsInstance, cfg: BsConfig) -> BsSolution:
    """Grid over heights, block-coordinate power control at each height.

    Infeasible heights are skipped; when none is feasible the returned
    solution has ``feasible=False`` and ``height=nan``.
    """
    best = None
    for h in cfg.heights():
        p, v, ok = solve_powers(inst, h, cfg)
        if ok and (best is None or v > best.throughput):
            best = BsSolution(float(h), p, v, True)
    if best is None:
        return BsSolution(math.nan, np.zeros(inst.n_pairs + 1), 0.0, False)
    return best


def sweep_heights(cfg: BsConfig, densities=None):
    """Monte Carlo height sweep.

    Trial ``t`` uses the same seed for every density, so curves for different
    densities share their random streams. Outage trials count as zero
    throughput. Returns a list of row dicts with the ``COLUMNS`` schema.
    """
    densities = (cfg.d2d_density,) if densities is None else tuple(densities)
    rows = []
    for lam in densities:
        c = _replace(cfg, d2d_density=lam)
        profiles = [height_profile(draw_instance(c, child_seed(cfg.seed, 0, t)), c)
                    for t in range(cfg.trials)]
        rows.extend(aggregate(c, profiles, cfg.seed))
    return rows


def aggregate(cfg: BsConfig, profiles, seed) -> list[dict]:
    tput = np.array([p[0] for p in profiles])
    feas = np.array([p[1] for p in profiles])
    n = tput.shape[0]
    mean = tput.mean(axis=0)
    stderr = tput.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros_like(mean)
    outage = 1.0 - feas.mean(axis=0)
    return [{"scenario": "bs", "lambda": cfg.d2d_density, "height_m": float(h),
             "mean_tput_bpshz": float(m), "stderr": float(s), "outage_frac": float(o),
             "trials": n, "seed": seed}
            for h, m, s, o in zip(cfg.heights(), mean, stderr, outage)]


def run_trial(cfg: BsConfig, seed):
    return height_profile(draw_instance(cfg, seed), cfg)


def _replace(cfg, **kw):
    from dataclasses import replace
    return replace(cfg, **kw)
