"""Two-phase caching with a UAV cache that can follow its users.

Placement: every user stores one content drawn uniformly from ``1..N``.
Delivery: a request is served by the first tier that has the content, in the
order self, nearest D2D neighbour in range, UAV, base station.

Also holds the surveillance variant, where the UAV sweeps a sensor field,
buffers the readings and delivers them at a ground center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..channel import ChannelParams
from ..errors import InvalidParameterError
from ..geometry import AreaSpec, NodeSet
from ..seeding import child_seed

COLUMNS = ("scenario", "policy", "N", "U", "self_hit", "d2d_hit", "uav_hit", "bs_hit",
           "mean_delay_s", "seed")
TIERS = ("self", "d2d", "uav", "bs")
MOBILITY_KINDS = ("rwp", "cluster", "static")
POLICIES = ("tracking", "static")


@dataclass(frozen=True)
class CacheConfig:
    users: int = 200
    contents: int = 10
    popularity: str = "zipf"
    zipf_s: float = 1.0
    d2d_radius: float = 50.0
    area: AreaSpec = field(default_factory=AreaSpec)
    uav_altitude: float = 100.0
    uav_speed: float = 20.0
    uav_power: float = 5.0
    uav_cache_size: int = 1
    d2d_power: float = 0.1
    mobility: str = "cluster"
    speed_min: float = 1.0
    speed_max: float = 2.0
    pause: float = 0.0
    cluster_sigma: float = 60.0
    cluster_speed: float = 1.5
    duration: float = 600.0
    step: float = 1.0
    requests_per_user: int = 1
    payload_bits: float = 10e6
    bandwidth: float = 1e9
    delay_self: float = 0.0
    delay_d2d: float = 0.010
    delay_uav: float = 0.020
    delay_bs: float = 0.200
    channel: ChannelParams = field(default_factory=ChannelParams)

    def __post_init__(self):
        if self.contents < 1 or self.users < 1:
            raise InvalidParameterError("need at least one user and one content")
        if self.popularity not in ("uniform", "zipf"):
            raise InvalidParameterError("popularity must be 'uniform' or 'zipf'")
        if not self.zipf_s >= 0:
            raise InvalidParameterError("zipf_s must be >= 0")
        # A zero radius is accepted and disables the D2D tier.
        if not self.d2d_radius >= 0:
            raise InvalidParameterError("d2d_radius must be >= 0")
        if self.mobility not in MOBILITY_KINDS:
            raise InvalidParameterError(f"mobility must be one of {MOBILITY_KINDS}")
        if not 0 <= self.speed_min <= self.speed_max:
            raise InvalidParameterError("need 0 <= speed_min <= speed_max")
        if not (self.uav_altitude > 0 and self.uav_speed >= 0):
            raise InvalidParameterError("uav_altitude must be > 0 and uav_speed >= 0")
        if not (self.duration > 0 and self.step > 0):
            raise InvalidParameterError("duration and step must be > 0")
        if self.requests_per_user < 1:
            raise InvalidParameterError("requests_per_user must be >= 1")
        if not (self.payload_bits >= 0 and self.bandwidth > 0):
            raise InvalidParameterError("payload_bits must be >= 0 and bandwidth > 0")
        if not 0 <= self.uav_cache_size <= self.contents:
            raise InvalidParameterError("uav_cache_size must lie in [0, contents]")

    @property
    def n_steps(self) -> int:
        return max(1, int(math.ceil(self.duration / self.step - 1e-9)))

    def popularity_weights(self) -> np.ndarray:
        ranks = np.arange(1, self.contents + 1, dtype=float)
        w = np.ones_like(ranks) if self.popularity == "uniform" else ranks ** (-self.zipf_s)
        return w / w.sum()


@dataclass(frozen=True, eq=False)
class RequestLog:
    time: np.ndarray
    user: np.ndarray
    content: np.ndarray
    tier: np.ndarray     # index into TIERS
    delay: np.ndarray

    def __len__(self):
        return self.time.shape[0]

    def tier_fractions(self) -> dict:
        n = max(len(self), 1)
        return {t: float(np.sum(self.tier == k)) / n for k, t in enumerate(TIERS)}


@dataclass(frozen=True, eq=False)
class CacheState:
    cached: np.ndarray        # (U,) content id in 1..N
    user_trace: np.ndarray    # (steps + 1, U, 2)
    uav_trace: np.ndarray     # (steps + 1, 2)
    log: RequestLog | None = None


def placement_phase(cfg: CacheConfig, seed) -> np.ndarray:
    """Content id (1-based) cached by each user, i.i.d. uniform."""
    rng = np.random.default_rng(child_seed(int(seed), 0))
    return rng.integers(1, cfg.contents + 1, size=cfg.users)


def _clip(xy, area: AreaSpec):
    return np.clip(xy, [0.0, 0.0], [area.width, area.height])


def mobility_trace(cfg: CacheConfig, seed) -> np.ndarray:
    """User positions at every step, shape ``(steps + 1, U, 2)``.

    ``rwp`` is random waypoint over the whole area. ``cluster`` draws every
    waypoint (and the start points) from a Gaussian around a blob center that
    itself wanders by random waypoint, so the users drift together.
    """
    rng = np.random.default_rng(child_seed(int(seed), 1))
    area, u, k = cfg.area, cfg.users, cfg.n_steps
    dims = np.array([area.width, area.height])
    trace = np.empty((k + 1, u, 2))
    if cfg.mobility == "static":
        trace[:] = rng.uniform(size=(u, 2)) * dims
        return trace

    blob = rng.uniform(0.25, 0.75, size=2) * dims
    blob_target = rng.uniform(0.25, 0.75, size=2) * dims

    def draw_points(n):
        if cfg.mobility == "rwp":
            return rng.uniform(size=(n, 2)) * dims
        return _clip(blob + cfg.cluster_sigma * rng.standard_normal((n, 2)), area)

    pos = draw_points(u)
    target = draw_points(u)
    speed = rng.uniform(cfg.speed_min, cfg.speed_max, size=u)
    pause = np.zeros(u)
    trace[0] = pos
    dt = cfg.step
    for s in range(1, k + 1):
        if cfg.mobility == "cluster":
            blob, blob_target = _advance_blob(blob, blob_target, cfg.cluster_speed * dt, rng, dims)
        waiting = pause > 0
        pause = np.maximum(pause - dt, 0.0)
        delta = target - pos
        dist = np.hypot(delta[:, 0], delta[:, 1])
        move = np.minimum(speed * dt, dist)
        frac = np.divide(move, dist, out=np.zeros(u), where=dist > 0)
        active = ~waiting
        pos = pos + (frac * active)[:, None] * delta
        arrived = active & (move >= dist)
        m = int(arrived.sum())
        if m:
            target[arrived] = draw_points(m)
            speed[arrived] = rng.uniform(cfg.speed_min, cfg.speed_max, size=m)
            pause[arrived] = cfg.pause
        trace[s] = pos
    return trace


def _advance_blob(blob, target, step, rng, dims):
    d = target - blob
    dist = float(np.hypot(*d))
    if dist <= step:
        return target.copy(), rng.uniform(0.25, 0.75, size=2) * dims
    return blob + d * (step / dist), target


def uav_tracking_policy(cfg: CacheConfig, users_xy, uav_xy, dt: float | None = None):
    """Next UAV position: a move of at most ``uav_speed * dt`` toward the user centroid."""
    users_xy = np.asarray(users_xy, dtype=float).reshape(-1, 2)
    if users_xy.shape[0] == 0:
        raise InvalidParameterError("tracking needs at least one user")
    dt = cfg.step if dt is None else dt
    goal = users_xy.mean(axis=0)
    d = goal - np.asarray(uav_xy, dtype=float)
    dist = float(np.hypot(*d))
    reach = cfg.uav_speed * dt
    if dist <= reach:
        return goal
    return np.asarray(uav_xy, dtype=float) + d * (reach / dist)


def uav_trace(cfg: CacheConfig, user_trace, policy: str) -> np.ndarray:
    """UAV horizontal positions, starting at the area center."""
    if policy not in POLICIES:
        raise InvalidParameterError(f"policy must be one of {POLICIES}")
    k = user_trace.shape[0]
    out = np.empty((k, 2))
    out[0] = cfg.area.center
    for s in range(1, k):
        out[s] = out[0] if policy == "static" else uav_tracking_policy(
            cfg, user_trace[s - 1], out[s - 1])
    return out


def _spectral_eff(snr):
    return np.log2(1.0 + snr)


def delivery_phase(cfg: CacheConfig, state: CacheState, seed) -> RequestLog:
    """Resolve every request against the tiers and log its delay.

    Each user issues ``requests_per_user`` requests at uniformly random steps
    for contents drawn from the popularity law. Streams are keyed on
    ``seed`` only, so two policies run with one seed see the same requests
    and fades.
    """
    rng_req = np.random.default_rng(child_seed(int(seed), 2))
    rng_fade = np.random.default_rng(child_seed(int(seed), 3))
    u = cfg.users
    n_req = u * cfg.requests_per_user
    users = np.repeat(np.arange(u), cfg.requests_per_user)
    steps = rng_req.integers(0, cfg.n_steps + 1, size=n_req)
    contents = rng_req.choice(np.arange(1, cfg.contents + 1), size=n_req,
                              p=cfg.popularity_weights())
    fades = rng_fade.exponential(1.0, size=n_req)
    order = np.lexsort((users, steps))
    users, steps, contents, fades = users[order], steps[order], contents[order], fades[order]

    uav_holds = set(range(1, cfg.uav_cache_size + 1))  # top-K by popularity rank
    ch = cfg.channel
    tier = np.empty(n_req, dtype=np.int64)
    delay = np.empty(n_req)
    h2 = cfg.uav_altitude ** 2
    for r in range(n_req):
        usr, s, c = users[r], steps[r], contents[r]
        if state.cached[usr] == c:
            tier[r], delay[r] = 0, cfg.delay_self
            continue
        here = state.user_trace[s]
        if cfg.d2d_radius > 0:
            holders = np.nonzero(state.cached == c)[0]
            if holders.size:
                d = np.hypot(*(here[holders] - here[usr]).T)
                k = int(np.argmin(d))
                if d[k] <= cfg.d2d_radius:
                    dist = max(float(d[k]), 1.0)
                    snr = cfg.d2d_power * ch.beta0 * dist ** (-ch.alpha_d2d) * fades[r] \
                        / ch.noise_power
                    tier[r] = 1
                    delay[r] = cfg.delay_d2d + _transfer_time(cfg, snr)
                    continue
        if c in uav_holds:
            r2 = float(np.sum((state.uav_trace[s] - here[usr]) ** 2))
            snr = cfg.uav_power * ch.beta0 / (h2 + r2) / ch.noise_power
            tier[r], delay[r] = 2, cfg.delay_uav + _transfer_time(cfg, snr)
            continue
        tier[r], delay[r] = 3, cfg.delay_bs
    return RequestLog(steps * cfg.step, users, contents, tier, delay)


def _transfer_time(cfg: CacheConfig, snr: float) -> float:
    se = float(_spectral_eff(snr))
    if cfg.payload_bits == 0:
        return 0.0
    return math.inf if se == 0 else cfg.payload_bits / (cfg.bandwidth * se)


def simulate(cfg: CacheConfig, policy: str, seed) -> CacheState:
    cached = placement_phase(cfg, seed)
    users = mobility_trace(cfg, seed)
    state = CacheState(cached, users, uav_trace(cfg, users, policy))
    return CacheState(cached, users, state.uav_trace, delivery_phase(cfg, state, seed))


def summary_row(cfg: CacheConfig, policy: str, seed, state: CacheState) -> dict:
    fr = state.log.tier_fractions()
    return {"scenario": "cache", "policy": policy, "N": cfg.contents, "U": cfg.users,
            "self_hit": fr["self"], "d2d_hit": fr["d2d"], "uav_hit": fr["uav"],
            "bs_hit": fr["bs"], "mean_delay_s": float(np.mean(state.log.delay)),
            "seed": int(seed)}


def mean_uav_distance(state: CacheState) -> float:
    """Time-averaged horizontal UAV-user distance."""
    d = np.hypot(*(state.user_trace - state.uav_trace[:, None, :]).transpose(2, 0, 1))
    return float(d.mean())


# --- surveillance variant -------------------------------------------------

@dataclass(frozen=True)
class SurveillanceConfig:
    area: AreaSpec = field(default_factory=AreaSpec)
    altitude: float = 100.0
    speed: float = 20.0
    collect_radius: float = 50.0
    payload_bits: float = 1e6
    bandwidth: float = 1e6
    uav_power: float = 5.0
    channel: ChannelParams = field(default_factory=ChannelParams)

    def __post_init__(self):
        if not (self.altitude > 0 and self.speed > 0 and self.collect_radius > 0):
            raise InvalidParameterError("altitude, speed and collect_radius must be > 0")
        if not (self.payload_bits >= 0 and self.bandwidth > 0):
            raise InvalidParameterError("payload_bits must be >= 0 and bandwidth > 0")


@dataclass(frozen=True)
class SurveillanceResult:
    collection_time: float
    flight_time: float
    transmission_time: float
    bits: float

    @property
    def total_delay(self) -> float:
        return self.collection_time + self.flight_time + self.transmission_time


def sweep_path(area: AreaSpec, radius: float) -> np.ndarray:
    """Lawnmower waypoints: lanes ``2 * radius`` apart, first lane eastward at y = radius."""
    ys = []
    y = radius
    while True:
        ys.append(min(y, area.height))
        if y + radius >= area.height:
            break
        y += 2.0 * radius
    pts = []
    for k, y in enumerate(ys):
        xs = (0.0, area.width) if k % 2 == 0 else (area.width, 0.0)
        pts.extend([(xs[0], y), (xs[1], y)])
    return np.array(pts)


def _first_contact(path: np.ndarray, point: np.ndarray, radius: float) -> float:
    """Arc length at which ``path`` first comes within ``radius`` of ``point``."""
    travelled = 0.0
    for a, b in zip(path[:-1], path[1:]):
        seg = b - a
        length = float(np.hypot(*seg))
        rel = point - a
        if length == 0.0:
            if np.hypot(*rel) <= radius:
                return travelled
            continue
        u = seg / length
        t0 = float(rel @ u)
        perp2 = float(rel @ rel) - t0 * t0
        if perp2 <= radius * radius:
            half = math.sqrt(max(radius * radius - perp2, 0.0))
            enter, leave = t0 - half, t0 + half
            if enter <= length and leave >= 0.0:
                return travelled + max(enter, 0.0)
        travelled += length
    return math.nan


def _point_at(path: np.ndarray, s: float) -> np.ndarray:
    seg = np.hypot(*np.diff(path, axis=0).T)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    return np.array([np.interp(s, cum, path[:, 0]), np.interp(s, cum, path[:, 1])])


def surveillance_run(cfg: SurveillanceConfig, sensors: NodeSet, center) -> SurveillanceResult:
    """Sweep, collect, fly to ``center`` and upload over the LOS link.

    Collection stops once the last sensor has come within ``collect_radius``
    (horizontal distance). The upload is made hovering at ``altitude`` right
    above the center.
    """
    xy = np.asarray(sensors.positions, dtype=float)[:, :2]
    if xy.size and not np.all(cfg.area.contains(xy)):
        raise InvalidParameterError("sensor outside the area")
    center = np.asarray(center, dtype=float)[:2]
    if not bool(cfg.area.contains(center)):
        raise InvalidParameterError("ground center outside the area")
    path = sweep_path(cfg.area, cfg.collect_radius)
    contacts = np.array([_first_contact(path, p, cfg.collect_radius) for p in xy])
    if np.any(np.isnan(contacts)):
        raise InvalidParameterError("a sensor is never reached by the sweep")
    s_end = float(contacts.max()) if contacts.size else 0.0
    here = _point_at(path, s_end)
    flight = float(np.hypot(*(center - here))) / cfg.speed
    bits = cfg.payload_bits * xy.shape[0]
    ch = cfg.channel
    snr = cfg.uav_power * ch.beta0 / cfg.altitude ** 2 / ch.noise_power
    tx = bits / (cfg.bandwidth * float(_spectral_eff(snr)))
    return SurveillanceResult(s_end / cfg.speed, flight, tx, bits)
