"""Wireless energy transfer from a UAV to a grid of ground nodes.

The UAV flies a sigmoid or spiral path exactly once at a fixed altitude while
its transmit power follows a schedule. Node energies are reported raw and
normalized by the best-served node.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ..channel import ChannelParams
from ..energy import HarvestParams, harvested_energy
from ..errors import InvalidComparisonError, InvalidParameterError
from ..geometry import AreaSpec, Trajectory, build_trajectory, make_grid, path_length

COLUMNS = ("scenario", "trajectory", "schedule", "node_i", "node_j", "energy_J",
           "energy_norm")
SCHEDULE_KINDS = ("fixed", "valley", "ramp")
WET_TRAJECTORIES = ("sigmoid", "spiral")


@dataclass(frozen=True, eq=False)
class PowerSchedule:
    p: np.ndarray
    cap: float

    def __post_init__(self):
        p = np.array(self.p, dtype=float).reshape(-1)
        if not self.cap >= 0:
            raise InvalidParameterError("cap must be >= 0")
        if np.any(p < 0) or np.any(p > self.cap * (1 + 1e-12)):
            raise InvalidParameterError("schedule powers must lie in [0, cap]")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    def __len__(self):
        return self.p.shape[0]


def build_schedule(kind: str, slots: int, cap: float) -> PowerSchedule:
    """Per-slot transmit power.

    ``fixed`` holds ``cap``; ``valley`` is a quadratic that is ``cap`` at both
    ends and ``cap / 4`` in the middle; ``ramp`` rises linearly from
    ``cap / 4`` to ``cap``.
    """
    if slots < 1:
        raise InvalidParameterError("slots must be >= 1")
    if kind == "fixed":
        p = np.full(slots, float(cap))
    elif kind == "valley":
        mid = (slots - 1) / 2.0
        u = (np.arange(slots) - mid) / mid if mid > 0 else np.zeros(slots)
        p = cap / 4.0 + 0.75 * cap * u * u
    elif kind == "ramp":
        p = np.linspace(cap / 4.0, cap, slots) if slots > 1 else np.array([float(cap)])
    else:
        raise InvalidParameterError(f"unknown schedule kind {kind!r}")
    return PowerSchedule(np.minimum(p, cap), cap)


@dataclass(frozen=True)
class WetConfig:
    rows: int = 20
    cols: int = 20
    area: AreaSpec = field(default_factory=AreaSpec)
    altitude: float = 100.0
    trajectory: str = "sigmoid"
    schedule: str = "fixed"
    speed: float = 10.0
    slot_duration: float = 1.0
    power_max: float = 5.0
    channel: ChannelParams = field(default_factory=ChannelParams)
    harvest: HarvestParams = field(default_factory=HarvestParams)

    def __post_init__(self):
        if self.trajectory not in WET_TRAJECTORIES:
            raise InvalidParameterError(f"trajectory must be one of {WET_TRAJECTORIES}")
        if self.schedule not in SCHEDULE_KINDS:
            raise InvalidParameterError(f"schedule must be one of {SCHEDULE_KINDS}")
        if self.rows < 1 or self.cols < 1:
            raise InvalidParameterError("grid needs at least one row and column")
        if not (self.altitude > 0 and self.speed > 0 and self.slot_duration > 0):
            raise InvalidParameterError("altitude, speed and slot_duration must be > 0")
        if not self.power_max >= 0:
            raise InvalidParameterError("power_max must be >= 0")


def wet_trajectory(cfg: WetConfig) -> Trajectory:
    """Path flown once, sampled at arc lengths ``0, L/n, ..., L``.

    The speed is trimmed down from ``cfg.speed`` so the path takes a whole
    number ``n`` of slots; the UAV radiates in ``n + 1`` slots, the last one
    over the path's end point.
    """
    length = path_length(cfg.trajectory, cfg.area)
    n = max(1, math.ceil(length / (cfg.speed * cfg.slot_duration) - 1e-9))
    speed = length / (n * cfg.slot_duration)
    return build_trajectory(cfg.trajectory, cfg.area, cfg.altitude, speed,
                            (n + 1) * cfg.slot_duration, cfg.slot_duration)


@dataclass(frozen=True, eq=False)
class WetResult:
    energy: np.ndarray      # (rows, cols) joules
    normalized: np.ndarray  # (rows, cols) in [0, 1]
    trajectory: Trajectory
    schedule: PowerSchedule


def run_wet(cfg: WetConfig, schedule: PowerSchedule | None = None,
            trajectory: Trajectory | None = None) -> WetResult:
    """Harvested energy per grid node.

    ``schedule`` and ``trajectory`` override the ones ``cfg`` describes.
    """
    traj = wet_trajectory(cfg) if trajectory is None else trajectory
    sched = build_schedule(cfg.schedule, traj.n_slots, cfg.power_max) if schedule is None \
        else schedule
    nodes = make_grid(cfg.area, cfg.rows, cfg.cols)
    e = harvested_energy(traj, sched, nodes, cfg.channel, cfg.harvest).reshape(cfg.rows, cfg.cols)
    top = float(e.max())
    norm = e / top if top > 0 else np.zeros_like(e)
    return WetResult(e, norm, traj, sched)


@dataclass(frozen=True, eq=False)
class ScheduleComparison:
    ratio: np.ndarray  # nan where the reference node got no energy
    min: float
    max: float
    mean: float


def compare_schedules(cfg_a: WetConfig, cfg_b: WetConfig) -> ScheduleComparison:
    """Per-node energy ratio ``E_B / E_A`` for two runs that differ only in schedule."""
    if _without_schedule(cfg_a) != _without_schedule(cfg_b):
        raise InvalidComparisonError("configurations differ in more than the schedule")
    a, b = run_wet(cfg_a), run_wet(cfg_b)
    if not np.array_equal(a.trajectory.positions, b.trajectory.positions):
        raise InvalidComparisonError("trajectories differ")
    ratio = np.full(a.energy.shape, np.nan)
    ok = a.energy > 0
    ratio[ok] = b.energy[ok] / a.energy[ok]
    vals = ratio[ok]
    if vals.size == 0:
        return ScheduleComparison(ratio, math.nan, math.nan, math.nan)
    return ScheduleComparison(ratio, float(vals.min()), float(vals.max()), float(vals.mean()))


def _without_schedule(cfg: WetConfig):
    from dataclasses import replace
    return replace(cfg, schedule="fixed")


def report_rows(cfg: WetConfig, result: WetResult) -> list[dict]:
    rows = []
    for i in range(cfg.rows):
        for j in range(cfg.cols):
            rows.append({"scenario": "wet", "trajectory": cfg.trajectory,
                         "schedule": cfg.schedule, "node_i": i, "node_j": j,
                         "energy_J": float(result.energy[i, j]),
                         "energy_norm": float(result.normalized[i, j])})
    return rows


def write_map_csv(grid, path) -> None:
    """Dense ``rows x cols`` CSV of a map, row 0 first, no header."""
    grid = np.asarray(grid, dtype=float)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            for row in grid:
                w.writerow([format(v, ".9g") for v in row])
    except OSError as exc:
        raise OSError(f"cannot write map to {path}: {exc}") from exc
