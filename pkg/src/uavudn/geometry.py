"""Positions, ground-node placement and UAV trajectory generation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleTrajectoryError, InvalidParameterError

# Sigmoid steepness (1/m); makes the logistic path span a 1 km area visibly.
SIGMOID_STEEPNESS = 0.01
SPIRAL_TURNS = 5
SPIRAL_MARGIN = 25.0

TRAJECTORY_KINDS = ("straight", "sigmoid", "spiral", "hover")


@dataclass(frozen=True)
class Point3:
    x: float
    y: float
    z: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise InvalidParameterError(f"non-finite coordinate in {self!r}")
        if self.z < 0:
            raise InvalidParameterError(f"altitude must be >= 0, got {self.z}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


@dataclass(frozen=True)
class AreaSpec:
    width: float = 1000.0
    height: float = 1000.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise InvalidParameterError(
                f"area must have positive width and height, got {self.width}x{self.height}")

    @property
    def size(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return (self.width / 2.0, self.height / 2.0)

    def contains(self, xy) -> np.ndarray:
        xy = np.asarray(xy, dtype=float)
        return ((xy[..., 0] >= 0) & (xy[..., 0] <= self.width)
                & (xy[..., 1] >= 0) & (xy[..., 1] <= self.height))


@dataclass(frozen=True, eq=False)
class NodeSet:
    """Ground nodes stored as an ``(n, 3)`` array with ``z == 0``."""

    positions: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    def __len__(self):
        return self.positions.shape[0]

    def __getitem__(self, i) -> Point3:
        x, y, z = self.positions[i]
        return Point3(float(x), float(y), float(z))

    def __eq__(self, other):
        if not isinstance(other, NodeSet):
            return NotImplemented
        return np.array_equal(self.positions, other.positions)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-slotted UAV path.

    ``positions[n]`` is the UAV location at ``times[n] = n * slot_duration``.
    A trajectory with ``len(times) == S`` samples has ``S - 1`` slots, and
    slot ``n`` is represented by its left endpoint ``positions[n]``.
    """

    times: np.ndarray
    positions: np.ndarray
    slot_duration: float
    speed_cap: float | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        pos = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        if t.shape[0] != pos.shape[0]:
            raise InvalidParameterError("times and positions differ in length")
        if not self.slot_duration > 0:
            raise InvalidParameterError("slot_duration must be positive")
        if t.shape[0] > 1 and not np.allclose(np.diff(t), self.slot_duration,
                                              rtol=1e-9, atol=1e-9):
            raise InvalidParameterError("sample times must be evenly spaced by slot_duration")
        if np.any(pos[:, 2] < 0):
            raise InvalidParameterError("trajectory altitude must be >= 0")
        if self.speed_cap is not None and t.shape[0] > 1:
            step = np.hypot(np.diff(pos[:, 0]), np.diff(pos[:, 1]))
            if np.any(step / self.slot_duration > self.speed_cap + 1e-9):
                raise InfeasibleTrajectoryError("trajectory exceeds its speed cap")
        t.setflags(write=False)
        pos.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "positions", pos)

    @property
    def n_slots(self) -> int:
        return max(self.positions.shape[0] - 1, 0)

    @property
    def duration(self) -> float:
        return self.n_slots * self.slot_duration

    @property
    def slot_positions(self) -> np.ndarray:
        """Left-endpoint position of every slot, shape ``(n_slots, 3)``."""
        return self.positions[:-1]

    def horizontal_speeds(self) -> np.ndarray:
        pos = self.positions
        return np.hypot(np.diff(pos[:, 0]), np.diff(pos[:, 1])) / self.slot_duration

    def translated(self, dx: float, dy: float) -> "Trajectory":
        return Trajectory(self.times, self.positions + np.array([dx, dy, 0.0]),
                          self.slot_duration, self.speed_cap)


def distance(p, q) -> float:
    """Euclidean distance between two points (``Point3`` or length-3 arrays)."""
    a = p.as_array() if isinstance(p, Point3) else np.asarray(p, dtype=float)
    b = q.as_array() if isinstance(q, Point3) else np.asarray(q, dtype=float)
    return float(np.linalg.norm(a - b))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_ppp(area: AreaSpec, density: float, seed) -> NodeSet:
    """Homogeneous Poisson point process on ``area`` with intensity ``density``."""
    if not density >= 0:
        raise InvalidParameterError(f"density must be >= 0, got {density}")
    rng = _rng(seed)
    n = int(rng.poisson(density * area.size))
    xy = rng.uniform(size=(n, 2)) * np.array([area.width, area.height])
    return NodeSet(np.column_stack([xy, np.zeros(n)]))


def make_grid(area: AreaSpec, rows: int, cols: int) -> NodeSet:
    """Regular grid with one node at the center of each cell, row-major order."""
    if rows < 1 or cols < 1:
        raise InvalidParameterError(f"grid needs rows, cols >= 1, got {rows}x{cols}")
    xs = (np.arange(cols) + 0.5) * area.width / cols
    ys = (np.arange(rows) + 0.5) * area.height / rows
    gy, gx = np.meshgrid(ys, xs, indexing="ij")
    return NodeSet(np.column_stack([gx.ravel(), gy.ravel(), np.zeros(rows * cols)]))


def sigmoid_y(x, area: AreaSpec):
    """Logistic path ``y(x)`` used by the sigmoid trajectory."""
    return area.height / (1.0 + np.exp(-SIGMOID_STEEPNESS * (np.asarray(x, dtype=float)
                                                              - area.width / 2.0)))


def spiral_pitch(area: AreaSpec) -> float:
    """Pitch ``a`` of ``r = a * theta`` so the last turn ends 25 m inside the area."""
    r_max = min(area.width, area.height) / 2.0 - SPIRAL_MARGIN
    if r_max <= 0:
        raise InvalidParameterError("area too small for the spiral margin")
    return r_max / (2.0 * math.pi * SPIRAL_TURNS)


def _polyline(kind: str, area: AreaSpec) -> np.ndarray:
    """Dense planar polyline for the fixed-shape trajectory kinds."""
    w, h = area.width, area.height
    if kind == "straight":
        return np.array([[0.0, h / 2.0], [w, h / 2.0]])
    if kind == "sigmoid":
        x = np.linspace(0.0, w, 20001)
        return np.column_stack([x, sigmoid_y(x, area)])
    if kind == "spiral":
        theta = np.linspace(0.0, 2.0 * math.pi * SPIRAL_TURNS, 200001)
        r = spiral_pitch(area) * theta
        cx, cy = area.center
        return np.column_stack([cx + r * np.cos(theta), cy + r * np.sin(theta)])
    raise InvalidParameterError(f"unknown trajectory kind {kind!r}")


def path_length(kind: str, area: AreaSpec) -> float:
    """Arc length of the fixed-shape path (0 for hover)."""
    if kind == "hover":
        return 0.0
    pts = _polyline(kind, area)
    return float(np.hypot(*np.diff(pts, axis=0).T).sum())


def build_trajectory(kind: str, area: AreaSpec, altitude: float, speed: float,
                     duration: float, slot_duration: float) -> Trajectory:
    """Constant-speed, fixed-altitude trajectory sampled at slot boundaries.

    The number of slots is ``ceil(duration / slot_duration)``. Paths with fixed
    endpoints (straight, sigmoid, spiral) are traversed once at ``speed``; if the
    UAV arrives before the horizon it holds at the endpoint.
    """
    if kind not in TRAJECTORY_KINDS:
        raise InvalidParameterError(f"unknown trajectory kind {kind!r}")
    if not (duration > 0 and slot_duration > 0):
        raise InvalidParameterError("duration and slot_duration must be positive")
    if kind != "hover" and not speed > 0:
        raise InvalidParameterError(f"speed must be positive, got {speed}")
    if altitude < 0:
        raise InvalidParameterError("altitude must be >= 0")

    n_slots = max(1, math.ceil(duration / slot_duration - 1e-9))
    times = np.arange(n_slots + 1) * slot_duration

    if kind == "hover":
        cx, cy = area.center
        pos = np.tile([cx, cy, altitude], (n_slots + 1, 1))
        return Trajectory(times, pos, slot_duration, None)

    pts = _polyline(kind, area)
    seg = np.hypot(*np.diff(pts, axis=0).T)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    reach = speed * n_slots * slot_duration
    if reach < total * (1.0 - 1e-12):
        raise InfeasibleTrajectoryError(
            f"{kind} path of {total:.1f} m cannot be flown at {speed} m/s "
            f"in {n_slots * slot_duration} s")
    s = np.minimum(speed * times, total)
    # The exact path length is reached at the end; guard interpolation against roundoff.
    x = np.interp(s, cum, pts[:, 0])
    y = np.interp(s, cum, pts[:, 1])
    pos = np.column_stack([x, y, np.full_like(x, float(altitude))])
    return Trajectory(times, pos, slot_duration, speed)
