"""UAV propulsion energy and RF energy harvesting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .channel import ChannelParams
from .errors import InvalidParameterError
from .geometry import NodeSet, Trajectory


@dataclass(frozen=True)
class PropulsionParams:
    """Fixed-wing level-flight power ``c1 * V**3 + c2 / V``.

    The defaults give roughly 100 W at the 30 m/s max-endurance speed.
    """

    c1: float = 9.26e-4
    c2: float = 2250.0

    def __post_init__(self):
        if not (self.c1 > 0 and self.c2 > 0):
            raise InvalidParameterError("propulsion coefficients must be positive")

    @property
    def max_endurance_speed(self) -> float:
        return (self.c2 / (3.0 * self.c1)) ** 0.25


@dataclass(frozen=True)
class HarvestParams:
    eta: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidParameterError("harvesting efficiency must lie in [0, 1]")


def propulsion_power(speed, params: PropulsionParams):
    speed_arr = np.asarray(speed, dtype=float)
    if np.any(speed_arr <= 0):
        raise InvalidParameterError("propulsion power is undefined for speed <= 0")
    out = params.c1 * speed_arr ** 3 + params.c2 / speed_arr
    return float(out) if out.ndim == 0 else out


def flight_energy(traj: Trajectory, params: PropulsionParams) -> float:
    """Propulsion energy of ``traj`` in joules.

    Each slot is charged at its speed. A fixed-wing aircraft that covers less
    ground than ``V* * slot_duration`` in a slot is loitering, so such slots
    (hover included) are charged at the max-endurance power ``P(V*)``.
    """
    if traj.positions.shape[0] < 2:
        raise InvalidParameterError("flight energy needs at least two samples")
    v_star = params.max_endurance_speed
    speeds = np.maximum(traj.horizontal_speeds(), v_star)
    return float(np.sum(propulsion_power(speeds, params)) * traj.slot_duration)


def harvested_energy(traj: Trajectory, schedule, nodes: NodeSet, channel: ChannelParams,
                     harvest: HarvestParams) -> np.ndarray:
    """Energy collected by each node over the trajectory, in joules.

    ``schedule`` is a per-slot transmit power sequence (or an object with a
    ``p`` attribute) whose length equals ``traj.n_slots``.
    """
    p = np.asarray(getattr(schedule, "p", schedule), dtype=float)
    if p.shape != (traj.n_slots,):
        raise InvalidParameterError(
            f"schedule has {p.size} slots but the trajectory has {traj.n_slots}")
    if np.any(p < 0):
        raise InvalidParameterError("transmit power must be non-negative")
    q = np.ascontiguousarray(traj.slot_positions)
    w = np.ascontiguousarray(nodes.positions)
    return _backend.kernels.harvest_energy(q, np.ascontiguousarray(p), w, channel.beta0,
                                           harvest.eta, traj.slot_duration)
