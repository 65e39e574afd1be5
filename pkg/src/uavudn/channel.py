"""Link gains, SINR and spectral efficiency.

All quantities are linear scale. dB values are converted once, when a
configuration is parsed (see :func:`db_to_linear`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidParameterError, SingularGeometryError
from .geometry import Point3

LOS = "LOS"
RAYLEIGH = "Rayleigh"


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class ChannelParams:
    """Shared link-budget constants.

    Defaults: -60 dB reference gain at 1 m, ground path-loss exponent 3,
    -110 dBm noise, and a 1 Hz bandwidth so rates read as bits/s/Hz.
    """

    beta0: float = 1e-6
    alpha_d2d: float = 3.0
    noise_power: float = 1e-14
    bandwidth: float = 1.0

    def __post_init__(self):
        if not self.beta0 > 0:
            raise InvalidParameterError("beta0 must be > 0")
        if not self.alpha_d2d >= 2:
            raise InvalidParameterError("alpha_d2d must be >= 2")
        if not self.noise_power > 0:
            raise InvalidParameterError("noise_power must be > 0")
        if not self.bandwidth > 0:
            raise InvalidParameterError("bandwidth must be > 0")


@dataclass(frozen=True)
class Link:
    tx: Point3
    rx: Point3
    kind: str = LOS
    power: float = 0.0
    power_max: float = float("inf")

    def __post_init__(self):
        if self.kind not in (LOS, RAYLEIGH):
            raise InvalidParameterError(f"unknown link kind {self.kind!r}")
        if not 0 <= self.power <= self.power_max:
            raise InvalidParameterError(
                f"link power {self.power} outside [0, {self.power_max}]")
        if self.kind == LOS and self.tx.z <= 0 and self.rx.z <= 0:
            raise InvalidParameterError("LOS links need an airborne endpoint")


def _sq_dist(tx, rx) -> float:
    a = tx.as_array() if isinstance(tx, Point3) else np.asarray(tx, dtype=float)
    b = rx.as_array() if isinstance(rx, Point3) else np.asarray(rx, dtype=float)
    d2 = float(np.sum((a - b) ** 2))
    if d2 == 0.0:
        raise SingularGeometryError("transmitter and receiver coincide")
    return d2


def los_gain(tx, rx, params: ChannelParams) -> float:
    """Free-space gain ``beta0 / d**2``."""
    return params.beta0 / _sq_dist(tx, rx)


def rayleigh_gain(tx, rx, params: ChannelParams, seed) -> float:
    """Path loss ``beta0 * d**-alpha`` times a unit-mean exponential fade."""
    d = math.sqrt(_sq_dist(tx, rx))
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return params.beta0 * d ** (-params.alpha_d2d) * float(rng.exponential(1.0))


def mean_rayleigh_gain(d, params: ChannelParams):
    """Expected Rayleigh gain at distance ``d`` (vectorized)."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise SingularGeometryError("transmitter and receiver coincide")
    return params.beta0 * d ** (-params.alpha_d2d)


def sinr(signal: Link, interferers: Sequence[Link], gains: Sequence[float],
         params: ChannelParams) -> float:
    """SINR at ``signal.rx``.

    ``gains[0]`` is the realized gain of the signal link; ``gains[1:]`` are the
    gains from each interferer's transmitter to ``signal.rx``.
    """
    if len(gains) != len(interferers) + 1:
        raise InvalidParameterError("need one gain for the signal plus one per interferer")
    if any(g < 0 for g in gains):
        raise InvalidParameterError("gains must be non-negative")
    powers = [signal.power] + [lk.power for lk in interferers]
    if any(p < 0 for p in powers):
        raise InvalidParameterError("powers must be non-negative")
    interference = sum(p * g for p, g in zip(powers[1:], gains[1:]))
    return powers[0] * gains[0] / (params.noise_power + interference)


def spectral_efficiency(sinr_value):
    """Shannon spectral efficiency ``log2(1 + sinr)`` in bits/s/Hz."""
    arr = np.asarray(sinr_value, dtype=float)
    if np.any(arr < 0):
        raise InvalidParameterError("SINR must be non-negative")
    out = np.log2(1.0 + arr)
    return float(out) if out.ndim == 0 else out
