"""Simulation and optimization toolkit for UAV-supported dense wireless networks."""

from . import _backend
from .channel import ChannelParams
from .energy import HarvestParams, PropulsionParams
from .geometry import AreaSpec, NodeSet, Point3, Trajectory

__version__ = "0.1.0"


def backend() -> str:
    """Name of the active kernel backend (``"cython"`` or ``"python"``)."""
    return _backend.BACKEND


__all__ = ["AreaSpec", "ChannelParams", "HarvestParams", "NodeSet", "Point3",
           "PropulsionParams", "Trajectory", "backend", "__version__"]
