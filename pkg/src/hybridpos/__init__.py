"""Position and velocity error bounds for hybrid GNSS + 5G mmWave positioning.

The package computes Fisher-information-based lower bounds (PEB/VEB) for a
vehicle that receives downlink OFDM pilots from 5G base stations and
L1-style ranging signals from GNSS satellites, for arbitrary user-defined
geometries.
"""

from .bounds import BoundReport, bound_report
from .errors import HybridPosError
from .fim import Fim, GnssSignalConfig, Link5G, fim_5g_closed, fim_5g_numeric, fim_gnss
from .geometry import SPEED_OF_LIGHT, ChannelParams5G, ChannelParamsGnss
from .scenario import builtin_scenario, evaluate, load_scenario, save_scenario
from .schemas import ResultRow, ScenarioSpec, SelectorSpec

__version__ = "0.1.0"

__all__ = [
    "BoundReport", "bound_report", "HybridPosError", "Fim", "GnssSignalConfig",
    "Link5G", "fim_5g_closed", "fim_5g_numeric", "fim_gnss", "SPEED_OF_LIGHT",
    "ChannelParams5G", "ChannelParamsGnss", "builtin_scenario", "evaluate",
    "load_scenario", "save_scenario", "ResultRow", "ScenarioSpec",
    "SelectorSpec", "__version__",
]
