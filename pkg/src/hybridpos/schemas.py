"""Pydantic models: scenario file schema and service request/response bodies.

These models are the single validated description of a scenario; the YAML
file format, the HTTP API and the CLI all round-trip through them.  All
physical quantities carry SI units in their key names.
"""

from __future__ import annotations

from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Vec3 = tuple[float, float, float]

_BORESIGHTS = ("+x", "-x", "+y", "-y", "+z", "-z")


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


def _require_finite(name: str, value) -> None:
    if not np.all(np.isfinite(value)):
        raise ValueError(f"{name} must be finite")


class ArraySpec(StrictModel):
    """Uniform rectangular array description."""

    nx: int = Field(ge=1)
    ny: int = Field(ge=1)
    boresight: Literal["+x", "-x", "+y", "-y", "+z", "-z"]


class SectorCenter(StrictModel):
    theta_rad: float
    phi_rad: float


class SectorSpec(StrictModel):
    """Beam-sweep sector: azimuth span around a center direction.

    ``center`` may be explicit angles, the word ``boresight`` (panel axis)
    or ``los`` (line of sight between vehicle and anchor, resolved when the
    codebook is built).  ``elevation_rows > 1`` turns the sweep into a grid
    spread over ``elevation_span_rad`` around the center polar angle.
    """

    span_rad: float = Field(default=2.0 * np.pi / 3.0, gt=0.0)
    center: Union[Literal["boresight", "los"], SectorCenter] = "boresight"
    elevation_span_rad: float = Field(default=0.0, ge=0.0)
    elevation_rows: int = Field(default=1, ge=1)


class OfdmSpec(StrictModel):
    subcarrier_count: int = Field(ge=1)
    symbol_count: int = Field(ge=1)
    subcarrier_spacing_hz: float = Field(gt=0.0)
    cp_duration_s: float = Field(default=0.0, ge=0.0)
    beam_count: int = Field(default=16, ge=1)
    stream_count: int = Field(default=1, ge=1)
    ici_halfwidth: int = Field(default=1, ge=0)

    @model_validator(mode="after")
    def _check(self):
        if self.subcarrier_count != 1 and self.subcarrier_count % 2 != 0:
            raise ValueError("subcarrier_count must be even (or 1)")
        if self.stream_count > self.beam_count:
            raise ValueError("stream_count cannot exceed beam_count")
        return self


class AvSpec(StrictModel):
    """Vehicle state and receive array."""

    position_m: Vec3
    velocity_mps: Vec3
    heading_rad: float = 0.0
    clock_bias_s: float = 0.0
    array: ArraySpec

    @field_validator("position_m", "velocity_mps", "heading_rad", "clock_bias_s")
    @classmethod
    def _finite(cls, v, info):
        _require_finite(info.field_name, v)
        return v

    @field_validator("heading_rad")
    @classmethod
    def _wrap(cls, v):
        return float(np.pi - (np.pi - v) % (2.0 * np.pi))


class GnbSpec(StrictModel):
    """One 5G base station: geometry, array, signal and codebook settings."""

    position_m: Vec3
    velocity_mps: Vec3 = (0.0, 0.0, 0.0)
    carrier_freq_hz: float = Field(gt=0.0)
    power_db_hz: float
    array: ArraySpec
    ofdm: OfdmSpec
    tx_sector: SectorSpec = SectorSpec()
    rx_sector: SectorSpec = SectorSpec()
    pilot_seed: int = 0

    @field_validator("position_m", "velocity_mps", "power_db_hz")
    @classmethod
    def _finite(cls, v, info):
        _require_finite(info.field_name, v)
        return v


class PulseSpec(StrictModel):
    samples: list[float]


class GnssSignalSpec(StrictModel):
    bandwidth_hz: float = Field(gt=0.0)
    chip_duration_s: float = Field(gt=0.0)
    chip_count: int = Field(ge=1)
    pulse: Union[Literal["rectangular"], PulseSpec] = "rectangular"


class SatelliteSpec(StrictModel):
    """One GNSS satellite: geometry and ranging-signal settings."""

    position_m: Vec3
    velocity_mps: Vec3
    carrier_freq_hz: float = Field(gt=0.0)
    cn0_db_hz: float
    signal: GnssSignalSpec

    @field_validator("position_m", "velocity_mps", "cn0_db_hz")
    @classmethod
    def _finite(cls, v, info):
        _require_finite(info.field_name, v)
        return v


class ScenarioSpec(StrictModel):
    """Complete evaluation scenario: vehicle plus any number of anchors."""

    name: str
    description: str = ""
    av: AvSpec
    gnbs: list[GnbSpec] = Field(default_factory=list)
    satellites: list[SatelliteSpec] = Field(default_factory=list)
    satellite_velocity_seed: Optional[int] = None

    @model_validator(mode="after")
    def _at_least_one_anchor(self):
        if not self.gnbs and not self.satellites:
            raise ValueError("scenario needs at least one gNB or satellite")
        return self


class SelectorSpec(StrictModel):
    """Which anchor subsets to evaluate.

    Explicit index lists produce a single row; ``sweep_all`` enumerates
    every subset of the available anchors (except the empty one).
    """

    gnb_indices: Optional[list[int]] = None
    sat_indices: Optional[list[int]] = None
    sweep_all: bool = False


class ResultRow(StrictModel):
    """One evaluated anchor subset."""

    scenario: str
    gnb_count: int
    sat_count: int
    subset: str
    peb_m: Optional[float] = None
    veb_mps: Optional[float] = None
    feasible: bool
    rank: int
    condition_number: Optional[float] = None
    wallclock_s: float


class EvaluateRequest(StrictModel):
    """Evaluate a scenario given inline, or one of the built-ins by name."""

    scenario: Optional[ScenarioSpec] = None
    builtin: Optional[str] = None
    selector: SelectorSpec = SelectorSpec()

    @model_validator(mode="after")
    def _exactly_one_source(self):
        if (self.scenario is None) == (self.builtin is None):
            raise ValueError("provide exactly one of 'scenario' or 'builtin'")
        return self


class EvaluateResponse(StrictModel):
    rows: list[ResultRow]


class ValidateResponse(StrictModel):
    valid: bool
    errors: list[str] = Field(default_factory=list)


class OracleCheck(StrictModel):
    name: str
    max_deviation: float
    tolerance: float
    passed: bool


class OracleReport(StrictModel):
    checks: list[OracleCheck]
    passed: bool
