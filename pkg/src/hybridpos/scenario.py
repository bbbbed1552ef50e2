"""Scenario construction, file round-tripping and anchor-subset evaluation."""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np
import pydantic
import yaml

from . import arrays, bounds, fim, geometry, waveform
from .errors import (HybridPosError, IndexOutOfRangeError, ScenarioParseError,
                     ScenarioValidationError, UnknownScenarioError)
from .schemas import (GnbSpec, ResultRow, SatelliteSpec, ScenarioSpec,
                      SectorSpec, SelectorSpec)

_DEG = np.pi / 180.0

# Scenario A: four well-spread satellites; Scenario B: satellites squeezed
# into a fraction of a degree of azimuth (poor geometric diversity).
_SAT_DIRECTIONS = {
    "A": [(35.2, 45.0), (35.2, -135.0), (57.3, 130.0), (57.37, -39.8)],
    "B": [(45.0, 0.08), (5.0, -0.66), (17.0, 0.20), (25.0, -0.14)],
}
_SAT_RANGE_M = 20.2e6
_SAT_SPEED_MPS = 3.9e3
_SAT_RADIAL_MPS = 1.0e3

_GNB_POSITIONS = [(0.0, 0.0, 7.0), (20.0, -6.0, 5.0)]
_GNB_BORESIGHTS = ["+x", "+y"]

_L1_CHIP_RATE_HZ = 1.023e6


def builtin_scenario(name: str, av_height_m: float = 1.5,
                     satellite_seed: int = 2020) -> ScenarioSpec:
    """The two reference scenarios (open and azimuth-constrained satellite sky).

    Satellite velocities have a 1 km/s radial component directed away from
    the vehicle plus a seeded-random tangential component completing the
    orbital speed.
    """
    key = name.strip().upper()
    if key not in _SAT_DIRECTIONS:
        raise UnknownScenarioError(f"unknown builtin scenario {name!r}")

    av_pos = np.array([10.0, 0.0, av_height_m])
    rng = np.random.default_rng(satellite_seed)
    v_tan = np.sqrt(_SAT_SPEED_MPS ** 2 - _SAT_RADIAL_MPS ** 2)

    sats = []
    for theta_deg, phi_deg in _SAT_DIRECTIONS[key]:
        pos = geometry.spherical_to_cartesian(_SAT_RANGE_M, theta_deg * _DEG,
                                              phi_deg * _DEG)
        radial = (pos - av_pos) / np.linalg.norm(pos - av_pos)
        draw = rng.standard_normal(3)
        tangential = draw - np.dot(draw, radial) * radial
        tangential /= np.linalg.norm(tangential)
        vel = _SAT_RADIAL_MPS * radial + v_tan * tangential
        sats.append(SatelliteSpec(
            position_m=tuple(pos),
            velocity_mps=tuple(vel),
            carrier_freq_hz=1575.42e6,
            cn0_db_hz=40.0,
            signal={
                "bandwidth_hz": _L1_CHIP_RATE_HZ,
                "chip_duration_s": 1.0 / _L1_CHIP_RATE_HZ,
                "chip_count": 306900,
                "pulse": "rectangular",
            },
        ))

    gnbs = []
    for i, (pos, bore) in enumerate(zip(_GNB_POSITIONS, _GNB_BORESIGHTS)):
        gnbs.append(GnbSpec(
            position_m=pos,
            velocity_mps=(0.0, 0.0, 0.0),
            carrier_freq_hz=38.0e9,
            power_db_hz=30.0,
            array={"nx": 12, "ny": 12, "boresight": bore},
            ofdm={
                "subcarrier_count": 1024,
                "symbol_count": 1000,
                "subcarrier_spacing_hz": 125.0e6 / 1024,
                "cp_duration_s": 0.0,
                "beam_count": 16,
                "stream_count": 1,
                "ici_halfwidth": 1,
            },
            tx_sector=SectorSpec(span_rad=2.0 * np.pi / 3.0, center="boresight"),
            rx_sector=SectorSpec(span_rad=np.pi / 3.0, center="los"),
            pilot_seed=101 + i,
        ))

    label = "open satellite visibility" if key == "A" else "satellites on a narrow azimuth arc"
    return ScenarioSpec(
        name=f"builtin-{key}",
        description=f"Urban street with two mmWave base stations, {label}.",
        av={
            "position_m": tuple(av_pos),
            "velocity_mps": (50.0 / 3.6, 0.0, 0.0),
            "heading_rad": 0.0,
            "clock_bias_s": 0.0,
            "array": {"nx": 8, "ny": 8, "boresight": "+z"},
        },
        gnbs=gnbs,
        satellites=sats,
        satellite_velocity_seed=satellite_seed,
    )


def load_scenario(path: str | Path) -> ScenarioSpec:
    """Parse and validate a YAML scenario file."""
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ScenarioParseError(f"invalid YAML{where}: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioParseError("scenario file must contain a mapping at top level")
    return validate_scenario(data)


def validate_scenario(data: dict) -> ScenarioSpec:
    """Validate raw scenario data against the schema.

    Unknown keys raise :class:`ScenarioParseError`; missing or invalid
    values raise :class:`ScenarioValidationError` naming the field.
    """
    try:
        return ScenarioSpec.model_validate(data)
    except pydantic.ValidationError as exc:
        unknown = [".".join(str(p) for p in err["loc"])
                   for err in exc.errors() if err["type"] == "extra_forbidden"]
        if unknown:
            raise ScenarioParseError(f"unknown key(s): {', '.join(unknown)}") from exc
        issues = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}"
            for err in exc.errors())
        raise ScenarioValidationError(issues) from exc


def save_scenario(spec: ScenarioSpec, path: str | Path) -> None:
    """Write a scenario to YAML (round-trip stable with :func:`load_scenario`)."""
    data = spec.model_dump(mode="json")
    Path(path).write_text(yaml.safe_dump(data, sort_keys=False))


def _resolve_sector(sector: SectorSpec, side: str, av, anchor,
                    av_pos: np.ndarray) -> waveform.Sector:
    """Turn a sector spec into concrete angles for one end of a link."""
    if isinstance(sector.center, str):
        if sector.center == "los":
            if side == "tx":
                theta, phi = geometry.los_angles(av_pos, np.array(anchor.position_m))
            else:
                theta, phi = geometry.aoa_angles(av_pos, np.array(anchor.position_m),
                                                 av.heading_rad)
        else:
            bore = anchor.array.boresight if side == "tx" else av.array.boresight
            theta, phi = arrays.boresight_angles(bore)
    else:
        theta, phi = sector.center.theta_rad, sector.center.phi_rad
    return waveform.Sector(theta, phi, sector.span_rad,
                           sector.elevation_span_rad, sector.elevation_rows)


def build_link(spec: ScenarioSpec, gnb: GnbSpec) -> fim.Link5G:
    """Instantiate the full signal model for one base-station link."""
    o = gnb.ofdm
    cfg = waveform.OfdmConfig(
        n_subcarriers=o.subcarrier_count,
        n_symbols=o.symbol_count,
        subcarrier_spacing=o.subcarrier_spacing_hz,
        carrier_freq=gnb.carrier_freq_hz,
        cp_duration=o.cp_duration_s,
        n_beams=o.beam_count,
        n_streams=o.stream_count,
        ici_halfwidth=o.ici_halfwidth,
    )
    tx_array = arrays.build_ura(gnb.array.nx, gnb.array.ny, gnb.array.boresight)
    rx_array = arrays.build_ura(spec.av.array.nx, spec.av.array.ny,
                                spec.av.array.boresight)
    av_pos = np.array(spec.av.position_m)
    tx_sector = _resolve_sector(gnb.tx_sector, "tx", spec.av, gnb, av_pos)
    rx_sector = _resolve_sector(gnb.rx_sector, "rx", spec.av, gnb, av_pos)
    beams = waveform.build_codebook(cfg, tx_array, rx_array, tx_sector, rx_sector)
    pilots = waveform.generate_pilots(cfg, gnb.pilot_seed)
    return fim.Link5G(cfg, tx_array, rx_array, beams, pilots,
                      fim.Power5GConfig(gnb.power_db_hz))


def _gnss_config(sat: SatelliteSpec) -> fim.GnssSignalConfig:
    pulse = sat.signal.pulse
    if not isinstance(pulse, str):
        pulse = fim.SampledPulse(np.asarray(pulse.samples))
    return fim.GnssSignalConfig(
        cn0_db_hz=sat.cn0_db_hz,
        bandwidth=sat.signal.bandwidth_hz,
        chip_duration=sat.signal.chip_duration_s,
        n_chips=sat.signal.chip_count,
        pulse=pulse,
    )


@dataclass
class _AnchorTerm:
    label: str
    transform: np.ndarray
    info: np.ndarray
    elapsed: float


class ScenarioEvaluator:
    """Computes per-anchor information once and assembles arbitrary subsets."""

    def __init__(self, spec: ScenarioSpec):
        self.spec = spec
        self._gnb_cache: dict[int, _AnchorTerm] = {}
        self._sat_cache: dict[int, _AnchorTerm] = {}
        self._av_pos = np.array(spec.av.position_m)
        self._av_vel = np.array(spec.av.velocity_mps)

    def _gnb_term(self, i: int) -> _AnchorTerm:
        if i not in self._gnb_cache:
            t0 = time.perf_counter()
            gnb = self.spec.gnbs[i]
            av = self.spec.av
            link = build_link(self.spec, gnb)
            eta = geometry.channel_params_5g(
                self._av_pos, self._av_vel, av.clock_bias_s, av.heading_rad,
                np.array(gnb.position_m), np.array(gnb.velocity_mps),
                gnb.carrier_freq_hz)
            info = fim.fim_5g_closed(link, eta)
            trans = bounds.transform_g(
                self._av_pos, self._av_vel, av.clock_bias_s,
                np.array(gnb.position_m), np.array(gnb.velocity_mps),
                gnb.carrier_freq_hz)
            self._gnb_cache[i] = _AnchorTerm(f"gnb{i}", trans, info.values,
                                             time.perf_counter() - t0)
        return self._gnb_cache[i]

    def _sat_term(self, i: int) -> _AnchorTerm:
        if i not in self._sat_cache:
            t0 = time.perf_counter()
            sat = self.spec.satellites[i]
            av = self.spec.av
            info = fim.fim_gnss(_gnss_config(sat))
            trans = bounds.transform_s(
                self._av_pos, self._av_vel, av.clock_bias_s,
                np.array(sat.position_m), np.array(sat.velocity_mps),
                sat.carrier_freq_hz)
            self._sat_cache[i] = _AnchorTerm(f"sat{i}", trans, info.values,
                                             time.perf_counter() - t0)
        return self._sat_cache[i]

    def report(self, gnb_indices: tuple[int, ...], sat_indices: tuple[int, ...]
               ) -> bounds.BoundReport:
        """Bound report for one subset of anchors."""
        for i in gnb_indices:
            if not (0 <= i < len(self.spec.gnbs)):
                raise IndexOutOfRangeError(f"gNB index {i} out of range")
        for i in sat_indices:
            if not (0 <= i < len(self.spec.satellites)):
                raise IndexOutOfRangeError(f"satellite index {i} out of range")
        terms = ([self._gnb_term(i) for i in gnb_indices]
                 + [self._sat_term(i) for i in sat_indices])
        total = bounds.assemble_total_fim(
            [(t.transform, t.info) for t in terms[:len(gnb_indices)]],
            [(t.transform, t.info) for t in terms[len(gnb_indices):]])
        contributions = _contribution_shares(total, terms)
        return bounds.bound_report(total, contributions)


def _contribution_shares(total: np.ndarray, terms: list[_AnchorTerm]) -> dict[str, float]:
    """Fraction of the (equilibrated) total information carried by each anchor."""
    diag = np.diag(total)
    scale = np.where(diag > 0.0, 1.0 / np.sqrt(np.where(diag > 0.0, diag, 1.0)), 1.0)
    weight = np.outer(scale, scale)
    denom = np.trace(total * weight)
    shares = {}
    for t in terms:
        part = t.transform @ t.info @ t.transform.T
        shares[t.label] = float(np.trace(part * weight) / denom) if denom > 0 else 0.0
    return shares


def _subsets(selector: SelectorSpec, n_gnbs: int, n_sats: int
             ) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    if selector.sweep_all:
        combos = []
        g_all = range(n_gnbs)
        s_all = range(n_sats)
        g_subsets = [c for r in range(n_gnbs + 1) for c in combinations(g_all, r)]
        s_subsets = [c for r in range(n_sats + 1) for c in combinations(s_all, r)]
        for g in g_subsets:
            for s in s_subsets:
                if g or s:
                    combos.append((g, s))
        combos.sort(key=lambda gs: (len(gs[0]), len(gs[1]), gs))
        return combos
    g = tuple(selector.gnb_indices) if selector.gnb_indices is not None \
        else tuple(range(n_gnbs))
    s = tuple(selector.sat_indices) if selector.sat_indices is not None \
        else tuple(range(n_sats))
    return [(g, s)]


def _subset_label(gnb_indices: tuple[int, ...], sat_indices: tuple[int, ...]) -> str:
    g = "+".join(f"g{i}" for i in gnb_indices) or "g-"
    s = "+".join(f"s{i}" for i in sat_indices) or "s-"
    return f"{g}|{s}"


def evaluate(spec: ScenarioSpec, selector: SelectorSpec | None = None
             ) -> list[ResultRow]:
    """Evaluate the selected anchor subsets of a scenario.

    Per-anchor information matrices are computed once and reused across
    subsets.  A failing subset yields an infeasible row instead of aborting
    the sweep.
    """
    selector = selector or SelectorSpec()
    evaluator = ScenarioEvaluator(spec)
    rows = []
    for g_idx, s_idx in _subsets(selector, len(spec.gnbs), len(spec.satellites)):
        t0 = time.perf_counter()
        try:
            rep = evaluator.report(g_idx, s_idx)
            cond = rep.condition_number if np.isfinite(rep.condition_number) else None
            row = ResultRow(
                scenario=spec.name,
                gnb_count=len(g_idx),
                sat_count=len(s_idx),
                subset=_subset_label(g_idx, s_idx),
                peb_m=rep.peb_m,
                veb_mps=rep.veb_mps,
                feasible=rep.feasible,
                rank=rep.rank,
                condition_number=cond,
                wallclock_s=time.perf_counter() - t0,
            )
        except (HybridPosError, ValueError, np.linalg.LinAlgError):
            row = ResultRow(
                scenario=spec.name,
                gnb_count=len(g_idx),
                sat_count=len(s_idx),
                subset=_subset_label(g_idx, s_idx),
                peb_m=None, veb_mps=None, feasible=False, rank=0,
                condition_number=None,
                wallclock_s=time.perf_counter() - t0,
            )
        rows.append(row)
    return rows


_CSV_COLUMNS = ("scenario", "gnb_count", "sat_count", "subset", "peb_m",
                "veb_mps", "feasible", "rank", "cond", "wallclock_s")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def emit(rows: list[ResultRow], fmt: str, path: str | Path) -> None:
    """Write result rows as CSV (fixed column order) or JSON."""
    if not rows:
        raise ValueError("no result rows to emit")
    path = Path(path)
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(_CSV_COLUMNS)
            for r in rows:
                writer.writerow([
                    r.scenario, r.gnb_count, r.sat_count, r.subset,
                    _fmt(r.peb_m), _fmt(r.veb_mps), _fmt(r.feasible),
                    r.rank, _fmt(r.condition_number), _fmt(r.wallclock_s),
                ])
    elif fmt == "json":
        with open(path, "w") as fh:
            json.dump([r.model_dump(mode="json") for r in rows], fh, indent=2)
            fh.write("\n")
    else:
        raise ValueError(f"unknown output format {fmt!r}")
