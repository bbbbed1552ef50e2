import json

import numpy as np
import pytest

from hybridpos import geometry
from hybridpos.errors import (ScenarioParseError, ScenarioValidationError,
                              UnknownScenarioError)
from hybridpos.scenario import (builtin_scenario, emit, evaluate,
                                load_scenario, save_scenario)
from hybridpos.schemas import ScenarioSpec, SectorSpec, SelectorSpec

DEG = np.pi / 180.0


def tiny_scenario(n_sats=4, n_gnbs=1, k=16, m=8) -> ScenarioSpec:
    """Down-scaled scenario for fast pipeline tests."""
    spec = builtin_scenario("A")
    data = spec.model_dump()
    data["name"] = "tiny"
    data["gnbs"] = data["gnbs"][:n_gnbs]
    for g in data["gnbs"]:
        g["ofdm"].update(subcarrier_count=k, symbol_count=m, beam_count=4)
        g["array"].update(nx=4, ny=4)
    data["av"]["array"].update(nx=2, ny=2)
    data["satellites"] = data["satellites"][:n_sats]
    return ScenarioSpec.model_validate(data)


class TestBuiltins:
    def test_scenario_a_satellite_placement(self):
        spec = builtin_scenario("A")
        expected = geometry.spherical_to_cartesian(20.2e6, 35.2 * DEG, 45.0 * DEG)
        assert np.allclose(spec.satellites[0].position_m, expected, rtol=1e-12)
        assert len(spec.satellites) == 4 and len(spec.gnbs) == 2

    def test_scenario_b_narrow_azimuth(self):
        spec = builtin_scenario("B")
        for sat in spec.satellites:
            _, _, phi = geometry.cartesian_to_spherical(np.array(sat.position_m))
            assert abs(phi) <= 0.7 * DEG

    def test_av_state(self):
        spec = builtin_scenario("A")
        assert spec.av.position_m == (10.0, 0.0, 1.5)
        assert spec.av.velocity_mps[0] == pytest.approx(50.0 / 3.6)
        assert spec.av.array.nx == 8 and spec.av.array.boresight == "+z"

    def test_gnb_parameters(self):
        spec = builtin_scenario("A")
        g = spec.gnbs[0]
        assert g.position_m == (0.0, 0.0, 7.0)
        assert g.carrier_freq_hz == 38.0e9
        assert g.ofdm.subcarrier_count == 1024
        assert g.ofdm.symbol_count == 1000
        assert g.ofdm.subcarrier_spacing_hz * 1024 == pytest.approx(125e6)
        assert g.array.nx == 12
        assert spec.gnbs[1].array.boresight == "+y"

    def test_satellite_speeds(self):
        for name in ("A", "B"):
            spec = builtin_scenario(name)
            av = np.array(spec.av.position_m)
            for sat in spec.satellites:
                v = np.array(sat.velocity_mps)
                assert np.linalg.norm(v) == pytest.approx(3.9e3, rel=1e-9)
                radial = np.array(sat.position_m) - av
                radial /= np.linalg.norm(radial)
                assert np.dot(v, radial) == pytest.approx(1.0e3, rel=1e-9)

    def test_configurable_height_and_seed(self):
        spec = builtin_scenario("A", av_height_m=2.0, satellite_seed=7)
        assert spec.av.position_m[2] == 2.0
        assert spec.satellite_velocity_seed == 7
        again = builtin_scenario("A", av_height_m=2.0, satellite_seed=7)
        assert spec == again

    def test_unknown_name(self):
        with pytest.raises(UnknownScenarioError):
            builtin_scenario("C")


class TestFileRoundTrip:
    def test_save_load_identity(self, tmp_path):
        spec = builtin_scenario("A")
        path = tmp_path / "a.yaml"
        save_scenario(spec, path)
        assert load_scenario(path) == spec

    def test_missing_field_names_it(self, tmp_path):
        spec = builtin_scenario("A")
        data = spec.model_dump()
        del data["satellites"][0]["carrier_freq_hz"]
        path = tmp_path / "bad.yaml"
        import yaml
        path.write_text(yaml.safe_dump(data))
        with pytest.raises(ScenarioValidationError, match="carrier_freq_hz"):
            load_scenario(path)

    def test_unknown_key_named(self, tmp_path):
        spec = builtin_scenario("A")
        data = spec.model_dump()
        data["av"]["altitude_m"] = 3.0
        path = tmp_path / "bad.yaml"
        import yaml
        path.write_text(yaml.safe_dump(data))
        with pytest.raises(ScenarioParseError, match="altitude_m"):
            load_scenario(path)

    def test_yaml_syntax_error_has_location(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("name: x\nav: {position_m: [1, 2\n")
        with pytest.raises(ScenarioParseError, match="line"):
            load_scenario(path)

    def test_anchorless_scenario_rejected(self, tmp_path):
        spec = builtin_scenario("A")
        data = spec.model_dump()
        data["gnbs"] = []
        data["satellites"] = []
        import yaml
        path = tmp_path / "none.yaml"
        path.write_text(yaml.safe_dump(data))
        with pytest.raises(ScenarioValidationError):
            load_scenario(path)


class TestEvaluate:
    def test_deterministic(self):
        spec = tiny_scenario()
        sel = SelectorSpec(gnb_indices=[0], sat_indices=[0, 1, 2, 3])
        r1 = evaluate(spec, sel)[0]
        r2 = evaluate(spec, sel)[0]
        assert r1.peb_m == r2.peb_m and r1.veb_mps == r2.veb_mps

    def test_three_satellites_infeasible(self):
        rows = evaluate(tiny_scenario(), SelectorSpec(gnb_indices=[], sat_indices=[0, 1, 2]))
        assert not rows[0].feasible
        assert rows[0].peb_m is None and rows[0].veb_mps is None
        assert rows[0].rank <= 6

    def test_four_satellites_feasible(self):
        rows = evaluate(tiny_scenario(), SelectorSpec(gnb_indices=[], sat_indices=None))
        r = rows[0]
        assert r.feasible and r.rank == 7
        assert r.peb_m > 0 and r.veb_mps > 0
        assert r.condition_number is not None

    def test_sweep_all_covers_subsets(self):
        spec = tiny_scenario(n_sats=2, n_gnbs=1)
        rows = evaluate(spec, SelectorSpec(sweep_all=True))
        assert len(rows) == 2 ** 1 * 2 ** 2 - 1
        labels = {r.subset for r in rows}
        assert "g0|s-" in labels and "g0|s0+s1" in labels and "g-|s0" in labels

    def test_subset_monotonicity(self):
        spec = tiny_scenario()
        small = evaluate(spec, SelectorSpec(gnb_indices=[0], sat_indices=[0, 1, 2]))[0]
        large = evaluate(spec, SelectorSpec(gnb_indices=[0], sat_indices=[0, 1, 2, 3]))[0]
        assert small.feasible and large.feasible
        assert large.peb_m <= small.peb_m * (1 + 1e-9)
        assert large.veb_mps <= small.veb_mps * (1 + 1e-9)

    def test_bad_index_marks_row_failed(self):
        rows = evaluate(tiny_scenario(), SelectorSpec(gnb_indices=[5], sat_indices=[]))
        assert len(rows) == 1
        assert not rows[0].feasible and rows[0].peb_m is None

    def test_ici_truncation_insensitive_at_operating_point(self):
        # halfwidth 1 vs untruncated changes the bound by under 1% when the
        # symbol count exceeds the subcarrier count (as at full scale, where
        # the symbol-index ramp dominates the Doppler derivative)
        spec_trunc = tiny_scenario(k=16, m=64)
        data = spec_trunc.model_dump()
        data["gnbs"][0]["ofdm"]["ici_halfwidth"] = 8  # K/2: untruncated
        spec_full = ScenarioSpec.model_validate(data)
        sel = SelectorSpec(gnb_indices=[0], sat_indices=[0, 1, 2, 3])
        peb_trunc = evaluate(spec_trunc, sel)[0].peb_m
        peb_full = evaluate(spec_full, sel)[0].peb_m
        assert abs(peb_trunc - peb_full) / peb_full < 0.01


class TestEmit:
    def _rows(self):
        spec = tiny_scenario(n_sats=4, n_gnbs=0)
        return (evaluate(spec, SelectorSpec(sat_indices=[0, 1, 2, 3]))
                + evaluate(spec, SelectorSpec(sat_indices=[0, 1, 2])))

    def test_csv_contract(self, tmp_path):
        rows = self._rows()
        path = tmp_path / "out.csv"
        emit(rows, "csv", path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == ("scenario,gnb_count,sat_count,subset,peb_m,veb_mps,"
                            "feasible,rank,cond,wallclock_s")
        assert len(lines) == 3
        feasible_fields = lines[1].split(",")
        assert feasible_fields[6] == "true"
        # six significant digits
        assert len(feasible_fields[4].replace(".", "").replace("-", "").lstrip("0")) <= 7
        infeasible_fields = lines[2].split(",")
        assert infeasible_fields[4] == "" and infeasible_fields[5] == ""
        assert infeasible_fields[6] == "false"

    def test_single_row_csv(self, tmp_path):
        rows = self._rows()[:1]
        path = tmp_path / "one.csv"
        emit(rows, "csv", path)
        assert len(path.read_text().strip().split("\n")) == 2

    def test_json_mirrors_fields(self, tmp_path):
        rows = self._rows()
        path = tmp_path / "out.json"
        emit(rows, "json", path)
        data = json.loads(path.read_text())
        assert data[0]["scenario"] == "tiny"
        assert set(data[0]) == {"scenario", "gnb_count", "sat_count", "subset",
                                "peb_m", "veb_mps", "feasible", "rank",
                                "condition_number", "wallclock_s"}
        assert data[1]["peb_m"] is None and data[1]["veb_mps"] is None

    def test_empty_rows_rejected(self, tmp_path):
        path = tmp_path / "never.csv"
        with pytest.raises(ValueError):
            emit([], "csv", path)
        assert not path.exists()


class TestSectorResolution:
    def test_los_center_changes_codebook(self):
        spec = tiny_scenario()
        data = spec.model_dump()
        data["gnbs"][0]["rx_sector"] = SectorSpec(center="boresight").model_dump()
        spec_bore = ScenarioSpec.model_validate(data)
        sel = SelectorSpec(gnb_indices=[0], sat_indices=[0, 1, 2, 3])
        r_los = evaluate(spec, sel)[0]
        r_bore = evaluate(spec_bore, sel)[0]
        assert r_los.peb_m != r_bore.peb_m
