import json
import math

import pytest

from cogmimo.config import (
    geometry_from_config,
    load_config,
    policy_from_config,
    scenario_from_config,
    selector_from_config,
    sensing_from_config,
    timeline_from_config,
)
from cogmimo.errors import ConfigError


MINIMAL = {
    "m": 6,
    "sources": [{"kind": "target", "angle_deg": 65, "power_db": 20}],
}


def write(tmp_path, payload, name="scene.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


class TestLoadConfig:
    def test_round_trips_valid_json(self, tmp_path):
        raw = load_config(write(tmp_path, MINIMAL))
        assert raw["m"] == 6

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(str(tmp_path / "nope.json"))

    def test_syntax_error(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_config(str(path))

    def test_non_object_root(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError, match="root must be an object"):
            load_config(str(path))

    def test_unknown_top_level_key(self, tmp_path):
        payload = dict(MINIMAL, trasnmitters=4)
        with pytest.raises(ConfigError, match="trasnmitters"):
            load_config(write(tmp_path, payload))


class TestGeometry:
    def test_defaults_spacing_to_half_wavelength(self):
        geom = geometry_from_config(dict(MINIMAL))
        assert geom.num_antennas == 6
        assert geom.spacing_wavelengths == 0.5

    def test_m_required(self):
        with pytest.raises(ConfigError, match="'m'"):
            geometry_from_config({"sources": []})

    def test_m_must_be_integer(self):
        with pytest.raises(ConfigError, match="integer"):
            geometry_from_config({"m": 6.5})

    def test_bad_geometry_wrapped(self):
        with pytest.raises(ConfigError, match="invalid geometry"):
            geometry_from_config({"m": 1})


class TestScenario:
    def test_builds_scene_with_defaults(self):
        sc = scenario_from_config(dict(MINIMAL))
        assert sc.signal_power == 1.0
        assert sc.noise_power == 1.0
        assert sc.rng_seed == 0
        assert sc.target.angle_deg == 65.0

    def test_seed_and_powers_flow_through(self):
        payload = dict(MINIMAL, seed=123, sigma_s2=2.0, noise_power=0.5)
        sc = scenario_from_config(payload)
        assert sc.rng_seed == 123
        assert sc.signal_power == 2.0
        assert sc.noise_power == 0.5

    def test_sources_required(self):
        with pytest.raises(ConfigError, match="'sources'"):
            scenario_from_config({"m": 6})

    def test_sources_must_be_nonempty_list(self):
        with pytest.raises(ConfigError, match="non-empty"):
            scenario_from_config(dict(MINIMAL, sources=[]))

    def test_source_entry_unknown_key(self):
        payload = dict(
            MINIMAL,
            sources=[{"kind": "target", "angle_deg": 65, "power_db": 20, "snr": 3}],
        )
        with pytest.raises(ConfigError, match=r"sources\[0\]"):
            scenario_from_config(payload)

    def test_source_entry_missing_key(self):
        payload = dict(MINIMAL, sources=[{"kind": "target", "angle_deg": 65}])
        with pytest.raises(ConfigError, match="missing"):
            scenario_from_config(payload)

    def test_minus_inf_power_string(self):
        payload = dict(
            MINIMAL,
            sources=[
                {"kind": "target", "angle_deg": 65, "power_db": 20},
                {"kind": "deceptive", "angle_deg": 50, "power_db": "-inf"},
            ],
        )
        sc = scenario_from_config(payload)
        assert sc.sources[1].power_db == -math.inf
        assert sc.sources[1].power_linear() == 0.0

    def test_other_power_strings_rejected(self):
        payload = dict(
            MINIMAL,
            sources=[{"kind": "target", "angle_deg": 65, "power_db": "loud"}],
        )
        with pytest.raises(ConfigError, match="'-inf'"):
            scenario_from_config(payload)

    def test_bad_kind_wrapped(self):
        payload = dict(
            MINIMAL, sources=[{"kind": "sneaky", "angle_deg": 65, "power_db": 20}]
        )
        with pytest.raises(ConfigError):
            scenario_from_config(payload)

    def test_two_targets_rejected(self):
        payload = dict(
            MINIMAL,
            sources=[
                {"kind": "target", "angle_deg": 65, "power_db": 20},
                {"kind": "target", "angle_deg": 75, "power_db": 20},
            ],
        )
        with pytest.raises(ConfigError, match="invalid scenario"):
            scenario_from_config(payload)


class TestSelector:
    def test_defaults(self):
        cfg = selector_from_config({})
        assert cfg.num_selected == 4

    def test_overrides(self):
        cfg = selector_from_config(
            {"selector": {"num_selected": 2, "refine_budget": 0}}
        )
        assert cfg.num_selected == 2
        assert cfg.refine_budget == 0

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="selector block"):
            selector_from_config({"selector": {"cardinality": 4}})

    def test_invalid_value_wrapped(self):
        with pytest.raises(ConfigError, match="invalid selector"):
            selector_from_config({"selector": {"num_selected": 0}})


class TestPolicy:
    def test_defaults(self):
        pol = policy_from_config({})
        assert pol.drop_threshold_db == 3.0
        assert pol.sensing_pulses == 2000

    def test_sensing_pulses_feed_policy(self):
        pol = policy_from_config({"sensing": {"pulses": 500}})
        assert pol.sensing_pulses == 500

    def test_explicit_policy_beats_sensing_block(self):
        pol = policy_from_config(
            {"sensing": {"pulses": 500}, "policy": {"sensing_pulses": 50}}
        )
        assert pol.sensing_pulses == 50

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="policy block"):
            policy_from_config({"policy": {"threshold": 3}})

    def test_invalid_value_wrapped(self):
        with pytest.raises(ConfigError, match="invalid policy"):
            policy_from_config({"policy": {"drop_threshold_db": -1}})


class TestSensing:
    def test_defaults(self):
        size, pulses, backend = sensing_from_config({})
        assert size == "auto"
        assert pulses == 2000
        assert backend is None

    def test_explicit_block(self):
        size, pulses, backend = sensing_from_config(
            {"sensing": {"block_size": 3, "pulses": 100, "backend": "python"}}
        )
        assert size == 3
        assert pulses == 100
        assert backend == "python"

    def test_null_block_means_full_array(self):
        size, _, _ = sensing_from_config({"sensing": {"block_size": None}})
        assert size is None

    def test_bad_block_size(self):
        with pytest.raises(ConfigError, match="block_size"):
            sensing_from_config({"sensing": {"block_size": "big"}})

    def test_bad_pulses(self):
        with pytest.raises(ConfigError, match="pulses"):
            sensing_from_config({"sensing": {"pulses": 0}})

    def test_bad_backend(self):
        with pytest.raises(ConfigError, match="backend"):
            sensing_from_config({"sensing": {"backend": "fortran"}})


class TestTimeline:
    SECOND = [
        {
            "start_pulse": 400,
            "sources": [
                {"kind": "target", "angle_deg": 65, "power_db": 20},
                {"kind": "deceptive", "angle_deg": 63, "power_db": 15},
            ],
        }
    ]

    def test_base_scene_starts_at_zero(self):
        entries = timeline_from_config(dict(MINIMAL))
        assert len(entries) == 1
        assert entries[0][0] == 0

    def test_entries_appended_in_order(self):
        entries = timeline_from_config(dict(MINIMAL, timeline=self.SECOND))
        assert [p for p, _ in entries] == [0, 400]
        assert len(entries[1][1].sources) == 2

    def test_timeline_must_be_array(self):
        with pytest.raises(ConfigError, match="must be an array"):
            timeline_from_config(dict(MINIMAL, timeline={"start_pulse": 5}))

    def test_entry_needs_both_keys(self):
        with pytest.raises(ConfigError, match="start_pulse"):
            timeline_from_config(dict(MINIMAL, timeline=[{"start_pulse": 4}]))

    def test_start_pulse_must_be_positive(self):
        bad = [dict(self.SECOND[0], start_pulse=0)]
        with pytest.raises(ConfigError, match="positive"):
            timeline_from_config(dict(MINIMAL, timeline=bad))

    def test_duplicate_starts_rejected(self):
        with pytest.raises(ConfigError, match="distinct"):
            timeline_from_config(dict(MINIMAL, timeline=self.SECOND + self.SECOND))
