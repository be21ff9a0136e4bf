import json

import numpy as np
import pytest

from cogmimo.cli import (
    EXIT_CONFIG,
    EXIT_INFEASIBLE,
    EXIT_OK,
    main,
)
from cogmimo.selection import SelectionPair
from cogmimo.sensing import load_covariance

SCENE = {
    "m": 6,
    "seed": 11,
    "sources": [
        {"kind": "target", "angle_deg": 65, "power_db": 20},
        {"kind": "deceptive", "angle_deg": 120, "power_db": 15},
    ],
    "selector": {"num_selected": 2},
    "sensing": {"block_size": 3, "pulses": 50},
    "timeline": [
        {
            "start_pulse": 20,
            "sources": [
                {"kind": "target", "angle_deg": 65, "power_db": 20},
                {"kind": "deceptive", "angle_deg": 120, "power_db": 15},
                {"kind": "deceptive", "angle_deg": 68, "power_db": 20},
            ],
        }
    ],
}


@pytest.fixture
def scene_path(tmp_path):
    path = tmp_path / "scene.json"
    path.write_text(json.dumps(SCENE))
    return str(path)


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path / "out")])


class TestSimulate:
    def test_writes_snapshots(self, tmp_path, scene_path):
        assert run(tmp_path, "simulate", "--config", scene_path, "--pulses", "3") == EXIT_OK
        lines = (tmp_path / "out" / "snapshots.csv").read_text().splitlines()
        assert lines[0] == "pulse,virtual_index,real,imag"
        assert len(lines) == 1 + 3 * 36

    def test_default_pulse_count(self, tmp_path, scene_path):
        assert run(tmp_path, "simulate", "--config", scene_path) == EXIT_OK
        lines = (tmp_path / "out" / "snapshots.csv").read_text().splitlines()
        assert len(lines) == 1 + 10 * 36

    def test_zero_pulses_is_config_error(self, tmp_path, scene_path):
        code = run(tmp_path, "simulate", "--config", scene_path, "--pulses", "0")
        assert code == EXIT_CONFIG


class TestSense:
    def test_dumps_loadable_covariance(self, tmp_path, scene_path):
        assert run(tmp_path, "sense", "--config", scene_path) == EXIT_OK
        cov, meta = load_covariance(str(tmp_path / "out" / "covariance.txt"))
        mat = cov.matrix
        assert mat.shape == (36, 36)
        assert np.allclose(mat, mat.conj().T)
        assert meta["m"] == 6

    def test_same_seed_same_bytes(self, tmp_path, scene_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        assert main(["sense", "--config", scene_path, "--out", str(a)]) == EXIT_OK
        assert main(["sense", "--config", scene_path, "--out", str(b)]) == EXIT_OK
        assert (a / "covariance.txt").read_bytes() == (b / "covariance.txt").read_bytes()

    def test_seed_override_changes_estimate(self, tmp_path, scene_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        main(["sense", "--config", scene_path, "--out", str(a)])
        main(["sense", "--config", scene_path, "--out", str(b), "--seed", "99"])
        assert (a / "covariance.txt").read_bytes() != (b / "covariance.txt").read_bytes()


class TestSelect:
    def test_selection_is_isolated(self, tmp_path, scene_path):
        assert run(tmp_path, "select", "--config", scene_path) == EXIT_OK
        header, row = (tmp_path / "out" / "selection.csv").read_text().splitlines()
        assert header == "tx_indices,rx_indices,iterations,converged,sinr_db"
        tx_s, rx_s, _, _, sinr_s = row.split(",")
        tx = [int(v) for v in tx_s.split(";")]
        rx = [int(v) for v in rx_s.split(";")]
        pair = SelectionPair(
            c=np.isin(np.arange(6), tx).astype(int),
            r=np.isin(np.arange(6), rx).astype(int),
        )
        assert pair.satisfies_isolation()
        assert np.isfinite(float(sinr_s))

    def test_infeasible_cardinality_exit_code(self, tmp_path, scene_path):
        payload = dict(SCENE, selector={"num_selected": 3})
        path = tmp_path / "tight.json"
        path.write_text(json.dumps(payload))
        assert run(tmp_path, "select", "--config", str(path)) == EXIT_INFEASIBLE


class TestCycle:
    def test_writes_trace_and_configs(self, tmp_path, scene_path):
        code = run(tmp_path, "cycle", "--config", scene_path, "--pulses", "40")
        assert code == EXIT_OK
        trace = (tmp_path / "out" / "trace.csv").read_text().splitlines()
        assert trace[0] == "pulse,phase,sinr_db,event"
        assert len(trace) == 1 + 40
        configs = (tmp_path / "out" / "configs.csv").read_text().splitlines()
        assert configs[0].startswith("label,pulse,tx_indices,rx_indices")
        assert any(line.startswith("initial") for line in configs[1:])


class TestErrorPaths:
    def test_missing_config_file(self, tmp_path):
        code = run(tmp_path, "sense", "--config", str(tmp_path / "ghost.json"))
        assert code == EXIT_CONFIG

    def test_unknown_config_key(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(dict(SCENE, extra=1)))
        assert run(tmp_path, "sense", "--config", str(path)) == EXIT_CONFIG

    def test_invalid_source_kind(self, tmp_path):
        payload = dict(
            SCENE, sources=[{"kind": "mystery", "angle_deg": 65, "power_db": 20}]
        )
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(payload))
        assert run(tmp_path, "sense", "--config", str(path)) == EXIT_CONFIG

    def test_missing_required_flag(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["sense"])
        assert excinfo.value.code == 2

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["transmogrify"])
        assert excinfo.value.code == 2

    def test_bad_seed_rejected_by_parser(self, scene_path):
        with pytest.raises(SystemExit) as excinfo:
            main(["sense", "--config", scene_path, "--seed", "-1"])
        assert excinfo.value.code == 2
