import numpy as np
import pytest

from cogmimo.errors import (
    AssemblyConsistencyError,
    DomainError,
    MissingBlockError,
)
from cogmimo.model import Scenario, SourceDescriptor, oracle_covariance
from cogmimo.sensing import (
    HAVE_ACCEL,
    active_backend,
    assemble_hankel,
    build_schedule,
    default_block_size,
    load_covariance,
    required_blocks,
    save_covariance,
    sense_full_covariance,
)
from cogmimo.waveforms import (
    draw_reflections,
    generate_waveforms,
    matched_filter,
    pulse_rng,
    simulate_pulse,
)


class TestSchedule:
    def test_block_count_and_order(self, geom6):
        sched = build_schedule(geom6, 2, 65.0)
        assert sched.num_blocks == 3
        assert sched.num_collections == 2 * 3 - 1
        ids = [(e.block_row, e.block_col) for e in sched.entries]
        assert ids == list(required_blocks(6, 2))

    def test_corner_collections_rotate(self, geom6):
        sched = build_schedule(geom6, 2, 65.0)
        rot = {
            (e.block_row, e.block_col): e.tx_phase_rotation for e in sched.entries
        }
        # The two corner collections carry conjugate rotations; the rest none.
        assert rot[(1, 1)] == np.conj(rot[(3, 3)])
        assert rot[(1, 1)] != 1.0 + 0.0j
        assert all(
            v == 1.0 + 0.0j
            for k, v in rot.items()
            if k not in ((1, 1), (3, 3))
        )

    def test_indivisible_block_rejected(self, geom6):
        with pytest.raises(DomainError):
            build_schedule(geom6, 4, 65.0)

    def test_single_block_rejected(self, geom6):
        with pytest.raises(DomainError):
            build_schedule(geom6, 6, 65.0)

    def test_default_block_size(self):
        assert default_block_size(18) == 3
        assert default_block_size(4) == 2
        assert default_block_size(16) == 4
        # A prime count cannot be multiplexed at all.
        assert default_block_size(7) is None


def _direct_snapshot(geom, scenario, wf, pulse):
    rng = pulse_rng(scenario, pulse)
    refl = draw_reflections(scenario, rng)
    snap = simulate_pulse(
        geom,
        scenario,
        wf,
        range(geom.num_antennas),
        range(geom.num_antennas),
        pulse,
        reflections=refl,
        rng=rng,
    )
    return matched_filter(snap, wf)


class TestAssembly:
    def _extract_blocks(self, y, m, n):
        blocks = {}
        for i, j in required_blocks(m, n):
            rows = slice((i - 1) * n, i * n)
            cols = slice((j - 1) * n, j * n)
            blocks[(i, j)] = y[rows, cols]
        return blocks

    def test_extraction_assembly_identity(self, geom6, basic_scene):
        # Noise and coexisting emissions break the anti-diagonal structure,
        # so the identity is asserted on the fluctuating part of the scene.
        import dataclasses

        quiet = dataclasses.replace(
            basic_scene,
            noise_power=0.0,
            sources=tuple(s for s in basic_scene.sources if s.kind != "coexisting"),
        )
        wf = generate_waveforms(6, code_length=64)
        y = _direct_snapshot(geom6, quiet, wf, 0)
        rebuilt = assemble_hankel(self._extract_blocks(y, 6, 2), 6, 2)
        assert np.allclose(rebuilt, y, atol=1e-12)

    def test_missing_block(self):
        blocks = {k: np.zeros((2, 2)) for k in required_blocks(6, 2)}
        del blocks[(1, 2)]
        with pytest.raises(MissingBlockError):
            assemble_hankel(blocks, 6, 2)

    def test_wrong_block_shape(self):
        blocks = {k: np.zeros((2, 2)) for k in required_blocks(6, 2)}
        blocks[(1, 2)] = np.zeros((3, 3))
        with pytest.raises(DomainError):
            assemble_hankel(blocks, 6, 2)

    def test_consistency_check_fires(self, geom6):
        sc = Scenario(
            sources=(SourceDescriptor("target", 65.0, 20.0),), noise_power=0.0
        )
        wf = generate_waveforms(6, code_length=64)
        y = _direct_snapshot(geom6, sc, wf, 0)
        blocks = self._extract_blocks(y, 6, 2)
        blocks[(1, 2)] = blocks[(1, 2)] + 0.5
        with pytest.raises(AssemblyConsistencyError):
            assemble_hankel(blocks, 6, 2, consistency_tol=1e-6)

    def test_consistency_check_passes_clean(self, geom6):
        sc = Scenario(
            sources=(SourceDescriptor("target", 65.0, 20.0),), noise_power=0.0
        )
        wf = generate_waveforms(6, code_length=64)
        y = _direct_snapshot(geom6, sc, wf, 0)
        rebuilt = assemble_hankel(
            self._extract_blocks(y, 6, 2), 6, 2, consistency_tol=1e-9
        )
        assert np.allclose(rebuilt, y, atol=1e-12)


class TestSenseFullCovariance:
    def test_full_array_converges(self, geom4):
        sc = Scenario(
            sources=(SourceDescriptor("target", 65.0, 10.0),), rng_seed=3
        )
        wf = generate_waveforms(4, code_length=32)
        est = sense_full_covariance(geom4, sc, wf, None, 3000)
        ref = oracle_covariance(geom4, sc).matrix
        rel = np.linalg.norm(est.matrix - ref) / np.linalg.norm(ref)
        assert rel < 5.0 / np.sqrt(3000)
        assert est.num_pulses == 3000

    def test_multiplexed_matches_oracle_at_look(self, geom4):
        sc = Scenario(
            sources=(SourceDescriptor("target", 65.0, 10.0),), rng_seed=4
        )
        wf = generate_waveforms(4, code_length=32)
        est = sense_full_covariance(
            geom4, sc, wf, 2, 3000, look_angle_deg=65.0
        )
        ref = oracle_covariance(geom4, sc).matrix
        rel = np.linalg.norm(est.matrix - ref) / np.linalg.norm(ref)
        assert rel < 5.0 / np.sqrt(3000)

    def test_look_angle_defaults_to_target(self, geom4, basic_scene):
        wf = generate_waveforms(4, code_length=32)
        implicit = sense_full_covariance(geom4, basic_scene, wf, 2, 20)
        explicit = sense_full_covariance(
            geom4, basic_scene, wf, 2, 20,
            look_angle_deg=basic_scene.target.angle_deg,
        )
        assert np.array_equal(implicit.matrix, explicit.matrix)

    def test_hermitian_output(self, geom4, basic_scene):
        wf = generate_waveforms(4, code_length=32)
        est = sense_full_covariance(
            geom4, basic_scene, wf, 2, 50, look_angle_deg=65.0
        )
        assert np.allclose(est.matrix, est.matrix.conj().T)

    @pytest.mark.skipif(not HAVE_ACCEL, reason="compiled backend not built")
    def test_backend_parity(self, geom6, basic_scene):
        wf = generate_waveforms(6, code_length=32)
        kw = dict(look_angle_deg=65.0)
        a = sense_full_covariance(geom6, basic_scene, wf, 2, 60, backend="accel", **kw)
        b = sense_full_covariance(geom6, basic_scene, wf, 2, 60, backend="python", **kw)
        scale = np.abs(b.matrix).max()
        assert np.abs(a.matrix - b.matrix).max() <= 1e-12 * scale

    def test_unknown_backend(self, geom4, basic_scene):
        wf = generate_waveforms(4)
        with pytest.raises(DomainError):
            sense_full_covariance(
                geom4, basic_scene, wf, 2, 10, look_angle_deg=65.0, backend="cuda"
            )

    def test_env_forces_python(self, monkeypatch):
        monkeypatch.setenv("COGMIMO_PURE_PYTHON", "1")
        assert active_backend() == "python"


class TestCovarianceIO:
    def test_roundtrip(self, tmp_path, geom4, basic_scene):
        wf = generate_waveforms(4, code_length=32)
        est = sense_full_covariance(
            geom4, basic_scene, wf, 2, 40, look_angle_deg=65.0
        )
        path = tmp_path / "cov.txt"
        save_covariance(path, est, num_antennas=4, block_size=2)
        loaded, meta = load_covariance(path)
        assert np.array_equal(loaded.matrix, est.matrix)
        assert meta["m"] == 4
        assert meta["n"] == 2
        assert loaded.num_pulses == 40

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "junk.txt"
        path.write_text("not a dump\n")
        with pytest.raises(DomainError):
            load_covariance(path)
