import numpy as np
import pytest

from cogmimo.beamforming import BeamformerSolution, output_sinr
from cogmimo.cognition import (
    PHASE_LEARNING,
    PHASE_OPERATING,
    PHASE_SENSING,
    TriggerPolicy,
    evaluate_current,
    run_cycle,
)
from cogmimo.errors import DomainError, InfeasibleSelectionError
from cogmimo.model import (
    ArrayGeometry,
    Scenario,
    SourceDescriptor,
    oracle_covariance,
)
from cogmimo.selection import SelectionPair, SelectorConfig, SelectorSession
from conftest import random_scene


def _scene(angle, interferers, seed=0):
    sources = [SourceDescriptor("target", angle, 20.0)]
    sources += [SourceDescriptor("deceptive", a, p) for a, p in interferers]
    return Scenario(sources=tuple(sources), rng_seed=seed)


class TestTriggerPolicy:
    def test_defaults_are_valid(self):
        pol = TriggerPolicy()
        assert pol.drop_threshold_db == 3.0
        assert pol.reference_window == 50

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"drop_threshold_db": 0.0},
            {"drop_threshold_db": -1.0},
            {"reference_window": 0},
            {"sensing_pulses": 0},
            {"learning_pulses": 0},
        ],
    )
    def test_rejects_bad_fields(self, kwargs):
        with pytest.raises(DomainError):
            TriggerPolicy(**kwargs)


class TestEvaluateCurrent:
    def test_delegates_to_output_sinr(self, geom6):
        sc = _scene(65.0, [(120.0, 15.0)])
        pair = SelectionPair(
            c=np.array([0, 0, 1, 1, 0, 0]), r=np.array([1, 0, 0, 0, 0, 1])
        )
        weights = np.full(4, 0.5 + 0.1j)
        sol = BeamformerSolution(weights=weights, look_angle_deg=65.0)
        assert evaluate_current(geom6, sol, pair, sc) == output_sinr(
            weights, sc, geom6, pair
        )

    def test_stale_weights_lose_to_fresh_capon(self, geom6):
        session = SelectorSession(geom6, SelectorConfig(num_selected=2))
        old = _scene(90.0, [(130.0, 15.0)])
        new = _scene(90.0, [(130.0, 15.0), (95.0, 25.0)])
        stale = session.select(oracle_covariance(geom6, old), 90.0)
        fresh = session.select(oracle_covariance(geom6, new), 90.0)
        worn = evaluate_current(geom6, stale.solution, stale.pair, new)
        crisp = evaluate_current(geom6, fresh.solution, fresh.pair, new)
        assert crisp > worn


class TestRunCycleValidation:
    def test_total_pulses_must_be_positive(self, geom6):
        sc = _scene(90.0, [])
        with pytest.raises(DomainError):
            run_cycle(geom6, [(0, sc)], 0, TriggerPolicy(), SelectorConfig(num_selected=2))

    def test_timeline_must_start_at_zero(self, geom6):
        sc = _scene(90.0, [])
        with pytest.raises(DomainError):
            run_cycle(geom6, [(5, sc)], 10, TriggerPolicy(), SelectorConfig(num_selected=2))

    def test_empty_timeline_rejected(self, geom6):
        with pytest.raises(DomainError):
            run_cycle(geom6, [], 10, TriggerPolicy(), SelectorConfig(num_selected=2))

    def test_duplicate_switch_pulses_rejected(self, geom6):
        a = _scene(90.0, [])
        b = _scene(90.0, [(120.0, 15.0)])
        with pytest.raises(DomainError):
            run_cycle(
                geom6,
                [(0, a), (5, b), (5, a)],
                20,
                TriggerPolicy(),
                SelectorConfig(num_selected=2),
            )

    def test_mismatched_signal_power_rejected(self, geom6):
        a = _scene(90.0, [])
        b = Scenario(sources=a.sources, signal_power=2.0)
        with pytest.raises(DomainError):
            run_cycle(
                geom6, [(0, a), (5, b)], 20, TriggerPolicy(), SelectorConfig(num_selected=2)
            )

    def test_infeasible_cardinality_aborts(self, geom6):
        sc = _scene(90.0, [])
        policy = TriggerPolicy(sensing_pulses=5)
        with pytest.raises(InfeasibleSelectionError):
            run_cycle(geom6, [(0, sc)], 10, policy, SelectorConfig(num_selected=3))


class TestRunCycleBehavior:
    POLICY = TriggerPolicy(
        drop_threshold_db=1.0, reference_window=10, sensing_pulses=40
    )
    CFG = SelectorConfig(num_selected=2)

    def test_static_scene_never_triggers(self, geom6):
        sc = _scene(90.0, [(130.0, 15.0)])
        res = run_cycle(geom6, [(0, sc)], 60, self.POLICY, self.CFG)
        assert len(res.rows) == 60
        assert all(row.phase == PHASE_OPERATING for row in res.rows)
        assert all(row.event == "" for row in res.rows)
        assert res.reconfigurations == ()
        values = {row.sinr_db for row in res.rows}
        assert len(values) == 1

    def test_switch_triggers_and_recovers(self, geom6):
        old = _scene(90.0, [(130.0, 15.0)], seed=3)
        new = _scene(90.0, [(130.0, 15.0), (95.0, 25.0)], seed=4)
        res = run_cycle(geom6, [(0, old), (80, new)], 200, self.POLICY, self.CFG)

        events = {row.pulse: row.event for row in res.rows if row.event}
        assert events[80] == "switch+trigger"
        reconfig_pulse = next(p for p, e in events.items() if "reconfigured" in e)
        # sensing consumes 40 pulses and learning one more
        assert reconfig_pulse == 80 + 40 + 1
        phases = [row.phase for row in res.rows]
        # the trigger pulse itself is still logged as operating
        assert phases[80] == PHASE_OPERATING
        assert phases[81:121] == [PHASE_SENSING] * 40
        assert phases[121] == PHASE_LEARNING
        assert phases[122] == PHASE_OPERATING

        stale = res.rows[85].sinr_db
        recovered = np.mean([row.sinr_db for row in res.rows[130:]])
        assert recovered > stale
        assert len(res.reconfigurations) == 1

    def test_phases_partition_pulse_axis(self, geom6):
        old = _scene(90.0, [(130.0, 15.0)], seed=3)
        new = _scene(90.0, [(130.0, 15.0), (95.0, 25.0)], seed=4)
        res = run_cycle(geom6, [(0, old), (80, new)], 150, self.POLICY, self.CFG)
        assert [row.pulse for row in res.rows] == list(range(150))
        assert set(row.phase for row in res.rows) <= {
            PHASE_OPERATING,
            PHASE_SENSING,
            PHASE_LEARNING,
        }

    def test_high_threshold_suppresses_trigger(self, geom6):
        old = _scene(90.0, [(130.0, 15.0)], seed=3)
        new = _scene(90.0, [(130.0, 15.0), (95.0, 25.0)], seed=4)
        lazy = TriggerPolicy(drop_threshold_db=500.0, reference_window=10, sensing_pulses=40)
        res = run_cycle(geom6, [(0, old), (80, new)], 150, lazy, self.CFG)
        assert all("trigger" not in row.event for row in res.rows)
        assert res.reconfigurations == ()
        # the stale configuration keeps operating through the new scene
        assert all(row.phase == PHASE_OPERATING for row in res.rows)

    def test_identical_seeds_reproduce_trace(self, geom6):
        old = _scene(90.0, [(130.0, 15.0)], seed=3)
        new = _scene(90.0, [(130.0, 15.0), (95.0, 25.0)], seed=4)
        first = run_cycle(geom6, [(0, old), (60, new)], 130, self.POLICY, self.CFG)
        second = run_cycle(geom6, [(0, old), (60, new)], 130, self.POLICY, self.CFG)
        assert first.rows == second.rows
        assert [p for p, _ in first.reconfigurations] == [
            p for p, _ in second.reconfigurations
        ]


class TestReconfigurationDominance:
    def test_fresh_selection_never_loses_to_stale(self):
        # Switching scenes and re-optimizing must not do worse than keeping
        # the old weights, whatever the pair of environments.
        geom = ArrayGeometry(num_antennas=8, spacing_wavelengths=0.5)
        session = SelectorSession(geom, SelectorConfig(num_selected=2))
        rng = np.random.default_rng(7)
        for _ in range(20):
            before = random_scene(rng)
            after = random_scene(rng)
            stale = session.select(oracle_covariance(geom, before), before.target.angle_deg)
            fresh = session.select(oracle_covariance(geom, after), after.target.angle_deg)
            worn = evaluate_current(geom, stale.solution, stale.pair, after)
            crisp = evaluate_current(geom, fresh.solution, fresh.pair, after)
            assert crisp >= worn - 1e-9
