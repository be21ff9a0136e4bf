"""Closed-loop operation: monitor, sense, relearn, reconfigure.

The radar operates with a fixed transceiver and weights while tracking its
own output SINR against the analytic model of the currently active scene
(an idealized detector: performance monitoring is assumed perfect so that
the loop logic itself can be tested deterministically).  When the SINR falls
far enough below the recent operating average, the loop switches to a
sensing phase that re-acquires the full virtual covariance through the
multiplexed schedule, then to a learning phase that re-runs the transceiver
selection, and finally back to operation with the new configuration.

The environment is described by a timeline of scenarios; switches take
effect at their pulse index regardless of the loop phase.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .beamforming import BeamformerSolution, output_sinr
from .errors import DomainError
from .model import ArrayGeometry, Scenario
from .selection import (
    SelectionPair,
    SelectionResult,
    SelectorConfig,
    SelectorSession,
)
from .sensing import default_block_size, sense_full_covariance
from .waveforms import WaveformSet, generate_waveforms

logger = logging.getLogger(__name__)

PHASE_OPERATING = "operating"
PHASE_SENSING = "sensing"
PHASE_LEARNING = "learning"


@dataclass(frozen=True)
class TriggerPolicy:
    """When to abandon the current configuration and re-sense.

    A drop of ``drop_threshold_db`` below the mean SINR of the last
    ``reference_window`` operating pulses (since the last reconfiguration)
    triggers sensing for ``sensing_pulses`` pulses followed by
    ``learning_pulses`` pulses of re-optimization.
    """

    drop_threshold_db: float = 3.0
    reference_window: int = 50
    sensing_pulses: int = 2000
    learning_pulses: int = 1

    def __post_init__(self):
        if self.drop_threshold_db <= 0:
            raise DomainError("drop_threshold_db must be positive")
        if self.reference_window < 1:
            raise DomainError("reference_window must be >= 1")
        if self.sensing_pulses < 1:
            raise DomainError("sensing_pulses must be >= 1")
        if self.learning_pulses < 1:
            raise DomainError("learning_pulses must be >= 1")


@dataclass
class CycleState:
    """Mutable loop state: active configuration and trigger bookkeeping."""

    selection: SelectionPair
    solution: BeamformerSolution
    phase: str = PHASE_OPERATING
    reference: deque = field(default_factory=deque)
    phase_pulses_left: int = 0
    pending_scenario: Optional[Scenario] = None


@dataclass(frozen=True)
class TraceRow:
    pulse: int
    phase: str
    sinr_db: float
    event: str = ""


@dataclass(frozen=True)
class CycleResult:
    rows: tuple[TraceRow, ...]
    initial: SelectionResult
    reconfigurations: tuple[tuple[int, SelectionResult], ...]


def evaluate_current(
    geom: ArrayGeometry,
    solution: BeamformerSolution,
    selection: SelectionPair,
    scenario: Scenario,
) -> float:
    """Output SINR of the current weights under a (possibly new) scene."""
    return output_sinr(solution.weights, scenario, geom, selection)


def _sense_and_learn(
    geom: ArrayGeometry,
    scenario: Scenario,
    waveforms: WaveformSet,
    block_size: Optional[int],
    policy: TriggerPolicy,
    session: SelectorSession,
    backend: Optional[str],
) -> SelectionResult:
    cov = sense_full_covariance(
        geom,
        scenario,
        waveforms,
        block_size,
        policy.sensing_pulses,
        backend=backend,
    )
    return session.select(cov, scenario.target.angle_deg)


def run_cycle(
    geom: ArrayGeometry,
    timeline: Sequence[tuple[int, Scenario]],
    total_pulses: int,
    policy: TriggerPolicy,
    cfg: SelectorConfig,
    *,
    waveforms: Optional[WaveformSet] = None,
    block_size: Optional[int] = "auto",  # type: ignore[assignment]
    backend: Optional[str] = None,
) -> CycleResult:
    """Run the perception-action loop over a scenario timeline.

    ``timeline`` is a sequence of ``(start_pulse, scenario)`` entries, the
    first starting at pulse 0.  The loop bootstraps by sensing and selecting
    for the initial scene before the trace begins, so the recorded pulse axis
    is partitioned into operating, sensing, and learning phases with no gaps.

    Events recorded on trace rows: ``switch`` when the active scene changes,
    ``trigger`` when the SINR drop fires, ``reconfigured`` on the final
    learning pulse when the new transceiver takes over.
    """
    if total_pulses < 1:
        raise DomainError("total_pulses must be >= 1")
    entries = sorted(timeline, key=lambda item: item[0])
    if not entries or entries[0][0] != 0:
        raise DomainError("timeline must start with a scenario at pulse 0")
    starts = [pulse for pulse, _ in entries]
    if len(set(starts)) != len(starts):
        raise DomainError("timeline switch pulses must be distinct")
    scenarios = [scn for _, scn in entries]
    sig = scenarios[0].signal_power
    if any(s.signal_power != sig for s in scenarios):
        raise DomainError("all timeline scenarios must share signal_power")
    if waveforms is None:
        waveforms = generate_waveforms(geom.num_antennas, signal_power=sig)
    if block_size == "auto":
        block_size = default_block_size(geom.num_antennas)

    session = SelectorSession(geom, cfg)
    initial = _sense_and_learn(
        geom, scenarios[0], waveforms, block_size, policy, session, backend
    )
    state = CycleState(selection=initial.pair, solution=initial.solution)
    rows: list[TraceRow] = []
    reconfigs: list[tuple[int, SelectionResult]] = []

    active_idx = 0
    for pulse in range(total_pulses):
        events = []
        while active_idx + 1 < len(entries) and entries[active_idx + 1][0] == pulse:
            active_idx += 1
            events.append("switch")
        scenario = scenarios[active_idx]
        sinr = evaluate_current(geom, state.solution, state.selection, scenario)

        if state.phase == PHASE_OPERATING:
            if state.reference:
                ref = float(np.mean(state.reference))
                if ref - sinr >= policy.drop_threshold_db:
                    events.append("trigger")
                    state.phase = PHASE_SENSING
                    state.phase_pulses_left = policy.sensing_pulses
                    state.pending_scenario = scenario
            if state.phase == PHASE_OPERATING:
                state.reference.append(sinr)
                while len(state.reference) > policy.reference_window:
                    state.reference.popleft()
            rows.append(TraceRow(pulse, PHASE_OPERATING, sinr, "+".join(events)))
            continue

        if state.phase == PHASE_SENSING:
            rows.append(TraceRow(pulse, PHASE_SENSING, sinr, "+".join(events)))
            state.phase_pulses_left -= 1
            if state.phase_pulses_left == 0:
                state.phase = PHASE_LEARNING
                state.phase_pulses_left = policy.learning_pulses
            continue

        # learning
        state.phase_pulses_left -= 1
        if state.phase_pulses_left == 0:
            result = _sense_and_learn(
                geom,
                state.pending_scenario,
                waveforms,
                block_size,
                policy,
                session,
                backend,
            )
            state.selection = result.pair
            state.solution = result.solution
            state.reference.clear()
            state.phase = PHASE_OPERATING
            state.pending_scenario = None
            events.append("reconfigured")
            reconfigs.append((pulse, result))
            rows.append(TraceRow(pulse, PHASE_LEARNING, sinr, "+".join(events)))
        else:
            rows.append(TraceRow(pulse, PHASE_LEARNING, sinr, "+".join(events)))

    return CycleResult(
        rows=tuple(rows),
        initial=initial,
        reconfigurations=tuple(reconfigs),
    )
