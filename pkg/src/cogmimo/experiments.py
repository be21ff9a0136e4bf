"""Canned studies: the perception-action timeline and the sweep comparisons.

Each ``run_example*`` function builds its scene, runs the machinery, and
writes plot-ready CSV files with a stable header and ``%.12g`` floats so a
fixed seed reproduces byte-identical output.  Plotting is left to the
consumer.

The sweep studies compare the selected transceiver against a fixed
"conventional" one (transmitters spread every fourth element, receivers
packed at the far end) under Capon weighting on both.  Angles are chosen so
the comparison is meaningful: a half-wavelength 18-element aperture cannot
resolve a 3 degree offset near endfire no matter which elements are picked,
so the close-interference study keeps its look angles at 30 degrees and
above where resolution is attainable.
"""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .beamforming import capon_weights, output_sinr
from .cognition import CycleResult, TriggerPolicy, run_cycle
from .errors import DomainError
from .model import (
    ArrayGeometry,
    Scenario,
    SourceDescriptor,
    oracle_covariance,
    virtual_indices,
    virtual_steering,
)
from .selection import (
    CONVENTIONAL_RX,
    CONVENTIONAL_TX,
    SelectionPair,
    SelectorConfig,
    SelectorSession,
)

logger = logging.getLogger(__name__)

EXAMPLE2_ANGLES = tuple(range(5, 91, 5))
EXAMPLE3_ANGLES = tuple(range(30, 91, 10))
EXAMPLE3_OFFSETS = (3.0, 5.0)
EXAMPLE4_ANGLES = tuple(range(10, 91, 10))
EXAMPLE4_CONFIGS = ((18, 0.5), (24, 0.5), (18, 1.0))

_SNR_DB = 20.0
_INR_DB = 15.0


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def _indices_str(indices) -> str:
    return ";".join(str(int(i)) for i in indices)


def _write_csv(path: str, header: Sequence[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _conventional_pair(m: int) -> SelectionPair:
    c = np.zeros(m, dtype=np.int8)
    r = np.zeros(m, dtype=np.int8)
    c[list(CONVENTIONAL_TX)] = 1
    r[list(CONVENTIONAL_RX)] = 1
    return SelectionPair(c=c, r=r)


def conventional_sinr(geom: ArrayGeometry, scenario: Scenario) -> float:
    """Capon output SINR of the fixed benchmark transceiver."""
    if geom.num_antennas <= max(*CONVENTIONAL_TX, *CONVENTIONAL_RX):
        raise DomainError(
            "conventional benchmark needs at least "
            f"{max(*CONVENTIONAL_TX, *CONVENTIONAL_RX) + 1} antennas"
        )
    pair = _conventional_pair(geom.num_antennas)
    cov = oracle_covariance(geom, scenario)
    idx = virtual_indices(geom.num_antennas, CONVENTIONAL_TX, CONVENTIONAL_RX)
    b = virtual_steering(geom, scenario.target.angle_deg)[idx]
    w = capon_weights(cov.matrix[np.ix_(idx, idx)], b)
    return output_sinr(w, scenario, geom, (CONVENTIONAL_TX, CONVENTIONAL_RX))


def _optimal_sinr(
    geom: ArrayGeometry, scenario: Scenario, session: SelectorSession
) -> tuple[float, SelectionPair]:
    cov = oracle_covariance(geom, scenario)
    res = session.select(cov, scenario.target.angle_deg)
    sinr = output_sinr(res.solution.weights, scenario, geom, res.pair)
    return sinr, res.pair


def _sweep_scene(look: float, interferer_angles: Sequence[float]) -> Scenario:
    sources = [SourceDescriptor("target", look, _SNR_DB)]
    sources += [SourceDescriptor("deceptive", a, _INR_DB) for a in interferer_angles]
    return Scenario(sources=tuple(sources))


# ---------------------------------------------------------------------------
# Example 1: reaction of the loop to a mid-run scene change
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Example1Result:
    trace_path: str
    configs_path: str
    cycle: CycleResult


def write_trace_csv(path: str, cycle: CycleResult) -> None:
    _write_csv(
        path,
        ("pulse", "phase", "sinr_db", "event"),
        ((row.pulse, row.phase, _fmt(row.sinr_db), row.event) for row in cycle.rows),
    )


def _active_scenario(timeline: Sequence[tuple[int, Scenario]], pulse: int) -> Scenario:
    active = timeline[0][1]
    for start, scenario in sorted(timeline, key=lambda item: item[0]):
        if start <= pulse:
            active = scenario
    return active


def write_configs_csv(
    path: str,
    cycle: CycleResult,
    geom: ArrayGeometry,
    timeline: Sequence[tuple[int, Scenario]],
) -> None:
    """Dump each adopted configuration with its SINR under the scene it serves."""
    rows = [
        (
            "initial",
            "",
            _indices_str(cycle.initial.pair.tx_indices),
            _indices_str(cycle.initial.pair.rx_indices),
            _fmt(
                output_sinr(
                    cycle.initial.solution.weights,
                    timeline[0][1],
                    geom,
                    cycle.initial.pair,
                )
            ),
        )
    ]
    for pulse, result in cycle.reconfigurations:
        rows.append(
            (
                "reconfigured",
                str(pulse),
                _indices_str(result.pair.tx_indices),
                _indices_str(result.pair.rx_indices),
                _fmt(
                    output_sinr(
                        result.solution.weights,
                        _active_scenario(timeline, pulse),
                        geom,
                        result.pair,
                    )
                ),
            )
        )
    _write_csv(path, ("label", "pulse", "tx_indices", "rx_indices", "sinr_db"), rows)


def example1_timeline(switch_pulse: int, seed: int = 0) -> list[tuple[int, Scenario]]:
    """Scene pair for the timeline study.

    Initially a 65 degree target (SNR 20 dB) with deceptive interference at
    50 and 60 degrees (INR 15 dB); at the switch a third interferer appears
    at 63 degrees, close enough to the target to spoil the stale weights.
    """
    base = [
        SourceDescriptor("target", 65.0, _SNR_DB),
        SourceDescriptor("deceptive", 50.0, _INR_DB),
        SourceDescriptor("deceptive", 60.0, _INR_DB),
    ]
    extra = base + [SourceDescriptor("deceptive", 63.0, _INR_DB)]
    first = Scenario(sources=tuple(base), rng_seed=seed)
    second = Scenario(sources=tuple(extra), rng_seed=seed + 1)
    return [(0, first), (switch_pulse, second)]


def run_example1(
    out_dir: str,
    *,
    seed: int = 0,
    total_pulses: int = 6000,
    switch_pulse: Optional[int] = None,
    num_antennas: int = 18,
    num_selected: int = 4,
    policy: Optional[TriggerPolicy] = None,
    selector: Optional[SelectorConfig] = None,
    backend: Optional[str] = None,
) -> Example1Result:
    """Run the timeline study and emit trace plus configuration CSVs."""
    os.makedirs(out_dir, exist_ok=True)
    geom = ArrayGeometry(num_antennas=num_antennas, spacing_wavelengths=0.5)
    if switch_pulse is None:
        switch_pulse = total_pulses // 3
    if policy is None:
        # Cap the sensing window so short traces still show a recovery.
        policy = TriggerPolicy(sensing_pulses=min(2000, max(1, total_pulses // 3)))
    if selector is None:
        selector = SelectorConfig(num_selected=num_selected)
    timeline = example1_timeline(switch_pulse, seed=seed)

    cycle = run_cycle(geom, timeline, total_pulses, policy, selector, backend=backend)

    trace_path = os.path.join(out_dir, "example1_trace.csv")
    write_trace_csv(trace_path, cycle)
    configs_path = os.path.join(out_dir, "example1_configs.csv")
    write_configs_csv(configs_path, cycle, geom, timeline)

    if cycle.reconfigurations:
        before = tuple(int(i) for i in cycle.initial.pair.tx_indices)
        after = tuple(int(i) for i in cycle.reconfigurations[0][1].pair.tx_indices)
        if before != after:
            logger.warning(
                "transmit selection changed across the event (%s -> %s); "
                "a deployment that cannot re-cable the transmit side would "
                "keep it fixed",
                before,
                after,
            )
    return Example1Result(trace_path, configs_path, cycle)


# ---------------------------------------------------------------------------
# Examples 2 and 3: angle sweeps against the conventional transceiver
# ---------------------------------------------------------------------------


def sweep_comparison(
    geom: ArrayGeometry,
    scenes: Sequence[tuple[float, Scenario]],
    selector: Optional[SelectorConfig] = None,
) -> list[tuple[float, float, float, SelectionPair]]:
    """Per scene: (look angle, optimal SINR, conventional SINR, pair)."""
    if selector is None:
        selector = SelectorConfig(num_selected=4)
    session = SelectorSession(geom, selector)
    out = []
    for look, scenario in scenes:
        opt, pair = _optimal_sinr(geom, scenario, session)
        conv = conventional_sinr(geom, scenario)
        out.append((look, opt, conv, pair))
    return out


def run_example2(
    out_dir: str,
    *,
    angles: Sequence[float] = EXAMPLE2_ANGLES,
    interferer_angles: Sequence[float] = (60.0, 70.0),
    num_antennas: int = 18,
    selector: Optional[SelectorConfig] = None,
) -> str:
    """Fixed interferers, swept look angle; emits the comparison CSV."""
    os.makedirs(out_dir, exist_ok=True)
    geom = ArrayGeometry(num_antennas=num_antennas, spacing_wavelengths=0.5)
    scenes = [(float(a), _sweep_scene(float(a), interferer_angles)) for a in angles]
    rows = []
    for look, opt, conv, pair in sweep_comparison(geom, scenes, selector):
        rows.append(
            (
                _fmt(look),
                _fmt(opt),
                _fmt(conv),
                _fmt(opt - conv),
                _indices_str(pair.tx_indices),
                _indices_str(pair.rx_indices),
            )
        )
    path = os.path.join(out_dir, "example2_sweep.csv")
    _write_csv(
        path,
        (
            "look_angle_deg",
            "optimal_sinr_db",
            "conventional_sinr_db",
            "improvement_db",
            "tx_indices",
            "rx_indices",
        ),
        rows,
    )
    return path


def run_example3(
    out_dir: str,
    *,
    angles: Sequence[float] = EXAMPLE3_ANGLES,
    offsets: Sequence[float] = EXAMPLE3_OFFSETS,
    num_antennas: int = 18,
    selector: Optional[SelectorConfig] = None,
) -> str:
    """Interferers riding at look +/- offset; emits the comparison CSV.

    Offsets are swept as cases so improvement can be compared at matched
    look angles.
    """
    os.makedirs(out_dir, exist_ok=True)
    geom = ArrayGeometry(num_antennas=num_antennas, spacing_wavelengths=0.5)
    rows = []
    for off in offsets:
        scenes = []
        for a in angles:
            look = float(a)
            if not (0.0 < look - off and look + off < 180.0):
                raise DomainError(
                    f"offset {off} pushes interferers outside (0, 180) at look {look}"
                )
            scenes.append((look, _sweep_scene(look, (look - off, look + off))))
        for look, opt, conv, pair in sweep_comparison(geom, scenes, selector):
            rows.append(
                (
                    _fmt(float(off)),
                    _fmt(look),
                    _fmt(opt),
                    _fmt(conv),
                    _fmt(opt - conv),
                    _indices_str(pair.tx_indices),
                    _indices_str(pair.rx_indices),
                )
            )
    path = os.path.join(out_dir, "example3_sweep.csv")
    _write_csv(
        path,
        (
            "offset_deg",
            "look_angle_deg",
            "optimal_sinr_db",
            "conventional_sinr_db",
            "improvement_db",
            "tx_indices",
            "rx_indices",
        ),
        rows,
    )
    return path


# ---------------------------------------------------------------------------
# Example 4: candidate count and spacing
# ---------------------------------------------------------------------------


def run_example4(
    out_dir: str,
    *,
    configs: Sequence[tuple[int, float]] = EXAMPLE4_CONFIGS,
    angles: Sequence[float] = EXAMPLE4_ANGLES,
    offset_deg: float = 3.0,
    interferer_angles: Optional[Sequence[float]] = None,
    selector: Optional[SelectorConfig] = None,
) -> str:
    """One optimal-selection sweep per (antenna count, spacing) pair.

    By default the interferers ride at look +/- ``offset_deg``; that is the
    regime where aperture actually matters, so the effect of antenna count
    and spacing is visible instead of saturating at the interference-free
    ceiling.  Pass ``interferer_angles`` for a fixed-interferer sweep
    instead.
    """
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for m, spacing in configs:
        geom = ArrayGeometry(num_antennas=int(m), spacing_wavelengths=float(spacing))
        cfg = selector if selector is not None else SelectorConfig(num_selected=4)
        session = SelectorSession(geom, cfg)
        for a in angles:
            look = float(a)
            if interferer_angles is not None:
                placed = tuple(interferer_angles)
            else:
                placed = (look - offset_deg, look + offset_deg)
                if not (0.0 < placed[0] and placed[1] < 180.0):
                    raise DomainError(
                        f"offset {offset_deg} pushes interferers outside (0, 180) "
                        f"at look {look}"
                    )
            scenario = _sweep_scene(look, placed)
            opt, pair = _optimal_sinr(geom, scenario, session)
            rows.append(
                (
                    str(int(m)),
                    _fmt(float(spacing)),
                    _fmt(look),
                    _fmt(opt),
                    _indices_str(pair.tx_indices),
                    _indices_str(pair.rx_indices),
                )
            )
    path = os.path.join(out_dir, "example4_sweep.csv")
    _write_csv(
        path,
        (
            "num_antennas",
            "d_over_lambda",
            "look_angle_deg",
            "optimal_sinr_db",
            "tx_indices",
            "rx_indices",
        ),
        rows,
    )
    return path
