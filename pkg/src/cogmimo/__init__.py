"""Cognitive sparse MIMO radar: simulation, sensing, and transceiver design."""

from .beamforming import (
    BeamformerSolution,
    beampattern,
    capon_solution,
    capon_weights,
    lift_vector,
    loaded_covariance,
    output_sinr,
    realify,
    unlift_vector,
)
from .cognition import CycleResult, TriggerPolicy, evaluate_current, run_cycle
from .model import (
    ArrayGeometry,
    Scenario,
    SourceDescriptor,
    VirtualCovariance,
    oracle_covariance,
    oracle_interference_covariance,
    steering_vector,
    virtual_indices,
    virtual_steering,
)
from .selection import (
    GroupMasks,
    SelectionPair,
    SelectionResult,
    SelectorConfig,
    SelectorSession,
    brute_force_oracle,
    build_group_masks,
    select_transceiver,
    solve_subproblem,
    update_reweights,
)
from .sensing import (
    MultiplexSchedule,
    active_backend,
    assemble_hankel,
    build_schedule,
    load_covariance,
    save_covariance,
    sense_full_covariance,
)
from .waveforms import (
    PulseSnapshot,
    WaveformSet,
    generate_waveforms,
    matched_filter,
    simulate_pulse,
    vectorize,
)

__version__ = "0.1.0"
