"""Orthogonal waveforms, pulse synthesis, and matched filtering.

The radar transmits one phase-coded waveform per active antenna.  The code
matrix is built from roots of unity so that ``codes @ codes^H / L`` equals
``signal_power * I`` to machine precision for any code length L >= M.

Noise and coexisting-interference powers are calibrated at the matched-filter
output: a time-domain draw has per-sample variance ``L * power`` so that after
the ``1/L`` correlation each virtual element sees ``power * signal_power``.
This keeps every downstream quantity independent of the code length.

Randomness contract: pulse ``m`` of a scenario draws from the substream
``SeedSequence(entropy=scenario.rng_seed, spawn_key=(m,))``.  Within a pulse
the draw order is fixed: first the fluctuating reflection coefficients (scene
order), then per collection the coexisting waveforms (scene order) followed by
the receiver noise block.  Simulations are therefore reproducible and pulses
may be generated independently or in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, OrthogonalityError
from .model import ArrayGeometry, Scenario, steering_vector

DEFAULT_CODE_LENGTH = 128


@dataclass(frozen=True)
class WaveformSet:
    """Phase-code matrix, one row per candidate transmit antenna."""

    codes: np.ndarray  # (M, L) complex
    signal_power: float

    @property
    def num_waveforms(self) -> int:
        return self.codes.shape[0]

    @property
    def code_length(self) -> int:
        return self.codes.shape[1]


@dataclass(frozen=True)
class PulseSnapshot:
    """Raw receive samples of one pulse together with the active subsets."""

    samples: np.ndarray  # (n_rx, L) complex
    pulse_index: int
    active_tx: np.ndarray
    active_rx: np.ndarray
    tx_phase_rotation: complex = 1.0 + 0.0j


def generate_waveforms(
    num_waveforms: int, code_length: int = DEFAULT_CODE_LENGTH, signal_power: float = 1.0
) -> WaveformSet:
    """Build a set of constant-modulus orthogonal phase codes.

    Row m samples the m-th discrete frequency, so any subset of rows stays
    orthogonal.  Raises if fewer samples than waveforms are requested, where
    exact orthogonality is impossible.
    """
    if num_waveforms < 1:
        raise DomainError(f"need at least one waveform, got {num_waveforms}")
    if code_length < num_waveforms:
        raise OrthogonalityError(
            f"code length {code_length} cannot carry {num_waveforms} "
            "orthogonal waveforms"
        )
    if not (signal_power > 0):
        raise DomainError(f"signal_power must be positive, got {signal_power}")
    m = np.arange(num_waveforms)[:, None]
    n = np.arange(code_length)[None, :]
    codes = np.sqrt(signal_power) * np.exp(2j * np.pi * m * n / code_length)
    return WaveformSet(codes=codes, signal_power=signal_power)


def pulse_rng(scenario: Scenario, pulse_index: int) -> np.random.Generator:
    """Generator for the per-pulse random substream (see module docstring)."""
    ss = np.random.SeedSequence(entropy=scenario.rng_seed, spawn_key=(pulse_index,))
    return np.random.Generator(np.random.PCG64(ss))


def draw_reflections(scenario: Scenario, rng: np.random.Generator) -> np.ndarray:
    """Draw one pulse's reflection coefficients for the fluctuating sources.

    Complex Gaussian, zero mean, variance equal to each source's absolute
    power; redrawn every pulse.
    """
    fluct = scenario.fluctuating
    z = rng.standard_normal((len(fluct), 2))
    scale = np.array([np.sqrt(s.power_linear() / 2.0) for s in fluct])
    return scale * (z[:, 0] + 1j * z[:, 1])


def _draw_coexisting(
    scenario: Scenario, code_length: int, rng: np.random.Generator
) -> np.ndarray:
    """Per-sample coexisting emissions for one collection, shape (n_coex, L)."""
    coex = scenario.coexisting
    out = np.zeros((len(coex), code_length), dtype=complex)
    for i, src in enumerate(coex):
        power = src.power_linear()
        z = rng.standard_normal((code_length, 2))
        out[i] = np.sqrt(code_length * power / 2.0) * (z[:, 0] + 1j * z[:, 1])
    return out


def _draw_noise(
    scenario: Scenario, n_rx: int, code_length: int, rng: np.random.Generator
) -> np.ndarray:
    z = rng.standard_normal((n_rx, code_length, 2))
    scale = np.sqrt(code_length * scenario.noise_power / 2.0)
    return scale * (z[..., 0] + 1j * z[..., 1])


def simulate_pulse(
    geom: ArrayGeometry,
    scenario: Scenario,
    waveforms: WaveformSet,
    active_tx: Sequence[int],
    active_rx: Sequence[int],
    pulse_index: int,
    tx_phase_rotation: complex = 1.0 + 0.0j,
    *,
    reflections: Optional[np.ndarray] = None,
    rng: Optional[np.random.Generator] = None,
) -> PulseSnapshot:
    """Synthesize the receive samples of one pulse.

    The active transmit antennas radiate their own code rows, all multiplied
    by ``tx_phase_rotation``.  Target and deceptive sources reflect the
    transmitted mix with a per-pulse coefficient; coexisting sources add their
    own emissions through receive steering only; white noise closes the model.

    ``reflections`` and ``rng`` let a caller substitute an already-drawn
    coefficient vector and substream position (used when several collections
    share one pulse); by default both derive from ``pulse_index``.
    """
    tx = np.asarray(active_tx, dtype=np.intp)
    rx = np.asarray(active_rx, dtype=np.intp)
    m = geom.num_antennas
    for name, idx in (("tx", tx), ("rx", rx)):
        if idx.size == 0:
            raise DomainError(f"{name} selection is empty")
        if idx.min() < 0 or idx.max() >= m:
            raise DomainError(f"{name} indices out of range for M={m}")
    if waveforms.num_waveforms < m:
        raise DomainError(
            f"waveform set has {waveforms.num_waveforms} rows but the array "
            f"has {m} candidate antennas"
        )
    if rng is None:
        rng = pulse_rng(scenario, pulse_index)
    if reflections is None:
        reflections = draw_reflections(scenario, rng)

    length = waveforms.code_length
    codes_active = waveforms.codes[tx]
    samples = np.zeros((rx.size, length), dtype=complex)
    for coef, src in zip(reflections, scenario.fluctuating):
        a = steering_vector(geom, src.angle_deg)
        transmitted = (tx_phase_rotation * a[tx]) @ codes_active
        samples += coef * np.outer(a[rx], transmitted)
    coex_draws = _draw_coexisting(scenario, length, rng)
    for series, src in zip(coex_draws, scenario.coexisting):
        a = steering_vector(geom, src.angle_deg)
        samples += np.outer(a[rx], series)
    samples += _draw_noise(scenario, rx.size, length, rng)
    return PulseSnapshot(
        samples=samples,
        pulse_index=pulse_index,
        active_tx=tx,
        active_rx=rx,
        tx_phase_rotation=complex(tx_phase_rotation),
    )


def matched_filter(snapshot: PulseSnapshot, waveforms: WaveformSet) -> np.ndarray:
    """Correlate receive samples against the active codes.

    Returns the (n_rx, n_tx) matrix ``samples @ codes_active^H / L``.  With
    exactly orthogonal codes a noiseless reflection at angle theta collapses
    to ``coef * signal_power * a_rx(theta) a_tx(theta)^T``.
    """
    codes_active = waveforms.codes[snapshot.active_tx]
    if snapshot.samples.shape[1] != codes_active.shape[1]:
        raise DomainError(
            f"snapshot length {snapshot.samples.shape[1]} does not match "
            f"code length {codes_active.shape[1]}"
        )
    return snapshot.samples @ codes_active.conj().T / codes_active.shape[1]


def vectorize(mf_output: np.ndarray) -> np.ndarray:
    """Stack a matched-filter matrix row-major into a virtual snapshot vector.

    Row-major order sends receive row p, transmit column q to position
    ``p * n_tx + q``, matching :func:`cogmimo.model.virtual_steering`.
    """
    return np.ravel(np.asarray(mf_output), order="C")


def devectorize(snapshot: np.ndarray, n_rx: int, n_tx: int) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    vec = np.asarray(snapshot)
    if vec.size != n_rx * n_tx:
        raise DomainError(f"cannot reshape {vec.size} entries into {n_rx}x{n_tx}")
    return vec.reshape(n_rx, n_tx)
