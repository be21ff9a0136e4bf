"""Array geometry, scene description, and analytic virtual-array covariance.

A colocated MIMO radar with M candidate antennas on a uniform line observes
one target plus two families of interference:

* ``deceptive`` sources replay the radar's own waveforms, so after matched
  filtering they appear with the full transmit-receive structure of a real
  target at their own angle;
* ``coexisting`` sources emit their own signals, uncorrelated with the radar
  waveforms, and therefore carry receive-side structure only.

Angles are measured from the array axis in degrees, on the open interval
(0, 180).  All powers of fluctuating sources are given in dB relative to the
noise floor.  The analytic covariance produced here is the reference that the
Monte-Carlo sensing pipeline must converge to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError

KIND_TARGET = "target"
KIND_DECEPTIVE = "deceptive"
KIND_COEXISTING = "coexisting"
SOURCE_KINDS = (KIND_TARGET, KIND_DECEPTIVE, KIND_COEXISTING)


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array of candidate antenna positions.

    Parameters
    ----------
    num_antennas:
        Number of candidate positions M (at least 2).
    spacing_wavelengths:
        Inter-element spacing d divided by the carrier wavelength.
    """

    num_antennas: int
    spacing_wavelengths: float = 0.5

    def __post_init__(self):
        if self.num_antennas < 2:
            raise DomainError(f"need at least 2 antennas, got {self.num_antennas}")
        if not (self.spacing_wavelengths > 0):
            raise DomainError(
                f"spacing must be positive, got {self.spacing_wavelengths}"
            )

    @property
    def num_virtual(self) -> int:
        """Size of the virtual array formed by all transmit-receive pairs."""
        return self.num_antennas**2


@dataclass(frozen=True)
class SourceDescriptor:
    """One emitter or scatterer in the scene.

    ``power_db`` is referenced to the unit noise floor, so with the default
    ``noise_power = 1`` it reads directly as SNR or INR.  ``-inf`` is allowed
    and describes a source that is switched off (useful for probing the
    noise-only response in a scene that still has a look direction).
    """

    kind: str
    angle_deg: float
    power_db: float

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise DomainError(f"unknown source kind {self.kind!r}")
        if not (0.0 < self.angle_deg < 180.0):
            raise DomainError(
                f"angle must lie strictly inside (0, 180) degrees, got {self.angle_deg}"
            )
        if math.isnan(self.power_db):
            raise DomainError("power_db must not be NaN")

    def power_linear(self) -> float:
        """Absolute source power implied by the dB level."""
        if self.power_db == -math.inf:
            return 0.0
        return 10.0 ** (self.power_db / 10.0)


@dataclass(frozen=True)
class Scenario:
    """A complete scene: sources, noise floor, waveform power, and RNG seed."""

    sources: tuple[SourceDescriptor, ...]
    noise_power: float = 1.0
    signal_power: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        targets = [s for s in self.sources if s.kind == KIND_TARGET]
        if len(targets) != 1:
            raise DomainError(f"scenario needs exactly one target, got {len(targets)}")
        if not (self.noise_power >= 0):
            raise DomainError(
                f"noise_power must be nonnegative, got {self.noise_power}"
            )
        if not (self.signal_power > 0):
            raise DomainError(f"signal_power must be positive, got {self.signal_power}")
        if not (0 <= int(self.rng_seed) < 2**64):
            raise DomainError("rng_seed must fit in an unsigned 64-bit integer")

    @property
    def target(self) -> SourceDescriptor:
        return next(s for s in self.sources if s.kind == KIND_TARGET)

    @property
    def fluctuating(self) -> tuple[SourceDescriptor, ...]:
        """Sources whose reflection coefficient is redrawn every pulse."""
        return tuple(s for s in self.sources if s.kind != KIND_COEXISTING)

    @property
    def coexisting(self) -> tuple[SourceDescriptor, ...]:
        return tuple(s for s in self.sources if s.kind == KIND_COEXISTING)


def steering_vector(geom: ArrayGeometry, angle_deg: float) -> np.ndarray:
    """Response of the full candidate array toward ``angle_deg``.

    Element k carries phase ``2*pi*k*(d/lambda)*cos(angle)``; the first
    element is the phase reference.
    """
    if not (0.0 < angle_deg < 180.0):
        raise DomainError(
            f"angle must lie strictly inside (0, 180) degrees, got {angle_deg}"
        )
    k = np.arange(geom.num_antennas)
    phase = 2.0 * np.pi * geom.spacing_wavelengths * np.cos(np.deg2rad(angle_deg))
    return np.exp(1j * phase * k)


def virtual_steering(geom: ArrayGeometry, angle_deg: float) -> np.ndarray:
    """Virtual-array response: receive steering Kronecker transmit steering.

    Ordering matches the row-major vectorization used throughout: entry
    ``p*M + q`` pairs receive antenna p with transmit antenna q.
    """
    a = steering_vector(geom, angle_deg)
    return np.kron(a, a)


def virtual_indices(
    num_antennas: int, tx_indices: Sequence[int], rx_indices: Sequence[int]
) -> np.ndarray:
    """Flat virtual-array indices spanned by a transmit/receive subset.

    Row-major over (receive, transmit) pairs, consistent with
    :func:`virtual_steering` and the vectorized snapshot layout.
    """
    tx = np.asarray(tx_indices, dtype=np.intp)
    rx = np.asarray(rx_indices, dtype=np.intp)
    for name, idx in (("tx", tx), ("rx", rx)):
        if idx.size and (idx.min() < 0 or idx.max() >= num_antennas):
            raise DomainError(f"{name} indices out of range for M={num_antennas}")
    return (rx[:, None] * num_antennas + tx[None, :]).ravel()


@dataclass(frozen=True)
class VirtualCovariance:
    """Covariance of the vectorized virtual-array snapshot.

    ``num_pulses`` is None for analytic references and the pulse count for
    Monte-Carlo estimates.  ``factors`` optionally carries the low-rank
    decomposition ``R = noise_term * I + U diag(weights) U^H`` when the matrix
    was built analytically; solvers exploit it to keep conic programs sparse.
    """

    matrix: np.ndarray
    num_pulses: Optional[int] = None
    factors: Optional[tuple[float, np.ndarray, np.ndarray]] = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"covariance must be square, got shape {m.shape}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _term_factors(
    geom: ArrayGeometry, scenario: Scenario, include_target: bool
) -> tuple[float, list[np.ndarray], list[float]]:
    """Scaled identity level plus rank-1 factors of the analytic covariance."""
    sig2 = scenario.signal_power
    noise_term = sig2 * scenario.noise_power
    columns: list[np.ndarray] = []
    weights: list[float] = []
    for src in scenario.sources:
        power = src.power_linear()
        if power == 0.0:
            continue
        if src.kind == KIND_COEXISTING:
            # Receive-side structure only: one factor per transmit slot.
            a = steering_vector(geom, src.angle_deg)
            eye = np.eye(geom.num_antennas)
            for q in range(geom.num_antennas):
                columns.append(np.kron(a, eye[q]))
                weights.append(power * sig2)
        else:
            if src.kind == KIND_TARGET and not include_target:
                continue
            columns.append(virtual_steering(geom, src.angle_deg))
            weights.append(power * sig2**2)
    return noise_term, columns, weights


def oracle_covariance(geom: ArrayGeometry, scenario: Scenario) -> VirtualCovariance:
    """Analytic covariance of the vectorized matched-filter snapshot.

    Sum of the target and deceptive terms (virtual steering outer products
    scaled by ``signal_power**2 * source_power``), the coexisting terms
    (receive steering outer product Kronecker a scaled identity), and the
    matched-filtered noise floor ``signal_power * noise_power * I``.
    """
    noise_term, columns, weights = _term_factors(geom, scenario, include_target=True)
    dim = geom.num_virtual
    r = noise_term * np.eye(dim, dtype=complex)
    if columns:
        u = np.column_stack(columns)
        r = r + (u * np.asarray(weights)) @ u.conj().T
    r = 0.5 * (r + r.conj().T)
    factors = (
        noise_term,
        np.column_stack(columns) if columns else np.zeros((dim, 0), dtype=complex),
        np.asarray(weights, dtype=float),
    )
    return VirtualCovariance(matrix=r, num_pulses=None, factors=factors)


def oracle_interference_covariance(
    geom: ArrayGeometry,
    scenario: Scenario,
    selection=None,
) -> np.ndarray:
    """Interference-plus-noise part of the analytic covariance.

    Excludes the target term.  ``selection`` restricts the matrix to the
    virtual indices of a transmit/receive subset; pass None for the full
    virtual array.  Accepts either an object with ``tx_indices``/``rx_indices``
    attributes or a ``(tx_indices, rx_indices)`` pair.
    """
    noise_term, columns, weights = _term_factors(geom, scenario, include_target=False)
    dim = geom.num_virtual
    r = noise_term * np.eye(dim, dtype=complex)
    if columns:
        u = np.column_stack(columns)
        r = r + (u * np.asarray(weights)) @ u.conj().T
    r = 0.5 * (r + r.conj().T)
    if selection is not None:
        idx = selection_virtual_indices(geom.num_antennas, selection)
        r = r[np.ix_(idx, idx)]
    return r


def selection_virtual_indices(num_antennas: int, selection) -> np.ndarray:
    """Normalize a selection object or (tx, rx) pair to flat virtual indices."""
    if hasattr(selection, "tx_indices") and hasattr(selection, "rx_indices"):
        tx, rx = selection.tx_indices, selection.rx_indices
    else:
        tx, rx = selection
    return virtual_indices(num_antennas, tx, rx)
