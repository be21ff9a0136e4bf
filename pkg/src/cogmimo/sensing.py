"""Time-multiplexed acquisition of the full virtual-array covariance.

A sparse transceiver only owns N transmit and N receive chains, so the full
M x M matched-filter matrix cannot be observed in one shot.  With M = K * N
the matrix splits into K^2 blocks of size N x N, and because every fluctuating
return contributes an outer product of two identical-geometry steering
vectors, the noiseless matrix is constant along anti-diagonals.  It is then
enough to estimate the first block row and the last block column:

* block (1, i), i = 2..K: receive block 1 listens while transmit block i emits;
* block (j, K), j = 2..K-1: receive block j listens while block K emits;
* block (1, 1): receive block 1 with transmit block 2, whose codes are phase
  rotated so block 2 impersonates block 1 toward the look direction;
* block (K, K): receive block K with transmit block K-1, inverse rotation.

The impersonation is exact only for returns from the look direction; for any
other direction the two corner blocks pick up a phase bias that is left in
place and measured by the test suite rather than corrected.

Every unobserved entry is copied from the first observed entry on its
anti-diagonal (first writer in the schedule order above), which makes the
assembly deterministic.  Accumulating the vectorized assembled snapshots over
many pulses yields the covariance estimate consumed by the beamformer and the
transceiver selector.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .errors import (
    AssemblyConsistencyError,
    DomainError,
    MissingBlockError,
)
from .model import ArrayGeometry, Scenario, VirtualCovariance, steering_vector
from .waveforms import (
    WaveformSet,
    _draw_coexisting,
    _draw_noise,
    draw_reflections,
    pulse_rng,
)

logger = logging.getLogger(__name__)

try:  # compiled kernel is optional; the NumPy path is always available
    from . import _accel  # type: ignore[attr-defined]

    HAVE_ACCEL = True
except ImportError:  # pragma: no cover - depends on build environment
    _accel = None
    HAVE_ACCEL = False

from . import _accel_py

_FORCE_PY_ENV = "COGMIMO_PURE_PYTHON"


def active_backend() -> str:
    """Name of the sensing backend that will be used by default."""
    if HAVE_ACCEL and not os.environ.get(_FORCE_PY_ENV):
        return "accel"
    return "python"


def _backend_module(backend: Optional[str]):
    name = backend or active_backend()
    if name == "accel":
        if not HAVE_ACCEL:
            raise DomainError("compiled sensing kernel is not available")
        return _accel
    if name == "python":
        return _accel_py
    raise DomainError(f"unknown sensing backend {name!r}")


@dataclass(frozen=True)
class ScheduleEntry:
    """One collection: which submatrix it estimates and how.

    ``block_row``/``block_col`` identify the estimated submatrix (1-based,
    matching the block grid).  ``rx_start``/``tx_start`` are the 0-based first
    element indices of the physical receive/transmit blocks used, which for
    the two corner entries differ from the estimated block.
    """

    block_row: int
    block_col: int
    rx_start: int
    tx_start: int
    tx_phase_rotation: complex = 1.0 + 0.0j


@dataclass(frozen=True)
class MultiplexSchedule:
    num_antennas: int
    block_size: int
    look_angle_deg: float
    entries: tuple[ScheduleEntry, ...]

    @property
    def num_blocks(self) -> int:
        return self.num_antennas // self.block_size

    @property
    def num_collections(self) -> int:
        return len(self.entries)


def build_schedule(
    geom: ArrayGeometry, block_size: int, look_angle_deg: float
) -> MultiplexSchedule:
    """Plan the 2K-1 collections that recover the full matched-filter matrix.

    Requires the number of candidate antennas to split into K >= 2 blocks of
    ``block_size``.  The rotation applied to the corner collections depends on
    the look direction, which is why the schedule is planned per look angle.
    """
    m = geom.num_antennas
    n = int(block_size)
    if n < 1:
        raise DomainError(f"block size must be positive, got {block_size}")
    if m % n != 0:
        raise DomainError(f"array size {m} is not divisible by block size {n}")
    k = m // n
    if k < 2:
        raise DomainError(
            f"multiplexing needs at least two blocks, got K={k} from M={m}, N={n}"
        )
    if not (0.0 < look_angle_deg < 180.0):
        raise DomainError(f"look angle out of range: {look_angle_deg}")

    # Phase advance of the look direction across one block of antennas.
    delta = (
        2.0
        * np.pi
        * n
        * geom.spacing_wavelengths
        * np.cos(np.deg2rad(look_angle_deg))
    )
    entries: list[ScheduleEntry] = []
    for j in range(2, k + 1):
        entries.append(
            ScheduleEntry(
                block_row=1, block_col=j, rx_start=0, tx_start=(j - 1) * n
            )
        )
    for i in range(2, k):
        entries.append(
            ScheduleEntry(
                block_row=i, block_col=k, rx_start=(i - 1) * n, tx_start=(k - 1) * n
            )
        )
    # Corner blocks: transmit with the neighboring block, rotated so that the
    # emitted field toward the look direction matches the block being
    # estimated.  Block 2 leads block 1 by delta, so it must be de-rotated;
    # block K-1 lags block K by delta, so it must be advanced.
    entries.append(
        ScheduleEntry(
            block_row=1,
            block_col=1,
            rx_start=0,
            tx_start=n,
            tx_phase_rotation=complex(np.exp(-1j * delta)),
        )
    )
    entries.append(
        ScheduleEntry(
            block_row=k,
            block_col=k,
            rx_start=(k - 1) * n,
            tx_start=(k - 2) * n,
            tx_phase_rotation=complex(np.exp(1j * delta)),
        )
    )
    return MultiplexSchedule(
        num_antennas=m,
        block_size=n,
        look_angle_deg=float(look_angle_deg),
        entries=tuple(entries),
    )


def required_blocks(num_antennas: int, block_size: int) -> tuple[tuple[int, int], ...]:
    """Block ids (1-based row, col) that a schedule estimates, canonical order."""
    k = num_antennas // block_size
    ids = [(1, j) for j in range(2, k + 1)]
    ids += [(i, k) for i in range(2, k)]
    ids += [(1, 1), (k, k)]
    return tuple(ids)


def _assembly_plan(num_antennas: int, block_size: int):
    """Measured positions and anti-diagonal copy map for the canonical blocks.

    Returns ``(ids, meas_flat, copy_dst, copy_src)`` where ``meas_flat[e]`` is
    the flat snapshot position of each entry of block ``ids[e]`` (row-major),
    and ``copy_dst``/``copy_src`` describe how unobserved entries are filled
    from the first observed entry on their anti-diagonal.
    """
    m, n = num_antennas, block_size
    ids = required_blocks(m, n)
    diag_src = np.full(2 * m - 1, -1, dtype=np.int64)
    measured = np.zeros(m * m, dtype=bool)
    meas_flat = np.empty((len(ids), n * n), dtype=np.int64)
    for e, (bi, bj) in enumerate(ids):
        rows = (bi - 1) * n + np.arange(n)
        cols = (bj - 1) * n + np.arange(n)
        flat = (rows[:, None] * m + cols[None, :]).ravel()
        meas_flat[e] = flat
        measured[flat] = True
        for f in flat:
            s = f // m + f % m
            if diag_src[s] < 0:
                diag_src[s] = f
    unmeasured = np.flatnonzero(~measured)
    sums = unmeasured // m + unmeasured % m
    copy_src = diag_src[sums]
    if np.any(copy_src < 0):  # cannot happen for K >= 2, kept as a guard
        raise DomainError("assembly plan does not cover every anti-diagonal")
    return ids, meas_flat, unmeasured.astype(np.int64), copy_src.astype(np.int64)


def assemble_hankel(
    submatrices: Mapping[tuple[int, int], np.ndarray],
    num_antennas: int,
    block_size: int,
    consistency_tol: Optional[float] = None,
) -> np.ndarray:
    """Rebuild the full matched-filter matrix from the scheduled submatrices.

    ``submatrices`` maps 1-based block ids to N x N arrays.  Observed entries
    are kept as measured; every other entry is copied from the first observed
    entry on its anti-diagonal.  When ``consistency_tol`` is given, observed
    entries sharing an anti-diagonal are checked against their representative
    and a discrepancy beyond the tolerance raises
    :class:`~cogmimo.errors.AssemblyConsistencyError`.
    """
    m, n = num_antennas, block_size
    if m % n != 0 or m // n < 2:
        raise DomainError(f"invalid block partition M={m}, N={n}")
    ids, meas_flat, copy_dst, copy_src = _assembly_plan(m, n)
    y = np.zeros(m * m, dtype=complex)
    for e, key in enumerate(ids):
        if key not in submatrices:
            raise MissingBlockError(f"schedule block {key} missing from input")
        block = np.asarray(submatrices[key], dtype=complex)
        if block.shape != (n, n):
            raise DomainError(
                f"block {key} has shape {block.shape}, expected {(n, n)}"
            )
        y[meas_flat[e]] = block.ravel()
    if consistency_tol is not None:
        diag_src = np.full(2 * m - 1, -1, dtype=np.int64)
        max_err = 0.0
        for e in range(len(ids)):
            for f in meas_flat[e]:
                s = f // m + f % m
                if diag_src[s] < 0:
                    diag_src[s] = f
                else:
                    max_err = max(max_err, abs(y[f] - y[diag_src[s]]))
        logger.debug("assembly max anti-diagonal discrepancy: %.3e", max_err)
        if max_err > consistency_tol:
            raise AssemblyConsistencyError(max_err, consistency_tol)
    if copy_dst.size:
        y[copy_dst] = y[copy_src]
    return y.reshape(m, m)


def default_block_size(num_antennas: int) -> Optional[int]:
    """Divisor of M closest to sqrt(M) with at least two blocks, if any."""
    candidates = [
        n for n in range(2, num_antennas // 2 + 1) if num_antennas % n == 0
    ]
    if not candidates:
        return None
    root = math.sqrt(num_antennas)
    return min(candidates, key=lambda n: (abs(n - root), n))


def _draw_pulse(scenario, n_coll, n_rx, length, pulse_index):
    """All random draws of one pulse, in the documented substream order."""
    rng = pulse_rng(scenario, pulse_index)
    eta = draw_reflections(scenario, rng)
    n_coex = len(scenario.coexisting)
    coex = np.empty((n_coll, n_coex, length), dtype=complex)
    noise = np.empty((n_coll, n_rx, length), dtype=complex)
    for e in range(n_coll):
        coex[e] = _draw_coexisting(scenario, length, rng)
        noise[e] = _draw_noise(scenario, n_rx, length, rng)
    return eta, coex, noise


def sense_full_covariance(
    geom: ArrayGeometry,
    scenario: Scenario,
    waveforms: WaveformSet,
    block_size: Optional[int],
    num_pulses: int,
    *,
    look_angle_deg: Optional[float] = None,
    chunk_size: int = 256,
    backend: Optional[str] = None,
) -> VirtualCovariance:
    """Estimate the virtual-array covariance over ``num_pulses`` pulses.

    ``block_size`` selects the multiplexed schedule; pass None to observe the
    full array in every pulse (reference mode, no assembly involved).  The
    look angle defaults to the scenario target direction and only matters for
    the rotated corner collections.

    The returned matrix is the pulse-averaged outer product of the vectorized
    (assembled) matched-filter snapshots, exactly Hermitian by construction.
    """
    if num_pulses < 1:
        raise DomainError(f"num_pulses must be positive, got {num_pulses}")
    m = geom.num_antennas
    if waveforms.num_waveforms < m:
        raise DomainError(
            f"waveform set has {waveforms.num_waveforms} rows, need {m}"
        )
    if look_angle_deg is None:
        look_angle_deg = scenario.target.angle_deg

    if block_size is None:
        n = m
        rx0 = np.zeros(1, dtype=np.int64)
        tx0 = np.zeros(1, dtype=np.int64)
        rot = np.ones(1, dtype=complex)
        meas_flat = np.arange(m * m, dtype=np.int64)[None, :]
        copy_dst = np.empty(0, dtype=np.int64)
        copy_src = np.empty(0, dtype=np.int64)
    else:
        schedule = build_schedule(geom, block_size, look_angle_deg)
        n = schedule.block_size
        rx0 = np.array([e.rx_start for e in schedule.entries], dtype=np.int64)
        tx0 = np.array([e.tx_start for e in schedule.entries], dtype=np.int64)
        rot = np.array(
            [e.tx_phase_rotation for e in schedule.entries], dtype=complex
        )
        _, meas_flat, copy_dst, copy_src = _assembly_plan(m, n)

    n_coll = rx0.size
    length = waveforms.code_length
    fluct = scenario.fluctuating
    coexisting = scenario.coexisting
    steer_fluct = np.array(
        [steering_vector(geom, s.angle_deg) for s in fluct], dtype=complex
    ).reshape(len(fluct), m)
    steer_coex = np.array(
        [steering_vector(geom, s.angle_deg) for s in coexisting], dtype=complex
    ).reshape(len(coexisting), m)

    # Pulse-invariant transmitted mixes and matched-filter factors.
    vmat = np.empty((n_coll, len(fluct), length), dtype=complex)
    codes_ct = np.empty((n_coll, length, n), dtype=complex)
    for e in range(n_coll):
        tx_slice = slice(tx0[e], tx0[e] + n)
        codes_active = waveforms.codes[tx_slice]
        codes_ct[e] = codes_active.conj().T
        for k in range(len(fluct)):
            vmat[e, k] = steer_fluct[k, tx_slice] @ codes_active

    mod = _backend_module(backend)
    dim = m * m
    r = np.zeros((dim, dim), dtype=complex)
    eta_buf = np.empty((chunk_size, len(fluct)), dtype=complex)
    coex_buf = np.empty((chunk_size, n_coll, len(coexisting), length), dtype=complex)
    noise_buf = np.empty((chunk_size, n_coll, n, length), dtype=complex)
    out = np.empty((chunk_size, dim), dtype=complex)
    for start in range(0, num_pulses, chunk_size):
        b = min(chunk_size, num_pulses - start)
        for p in range(b):
            eta_buf[p], coex_buf[p], noise_buf[p] = _draw_pulse(
                scenario, n_coll, n, length, start + p
            )
        out[:b] = 0.0
        mod.synthesize_chunk(
            out[:b],
            eta_buf[:b],
            coex_buf[:b],
            noise_buf[:b],
            steer_fluct,
            steer_coex,
            vmat,
            rot,
            rx0,
            meas_flat,
            copy_dst,
            copy_src,
            codes_ct,
        )
        r += out[:b].T @ out[:b].conj()
    r /= num_pulses
    r = 0.5 * (r + r.conj().T)
    return VirtualCovariance(matrix=r, num_pulses=num_pulses)


_DUMP_MAGIC = "# cogmimo covariance v1"


def save_covariance(
    path,
    cov: VirtualCovariance,
    *,
    num_antennas: int,
    block_size: Optional[int] = None,
) -> None:
    """Write a covariance estimate as a row-major text matrix with header.

    Header records the array size, the multiplexing block size (0 when the
    full array was observed) and the pulse count (0 for analytic matrices).
    Real and imaginary parts alternate within each row.
    """
    mat = cov.matrix
    dim = mat.shape[0]
    if dim != num_antennas**2:
        raise DomainError(
            f"matrix dimension {dim} does not match M={num_antennas}"
        )
    t = cov.num_pulses or 0
    n = block_size or 0
    with open(path, "w") as fh:
        fh.write(_DUMP_MAGIC + "\n")
        fh.write(f"# M={num_antennas} N={n} T={t}\n")
        for row in mat:
            parts = []
            for z in row:
                parts.append(format(z.real, ".17g"))
                parts.append(format(z.imag, ".17g"))
            fh.write(" ".join(parts) + "\n")


def load_covariance(path) -> tuple[VirtualCovariance, dict]:
    """Read a covariance dump written by :func:`save_covariance`."""
    with open(path) as fh:
        magic = fh.readline().rstrip("\n")
        if magic != _DUMP_MAGIC:
            raise DomainError(f"{path}: not a covariance dump")
        header = fh.readline().strip()
        meta = {}
        for tok in header.lstrip("#").split():
            key, _, val = tok.partition("=")
            meta[key.lower()] = int(val)
        data = np.loadtxt(fh, ndmin=2)
    dim = meta["m"] ** 2
    if data.shape != (dim, 2 * dim):
        raise DomainError(
            f"{path}: expected {dim}x{2 * dim} values, got {data.shape}"
        )
    mat = data[:, 0::2] + 1j * data[:, 1::2]
    t = meta.get("t", 0) or None
    return VirtualCovariance(matrix=mat, num_pulses=t), meta
