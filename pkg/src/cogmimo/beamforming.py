"""Minimum-variance distortionless beamforming on the virtual array.

Weights solve ``min w^H R w  s.t.  w^H b = 1``; the closed form
``R^{-1} b / (b^H R^{-1} b)`` is evaluated through a Hermitian factorization,
never an explicit inverse.  Ill-conditioned covariance estimates receive
trace-scaled diagonal loading first.

The real lift used by the sparse selector doubles dimensions:
``[[Re R, -Im R], [Im R, Re R]]`` acting on ``[Re w; Im w]`` preserves the
quadratic form of any Hermitian matrix, and the lifted linear constraint
pins the real part of ``w^H b``, which loses nothing at the optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import DomainError, NumericalError
from .model import (
    ArrayGeometry,
    Scenario,
    VirtualCovariance,
    oracle_interference_covariance,
    selection_virtual_indices,
    virtual_steering,
)

COND_THRESHOLD = 1e10
LOADING_EPS = 1e-8


@dataclass(frozen=True)
class BeamformerSolution:
    """Distortionless weights for one look direction.

    ``output_sinr_db`` is populated once the weights have been scored against
    an analytic interference model; it stays None straight out of the solver.
    """

    weights: np.ndarray
    look_angle_deg: float
    output_sinr_db: Optional[float] = None


def _as_matrix(r) -> np.ndarray:
    if isinstance(r, VirtualCovariance):
        return r.matrix
    return np.asarray(r)


def loading_level(
    r,
    cond_threshold: float = COND_THRESHOLD,
    eps: float = LOADING_EPS,
) -> float:
    """Diagonal level needed to bring a covariance within condition bounds.

    Zero for well-conditioned matrices; otherwise ``eps * trace(R)/dim``
    plus whatever cancels a (numerically) negative smallest eigenvalue.
    """
    mat = _as_matrix(r)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DomainError(f"covariance must be square, got {mat.shape}")
    eigs = scipy.linalg.eigvalsh(mat)
    lo, hi = eigs[0], eigs[-1]
    if hi <= 0:
        raise NumericalError("covariance has no positive eigenvalue")
    if lo > 0 and hi / lo <= cond_threshold:
        return 0.0
    level = eps * np.trace(mat).real / mat.shape[0]
    if lo < 0:
        level += -lo
    return float(level)


def loaded_covariance(
    r,
    cond_threshold: float = COND_THRESHOLD,
    eps: float = LOADING_EPS,
) -> np.ndarray:
    """Diagonal-load a covariance whose condition number is out of bounds.

    Well-conditioned inputs pass through untouched.
    """
    mat = _as_matrix(r)
    level = loading_level(mat, cond_threshold, eps)
    if level == 0.0:
        return mat
    return mat + level * np.eye(mat.shape[0])


def capon_weights(r, steering: np.ndarray) -> np.ndarray:
    """Distortionless minimum-variance weights for one steering vector."""
    mat = loaded_covariance(r)
    b = np.asarray(steering, dtype=complex)
    if b.ndim != 1 or b.size != mat.shape[0]:
        raise DomainError(
            f"steering length {b.size} does not match covariance dim {mat.shape[0]}"
        )
    try:
        c, low = scipy.linalg.cho_factor(mat)
        sol = scipy.linalg.cho_solve((c, low), b)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - loading guards this
        raise NumericalError(f"covariance factorization failed: {exc}") from exc
    denom = np.vdot(b, sol)
    if denom == 0:
        raise NumericalError("steering vector is in the covariance null space")
    return sol / denom


def capon_solution(
    r, geom: ArrayGeometry, look_angle_deg: float, selection=None
) -> BeamformerSolution:
    """Capon weights for a look angle on the full or a selected virtual array."""
    b = virtual_steering(geom, look_angle_deg)
    mat = _as_matrix(r)
    if selection is not None:
        idx = selection_virtual_indices(geom.num_antennas, selection)
        b = b[idx]
        if mat.shape[0] != idx.size:
            mat = mat[np.ix_(idx, idx)]
    return BeamformerSolution(
        weights=capon_weights(mat, b), look_angle_deg=float(look_angle_deg)
    )


def realify(r: np.ndarray) -> np.ndarray:
    """Lift a complex Hermitian matrix to its real 2n x 2n representation."""
    mat = _as_matrix(r)
    re, im = mat.real, mat.imag
    return np.block([[re, -im], [im, re]])


def lift_vector(v: np.ndarray) -> np.ndarray:
    """Stack real over imaginary parts, matching :func:`realify`."""
    v = np.asarray(v)
    return np.concatenate([v.real, v.imag])


def unlift_vector(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`lift_vector`."""
    v = np.asarray(v, dtype=float)
    n = v.size // 2
    if v.size != 2 * n:
        raise DomainError("lifted vector must have even length")
    return v[:n] + 1j * v[n:]


def output_sinr(
    weights: np.ndarray,
    scenario: Scenario,
    geom: ArrayGeometry,
    selection=None,
) -> float:
    """Score weights against the analytic interference-plus-noise model.

    Returns the output signal-to-interference-plus-noise ratio in dB:
    target power times ``|w^H b|^2`` over ``w^H R_in w`` with the analytic
    ``R_in`` of the scenario restricted to the selection.  A switched-off
    target yields ``-inf``.
    """
    w = np.asarray(weights, dtype=complex)
    target = scenario.target
    b = virtual_steering(geom, target.angle_deg)
    if selection is not None:
        idx = selection_virtual_indices(geom.num_antennas, selection)
        b = b[idx]
    if w.shape != b.shape:
        raise DomainError(
            f"weights length {w.size} does not match selection size {b.size}"
        )
    r_in = oracle_interference_covariance(geom, scenario, selection)
    signal_power = scenario.signal_power**2 * target.power_linear()
    num = signal_power * abs(np.vdot(w, b)) ** 2
    den = np.vdot(w, r_in @ w).real
    if den <= 0:
        raise NumericalError("non-positive interference power; matrix not PSD")
    if num == 0.0:
        return -math.inf
    return 10.0 * math.log10(num / den)


def beampattern(
    weights: np.ndarray,
    geom: ArrayGeometry,
    look_angle_deg: float,
    selection=None,
    angles_deg: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Normalized power response over a grid of directions.

    Returns ``(angles_deg, gain_db)`` with 0 dB at the look angle.  The grid
    defaults to one point per degree over the open (0, 180) interval.
    """
    w = np.asarray(weights, dtype=complex)
    if angles_deg is None:
        angles_deg = np.arange(1.0, 180.0, 1.0)
    angles_deg = np.asarray(angles_deg, dtype=float)
    idx = None
    if selection is not None:
        idx = selection_virtual_indices(geom.num_antennas, selection)
    ref = virtual_steering(geom, look_angle_deg)
    if idx is not None:
        ref = ref[idx]
    ref_gain = abs(np.vdot(w, ref))
    if ref_gain == 0:
        raise NumericalError("zero response at the look angle")
    gains = np.empty_like(angles_deg)
    for i, ang in enumerate(angles_deg):
        b = virtual_steering(geom, ang)
        if idx is not None:
            b = b[idx]
        gains[i] = abs(np.vdot(w, b))
    gain_db = 20.0 * np.log10(np.maximum(gains / ref_gain, 1e-300))
    return angles_deg, gain_db
