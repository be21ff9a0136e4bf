"""Pure-NumPy backend for the covariance sensing inner loop.

Mirrors the compiled extension ``cogmimo._accel`` operation for operation so
either can execute a sensing run.  Kept deliberately close to
``simulate_pulse`` + ``matched_filter``: for an unrotated collection the
arithmetic is identical term order, so results match the public per-pulse
ops bitwise.
"""

from __future__ import annotations

import numpy as np


def synthesize_chunk(
    out: np.ndarray,  # (B, M*M) complex, zero-initialized, written in place
    eta: np.ndarray,  # (B, n_fluct) complex reflection draws
    coex: np.ndarray,  # (B, n_coll, n_coex, L) complex emission draws
    noise: np.ndarray,  # (B, n_coll, N, L) complex noise draws
    steer_fluct: np.ndarray,  # (n_fluct, M) complex
    steer_coex: np.ndarray,  # (n_coex, M) complex
    vmat: np.ndarray,  # (n_coll, n_fluct, L) transmitted mixes, rotation excluded
    rot: np.ndarray,  # (n_coll,) complex transmit phase rotations
    rx0: np.ndarray,  # (n_coll,) int64 first receive element of each collection
    meas_flat: np.ndarray,  # (n_coll, N*N) int64 flat snapshot positions
    copy_dst: np.ndarray,  # (n_copy,) int64
    copy_src: np.ndarray,  # (n_copy,) int64
    codes_ct: np.ndarray,  # (n_coll, L, N) conjugate-transposed active codes
) -> None:
    B = out.shape[0]
    n_coll = rx0.shape[0]
    n_fluct = eta.shape[1]
    n_coex = steer_coex.shape[0]
    n = codes_ct.shape[2]
    length = codes_ct.shape[1]
    for p in range(B):
        y = out[p]
        for e in range(n_coll):
            lo = rx0[e]
            x = np.zeros((n, length), dtype=complex)
            for k in range(n_fluct):
                x += (eta[p, k] * rot[e]) * np.outer(
                    steer_fluct[k, lo : lo + n], vmat[e, k]
                )
            for c in range(n_coex):
                x += np.outer(steer_coex[c, lo : lo + n], coex[p, e, c])
            x += noise[p, e]
            block = (x @ codes_ct[e]) / length
            y[meas_flat[e]] = block.ravel()
        if copy_dst.size:
            y[copy_dst] = y[copy_src]
