# cython: language_level=3
"""Compiled backend for the covariance sensing inner loop.

Same contract as ``cogmimo._accel_py.synthesize_chunk``; see that module for
the reference semantics.  The hot work per pulse is a handful of rank-1
updates on an (N, L) snapshot followed by an (N, L) x (L, N) matched-filter
product, repeated for every scheduled collection.  At the sizes this library
runs (N up to ~20, L a few hundred) plain typed loops beat staging the same
arithmetic through NumPy temporaries by a comfortable margin.
"""

import numpy as np

cimport cython
cimport numpy as cnp


@cython.boundscheck(False)
@cython.wraparound(False)
@cython.cdivision(True)
def synthesize_chunk(
    double complex[:, ::1] out not None,
    double complex[:, ::1] eta not None,
    double complex[:, :, :, ::1] coex not None,
    double complex[:, :, :, ::1] noise not None,
    double complex[:, ::1] steer_fluct not None,
    double complex[:, ::1] steer_coex not None,
    double complex[:, :, ::1] vmat not None,
    double complex[::1] rot not None,
    cnp.int64_t[::1] rx0 not None,
    cnp.int64_t[:, ::1] meas_flat not None,
    cnp.int64_t[::1] copy_dst not None,
    cnp.int64_t[::1] copy_src not None,
    double complex[:, :, ::1] codes_ct not None,
):
    cdef Py_ssize_t n_pulses = out.shape[0]
    cdef Py_ssize_t n_coll = rx0.shape[0]
    cdef Py_ssize_t n_fluct = eta.shape[1]
    cdef Py_ssize_t n_coex = steer_coex.shape[0]
    cdef Py_ssize_t length = codes_ct.shape[1]
    cdef Py_ssize_t n = codes_ct.shape[2]
    cdef Py_ssize_t n_copy = copy_dst.shape[0]
    cdef Py_ssize_t p, e, k, c, a, b, t, lo
    cdef double complex coef, acc
    cdef double complex[:, ::1] x = np.empty((n, length), dtype=np.complex128)

    for p in range(n_pulses):
        for e in range(n_coll):
            lo = rx0[e]
            for a in range(n):
                for t in range(length):
                    x[a, t] = noise[p, e, a, t]
            for k in range(n_fluct):
                for a in range(n):
                    coef = eta[p, k] * rot[e] * steer_fluct[k, lo + a]
                    for t in range(length):
                        x[a, t] = x[a, t] + coef * vmat[e, k, t]
            for c in range(n_coex):
                for a in range(n):
                    coef = steer_coex[c, lo + a]
                    for t in range(length):
                        x[a, t] = x[a, t] + coef * coex[p, e, c, t]
            for a in range(n):
                for b in range(n):
                    acc = 0
                    for t in range(length):
                        acc = acc + x[a, t] * codes_ct[e, t, b]
                    out[p, meas_flat[e, a * n + b]] = acc / length
        for k in range(n_copy):
            out[p, copy_dst[k]] = out[p, copy_src[k]]
