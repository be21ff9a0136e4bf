"""Compare the compiled sensing kernel against the pure-Python fallback.

Run from the repository root after installing the package::

    python benchmarks/bench_sensing.py [--m 18] [--pulses 2000] [--block 3]

Reports wall time per backend, the speedup, and the worst elementwise
disagreement between the two covariance estimates (they share the RNG
stream, so only accumulation order separates them).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from cogmimo.model import ArrayGeometry, Scenario, SourceDescriptor
from cogmimo.sensing import HAVE_ACCEL, sense_full_covariance
from cogmimo.waveforms import generate_waveforms


def build_scene() -> Scenario:
    return Scenario(
        sources=(
            SourceDescriptor("target", 65.0, 20.0),
            SourceDescriptor("deceptive", 50.0, 15.0),
            SourceDescriptor("deceptive", 60.0, 15.0),
            SourceDescriptor("coexisting", 40.0, 15.0),
        ),
        rng_seed=1234,
    )


def run(backend: str, geom, scenario, waveforms, block, pulses):
    start = time.perf_counter()
    cov = sense_full_covariance(
        geom,
        scenario,
        waveforms,
        block,
        pulses,
        look_angle_deg=scenario.target.angle_deg,
        backend=backend,
    )
    elapsed = time.perf_counter() - start
    return cov, elapsed


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=18, help="candidate antennas")
    ap.add_argument("--pulses", type=int, default=2000, help="sensing pulses")
    ap.add_argument(
        "--block",
        type=int,
        default=None,
        help="multiplexing block size (omit for the default rule)",
    )
    args = ap.parse_args()

    geom = ArrayGeometry(num_antennas=args.m, spacing_wavelengths=0.5)
    scenario = build_scene()
    waveforms = generate_waveforms(args.m)
    block = args.block
    if block is None:
        from cogmimo.sensing import default_block_size

        block = default_block_size(args.m)

    cov_py, t_py = run("python", geom, scenario, waveforms, block, args.pulses)
    rate_py = args.pulses / t_py
    print(f"python backend: {t_py:8.3f} s  ({rate_py:9.1f} pulses/s)")

    if not HAVE_ACCEL:
        print("compiled backend not built; install with the extension to compare")
        return 0

    cov_ac, t_ac = run("accel", geom, scenario, waveforms, block, args.pulses)
    rate_ac = args.pulses / t_ac
    print(f"accel backend:  {t_ac:8.3f} s  ({rate_ac:9.1f} pulses/s)")
    print(f"speedup: {t_py / t_ac:.2f}x")

    diff = np.max(np.abs(cov_ac.matrix - cov_py.matrix))
    scale = np.max(np.abs(cov_py.matrix))
    print(f"max |accel - python|: {diff:.3e}  (relative {diff / scale:.3e})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
