"""Command-line front end.

Subcommands::

    cogmimo simulate --config scene.json [--out DIR] [--pulses N] [--seed S]
    cogmimo sense    --config scene.json [--out DIR] [--pulses N] [--seed S]
    cogmimo select   --config scene.json [--out DIR] [--pulses N] [--seed S]
    cogmimo cycle    --config scene.json [--out DIR] [--pulses N] [--seed S]
    cogmimo example  {1,2,3,4}           [--out DIR] [--pulses N] [--seed S]

Everything is file-oriented: each subcommand writes plot-ready CSV into the
output directory and prints a one-line summary.  Exit codes: 0 success,
2 configuration problem, 3 infeasible selection, 4 solver failure, 1 any
other error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from typing import Optional

from . import config as cfgmod
from .beamforming import output_sinr
from .cognition import run_cycle
from .errors import (
    CogmimoError,
    ConfigError,
    DomainError,
    InfeasibleSelectionError,
    SolverFailureError,
)
from .experiments import (
    run_example1,
    run_example2,
    run_example3,
    run_example4,
    write_configs_csv,
    write_trace_csv,
)
from .sensing import default_block_size, save_covariance, sense_full_covariance
from .selection import SelectorSession
from .waveforms import generate_waveforms, matched_filter, simulate_pulse

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_SOLVER = 4

logger = logging.getLogger(__name__)


def _seed_type(text: str) -> int:
    value = int(text)
    if not (0 <= value < 2**64):
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory (default: cwd)")
    common.add_argument("--seed", type=_seed_type, default=None, help="override RNG seed")
    common.add_argument("--pulses", type=int, default=None, help="pulse count override")
    common.add_argument(
        "-v", "--verbose", action="store_true", help="enable debug logging"
    )

    withcfg = argparse.ArgumentParser(add_help=False, parents=[common])
    withcfg.add_argument("--config", required=True, help="scene config (JSON)")

    parser = argparse.ArgumentParser(
        prog="cogmimo",
        description="Cognitive sparse MIMO radar transceiver simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser(
        "simulate",
        parents=[withcfg],
        help="matched-filtered virtual-array snapshots for the configured scene",
    )
    sub.add_parser(
        "sense", parents=[withcfg], help="estimate and dump the virtual covariance"
    )
    sub.add_parser(
        "select", parents=[withcfg], help="sense, then pick the transceiver pair"
    )
    sub.add_parser(
        "cycle", parents=[withcfg], help="run the perception-action timeline"
    )
    ex = sub.add_parser("example", parents=[common], help="run a canned study")
    ex.add_argument("number", type=int, choices=(1, 2, 3, 4))
    return parser


def _load_scene(args):
    raw = cfgmod.load_config(args.config)
    geom = cfgmod.geometry_from_config(raw)
    scenario = cfgmod.scenario_from_config(raw)
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, rng_seed=args.seed)
    return raw, geom, scenario


def _resolve_block(raw, geom):
    size, pulses, backend = cfgmod.sensing_from_config(raw)
    if size == "auto":
        size = default_block_size(geom.num_antennas)
    return size, pulses, backend


def _cmd_simulate(args) -> int:
    raw, geom, scenario = _load_scene(args)
    pulses = args.pulses if args.pulses is not None else 10
    if pulses < 1:
        raise ConfigError("--pulses must be >= 1")
    waveforms = generate_waveforms(geom.num_antennas, signal_power=scenario.signal_power)
    everything = range(geom.num_antennas)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "snapshots.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("pulse,virtual_index,real,imag\n")
        for pulse in range(pulses):
            snap = simulate_pulse(geom, scenario, waveforms, everything, everything, pulse)
            y = matched_filter(snap, waveforms).ravel()
            for k, val in enumerate(y):
                fh.write(f"{pulse},{k},{val.real:.12g},{val.imag:.12g}\n")
    print(f"wrote {pulses} pulses x {geom.num_antennas ** 2} virtual elements to {path}")
    return EXIT_OK


def _sense(args, raw, geom, scenario):
    size, pulses, backend = _resolve_block(raw, geom)
    if args.pulses is not None:
        if args.pulses < 1:
            raise ConfigError("--pulses must be >= 1")
        pulses = args.pulses
    waveforms = generate_waveforms(geom.num_antennas, signal_power=scenario.signal_power)
    cov = sense_full_covariance(
        geom,
        scenario,
        waveforms,
        size,
        pulses,
        look_angle_deg=scenario.target.angle_deg,
        backend=backend,
    )
    return cov, size, pulses


def _cmd_sense(args) -> int:
    raw, geom, scenario = _load_scene(args)
    cov, size, pulses = _sense(args, raw, geom, scenario)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "covariance.txt")
    save_covariance(path, cov, num_antennas=geom.num_antennas, block_size=size)
    mode = "full array" if size is None else f"block size {size}"
    print(f"sensed {cov.dim}x{cov.dim} covariance ({mode}, {pulses} pulses) -> {path}")
    return EXIT_OK


def _cmd_select(args) -> int:
    raw, geom, scenario = _load_scene(args)
    cov, _, _ = _sense(args, raw, geom, scenario)
    selector = cfgmod.selector_from_config(raw)
    session = SelectorSession(geom, selector)
    result = session.select(cov, scenario.target.angle_deg)
    sinr = output_sinr(result.solution.weights, scenario, geom, result.pair)
    tx = ";".join(str(i) for i in result.pair.tx_indices)
    rx = ";".join(str(i) for i in result.pair.rx_indices)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "selection.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("tx_indices,rx_indices,iterations,converged,sinr_db\n")
        fh.write(f"{tx},{rx},{result.iterations},{result.converged},{sinr:.12g}\n")
    print(f"selected tx [{tx}] rx [{rx}] sinr {sinr:.2f} dB -> {path}")
    return EXIT_OK


def _cmd_cycle(args) -> int:
    raw, geom, scenario = _load_scene(args)
    timeline = cfgmod.timeline_from_config(raw)
    if args.seed is not None:
        timeline = [
            (start, dataclasses.replace(sc, rng_seed=args.seed + i))
            for i, (start, sc) in enumerate(timeline)
        ]
    total = args.pulses if args.pulses is not None else 6000
    if total < 1:
        raise ConfigError("--pulses must be >= 1")
    policy = cfgmod.policy_from_config(raw)
    selector = cfgmod.selector_from_config(raw)
    size, _, backend = _resolve_block(raw, geom)
    cycle = run_cycle(
        geom, timeline, total, policy, selector, block_size=size, backend=backend
    )
    os.makedirs(args.out, exist_ok=True)
    trace_path = os.path.join(args.out, "trace.csv")
    configs_path = os.path.join(args.out, "configs.csv")
    write_trace_csv(trace_path, cycle)
    write_configs_csv(configs_path, cycle, geom, timeline)
    print(
        f"ran {total} pulses, {len(cycle.reconfigurations)} reconfiguration(s) "
        f"-> {trace_path}, {configs_path}"
    )
    return EXIT_OK


def _cmd_example(args) -> int:
    seed = args.seed if args.seed is not None else 0
    if args.number == 1:
        kwargs = {}
        if args.pulses is not None:
            if args.pulses < 1:
                raise ConfigError("--pulses must be >= 1")
            kwargs["total_pulses"] = args.pulses
        res = run_example1(args.out, seed=seed, **kwargs)
        print(f"wrote {res.trace_path} and {res.configs_path}")
    elif args.number == 2:
        print(f"wrote {run_example2(args.out)}")
    elif args.number == 3:
        print(f"wrote {run_example3(args.out)}")
    else:
        print(f"wrote {run_example4(args.out)}")
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "sense": _cmd_sense,
    "select": _cmd_select,
    "cycle": _cmd_cycle,
    "example": _cmd_example,
}


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleSelectionError as exc:
        print(f"infeasible selection: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SolverFailureError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except DomainError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CogmimoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
