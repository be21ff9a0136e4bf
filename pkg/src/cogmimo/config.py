"""Structured-text (JSON) configuration loading and validation.

A config file describes one scene plus the knobs of the machinery that acts
on it.  Top-level schema::

    {
      "m": 18,                  # candidate antennas
      "d_over_lambda": 0.5,     # inter-element spacing in wavelengths
      "sigma_s2": 1.0,          # per-waveform transmit power
      "noise_power": 1.0,       # receiver noise floor (power)
      "seed": 0,                # base RNG seed for pulse simulation
      "sources": [ {"kind": "target", "angle_deg": 65, "power_db": 20}, ... ],
      "selector": { "num_selected": 4, ... },          # optional
      "policy":   { "drop_threshold_db": 3.0, ... },   # optional
      "sensing":  { "block_size": "auto", "pulses": 2000, "backend": null },
      "timeline": [ {"start_pulse": 400, "sources": [...]}, ... ]  # optional
    }

``sources`` powers are in dB relative to the noise floor, so with
``noise_power = 1`` they read as SNR / INR.  ``timeline`` entries reuse the
top-level noise and power settings and replace only the source list; the
top-level ``sources`` implicitly forms the entry at pulse 0.

All validation failures raise :class:`~cogmimo.errors.ConfigError` with the
offending key in the message; the CLI maps that onto its own exit code.
"""

from __future__ import annotations

import json
import numbers
from typing import Any, Optional

from .cognition import TriggerPolicy
from .errors import ConfigError, DomainError
from .model import ArrayGeometry, Scenario, SourceDescriptor
from .selection import SelectorConfig

_TOP_KEYS = {
    "m",
    "d_over_lambda",
    "sigma_s2",
    "noise_power",
    "seed",
    "sources",
    "selector",
    "policy",
    "sensing",
    "timeline",
}
_SOURCE_KEYS = {"kind", "angle_deg", "power_db"}
_SELECTOR_KEYS = {
    "num_selected",
    "alpha_scale",
    "beta_scale",
    "alpha0",
    "beta0",
    "eps",
    "binary_tol",
    "max_outer_iters",
    "refine_budget",
    "solver",
}
_POLICY_KEYS = {
    "drop_threshold_db",
    "reference_window",
    "sensing_pulses",
    "learning_pulses",
}
_SENSING_KEYS = {"block_size", "pulses", "backend"}
_TIMELINE_KEYS = {"start_pulse", "sources"}

DEFAULT_NUM_SELECTED = 4
DEFAULT_SENSING_PULSES = 2000


def load_config(path: str) -> dict:
    """Read and parse a JSON config file.

    Raises ConfigError on I/O or syntax problems; the parsed dictionary is
    validated lazily by the ``*_from_config`` accessors.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config root must be an object, got {type(raw).__name__}")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level config keys: {sorted(unknown)}")
    return raw


def _require_number(raw: dict, key: str, default=None):
    value = raw.get(key, default)
    if value is None:
        raise ConfigError(f"config key {key!r} is required")
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ConfigError(f"config key {key!r} must be a number, got {value!r}")
    return value


def geometry_from_config(raw: dict) -> ArrayGeometry:
    m = _require_number(raw, "m")
    if int(m) != m:
        raise ConfigError(f"config key 'm' must be an integer, got {m!r}")
    spacing = _require_number(raw, "d_over_lambda", 0.5)
    try:
        return ArrayGeometry(num_antennas=int(m), spacing_wavelengths=float(spacing))
    except DomainError as exc:
        raise ConfigError(f"invalid geometry: {exc}") from exc


def _source_from_entry(entry: Any, where: str) -> SourceDescriptor:
    if not isinstance(entry, dict):
        raise ConfigError(f"{where} must be an object, got {type(entry).__name__}")
    unknown = set(entry) - _SOURCE_KEYS
    if unknown:
        raise ConfigError(f"{where} has unknown keys: {sorted(unknown)}")
    missing = _SOURCE_KEYS - set(entry)
    if missing:
        raise ConfigError(f"{where} is missing keys: {sorted(missing)}")
    power = entry["power_db"]
    if isinstance(power, str):
        # JSON has no literal for -inf; accept the string spelling.
        if power.strip().lower() in {"-inf", "-infinity"}:
            power = float("-inf")
        else:
            raise ConfigError(f"{where}: power_db string must be '-inf', got {power!r}")
    try:
        return SourceDescriptor(
            kind=entry["kind"],
            angle_deg=float(entry["angle_deg"]),
            power_db=float(power),
        )
    except (DomainError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _scenario_from_sources(raw: dict, sources_value: Any, where: str) -> Scenario:
    if not isinstance(sources_value, list) or not sources_value:
        raise ConfigError(f"{where} must be a non-empty array of source objects")
    sources = [
        _source_from_entry(entry, f"{where}[{i}]")
        for i, entry in enumerate(sources_value)
    ]
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral):
        raise ConfigError(f"config key 'seed' must be an integer, got {seed!r}")
    try:
        return Scenario(
            sources=tuple(sources),
            noise_power=float(_require_number(raw, "noise_power", 1.0)),
            signal_power=float(_require_number(raw, "sigma_s2", 1.0)),
            rng_seed=int(seed),
        )
    except DomainError as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc


def scenario_from_config(raw: dict) -> Scenario:
    if "sources" not in raw:
        raise ConfigError("config key 'sources' is required")
    return _scenario_from_sources(raw, raw["sources"], "sources")


def selector_from_config(raw: dict) -> SelectorConfig:
    block = raw.get("selector", {})
    if not isinstance(block, dict):
        raise ConfigError("config key 'selector' must be an object")
    unknown = set(block) - _SELECTOR_KEYS
    if unknown:
        raise ConfigError(f"selector block has unknown keys: {sorted(unknown)}")
    kwargs = dict(block)
    kwargs.setdefault("num_selected", DEFAULT_NUM_SELECTED)
    try:
        return SelectorConfig(**kwargs)
    except (DomainError, TypeError) as exc:
        raise ConfigError(f"invalid selector block: {exc}") from exc


def policy_from_config(raw: dict) -> TriggerPolicy:
    block = raw.get("policy", {})
    if not isinstance(block, dict):
        raise ConfigError("config key 'policy' must be an object")
    unknown = set(block) - _POLICY_KEYS
    if unknown:
        raise ConfigError(f"policy block has unknown keys: {sorted(unknown)}")
    sensing = raw.get("sensing", {})
    kwargs = dict(block)
    if isinstance(sensing, dict) and "pulses" in sensing and "sensing_pulses" not in kwargs:
        kwargs["sensing_pulses"] = sensing["pulses"]
    try:
        return TriggerPolicy(**kwargs)
    except (DomainError, TypeError) as exc:
        raise ConfigError(f"invalid policy block: {exc}") from exc


def sensing_from_config(raw: dict) -> tuple[Optional[int], int, Optional[str]]:
    """Return (block_size, pulses, backend) from the sensing block.

    ``block_size`` is None for full-array sensing and the string "auto" is
    resolved by the caller (it depends on geometry).
    """
    block = raw.get("sensing", {})
    if not isinstance(block, dict):
        raise ConfigError("config key 'sensing' must be an object")
    unknown = set(block) - _SENSING_KEYS
    if unknown:
        raise ConfigError(f"sensing block has unknown keys: {sorted(unknown)}")
    size = block.get("block_size", "auto")
    if size is not None and size != "auto":
        if isinstance(size, bool) or not isinstance(size, numbers.Integral):
            raise ConfigError(
                f"sensing.block_size must be an integer, null, or 'auto', got {size!r}"
            )
        size = int(size)
    pulses = block.get("pulses", DEFAULT_SENSING_PULSES)
    if isinstance(pulses, bool) or not isinstance(pulses, numbers.Integral) or pulses < 1:
        raise ConfigError(f"sensing.pulses must be a positive integer, got {pulses!r}")
    backend = block.get("backend")
    if backend is not None and backend not in ("accel", "python"):
        raise ConfigError(
            f"sensing.backend must be 'accel', 'python', or null, got {backend!r}"
        )
    return size, int(pulses), backend


def timeline_from_config(raw: dict) -> list[tuple[int, Scenario]]:
    """Build the scenario timeline for the perception-action cycle.

    The top-level scene starts at pulse 0; each timeline entry replaces the
    source list from its start pulse onward.
    """
    entries: list[tuple[int, Scenario]] = [(0, scenario_from_config(raw))]
    block = raw.get("timeline", [])
    if not isinstance(block, list):
        raise ConfigError("config key 'timeline' must be an array")
    for i, entry in enumerate(block):
        where = f"timeline[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where} must be an object")
        unknown = set(entry) - _TIMELINE_KEYS
        if unknown:
            raise ConfigError(f"{where} has unknown keys: {sorted(unknown)}")
        if "start_pulse" not in entry or "sources" not in entry:
            raise ConfigError(f"{where} needs 'start_pulse' and 'sources'")
        start = entry["start_pulse"]
        if isinstance(start, bool) or not isinstance(start, numbers.Integral) or start < 1:
            raise ConfigError(f"{where}.start_pulse must be a positive integer")
        entries.append(
            (int(start), _scenario_from_sources(raw, entry["sources"], f"{where}.sources"))
        )
    starts = [p for p, _ in entries]
    if len(set(starts)) != len(starts):
        raise ConfigError("timeline start pulses must be distinct")
    return entries
