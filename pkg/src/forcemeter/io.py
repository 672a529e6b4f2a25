"""Scenario configuration and machine-readable result emission.

A scenario is one JSON document validated against ``CONFIG_SCHEMA``
(unknown keys are rejected, missing physical parameters are reported
with their field path).  Results are written as CSV tables plus one
JSON envelope; all writes are atomic replacements and the payload
contains nothing volatile, so a rerun with the same configuration and
seed is byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile

import numpy as np
import jsonschema

from . import __version__
from .algebra import FrequencyGrid
from .errors import ConfigError
from .mechanics import (
    Oscillator,
    Probe,
    ProbeMode,
    probe_from_strength,
    thermal_occupation,
)
from .schemes import (
    build_four_probe,
    build_monochromatic,
    build_toy_dichromatic,
)

_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "forcemeter scenario",
    "type": "object",
    "additionalProperties": False,
    "required": ["scheme", "oscillator", "probe", "grid", "seed", "analysis", "output"],
    "properties": {
        "scheme": {
            "enum": ["monochromatic", "toy_dichromatic", "four_probe"],
        },
        "oscillator": {
            "type": "object",
            "additionalProperties": False,
            "required": ["omega_m", "gamma_m"],
            "properties": {
                "omega_m": _POSITIVE,
                "gamma_m": _NONNEG,
                "mass_kg": _POSITIVE,
                "temperature_K": _NONNEG,
            },
        },
        "probe": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "strength": _POSITIVE,
                "wavelength_m": _POSITIVE,
                "power_W": _NONNEG,
            },
        },
        "bath": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n_occ"],
            "properties": {"n_occ": _NONNEG},
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["max", "points"],
            "properties": {
                "max": _POSITIVE,
                "points": {"type": "integer", "minimum": 3},
            },
        },
        "seed": {"type": "integer", "minimum": 0},
        "analysis": {
            "type": "object",
            "additionalProperties": False,
            "minProperties": 1,
            "properties": {
                "spectrum": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["observable"],
                    "properties": {
                        "observable": {"type": "string"},
                        "homodyne_angle": {
                            "anyOf": [{"type": "number"}, {"const": "optimal"}]
                        },
                        "signal_omega": _POSITIVE,
                        "thermal_coupling": {"enum": ["ohmic", "flat"]},
                    },
                },
                "sweep": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["variable", "start", "stop", "points",
                                 "observable", "signal_omega"],
                    "properties": {
                        "variable": {
                            "enum": ["strength", "angle", "signal_omega", "n_occ"]
                        },
                        "start": {"type": "number"},
                        "stop": {"type": "number"},
                        "points": {"type": "integer", "minimum": 1},
                        "log": {"type": "boolean"},
                        "observable": {"type": "string"},
                        "signal_omega": _POSITIVE,
                        "homodyne_angle": {
                            "anyOf": [{"type": "number"}, {"const": "optimal"}]
                        },
                    },
                },
                "oracle": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["dt", "duration", "trajectories"],
                    "properties": {
                        "dt": _POSITIVE,
                        "duration": _POSITIVE,
                        "trajectories": {"type": "integer", "minimum": 1},
                        "homodyne_angle": {"type": "number"},
                        "save_records": {"enum": ["npy", "csv"]},
                        "welch": {
                            "type": "object",
                            "additionalProperties": False,
                            "properties": {
                                "nperseg": {"type": "integer", "minimum": 8},
                                "overlap": {"type": "number", "minimum": 0,
                                            "exclusiveMaximum": 1},
                                "window": {"type": "string"},
                            },
                        },
                    },
                },
                "detect": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["dt", "tau", "signal_omega", "amplitudes", "trials"],
                    "properties": {
                        "dt": _POSITIVE,
                        "tau": _POSITIVE,
                        "signal_omega": _POSITIVE,
                        "amplitudes": {
                            "type": "array",
                            "minItems": 1,
                            "items": _NONNEG,
                        },
                        "trials": {"type": "integer", "minimum": 2},
                        "homodyne_angle": {"type": "number"},
                    },
                },
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "required": ["directory"],
            "properties": {
                "directory": {"type": "string"},
                "format": {"enum": ["csv", "json"]},
                "plot": {"type": "boolean"},
            },
        },
    },
}


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return validate_config(cfg)


def validate_config(cfg):
    """Schema validation plus the cross-field rules the schema cannot
    express; returns the config unchanged on success."""
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config field {path!r}: {exc.message}") from exc

    probe = cfg["probe"]
    si_probe = "wavelength_m" in probe or "power_W" in probe
    if ("strength" in probe) == si_probe:
        raise ConfigError(
            "config field 'probe': give either 'strength' or the SI pair "
            "'wavelength_m' + 'power_W'"
        )
    if si_probe and not ("wavelength_m" in probe and "power_W" in probe):
        raise ConfigError("config field 'probe': SI style needs both "
                          "'wavelength_m' and 'power_W'")
    if si_probe and "mass_kg" not in cfg["oscillator"]:
        raise ConfigError("config field 'oscillator.mass_kg': required for an SI probe")
    if cfg["grid"]["points"] % 2 == 0:
        raise ConfigError("config field 'grid.points': must be odd "
                          "(the grid pairs every frequency with its negative)")
    if cfg["scheme"] == "monochromatic":
        for block in ("spectrum", "sweep"):
            sub = cfg["analysis"].get(block)
            if sub is not None and "homodyne_angle" not in sub:
                raise ConfigError(
                    f"config field 'analysis.{block}.homodyne_angle': required "
                    "for the monochromatic scheme (no silent readout default)"
                )
    else:
        sweep = cfg["analysis"].get("sweep")
        if sweep is not None and sweep["variable"] == "angle":
            raise ConfigError("config field 'analysis.sweep.variable': 'angle' "
                              "applies to the monochromatic scheme only")
    return cfg


def oscillator_from_config(cfg) -> Oscillator:
    osc = cfg["oscillator"]
    return Oscillator(
        omega_m=osc["omega_m"],
        gamma_m=osc["gamma_m"],
        mass=osc.get("mass_kg", 1.0),
        temperature=osc.get("temperature_K", 0.0),
    )


def probe_from_config(cfg, osc, mode=None, strength_override=None) -> Probe:
    mode = ProbeMode(cfg["scheme"]) if mode is None else mode
    probe = cfg["probe"]
    if strength_override is not None:
        return probe_from_strength(osc, strength_override, mode)
    if "strength" in probe:
        return probe_from_strength(osc, probe["strength"], mode)
    from scipy.constants import c as c_light, hbar

    carrier = 2 * np.pi * c_light / probe["wavelength_m"]
    amplitude = np.sqrt(probe["power_W"] / (hbar * carrier))
    return Probe(amplitude=amplitude, mode=mode, carrier_omega=carrier)


def occupation_from_config(cfg, osc):
    if "bath" in cfg:
        return cfg["bath"]["n_occ"]
    if osc.temperature > 0:
        return thermal_occupation(osc, osc.omega_m)
    return 0.0


def grid_from_config(cfg) -> FrequencyGrid:
    band = "absolute" if cfg["scheme"] == "monochromatic" else "baseband"
    return FrequencyGrid.symmetric(cfg["grid"]["max"], cfg["grid"]["points"], band)


def scheme_from_config(cfg, grid=None, angle=None, strength_override=None,
                       n_occ_override=None, thermal_coupling=None):
    """Instantiate the configured scheme, optionally overriding the
    analysis grid, homodyne angle, probe strength, or bath occupation
    (used by sweeps)."""
    osc = oscillator_from_config(cfg)
    probe = probe_from_config(cfg, osc, strength_override=strength_override)
    grid = grid_from_config(cfg) if grid is None else grid
    n_occ = occupation_from_config(cfg, osc) if n_occ_override is None else n_occ_override
    if cfg["scheme"] == "monochromatic":
        if angle is None:
            raise ConfigError("monochromatic scheme needs a homodyne angle")
        return build_monochromatic(
            osc, probe, grid, angle=angle, n_occ=n_occ,
            thermal_coupling=thermal_coupling or "ohmic",
        )
    if cfg["scheme"] == "toy_dichromatic":
        return build_toy_dichromatic(osc, probe, grid, n_occ=n_occ)
    return build_four_probe(osc, probe, grid, n_occ=n_occ)


# ----------------------------------------------------------------------
# deterministic output
# ----------------------------------------------------------------------

def _fmt(value) -> str:
    """Shortest round-trip decimal form; stable across reruns."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return np.format_float_scientific(float(value), unique=True, trim="-")


def atomic_write(path, data: bytes):
    """Write-then-rename so readers never observe a partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-forcemeter-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_csv(path, columns):
    """``columns`` is an ordered mapping name -> 1-d array; values are
    emitted in a round-trippable decimal form."""
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    length = arrays[0].shape[0]
    if any(a.shape != (length,) for a in arrays):
        raise ConfigError("CSV columns must share one length")
    lines = [",".join(names)]
    for i in range(length):
        lines.append(",".join(_fmt(a[i]) for a in arrays))
    atomic_write(path, ("\n".join(lines) + "\n").encode("utf-8"))


def config_digest(cfg) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(canon).hexdigest()


def write_envelope(path, command, cfg, results, files):
    """JSON envelope: config echo, engine version, per-analysis payload,
    provenance.  Deliberately no timestamps: identical config + seed
    must reproduce identical bytes."""
    envelope = {
        "engine": {"name": "forcemeter", "version": __version__},
        "command": command,
        "config": cfg,
        "provenance": {
            "seed": cfg["seed"],
            "config_sha256": config_digest(cfg),
        },
        "results": results,
        "files": files,
    }
    payload = json.dumps(envelope, sort_keys=True, indent=2, allow_nan=False)
    atomic_write(path, (payload + "\n").encode("utf-8"))
    return envelope
