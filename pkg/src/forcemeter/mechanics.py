"""Mechanical oscillator and optical probe parameters.

The engine itself is normalized: every spectrum depends only on the set
(omega_m, gamma_m, probe strength, bath occupation).  The classes here
hold the physical (SI) front-end quantities and the conversions between
the two descriptions, so a user can supply either a probe amplitude in
sqrt(photons/s) or a normalized strength directly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import hbar
from scipy.constants import k as BOLTZMANN

from .errors import ContractError, SingularityError, StructureError

# Carrier used when a probe is specified purely by normalized strength.
DEFAULT_CARRIER_OMEGA = 2 * math.pi * SPEED_OF_LIGHT / 1.064e-6


class ProbeMode(str, enum.Enum):
    MONOCHROMATIC = "monochromatic"
    TOY_DICHROMATIC = "toy_dichromatic"
    FOUR_PROBE = "four_probe"


@dataclass(frozen=True)
class Oscillator:
    """Damped mechanical oscillator.

    omega_m is the resonance angular frequency (rad/s), gamma_m the
    amplitude relaxation rate (rad/s), mass in kg, bath temperature in
    kelvin.  The zero-point length is recomputed on access, never stored.
    """

    omega_m: float
    gamma_m: float = 0.0
    mass: float = 1.0
    temperature: float = 0.0

    def __post_init__(self):
        if not (self.omega_m > 0):
            raise StructureError("omega_m must be positive")
        if self.gamma_m < 0:
            raise StructureError("gamma_m must be >= 0")
        if not (self.mass > 0):
            raise StructureError("mass must be positive")
        if self.temperature < 0:
            raise StructureError("temperature must be >= 0")

    @property
    def x_zpf(self) -> float:
        """Zero-point position spread sqrt(hbar / (2 m omega_m)), meters."""
        return math.sqrt(hbar / (2.0 * self.mass * self.omega_m))


@dataclass(frozen=True)
class Probe:
    """Optical probe: real field amplitude A in sqrt(photons/s) and an
    interrogation mode.  Dichromatic modes place their carriers at
    omega_0 +/- omega_m/2 (inner) and, for the four-probe arrangement,
    also at omega_0 +/- 3 omega_m/2.
    """

    amplitude: float
    mode: ProbeMode = ProbeMode.MONOCHROMATIC
    carrier_omega: float = DEFAULT_CARRIER_OMEGA

    def __post_init__(self):
        if isinstance(self.amplitude, complex):
            raise StructureError("probe amplitude must be real")
        if self.amplitude < 0:
            raise StructureError("probe amplitude must be >= 0")
        if not (self.carrier_omega > 0):
            raise StructureError("carrier frequency must be positive")
        if not isinstance(self.mode, ProbeMode):
            object.__setattr__(self, "mode", ProbeMode(self.mode))

    @property
    def wavenumber(self) -> float:
        return self.carrier_omega / SPEED_OF_LIGHT

    @property
    def power(self) -> float:
        """Mean optical power hbar omega_0 A^2, watts (per carrier)."""
        return hbar * self.carrier_omega * self.amplitude**2

    def carrier_offsets(self, osc: Oscillator):
        """Carrier offsets from omega_0, in units of the mechanical
        frequency splitting.  The engine's sideband bookkeeping works in
        these offsets, so the dichromatic spacing is omega_m exactly by
        construction (never a difference of optical-scale floats)."""
        wm = osc.omega_m
        if self.mode is ProbeMode.MONOCHROMATIC:
            return (0.0,)
        if self.mode is ProbeMode.TOY_DICHROMATIC:
            return (wm / 2, -wm / 2)
        return (wm / 2, -wm / 2, 3 * wm / 2, -3 * wm / 2)

    def carriers(self, osc: Oscillator):
        """Nominal absolute carrier frequencies (informational; the
        fluctuation analysis only uses the exact offsets)."""
        return tuple(self.carrier_omega + d for d in self.carrier_offsets(osc))


def probe_strength(osc: Oscillator, probe: Probe) -> float:
    """Normalized radiation-pressure probe strength 8 hbar k^2 A^2 / m,
    in rad^3/s^3.  Quadratic in the amplitude; zero only at A = 0."""
    return 8.0 * hbar * probe.wavenumber**2 * probe.amplitude**2 / osc.mass


def amplitude_for_strength(osc: Oscillator, strength: float,
                           carrier_omega: float = DEFAULT_CARRIER_OMEGA) -> float:
    """Inverse of :func:`probe_strength` at fixed carrier."""
    if strength < 0:
        raise StructureError("strength must be >= 0")
    k = carrier_omega / SPEED_OF_LIGHT
    return math.sqrt(strength * osc.mass / (8.0 * hbar * k**2))


def probe_from_strength(osc: Oscillator, strength: float, mode=ProbeMode.MONOCHROMATIC,
                        carrier_omega: float = DEFAULT_CARRIER_OMEGA) -> Probe:
    """Probe whose amplitude realizes the given normalized strength."""
    a = amplitude_for_strength(osc, strength, carrier_omega)
    return Probe(amplitude=a, mode=mode, carrier_omega=carrier_omega)


def susceptibility(osc: Oscillator, omega):
    """Inverse mechanical response omega_m^2 - omega^2 - 2i gamma_m omega.

    Satisfies Z(-w) = conj(Z(w)) for real parameters; |Z| is minimal at
    omega^2 = omega_m^2 - 2 gamma_m^2.
    """
    omega = np.asarray(omega, dtype=float)
    z = osc.omega_m**2 - omega**2 - 2j * osc.gamma_m * omega
    return complex(z) if z.ndim == 0 else z


def baseband_susceptibility(osc: Oscillator, offset):
    """Rotating-frame envelope response 1 / (gamma_m - i W)."""
    offset = np.asarray(offset, dtype=float)
    if osc.gamma_m == 0 and np.any(offset == 0):
        raise SingularityError("undamped envelope pole at W = 0 (gamma_m = 0)")
    p = 1.0 / (osc.gamma_m - 1j * offset)
    return complex(p) if p.ndim == 0 else p


def thermal_occupation(osc: Oscillator, omega, fixed=None):
    """Mean bath occupation 1 / (exp(hbar w / kB T) - 1) at frequency w.

    ``fixed`` short-circuits the computation with a user-held constant
    (the engine default is the value at omega_m held across the band).
    Zero temperature gives zero occupation; w must be positive.
    """
    if fixed is not None:
        if fixed < 0:
            raise StructureError("fixed occupation must be >= 0")
        return float(fixed)
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise StructureError("thermal occupation needs omega > 0")
    if osc.temperature == 0:
        out = np.zeros_like(omega)
        return float(out) if out.ndim == 0 else out
    x = hbar * omega / (BOLTZMANN * osc.temperature)
    out = 1.0 / np.expm1(x)
    return float(out) if out.ndim == 0 else out


def static_displacement(osc: Oscillator, probe: Probe) -> float:
    """Constant mirror shift 2 P0 / (m c omega_m^2) under monochromatic
    radiation pressure, meters."""
    if probe.mode is not ProbeMode.MONOCHROMATIC:
        raise ContractError("static displacement is defined for the monochromatic probe")
    return 2.0 * probe.power / (osc.mass * SPEED_OF_LIGHT * osc.omega_m**2)


def with_temperature(osc: Oscillator, temperature: float) -> Oscillator:
    return replace(osc, temperature=temperature)
