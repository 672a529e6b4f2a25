"""Builders for the three interrogation schemes.

Each builder solves the linearized mirror dynamics for one probe
arrangement and returns a :class:`SchemeInstance` holding

* the output *field* forms (annihilation-operator families, used for
  canonical-commutator checks and by the time-domain oracle),
* the measured *quadrature* observables,
* a shot / back-action / thermal decomposition of every quadrature
  (attribution is by noise path: "back action" is the optical noise
  that reaches the record through mirror motion, together with any
  direct transmission sharing that quadrature axis, which is exactly
  the content a variational rotation can null),
* DC bookkeeping (compensation force, steady envelope, reflected
  carrier amplitudes) where the scheme has any.

Monochromatic probe, laboratory frame, analysis frequency w
-----------------------------------------------------------
Reflected field  b = a + i K/(sqrt2 Z) a_ampl + i sqrt(K w_m)/Z (f_s + f_fl)
with Z = w_m^2 - w^2 - 2i g_m w and probe strength K; the amplitude
quadrature is transparent while the phase quadrature carries the
radiation-pressure term (K/Z) a_ampl and the signal sqrt(K w_m)/Z f_a.

Dichromatic probes, rotating frame, envelope offset W
-----------------------------------------------------
Carriers at w_0 +/- w_m/2 couple the mirror envelope d(W), pole
1/(g_m - i W), to the *sum* and *difference* amplitude quadratures of
the two reflected waves.  The sum is transparent (a pure record of the
back-action drive) and commutes with the difference, which carries
- K/(2 w_m (g_m - i W)) times the sum plus the signal; subtracting the
measured sum record cancels the back action identically at every W.
The four-probe arrangement (both mirror faces, inner and outer
sidebands) repeats this with eight quadratures; its combination has
twice the signal transfer at equal strength, i.e. a four times smaller
force-referred shot floor, and needs no feedback force by symmetry.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .algebra import FrequencyGrid, LinearForm, NoiseChannel, combine
from .errors import (
    ContractError,
    NoCancellationError,
    SingularityError,
    StructureError,
    UnsupportedSchemeError,
)
from .mechanics import (
    Oscillator,
    Probe,
    ProbeMode,
    baseband_susceptibility,
    probe_strength,
    susceptibility,
    thermal_occupation,
)

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class SchemeInstance:
    """Immutable bundle of everything a builder derives for one scheme."""

    osc: Oscillator
    probe: Probe
    grid: FrequencyGrid
    strength: float
    n_occ: object
    channels: tuple
    observables: Mapping[str, LinearForm]
    components: Mapping[str, Mapping[str, LinearForm]]
    meta: Mapping[str, object]

    @property
    def kind(self) -> str:
        return self.meta["kind"]

    @property
    def frame(self) -> str:
        return self.grid.band

    def observable(self, name: str) -> LinearForm:
        try:
            return self.observables[name]
        except KeyError:
            raise StructureError(
                f"unknown observable {name!r}; have {sorted(self.observables)}"
            ) from None


def _freeze(osc, probe, grid, strength, n_occ, channels, observables, components, meta):
    return SchemeInstance(
        osc=osc,
        probe=probe,
        grid=grid,
        strength=strength,
        n_occ=n_occ,
        channels=tuple(channels),
        observables=MappingProxyType(dict(observables)),
        components=MappingProxyType(
            {k: MappingProxyType(dict(v)) for k, v in components.items()}
        ),
        meta=MappingProxyType(dict(meta)),
    )


def _resolve_occupation(osc, n_occ, omega_eval):
    """Constant bath occupation by default (evaluated at omega_m);
    a callable opts in to a frequency-dependent profile."""
    if n_occ is None:
        if osc.temperature > 0:
            return thermal_occupation(osc, osc.omega_m)
        return 0.0
    if callable(n_occ):
        omega = np.abs(np.asarray(omega_eval, dtype=float))
        if np.any(omega == 0):
            # coupling vanishes at DC; reuse the smallest positive sample
            positive = omega[omega > 0]
            omega = np.where(omega == 0, positive.min() if positive.size else osc.omega_m, omega)
        return np.asarray(n_occ(omega), dtype=float)
    if n_occ < 0:
        raise StructureError("bath occupation must be >= 0")
    return float(n_occ)


# ----------------------------------------------------------------------
# monochromatic probe
# ----------------------------------------------------------------------

def optimal_homodyne_angle(osc: Oscillator, strength: float, omega_f: float) -> float:
    """Homodyne angle psi in (0, pi) solving cos(psi) + Re[K/Z] sin(psi) = 0.

    At that angle the mirror-coupled quadrature axis drops out of the
    record at omega_f (exactly so for gamma_m = 0).  When Re[K/Z]
    vanishes -- a resonant force on a damped oscillator makes Z purely
    imaginary -- no rotation cancels the back action and
    :class:`NoCancellationError` is raised.
    """
    z = susceptibility(osc, omega_f)
    if z == 0:
        raise SingularityError("undamped resonance: Z(omega_f) = 0")
    re = (strength / z).real
    if re == 0.0:
        raise NoCancellationError(
            "Re[K/Z] = 0 at omega_f (resonant force); back-action "
            "compensation by quadrature rotation is not possible"
        )
    return float(np.arctan2(1.0, -re))


def pointwise_optimal_angles(osc: Oscillator, strength: float, omegas):
    """The angle condition applied frequency by frequency (broadband
    readout); continuous through Re[K/Z] = 0 where it returns pi/2."""
    z = susceptibility(osc, np.asarray(omegas, dtype=float))
    return np.arctan2(1.0, -(strength / z).real)


def build_monochromatic(osc, probe, grid, angle=np.pi / 2, n_occ=None,
                        thermal_coupling="ohmic"):
    """Scheme with a single carrier and generalized homodyne readout.

    ``angle`` is the homodyne angle (scalar, per-frequency array, or
    "optimal" for the pointwise condition).  ``thermal_coupling`` picks
    the bath weighting: "ohmic" keeps the sqrt(w) profile of the
    Langevin coupling, "flat" freezes it at its resonance value (the
    form the time-domain oracle synthesizes).
    """
    if probe.mode is not ProbeMode.MONOCHROMATIC:
        raise ContractError(f"monochromatic builder got probe mode {probe.mode.value!r}")
    if grid.band != "absolute":
        raise StructureError("monochromatic scheme needs an absolute-frequency grid")
    if thermal_coupling not in ("ohmic", "flat"):
        raise StructureError("thermal_coupling must be 'ohmic' or 'flat'")

    omega = grid.samples
    wm, gm = osc.omega_m, osc.gamma_m
    if gm == 0 and np.any(np.abs(omega) == wm):
        raise SingularityError(
            "grid hits the undamped mechanical pole at |w| = omega_m"
        )
    strength = probe_strength(osc, probe)
    occ = _resolve_occupation(osc, n_occ, omega)

    channels = (
        NoiseChannel("probe", kind="optical"),
        NoiseChannel("bath", occupation=occ, thermal=True, kind="bath"),
    )
    nch, n = len(channels), grid.size
    z = susceptibility(osc, omega)
    w_ba = strength / z                      # back-action transfer K/Z
    s_q = np.sqrt(strength * wm) / z         # signal transfer onto f_a

    # bath coupling sqrt(2 g_m W(w) / w_m), W = |w| (ohmic) or w_m (flat)
    if thermal_coupling == "ohmic":
        g_th = np.sqrt(2.0 * gm * np.abs(omega) / wm)
    else:
        g_th = np.full(n, np.sqrt(2.0 * gm))

    def _probe_quadrature(coeff):
        u = np.zeros((nch, n), dtype=complex)
        u[0] = coeff / SQRT2
        return LinearForm.quadrature(grid, channels, u)

    amplitude = _probe_quadrature(np.ones(n))          # transparent: a_ampl
    phase_shot = _probe_quadrature(-1j * np.ones(n))   # a_phase
    phase_ba = _probe_quadrature(w_ba)                 # (K/Z) a_ampl

    # thermal content of the phase quadrature: the force reality
    # condition folds both field sidebands onto the annihilation side at
    # w > 0 (hence the sqrt(2) on top of the field coupling), creation
    # side by pairing at w < 0, equal split at the self-paired w = 0
    u_th = np.zeros((nch, n), dtype=complex)
    u_th[1] = np.where(omega > 0, SQRT2 * s_q * g_th, 0.0)
    j0 = grid.zero_index
    if j0 is not None:
        u_th[1, j0] = s_q[j0] * g_th[j0]
    thermal_phase = LinearForm.quadrature(grid, channels, u_th)

    sig_phase = LinearForm(
        grid, channels, np.zeros((nch, n), complex), np.zeros((nch, n), complex), s_q
    )
    phase = combine([phase_shot, phase_ba, thermal_phase, sig_phase], [1, 1, 1, 1])

    # homodyne rotation cos(psi) b_ampl + sin(psi) b_phase
    if isinstance(angle, str):
        if angle != "optimal":
            raise StructureError(f"unknown angle spec {angle!r}")
        psi = pointwise_optimal_angles(osc, strength, omega)
    else:
        psi = np.broadcast_to(np.asarray(angle, dtype=float), (n,)).copy()
        if not np.allclose(psi, psi[::-1], rtol=0, atol=1e-12):
            raise StructureError("homodyne angle must be even in frequency")
    cos_p, sin_p = np.cos(psi), np.sin(psi)
    homodyne = combine([amplitude, phase], [cos_p, sin_p])

    # attribution: wherever the amplitude axis carries mirror noise
    # (sin(psi) K != 0) the whole axis, direct part included, counts as
    # back action -- that is the content the optimal angle nulls
    mirror = (sin_p != 0) & (strength != 0)
    hom_ba = _probe_quadrature(np.where(mirror, cos_p + sin_p * w_ba, 0.0))
    hom_shot = combine(
        [phase_shot, _probe_quadrature(np.where(mirror, 0.0, cos_p))], [sin_p, 1]
    )
    hom_thermal = combine([thermal_phase], [sin_p])

    field_u = np.zeros((nch, n), dtype=complex)
    field_v = np.zeros((nch, n), dtype=complex)
    field_u[0] = 1 + 1j * strength / (2 * z)
    field_v[0] = 1j * strength / (2 * z)
    field_u[1] = np.where(omega > 0, 1j * s_q * g_th, 0.0)
    field_v[1] = np.where(omega < 0, 1j * s_q * g_th, 0.0)
    if j0 is not None:
        field_u[1, j0] = 1j * s_q[j0] * g_th[j0] / SQRT2
        field_v[1, j0] = 1j * s_q[j0] * g_th[j0] / SQRT2
    field = LinearForm(grid, channels, field_u, field_v, 1j * s_q / SQRT2)

    zero = LinearForm.zero(grid, channels)
    observables = {
        "field": field,
        "amplitude": amplitude,
        "phase": phase,
        "homodyne": homodyne,
    }
    components = {
        "amplitude": {"shot": amplitude, "backaction": zero, "thermal": zero},
        "phase": {"shot": phase_shot, "backaction": phase_ba, "thermal": thermal_phase},
        "homodyne": {"shot": hom_shot, "backaction": hom_ba, "thermal": hom_thermal},
    }
    # |[b, b^dag] - 1|: identically zero with the ohmic bath weighting
    # (dissipation exactly balances the back-action term); the flat
    # approximation leaves a residue growing with |w| - w_m
    if thermal_coupling == "ohmic":
        defect = np.zeros(n)
    else:
        defect = np.abs(2 * gm * strength * (np.abs(omega) - wm)) / np.abs(z) ** 2
    meta = {
        "kind": "monochromatic",
        "angle": psi,
        "thermal_coupling": thermal_coupling,
        "canonicality_defect": defect,
        "field_names": ("field",),
    }
    return _freeze(osc, probe, grid, strength, occ, channels, observables, components, meta)


# ----------------------------------------------------------------------
# toy dichromatic probe (single mirror face, feedback-compensated)
# ----------------------------------------------------------------------

def _rotating_core(osc, strength, grid):
    """Shared rotating-frame quantities; raises on the undamped pole."""
    if grid.band != "baseband":
        raise StructureError("dichromatic schemes need a baseband grid")
    if osc.gamma_m == 0 and grid.zero_index is not None:
        raise SingularityError("grid hits the undamped envelope pole at W = 0")
    pole = baseband_susceptibility(osc, grid.samples)  # 1/(g_m - iW)
    g_mag = np.sqrt(strength / (4.0 * osc.omega_m))    # 2 k x0 A
    kappa = g_mag**2 * pole                            # K P / (4 w_m)
    return pole, g_mag, kappa


def build_toy_dichromatic(osc, probe, grid, n_occ=None):
    """Two carriers on one mirror face; the resonant ponderomotive
    excitation is cancelled by an exact classical feedback force."""
    if probe.mode is not ProbeMode.TOY_DICHROMATIC:
        raise ContractError(f"toy dichromatic builder got probe mode {probe.mode.value!r}")
    strength = probe_strength(osc, probe)
    pole, g_mag, kappa = _rotating_core(osc, strength, grid)
    wm, gm = osc.omega_m, osc.gamma_m
    occ = _resolve_occupation(osc, n_occ, wm)

    channels = (
        NoiseChannel("upper", kind="optical"),
        NoiseChannel("lower", kind="optical"),
        NoiseChannel("bath", occupation=occ, thermal=True, kind="bath"),
    )
    nch, n = len(channels), grid.size
    sig = -np.sqrt(strength / (2.0 * wm)) * pole  # transfer onto f_a

    def _quad(coeffs):
        u = np.zeros((nch, n), dtype=complex)
        for i, c in coeffs.items():
            u[i] = c
        return LinearForm.quadrature(grid, channels, u)

    alpha_sum = _quad({0: 0.5, 1: 0.5})    # transparent back-action record
    alpha_diff = _quad({0: 0.5, 1: -0.5})  # direct part of the signal record
    thermal = _quad({2: -g_mag * pole * np.sqrt(gm)})
    carrier = LinearForm(
        grid, channels, np.zeros((nch, n), complex), np.zeros((nch, n), complex), sig
    )

    sum_amplitude = alpha_sum
    diff_amplitude = combine([alpha_diff, alpha_sum, thermal, carrier], [1, -2 * kappa, 1, 1])
    combined = combine([alpha_diff, thermal, carrier], [1, 1, 1])  # back action absent

    # output field forms (canonicality checks, oracle record definitions)
    def _field(own, other, u_own, v_other, u_bath, v_bath, s):
        u = np.zeros((nch, n), dtype=complex)
        v = np.zeros((nch, n), dtype=complex)
        u[own], v[other] = u_own, v_other
        u[2], v[2] = u_bath, v_bath
        return LinearForm(grid, channels, u, v, s)

    zvec = np.zeros(n)
    field_upper = _field(0, 1, 1 - kappa, -kappa, -g_mag * pole * np.sqrt(gm), zvec,
                         -g_mag * pole / SQRT2)
    field_lower = _field(1, 0, 1 + kappa, kappa, zvec, g_mag * pole * np.sqrt(gm),
                         g_mag * pole / SQRT2)

    zero = LinearForm.zero(grid, channels)
    observables = {
        "field_upper": field_upper,
        "field_lower": field_lower,
        "sum_amplitude": sum_amplitude,
        "diff_amplitude": diff_amplitude,
        "combined": combined,
    }
    components = {
        "sum_amplitude": {"shot": alpha_sum, "backaction": zero, "thermal": zero},
        "diff_amplitude": {
            "shot": alpha_diff,
            "backaction": combine([alpha_sum], [-2 * kappa]),
            "thermal": thermal,
        },
        "combined": {"shot": alpha_diff, "backaction": zero, "thermal": thermal},
    }
    kx0a = probe.wavenumber * osc.x_zpf * probe.amplitude
    meta = {
        "kind": "toy_dichromatic",
        "compensation_force": toy_compensation_force(osc, probe),
        "steady_amplitude": 0.0,  # by construction of the feedback force
        "reflected_upper": None if gm == 0 else toy_reflected_amplitudes(osc, probe)[0],
        "reflected_lower": None if gm == 0 else toy_reflected_amplitudes(osc, probe)[1],
        "coupling_rate": 2.0 * kx0a,  # |g| = 2 k x0 A = sqrt(K / 4 w_m)
        "subtraction_weight": 2 * kappa,
        "canonicality_defect": strength * gm * np.abs(pole) ** 2 / (4 * wm),
        "field_names": ("field_upper", "field_lower"),
    }
    return _freeze(osc, probe, grid, strength, occ, channels, observables, components, meta)


def toy_compensation_force(osc, probe, a_plus=None, a_minus=None):
    """Classical resonant feedback amplitude -2 i k x0 A_+ conj(A_-)
    that zeroes the steady envelope."""
    a_plus = probe.amplitude if a_plus is None else a_plus
    a_minus = probe.amplitude if a_minus is None else a_minus
    return -2j * probe.wavenumber * osc.x_zpf * a_plus * np.conj(a_minus)


def toy_steady_amplitude(osc, probe, feedback_force, a_plus=None, a_minus=None):
    """Steady mirror envelope (2 i k x0 A_+ conj(A_-) + F) / gamma_m for
    an arbitrary (possibly imperfect) feedback amplitude F."""
    a_plus = probe.amplitude if a_plus is None else a_plus
    a_minus = probe.amplitude if a_minus is None else a_minus
    drive = 2j * probe.wavenumber * osc.x_zpf * a_plus * np.conj(a_minus) + feedback_force
    if osc.gamma_m == 0:
        if drive != 0:
            raise SingularityError(
                "gamma_m = 0 with imperfect compensation: steady envelope diverges"
            )
        return 0.0 + 0.0j
    return drive / osc.gamma_m


def toy_reflected_amplitudes(osc, probe, a_plus=None, a_minus=None):
    """DC reflected carrier amplitudes B_+- = A_+- (1 -+ 4 k^2 x0^2 |A_-+|^2 / gamma_m)."""
    if osc.gamma_m == 0:
        raise SingularityError("reflected DC amplitudes diverge at gamma_m = 0")
    a_plus = probe.amplitude if a_plus is None else a_plus
    a_minus = probe.amplitude if a_minus is None else a_minus
    kx0 = probe.wavenumber * osc.x_zpf
    b_plus = a_plus * (1 - 4 * kx0**2 * abs(a_minus) ** 2 / osc.gamma_m)
    b_minus = a_minus * (1 + 4 * kx0**2 * abs(a_plus) ** 2 / osc.gamma_m)
    return b_plus, b_minus


# ----------------------------------------------------------------------
# four-probe arrangement (both mirror faces, inner + outer sidebands)
# ----------------------------------------------------------------------

def _four_probe_layout():
    """(side l, sideband sign, order n) -> channel index; l = 1 left, 2 right."""
    layout = []
    for l in (1, 2):
        for n in (1, 2):
            layout.append((l, +1, n))
            layout.append((l, -1, n))
    return layout


def four_probe_channel_id(l, sign, n):
    return f"side{l}_{'up' if sign > 0 else 'dn'}{n}"


def build_four_probe(osc, probe, grid, n_occ=None):
    """Dichromatic probes on both mirror faces with the outer sidebands
    kept as vacuum inputs; no feedback force is needed (the steady
    envelope vanishes by symmetry)."""
    if probe.mode is not ProbeMode.FOUR_PROBE:
        raise ContractError(f"four-probe builder got probe mode {probe.mode.value!r}")
    strength = probe_strength(osc, probe)
    pole, g_mag, kappa = _rotating_core(osc, strength, grid)
    wm, gm = osc.omega_m, osc.gamma_m
    occ = _resolve_occupation(osc, n_occ, wm)

    layout = _four_probe_layout()
    channels = tuple(
        NoiseChannel(four_probe_channel_id(l, s, m), kind="optical") for (l, s, m) in layout
    ) + (NoiseChannel("bath", occupation=occ, thermal=True, kind="bath"),)
    index = {key: i for i, key in enumerate(layout)}
    nch, n = len(channels), grid.size
    bath = nch - 1

    def _quad(coeffs):
        u = np.zeros((nch, n), dtype=complex)
        for i, c in coeffs.items():
            u[i] = c
        return LinearForm.quadrature(grid, channels, u)

    alpha_sum = {}
    alpha_diff = {}
    for l in (1, 2):
        for m in (1, 2):
            up, dn = index[(l, +1, m)], index[(l, -1, m)]
            alpha_sum[(l, m)] = _quad({up: 0.5, dn: 0.5})
            alpha_diff[(l, m)] = _quad({up: 0.5, dn: -0.5})

    # signed transparent record: the measurable back-action drive
    monitor = combine(
        [alpha_sum[(l, m)] for l in (1, 2) for m in (1, 2)],
        [(-1) ** (l - 1) for l in (1, 2) for m in (1, 2)],
    )

    s_single = np.sqrt(strength / (2.0 * wm)) * pole  # per-quadrature transfer
    zero_u = np.zeros((nch, n), dtype=complex)

    observables = {}
    components = {}
    zero = LinearForm.zero(grid, channels)
    diff_forms, diff_weights = [], []
    for l in (1, 2):
        for m in (1, 2):
            sgn = (-1) ** l
            name_sum = f"sum_amplitude_l{l}n{m}"
            name_diff = f"diff_amplitude_l{l}n{m}"
            thermal = _quad({bath: sgn * g_mag * pole * np.sqrt(gm)})
            carrier = LinearForm(grid, channels, zero_u, zero_u, sgn * s_single)
            diff = combine(
                [alpha_diff[(l, m)], monitor, thermal, carrier], [1, sgn * 2 * kappa, 1, 1]
            )
            observables[name_sum] = alpha_sum[(l, m)]
            observables[name_diff] = diff
            components[name_sum] = {"shot": alpha_sum[(l, m)], "backaction": zero, "thermal": zero}
            components[name_diff] = {
                "shot": alpha_diff[(l, m)],
                "backaction": combine([monitor], [sgn * 2 * kappa]),
                "thermal": thermal,
            }
            diff_forms.append(diff)
            diff_weights.append(0.5 * sgn)

    # combined record: the signed half-sum of the difference quadratures
    # still carries 4 kappa x monitor; subtracting the measured monitor
    # record cancels the back action identically
    combined_shot = combine(
        [alpha_diff[(l, m)] for l in (1, 2) for m in (1, 2)],
        [0.5 * (-1) ** l for l in (1, 2) for m in (1, 2)],
    )
    combined_thermal = _quad({bath: 2 * g_mag * pole * np.sqrt(gm)})
    combined_carrier = LinearForm(
        grid, channels, zero_u, zero_u, np.sqrt(2.0 * strength / wm) * pole
    )
    combined = combine([combined_shot, combined_thermal, combined_carrier], [1, 1, 1])

    # raw output field forms
    for l in (1, 2):
        for m in (1, 2):
            for sign in (+1, -1):
                u = np.zeros((nch, n), dtype=complex)
                v = np.zeros((nch, n), dtype=complex)
                for (l2, s2, m2), i2 in index.items():
                    par = (-1) ** (l + l2)
                    if sign > 0:
                        if s2 > 0:
                            u[i2] = (1.0 if (l2, m2) == (l, m) else 0.0) - par * kappa
                        else:
                            v[i2] = -par * kappa
                    else:
                        if s2 < 0:
                            u[i2] = (1.0 if (l2, m2) == (l, m) else 0.0) + par * kappa
                        else:
                            v[i2] = par * kappa
                if sign > 0:
                    u[bath] = (-1) ** l * g_mag * pole * np.sqrt(gm)
                    s_f = (-1) ** l * g_mag * pole / SQRT2
                else:
                    v[bath] = (-1) ** (l - 1) * g_mag * pole * np.sqrt(gm)
                    s_f = (-1) ** (l - 1) * g_mag * pole / SQRT2
                observables[f"field_{four_probe_channel_id(l, sign, m)}"] = LinearForm(
                    grid, channels, u, v, s_f
                )

    observables["backaction_monitor"] = monitor
    observables["combined"] = combined
    components["backaction_monitor"] = {"shot": monitor, "backaction": zero, "thermal": zero}
    components["combined"] = {
        "shot": combined_shot,
        "backaction": zero,
        "thermal": combined_thermal,
    }
    meta = {
        "kind": "four_probe",
        "steady_amplitude": 0.0,  # vanishes by left/right symmetry, no feedback
        "coupling_rate": 2.0 * probe.wavenumber * osc.x_zpf * probe.amplitude,
        "subtraction_weight": 4 * kappa,
        "canonicality_defect": strength * gm * np.abs(pole) ** 2 / (4 * wm),
        "field_names": tuple(
            f"field_{four_probe_channel_id(l, s, m)}" for (l, s, m) in layout
        ),
    }
    return _freeze(osc, probe, grid, strength, occ, channels, observables, components, meta)


# ----------------------------------------------------------------------
# cross-scheme helpers
# ----------------------------------------------------------------------

def backaction_record(scheme: SchemeInstance) -> LinearForm:
    """The transparent quadrature(s) carrying the back-action drive.

    These commute with the signal-bearing records and are what the
    post-processing subtraction consumes.  A single monochromatic wave
    has no such record: its amplitude and phase cannot be measured
    simultaneously.
    """
    if scheme.kind == "toy_dichromatic":
        return scheme.observables["sum_amplitude"]
    if scheme.kind == "four_probe":
        return scheme.observables["backaction_monitor"]
    raise UnsupportedSchemeError(
        "the monochromatic scheme offers no separately measurable "
        "back-action record"
    )


def signal_record_name(scheme: SchemeInstance) -> str:
    """Observable carrying the signal before back-action subtraction."""
    return {
        "monochromatic": "homodyne",
        "toy_dichromatic": "diff_amplitude",
        "four_probe": "combined",
    }[scheme.kind]
