"""Force-referred sensitivity analysis.

Takes the quadrature observables of a scheme and converts their noise
into the units of the signal: the single-sided spectral density S_n of
the smallest normalized force amplitude resolvable per unit bandwidth.
The minimal detectable cosine amplitude over an integration time tau is
sqrt(S_n / tau) at unit SNR.

Closed-form reference budgets (the dual route checked against the
operator-algebra path in the tests):

* monochromatic phase readout
    S_n(w) = 2 g w (2 n + 1)/w_m + |Z|^2/(2 K w_m) + K/(2 w_m)
  minimized over probe strength at K = |Z(w_f)|, where it touches the
  readout/back-action trade-off floor |Z(w_f)|/w_m (the standard
  quantum limit at g = 0);
* variational readout at the optimal homodyne angle
    S_n(w_f) = 2 g w_f (2 n + 1)/w_m + |Z(w_f)|^2/(2 K w_m)
  monotone in K at g = 0, but only within the band
    dw = |Z(w_f)|^2 / (2 w_f K);
* toy dichromatic combination
    S_n(W) = 2 g (2 n + 1) + 4 (g^2 + W^2) w_m / K
  with no back-action term at any W;
* four-probe combination: same thermal floor, shot term four times
  smaller at equal strength.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .algebra import FrequencyGrid, psd
from .conventions import cosine_projection
from .errors import EngineError, SingularityError, StructureError
from .mechanics import Oscillator, susceptibility
from .schemes import SchemeInstance, optimal_homodyne_angle

COMPONENT_NAMES = ("shot", "backaction", "thermal")


@dataclass(frozen=True)
class SpectrumResult:
    """Force-referred single-sided PSD on a grid, with its shot /
    back-action / thermal decomposition (components sum to the total)."""

    grid: FrequencyGrid
    total: np.ndarray
    shot: np.ndarray
    backaction: np.ndarray
    thermal: np.ndarray
    params: dict

    def component(self, name):
        if name not in COMPONENT_NAMES:
            raise StructureError(f"unknown component {name!r}")
        return getattr(self, name)

    def at(self, omega):
        return float(self.total[self.grid.index_of(omega)])

    def validate(self, rtol=1e-12):
        parts = self.shot + self.backaction + self.thermal
        if np.any(self.shot < 0) or np.any(self.backaction < 0) or np.any(self.thermal < 0):
            raise EngineError("negative noise component")
        scale = np.maximum(np.abs(self.total), np.finfo(float).tiny)
        if np.max(np.abs(parts - self.total) / scale) > rtol:
            raise EngineError("components do not sum to the total")
        return self


def force_referred_psd(scheme: SchemeInstance, name: str) -> SpectrumResult:
    """Refer the named observable's noise to the physical force.

    S_n(W) = PSD(observable) / (projection x |signal transfer|^2) where
    the projection constant (2 in the laboratory frame, 1/2 in the
    rotating frame) converts the stored amplitude-quadrature transfer
    into the transfer from a physical cosine force amplitude.
    """
    form = scheme.observable(name)
    if form.signal is None:
        raise SingularityError(f"observable {name!r} carries no signal transfer")
    transfer = np.abs(form.signal) ** 2
    if np.any(transfer == 0):
        w_bad = scheme.grid.samples[int(np.argmin(transfer))]
        raise SingularityError(
            f"zero signal transfer at frequency {w_bad:g} rad/s; force referral undefined"
        )
    denom = cosine_projection(scheme.frame) * transfer
    try:
        comps = scheme.components[name]
    except KeyError:
        raise SingularityError(f"no noise decomposition for observable {name!r}") from None
    total = psd(form) / denom
    result = SpectrumResult(
        grid=scheme.grid,
        total=total,
        shot=psd(comps["shot"]) / denom,
        backaction=psd(comps["backaction"]) / denom,
        thermal=psd(comps["thermal"]) / denom,
        params={
            "scheme": scheme.kind,
            "observable": name,
            "strength": scheme.strength,
            "omega_m": scheme.osc.omega_m,
            "gamma_m": scheme.osc.gamma_m,
            "n_occ": scheme.n_occ,
            "angle": scheme.meta.get("angle"),
        },
    )
    return result.validate()


# ----------------------------------------------------------------------
# closed-form references
# ----------------------------------------------------------------------

def phase_readout_noise(osc, strength, omega, n_occ=0.0):
    """Three-term monochromatic phase-readout budget (thermal + shot +
    back action), as (total, shot, backaction, thermal) arrays."""
    omega = np.asarray(omega, dtype=float)
    z2 = np.abs(susceptibility(osc, omega)) ** 2
    thermal = 2.0 * osc.gamma_m * np.abs(omega) * (2 * n_occ + 1) / osc.omega_m
    shot = z2 / (2.0 * strength * osc.omega_m)
    backaction = np.full_like(shot, strength / (2.0 * osc.omega_m))
    return thermal + shot + backaction, shot, backaction, thermal


def variational_noise(osc, strength, omega_f, n_occ=0.0):
    """Back-action-free monochromatic budget at the optimal homodyne
    angle; raises NoCancellationError where the angle does not exist."""
    optimal_homodyne_angle(osc, strength, omega_f)  # propagate the error branch
    z2 = abs(susceptibility(osc, omega_f)) ** 2
    thermal = 2.0 * osc.gamma_m * abs(omega_f) * (2 * n_occ + 1) / osc.omega_m
    return thermal + z2 / (2.0 * strength * osc.omega_m)


def evaded_noise_toy(osc, strength, offsets, n_occ=0.0):
    """Toy dichromatic floor 2 g (2n+1) + 4 (g^2 + W^2) w_m / K."""
    offsets = np.asarray(offsets, dtype=float)
    gm = osc.gamma_m
    return 2.0 * gm * (2 * n_occ + 1) + 4.0 * (gm**2 + offsets**2) * osc.omega_m / strength


def evaded_noise_four_probe(osc, strength, offsets, n_occ=0.0):
    """Four-probe floor: same thermal, one quarter of the toy shot term."""
    offsets = np.asarray(offsets, dtype=float)
    gm = osc.gamma_m
    return 2.0 * gm * (2 * n_occ + 1) + (gm**2 + offsets**2) * osc.omega_m / strength


def sql_force(osc: Oscillator, omega_f: float, n_occ: float = 0.0) -> float:
    """Optimal-strength phase-readout floor at omega_f.

    With gamma_m = 0 this is |w_m^2 - w_f^2| / w_m, the standard quantum
    limit of the force; with damping the thermal term is included.  At
    exact resonance with gamma_m = 0 the value degenerates to zero
    (free divergence of the undamped driven oscillator), which is
    surfaced as a warning rather than silently returned.
    """
    if omega_f < 0:
        raise StructureError("omega_f must be >= 0")
    if osc.gamma_m == 0:
        value = abs(osc.omega_m**2 - omega_f**2) / osc.omega_m
        if value == 0:
            warnings.warn(
                "SQL degenerates to zero at exact undamped resonance; "
                "the linear response diverges there",
                stacklevel=2,
            )
        return value
    thermal = 2.0 * osc.gamma_m * omega_f * (2 * n_occ + 1) / osc.omega_m
    return thermal + abs(susceptibility(osc, omega_f)) / osc.omega_m


def resonant_sql_reference(osc: Oscillator, offsets):
    """Laboratory-frame SQL evaluated at w = w_m + |W|, used as the
    reference level the rotating-frame schemes are compared against
    (|Z| ~ 2 w_m |W| for small offsets).  Engine convention."""
    offsets = np.abs(np.asarray(offsets, dtype=float))
    return np.abs(osc.omega_m**2 - (osc.omega_m + offsets) ** 2) / osc.omega_m


def optimize_strength(osc: Oscillator, omega_f: float) -> float:
    """Probe strength minimizing the phase-readout budget: K* = |Z(w_f)|,
    where the shot and back-action terms are equal."""
    z = abs(susceptibility(osc, omega_f))
    if z == 0:
        raise SingularityError("degenerate optimum: |Z(omega_f)| = 0")
    return z


def strength_sweep(osc, omega_f, strengths, n_occ=0.0):
    """Phase-readout budget at omega_f over a strength sweep; returns
    (values, argmin index)."""
    strengths = np.asarray(strengths, dtype=float)
    if strengths.ndim != 1 or strengths.size == 0 or np.any(strengths <= 0):
        raise StructureError("need a non-empty positive strength sweep")
    values = np.array(
        [phase_readout_noise(osc, k, omega_f, n_occ)[0] for k in strengths]
    )
    return values, int(np.argmin(values))


def sub_sql_bandwidth(osc: Oscillator, strength: float, omega_f: float) -> float:
    """Width |Z(w_f)|^2 / (2 w_f K) of the band in which a fixed-angle
    variational readout stays below the SQL."""
    if omega_f <= 0 or strength <= 0:
        raise StructureError("omega_f and strength must be positive")
    return abs(susceptibility(osc, omega_f)) ** 2 / (2.0 * omega_f * strength)


# ----------------------------------------------------------------------
# detection threshold
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class DetectionSpec:
    """Narrow-band detection scenario: cosine force of amplitude
    ``force_amplitude`` at ``signal_omega`` observed for ``duration``."""

    force_amplitude: float
    signal_omega: float
    duration: float

    def __post_init__(self):
        if not (self.duration > 0):
            raise StructureError("duration must be positive")
        if self.force_amplitude < 0:
            raise StructureError("force amplitude must be >= 0")

    @property
    def bandwidth(self) -> float:
        """Measurement bandwidth 2 pi / tau (rad/s)."""
        return 2.0 * np.pi / self.duration


def detection_threshold(spec: DetectionSpec, s_n: float) -> float:
    """Minimal detectable amplitude sqrt(S_n x bandwidth / 2 pi)
    = sqrt(S_n / tau) at the (configurable) unit-SNR criterion."""
    if not np.isfinite(s_n) or s_n < 0:
        raise StructureError("S_n must be finite and >= 0")
    return float(np.sqrt(s_n * spec.bandwidth / (2.0 * np.pi)))


def snr(spec: DetectionSpec, s_n: float) -> float:
    """Amplitude SNR of the scenario: f0 / threshold."""
    return spec.force_amplitude / detection_threshold(spec, s_n)
