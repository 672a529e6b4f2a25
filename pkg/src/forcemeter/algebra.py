"""Linear operator algebra over frequency-domain noise channels.

Every observable of the engine is a *linear form*: a set of complex
coefficients, sampled on a shared frequency grid, multiplying the
annihilation operator ``a_i(W)`` and the creation operator
``a_i^dag(-W)`` of each input noise channel, plus one coefficient
multiplying the amplitude quadrature of the normalized signal force.
Commutators, spectral densities, and linear combinations of observables
then reduce to exact coefficient arithmetic, which makes questions like
"can these two records be taken simultaneously?" computable predicates
instead of prose claims.

All objects are immutable after construction and all operations are
pure functions, so grid points may be evaluated in parallel freely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conventions import BANDS, SINGLE_SIDED, VACUUM_WEIGHT
from .errors import ContractError, StructureError

# Tolerance for recognizing the self-adjoint (quadrature) coefficient
# pairing; forms within this tolerance are snapped to the exact pairing.
PAIR_TOL = 1e-12


@dataclass(frozen=True)
class NoiseChannel:
    """One statistically independent input port.

    A channel owns an annihilation amplitude at +W and a creation
    amplitude at -W.  ``occupation`` may be a scalar or an array over
    the grid (opt-in frequency-dependent bath occupation); vacuum is
    occupation zero.  The ``thermal`` flag keeps bath channels
    distinguishable from vacuum even at zero occupation.
    """

    id: str
    occupation: object = 0.0  # float or ndarray over the grid
    thermal: bool = False
    kind: str = "optical"  # provenance: "optical" or "bath"

    def __post_init__(self):
        occ = np.asarray(self.occupation, dtype=float)
        if np.any(occ < 0) or not np.all(np.isfinite(occ)):
            raise StructureError(f"channel {self.id!r}: occupation must be finite and >= 0")
        if np.any(occ > 0) and not self.thermal:
            raise StructureError(f"channel {self.id!r}: nonzero occupation requires thermal=True")
        if isinstance(self.occupation, np.ndarray):
            self.occupation.setflags(write=False)

    @property
    def weight(self):
        """Symmetrized spectral weight: occupation + 1/2."""
        return np.asarray(self.occupation, dtype=float) + VACUUM_WEIGHT


class FrequencyGrid:
    """Ordered, sign-symmetric frequency samples with explicit +/-W pairing.

    The grid must contain the exact negation of every sample (0 pairs
    with itself), so conjugation at -W is an index reversal, never a
    numerical reflection.  ``band`` records which physical axis the grid
    represents: "absolute" (laboratory frequency w) or "baseband"
    (envelope offset W around a carrier).
    """

    __slots__ = ("_samples", "band")

    def __init__(self, samples, band="baseband"):
        samples = np.array(samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise StructureError("grid needs a non-empty 1-d sample array")
        if not np.all(np.isfinite(samples)):
            raise StructureError("grid samples must be finite")
        if not np.all(np.diff(samples) > 0):
            raise StructureError("grid samples must be strictly increasing")
        if not np.array_equal(samples, -samples[::-1]):
            raise StructureError("grid must contain -W for every W (exact mirror)")
        if band not in BANDS:
            raise StructureError(f"unknown band {band!r}; expected one of {BANDS}")
        samples.setflags(write=False)
        self._samples = samples
        self.band = band

    @classmethod
    def symmetric(cls, span, points, band="baseband"):
        """Uniform symmetric grid of odd ``points`` covering [-span, span]."""
        if span <= 0:
            raise StructureError("span must be positive")
        if points < 3 or points % 2 == 0:
            raise StructureError("need an odd number of points >= 3 (W = 0 pairs with itself)")
        half = (points - 1) // 2
        positive = np.linspace(span / half, span, half)
        return cls(np.concatenate([-positive[::-1], [0.0], positive]), band)

    @classmethod
    def from_positive(cls, positive, band="baseband", include_zero=True):
        """Mirror a strictly positive, increasing sample set into a grid."""
        positive = np.asarray(positive, dtype=float)
        if positive.size and positive[0] == 0.0:
            positive = positive[1:]
            include_zero = True
        if positive.size == 0 or np.any(positive <= 0):
            raise StructureError("need strictly positive samples to mirror")
        mid = [0.0] if include_zero else []
        return cls(np.concatenate([-positive[::-1], mid, positive]), band)

    @property
    def samples(self):
        return self._samples

    @property
    def size(self):
        return self._samples.size

    @property
    def zero_index(self):
        """Index of W = 0, or None if the grid excludes it."""
        j = np.searchsorted(self._samples, 0.0)
        if j < self.size and self._samples[j] == 0.0:
            return int(j)
        return None

    def index_of(self, value, tol=1e-9):
        """Index of the grid point closest to ``value`` (must match within
        ``tol`` relative to the grid span)."""
        j = int(np.argmin(np.abs(self._samples - value)))
        span = self._samples[-1] - self._samples[0]
        if abs(self._samples[j] - value) > tol * span:
            raise StructureError(f"{value} is not a grid point")
        return j

    def __eq__(self, other):
        return (
            isinstance(other, FrequencyGrid)
            and self.band == other.band
            and np.array_equal(self._samples, other._samples)
        )

    def __hash__(self):
        return hash((self.band, self._samples.tobytes()))

    def __repr__(self):
        s = self._samples
        return f"FrequencyGrid({s[0]:g}..{s[-1]:g}, n={s.size}, band={self.band!r})"


def _reversed_conj(arr):
    """conj(x(-W)) as an array over the grid: conjugate + index reversal."""
    return np.conj(arr[..., ::-1])


class LinearForm:
    """Observable ``sum_i u_i(W) a_i(W) + v_i(W) a_i^dag(-W) + s(W) f_a(W)``.

    ``u`` and ``v`` are (n_channels, n_grid) complex arrays; ``signal``
    is the coefficient of the amplitude-quadrature spectrum ``f_a`` of
    the normalized force (None means no signal content).  A form is a
    *quadrature* (self-adjoint operator family) when
    ``u_i(W) = conj(v_i(-W))`` and ``s(W) = conj(s(-W))``; quadrature
    forms constructed through :meth:`quadrature` or recognized within
    ``PAIR_TOL`` are snapped to the exact pairing, so the invariant
    holds exactly after every builder and combine call.
    """

    __slots__ = ("grid", "channels", "u", "v", "signal", "is_quadrature")

    def __init__(self, grid, channels, u, v, signal=None):
        if not isinstance(grid, FrequencyGrid):
            raise StructureError("grid must be a FrequencyGrid")
        channels = tuple(channels)
        ids = [ch.id for ch in channels]
        if len(set(ids)) != len(ids):
            raise StructureError(f"duplicate channel ids: {ids}")
        u = np.array(u, dtype=complex)
        v = np.array(v, dtype=complex)
        want = (len(channels), grid.size)
        if u.shape != want or v.shape != want:
            raise StructureError(f"coefficient shape {u.shape}/{v.shape} != {want}")
        if signal is not None:
            signal = np.array(signal, dtype=complex)
            if signal.shape != (grid.size,):
                raise StructureError("signal coefficient must be sampled on the grid")
        for name, arr in (("u", u), ("v", v), ("signal", signal)):
            if arr is not None and not np.all(np.isfinite(arr.view(float))):
                raise StructureError(f"non-finite {name} coefficient")

        # Detect (and snap) the self-adjoint pairing.
        scale = max(1.0, float(np.max(np.abs(u))), float(np.max(np.abs(v))))
        paired = np.allclose(u, _reversed_conj(v), rtol=0.0, atol=PAIR_TOL * scale)
        if paired and signal is not None:
            sscale = max(1.0, float(np.max(np.abs(signal))))
            paired = np.allclose(
                signal, _reversed_conj(signal), rtol=0.0, atol=PAIR_TOL * sscale
            )
        if paired:
            v = _reversed_conj(u)
            if signal is not None:
                signal = 0.5 * (signal + _reversed_conj(signal))

        for arr in (u, v, signal):
            if arr is not None:
                arr.setflags(write=False)
        self.grid = grid
        self.channels = channels
        self.u = u
        self.v = v
        self.signal = signal
        self.is_quadrature = bool(paired)

    # -- constructors -------------------------------------------------

    @classmethod
    def quadrature(cls, grid, channels, u, signal=None):
        """Build a self-adjoint form from its annihilation coefficients;
        the creation coefficients follow from the pairing."""
        u = np.array(u, dtype=complex)
        form = cls(grid, channels, u, _reversed_conj(u), signal)
        if not form.is_quadrature:
            raise ContractError("signal coefficient breaks the self-adjoint pairing")
        return form

    @classmethod
    def zero(cls, grid, channels, with_signal=False):
        n = (len(tuple(channels)), grid.size)
        sig = np.zeros(grid.size, dtype=complex) if with_signal else None
        return cls(grid, channels, np.zeros(n, complex), np.zeros(n, complex), sig)

    # -- derived forms -------------------------------------------------

    def adjoint_at_minus(self):
        """The form ``F^dag(-W)`` on the same grid."""
        sig = None if self.signal is None else _reversed_conj(self.signal)
        return LinearForm(
            self.grid, self.channels, _reversed_conj(self.v), _reversed_conj(self.u), sig
        )

    def without_signal(self):
        return LinearForm(self.grid, self.channels, self.u, self.v, None)

    def __repr__(self):
        tag = "quadrature" if self.is_quadrature else "field"
        ids = ",".join(ch.id for ch in self.channels)
        return f"LinearForm({tag}; channels=[{ids}]; n={self.grid.size})"


def _check_basis(forms):
    first = forms[0]
    for f in forms[1:]:
        if f.grid != first.grid:
            raise StructureError("forms live on different grids")
        if tuple(ch.id for ch in f.channels) != tuple(ch.id for ch in first.channels):
            raise StructureError("forms use different channel bases")
    return first


def commutator(f1: LinearForm, f2: LinearForm):
    """Commutator density c(W) with ``[f1(W), f2^dag(W')] = 2 pi c(W) d(W - W')``.

    ``c = sum_i u1_i conj(u2_i) - v1_i conj(v2_i)``.  For any canonical
    field output c = 1; for a pair of co-measurable quadratures c = 0.
    """
    _check_basis([f1, f2])
    return np.sum(f1.u * np.conj(f2.u) - f1.v * np.conj(f2.v), axis=0)


def combine(forms, weights):
    """Coefficient-wise weighted sum of forms (signal included); exact.

    Weights may be complex scalars or arrays over the grid.
    """
    forms = list(forms)
    if not forms:
        raise StructureError("combine needs at least one form")
    first = _check_basis(forms)
    weights = list(weights)
    if len(weights) != len(forms):
        raise StructureError(f"{len(forms)} forms but {len(weights)} weights")
    n = first.grid.size
    u = np.zeros((len(first.channels), n), dtype=complex)
    v = np.zeros_like(u)
    signal = np.zeros(n, dtype=complex)
    has_signal = False
    for f, w in zip(forms, weights):
        w = np.asarray(w, dtype=complex)
        if w.ndim not in (0, 1) or (w.ndim == 1 and w.size != n):
            raise StructureError("weight must be scalar or sampled on the grid")
        u += w * f.u
        v += w * f.v
        if f.signal is not None:
            signal += w * f.signal
            has_signal = True
    return LinearForm(first.grid, first.channels, u, v, signal if has_signal else None)


def psd(form: LinearForm):
    """Single-sided, shot-noise-normalized PSD of the noise part of a
    quadrature form: ``2 sum_i (|u_i|^2 + |v_i|^2) (n_i + 1/2)``.

    The signal coefficient is excluded.  Raises for non-quadrature
    forms, whose symmetrized density is not defined here.
    """
    if not form.is_quadrature:
        raise ContractError("PSD requires a self-adjoint (quadrature) form")
    out = np.zeros(form.grid.size)
    for i, ch in enumerate(form.channels):
        out += (np.abs(form.u[i]) ** 2 + np.abs(form.v[i]) ** 2) * ch.weight
    return SINGLE_SIDED * out


def cross_psd(f1: LinearForm, f2: LinearForm, tol=1e-12):
    """Symmetrized single-sided cross-spectrum of two quadrature forms.

    Joint post-processing is only meaningful for co-measurable records,
    so this refuses any pair whose commutator is not identically zero.
    """
    if not (f1.is_quadrature and f2.is_quadrature):
        raise ContractError("cross PSD requires quadrature forms")
    c = commutator(f1, f2)
    if np.max(np.abs(c)) > tol:
        raise ContractError(
            "observables do not commute (max |c| = %.3g); joint PSD refused"
            % float(np.max(np.abs(c)))
        )
    out = np.zeros(f1.grid.size, dtype=complex)
    for i, ch in enumerate(f1.channels):
        out += (f1.u[i] * np.conj(f2.u[i]) + f1.v[i] * np.conj(f2.v[i])) * ch.weight
    return SINGLE_SIDED * np.real(out)


def signal_transfer(form: LinearForm):
    """Coefficient of the force amplitude quadrature, as stored."""
    if form.signal is None:
        return np.zeros(form.grid.size, dtype=complex)
    return form.signal


def amplitude_quadrature(field: LinearForm):
    """``(F(W) + F^dag(-W)) / sqrt(2)`` as a quadrature form."""
    return combine([field, field.adjoint_at_minus()], [1 / np.sqrt(2), 1 / np.sqrt(2)])


def phase_quadrature(field: LinearForm):
    """``(F(W) - F^dag(-W)) / (i sqrt(2))`` as a quadrature form."""
    w = 1 / (1j * np.sqrt(2))
    return combine([field, field.adjoint_at_minus()], [w, -w])
