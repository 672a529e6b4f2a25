"""Independent time-domain validation of the frequency-domain budgets.

The oracle never evaluates the closed-form spectra.  It synthesizes the
input noise channels as band-limited white records, integrates the
linearized mirror dynamics step by step, assembles the same homodyne
records a detector would produce, and estimates their spectra with the
Welch method.  Agreement with the operator-algebra predictions is then
a genuine cross-check of the engine, not a tautology.

Noise discretization
--------------------
A vacuum channel is complex white noise with per-sample variance
``1/(2 dt)`` (``1/(4 dt)`` per real component), which makes the
amplitude-quadrature record ``sqrt(2) Re a(t)`` come out at the
single-sided shot level 1 used throughout the package; a thermal
channel scales the variance by ``2 n + 1``.  The rotating-frame bath
force is ``sqrt(gamma_m) e(t)`` with ``e`` one such thermal channel
(the engine-wide convention), and the laboratory-frame bath force is a
real white record at the single-sided force level ``2 gamma_m (2n+1)``
(the resonance value; the matching analytic forms use the "flat"
thermal coupling).

Integrator
----------
The envelope pole is updated with the exact exponential decay
``exp(-gamma_m dt)`` per step and a trapezoidal input integral, which
has no phase error at first order in ``W dt`` (important for the
record-level back-action subtraction).  The laboratory-frame oscillator
uses the exact matrix exponential of the (x, v) system with
step-constant input.  Relative spectral bias is O((W dt)^2) across the
analysis band.

Seeding
-------
One 64-bit master seed derives one independent substream per
(trajectory, channel) through ``numpy`` spawn keys, so identical
configurations are bit-for-bit reproducible and the injected signal
(which is deterministic) can be rescaled without touching the noise
realization.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np
from scipy import signal as sps

from .algebra import FrequencyGrid, psd
from .budget import DetectionSpec, detection_threshold, force_referred_psd
from .errors import StructureError, UnsupportedSchemeError
from .schemes import (
    SchemeInstance,
    build_four_probe,
    build_monochromatic,
    build_toy_dichromatic,
    four_probe_channel_id,
)

SQRT2 = np.sqrt(2.0)

# Stability margin for the step size and minimum Welch segment count.
MAX_RATE_DT = 0.1
MIN_SEGMENTS = 20


def _trajectory_chunk() -> int:
    """Vectorization width for trial batches; FORCEMETER_THREADS scales it."""
    try:
        threads = max(1, int(os.environ.get("FORCEMETER_THREADS", "8")))
    except ValueError:
        threads = 8
    return 8 * threads


@dataclass(frozen=True)
class OracleConfig:
    """Simulation plan for one scheme.

    ``signal_amplitude`` is the physical cosine force amplitude f0;
    ``signal_omega`` is the envelope offset W0 (rotating frames) or the
    absolute frequency w_f (monochromatic); the injected force is
    f0 cos((w_m + W0) t + phase) or f0 cos(w_f t + phase) respectively.
    """

    scheme: SchemeInstance
    dt: float
    duration: float
    seed: int
    trajectories: int = 1
    welch_nperseg: int = 2048
    welch_overlap: float = 0.5
    welch_window: str = "hann"
    signal_amplitude: float = 0.0
    signal_omega: float = 0.0
    signal_phase: float = 0.0

    def __post_init__(self):
        if self.dt <= 0 or self.duration <= 0:
            raise StructureError("dt and duration must be positive")
        rate = max(self.scheme.osc.gamma_m, abs(self.signal_omega))
        if self.scheme.kind == "monochromatic":
            rate = max(rate, self.scheme.osc.omega_m)
        if rate * self.dt >= MAX_RATE_DT:
            raise StructureError(
                f"dt too coarse: max system rate x dt = {rate * self.dt:.3g} "
                f">= {MAX_RATE_DT}"
            )
        if self.trajectories < 1:
            raise StructureError("need at least one trajectory")
        if self.welch_nperseg < 8:
            raise StructureError("welch_nperseg too small")
        if not (0 <= self.welch_overlap < 1):
            raise StructureError("welch_overlap must be in [0, 1)")
        if self.samples < MIN_SEGMENTS * self.welch_nperseg:
            raise StructureError(
                f"duration admits fewer than {MIN_SEGMENTS} Welch segments"
            )

    @property
    def samples(self) -> int:
        return int(round(self.duration / self.dt))


@dataclass(frozen=True)
class HomodyneRecord:
    """Simultaneously recorded quadrature time series, one row per
    trajectory, plus the metadata needed to post-process them."""

    scheme: SchemeInstance
    dt: float
    channels: Mapping[str, np.ndarray]
    seed: int
    signal_amplitude: float = 0.0
    signal_omega: float = 0.0
    signal_phase: float = 0.0

    @property
    def samples(self) -> int:
        return next(iter(self.channels.values())).shape[-1]

    @property
    def trajectories(self) -> int:
        return next(iter(self.channels.values())).shape[0]

    def channel(self, name):
        try:
            return self.channels[name]
        except KeyError:
            raise StructureError(
                f"record has no channel {name!r}; have {sorted(self.channels)}"
            ) from None


@dataclass(frozen=True)
class PsdEstimate:
    omega: np.ndarray        # angular frequencies of the bins (rad/s)
    values: np.ndarray       # single-sided PSD estimate
    stderr: np.ndarray       # chi^2 standard error per bin
    segments: float          # effective segment count behind the estimate


def _noise_stream(seed, trajectory, channel_index):
    ss = np.random.SeedSequence(seed, spawn_key=(trajectory, channel_index))
    return np.random.default_rng(ss)


def _derived_seed(seed, *key) -> int:
    """Deterministic 63-bit child seed for an independent trial batch."""
    state = np.random.SeedSequence(seed, spawn_key=tuple(key)).generate_state(1, np.uint64)
    return int(state[0] >> 1)


def _complex_white(rng, shape, dt, occupation=0.0):
    scale = np.sqrt((2.0 * occupation + 1.0) / (4.0 * dt))
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _envelope_filter(gamma_m, dt, drive):
    """Exact-pole, trapezoidal-input update of d' = -gamma_m d + drive."""
    alpha = np.exp(-gamma_m * dt)
    beta = (1.0 - alpha) / gamma_m if gamma_m > 0 else dt
    return sps.lfilter([beta / 2.0, beta / 2.0], [1.0, -alpha], drive, axis=-1)


def _burn_in(gamma_m, dt):
    """Samples to discard while the envelope forgets its cold start."""
    if gamma_m == 0:
        return 0
    return int(np.ceil(10.0 / (gamma_m * dt)))


def _signal_envelope(cfg, n_total, osc):
    """Baseband envelope f_bb(t) of f0 cos((w_m + W0) t + phase)."""
    if cfg.signal_amplitude == 0:
        return 0.0
    t = np.arange(n_total) * cfg.dt
    return (cfg.signal_amplitude / 2.0) * np.exp(
        -1j * (cfg.signal_omega * t + cfg.signal_phase)
    )


def _simulate_rotating(cfg: OracleConfig) -> HomodyneRecord:
    scheme = cfg.scheme
    osc = scheme.osc
    gm = osc.gamma_m
    g_mag = np.sqrt(scheme.strength / (4.0 * osc.omega_m))
    occ = scheme.n_occ
    if not np.isscalar(occ):
        raise UnsupportedSchemeError("oracle needs a constant bath occupation")

    if scheme.kind == "toy_dichromatic":
        optical = ["upper", "lower"]
        pairs = [("sum_amplitude", "diff_amplitude", "upper", "lower", +1.0)]
    else:
        optical, pairs = [], []
        for l in (1, 2):
            for m in (1, 2):
                up = four_probe_channel_id(l, +1, m)
                dn = four_probe_channel_id(l, -1, m)
                optical += [up, dn]
                pairs.append(
                    (f"sum_amplitude_l{l}n{m}", f"diff_amplitude_l{l}n{m}",
                     up, dn, float((-1) ** (l - 1)))
                )

    nburn = _burn_in(gm, cfg.dt)
    n_total = cfg.samples + nburn
    records = {}
    for sum_name, diff_name, *_ in pairs:
        records[sum_name] = np.empty((cfg.trajectories, cfg.samples))
        records[diff_name] = np.empty((cfg.trajectories, cfg.samples))

    f_sig = _signal_envelope(cfg, n_total, osc)
    for traj in range(cfg.trajectories):
        fields = {}
        for idx, name in enumerate(optical):
            rng = _noise_stream(cfg.seed, traj, idx)
            fields[name] = _complex_white(rng, n_total, cfg.dt)
        bath_rng = _noise_stream(cfg.seed, traj, len(optical))
        bath = _complex_white(bath_rng, n_total, cfg.dt, occupation=occ)

        drive_opt = np.zeros(n_total, dtype=complex)
        for s, d, up, dn, sgn in pairs:
            drive_opt += sgn * (fields[up] + np.conj(fields[dn]))
        drive = 1j * g_mag * drive_opt + 1j * (f_sig + np.sqrt(gm) * bath)
        d_env = _envelope_filter(gm, cfg.dt, drive)

        for sum_name, diff_name, up, dn, sgn in pairs:
            re_up, re_dn = np.real(fields[up]), np.real(fields[dn])
            records[sum_name][traj] = (re_up + re_dn)[nburn:]
            records[diff_name][traj] = (
                re_up - re_dn - sgn * 2.0 * g_mag * np.imag(d_env)
            )[nburn:]

    for arr in records.values():
        arr.setflags(write=False)
    return HomodyneRecord(
        scheme=scheme,
        dt=cfg.dt,
        channels=records,
        seed=cfg.seed,
        signal_amplitude=cfg.signal_amplitude,
        signal_omega=cfg.signal_omega,
        signal_phase=cfg.signal_phase,
    )


def _oscillator_step_filter(osc, dt, drive):
    """Position response of x'' + 2g x' + wm^2 x = drive, exact matrix
    exponential with step-constant input, as a direct-form IIR."""
    wm, gm = osc.omega_m, osc.gamma_m
    wd = np.sqrt(complex(wm**2 - gm**2))
    e = np.exp(-gm * dt)
    if wd == 0:
        cosd, sincd = 1.0, dt  # critically damped limit
    else:
        cosd = np.real(np.cos(wd * dt))
        sincd = np.real(np.sin(wd * dt) / wd)
    m00 = e * (cosd + gm * sincd)
    m01 = e * sincd
    m11 = e * (cosd - gm * sincd)
    tr = m00 + m11
    det = np.exp(-2.0 * gm * dt)
    # G = A^-1 (M - I) B for B = (0, 1); x-row feeds the output
    g0 = (-2.0 * gm * m01 - (m11 - 1.0)) / wm**2
    g1 = m01
    b = [0.0, g0, m01 * g1 - m11 * g0]
    a = [1.0, -tr, det]
    return sps.lfilter(b, a, drive, axis=-1)


def _simulate_monochromatic(cfg: OracleConfig) -> HomodyneRecord:
    scheme = cfg.scheme
    osc = scheme.osc
    if scheme.meta["thermal_coupling"] != "flat":
        raise UnsupportedSchemeError(
            "the time-domain path synthesizes a flat bath; build the "
            "scheme with thermal_coupling='flat' to compare against it"
        )
    psi = np.asarray(scheme.meta["angle"])
    if psi.ndim and not np.all(psi == psi.flat[0]):
        raise UnsupportedSchemeError("oracle needs a single homodyne angle")
    psi = float(psi.flat[0])
    occ = scheme.n_occ
    if not np.isscalar(occ):
        raise UnsupportedSchemeError("oracle needs a constant bath occupation")
    gm, wm = osc.gamma_m, osc.omega_m

    nburn = _burn_in(max(gm, wm / 100.0), cfg.dt)
    n_total = cfg.samples + nburn
    t = np.arange(n_total) * cfg.dt
    f_sig = (
        cfg.signal_amplitude * np.cos(cfg.signal_omega * t + cfg.signal_phase)
        if cfg.signal_amplitude
        else 0.0
    )

    records = np.empty((cfg.trajectories, cfg.samples))
    force_scale = np.sqrt(gm * (2.0 * occ + 1.0) / cfg.dt)  # flat bath force
    for traj in range(cfg.trajectories):
        rng = _noise_stream(cfg.seed, traj, 0)
        a_in = _complex_white(rng, n_total, cfg.dt)
        bath_rng = _noise_stream(cfg.seed, traj, 1)
        f_fl = force_scale * bath_rng.standard_normal(n_total)
        a_ampl = SQRT2 * np.real(a_in)
        a_phase = SQRT2 * np.imag(a_in)
        drive = np.sqrt(2.0 * scheme.strength * wm) * a_ampl + 2.0 * wm * (f_sig + f_fl)
        x = _oscillator_step_filter(osc, cfg.dt, drive)
        y = np.cos(psi) * a_ampl + np.sin(psi) * (
            a_phase + np.sqrt(scheme.strength / (2.0 * wm)) * x
        )
        records[traj] = y[nburn:]

    records.setflags(write=False)
    return HomodyneRecord(
        scheme=scheme,
        dt=cfg.dt,
        channels={"homodyne": records},
        seed=cfg.seed,
        signal_amplitude=cfg.signal_amplitude,
        signal_omega=cfg.signal_omega,
        signal_phase=cfg.signal_phase,
    )


def simulate(cfg: OracleConfig) -> HomodyneRecord:
    """Integrate the scheme's stochastic dynamics and return the
    commuting set of homodyne records it measures.  Deterministic given
    the seed."""
    if cfg.scheme.kind in ("toy_dichromatic", "four_probe"):
        return _simulate_rotating(cfg)
    return _simulate_monochromatic(cfg)


# ----------------------------------------------------------------------
# spectral estimation
# ----------------------------------------------------------------------

def welch_psd(record: HomodyneRecord, name: str, nperseg=2048, overlap=0.5,
              window="hann") -> PsdEstimate:
    """Welch estimate of a record channel, averaged over trajectories,
    in the engine's single-sided convention (shot level = 1).

    The standard error per bin is chi^2-based: P / sqrt(K_eff) with
    K_eff the effective segment count (9/11 of the raw count for
    half-overlapped Hann segments).
    """
    data = record.channel(name)
    n = data.shape[-1]
    if n < MIN_SEGMENTS * nperseg:
        raise StructureError(
            f"record too short: {n} samples < {MIN_SEGMENTS} x {nperseg}"
        )
    noverlap = int(round(nperseg * overlap))
    freqs, pxx = sps.welch(
        data,
        fs=1.0 / record.dt,
        window=window,
        nperseg=nperseg,
        noverlap=noverlap,
        detrend=False,
        axis=-1,
    )
    if pxx.ndim > 1:
        pxx = pxx.mean(axis=0)
    per_traj = 1 + (n - nperseg) // max(1, nperseg - noverlap)
    k_eff = per_traj * record.trajectories
    if noverlap:
        k_eff *= 9.0 / 11.0  # Hann half-overlap correlation penalty
    stderr = pxx / np.sqrt(k_eff)
    return PsdEstimate(
        omega=2.0 * np.pi * freqs, values=pxx, stderr=stderr, segments=k_eff
    )


def rebuild_on_grid(scheme: SchemeInstance, grid: FrequencyGrid) -> SchemeInstance:
    """Same scheme, same parameters, new analysis grid."""
    osc, n_occ = scheme.osc, scheme.n_occ
    if not np.isscalar(n_occ):
        raise UnsupportedSchemeError("cannot rebuild with a grid-bound occupation")
    if scheme.kind == "monochromatic":
        psi = np.asarray(scheme.meta["angle"])
        if psi.ndim and not np.all(psi == psi.flat[0]):
            raise UnsupportedSchemeError("cannot rebuild with a grid-bound angle")
        return build_monochromatic(
            osc, scheme.probe, grid, angle=float(psi.flat[0]), n_occ=n_occ,
            thermal_coupling=scheme.meta["thermal_coupling"],
        )
    if scheme.kind == "toy_dichromatic":
        return build_toy_dichromatic(osc, scheme.probe, grid, n_occ=n_occ)
    return build_four_probe(osc, scheme.probe, grid, n_occ=n_occ)


def analytic_record_psd(record: HomodyneRecord, name: str, omega):
    """Operator-algebra prediction for a record channel's PSD at the
    requested non-negative angular frequencies."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise StructureError("need non-negative frequencies")
    positive = np.unique(omega[omega > 0])
    grid = FrequencyGrid.from_positive(positive, band=record.scheme.grid.band)
    rebuilt = rebuild_on_grid(record.scheme, grid)
    values = psd(rebuilt.observable(name))
    lookup = {w: values[grid.index_of(w)] for w in positive}
    j0 = grid.zero_index
    if np.any(omega == 0):
        lookup[0.0] = values[j0]
    return np.array([lookup[w] for w in omega])


# ----------------------------------------------------------------------
# back-action subtraction on records
# ----------------------------------------------------------------------

def _spectral_filter(data, dt, weight_fn):
    """Apply an engine-convention frequency response W(w) to real
    records along the last axis via the FFT.

    The engine expands records as exp(-i w t), numpy's FFT synthesis
    basis is exp(+i w t); a real filter therefore acts on the rfft bins
    through the conjugated response.
    """
    n = data.shape[-1]
    omega = 2.0 * np.pi * np.fft.rfftfreq(n, dt)
    spectrum = np.fft.rfft(data, axis=-1) * np.conj(weight_fn(omega))
    return np.fft.irfft(spectrum, n=n, axis=-1)


def postprocess_subtraction(record: HomodyneRecord, weight_scale=1.0) -> HomodyneRecord:
    """Form the back-action-free combination from simultaneously
    recorded quadratures.

    Toy scheme: combined = diff + W(w) * sum with
    W = K / (2 w_m (gamma_m - i w)); four-probe: the signed half-sum of
    the difference records minus 2 W times the signed sum of the sum
    records.  ``weight_scale`` rescales the filter (0 returns the raw
    signal record unchanged, for diagnostics).
    """
    scheme = record.scheme
    osc = scheme.osc
    strength = scheme.strength

    def weight(omega):
        return weight_scale * strength / (
            2.0 * osc.omega_m * (osc.gamma_m - 1j * omega)
        )

    if scheme.kind == "toy_dichromatic":
        raw = record.channel("diff_amplitude")
        monitor = record.channel("sum_amplitude")
        combined = raw + _spectral_filter(monitor, record.dt, weight)
    elif scheme.kind == "four_probe":
        raw = np.zeros_like(record.channel("diff_amplitude_l1n1"))
        monitor = np.zeros_like(raw)
        for l in (1, 2):
            for m in (1, 2):
                raw = raw + 0.5 * (-1) ** l * record.channel(f"diff_amplitude_l{l}n{m}")
                monitor = monitor + (-1) ** (l - 1) * record.channel(
                    f"sum_amplitude_l{l}n{m}"
                )
        combined = raw - _spectral_filter(
            monitor, record.dt, lambda w: 2.0 * weight(w)
        )
    else:
        raise UnsupportedSchemeError(
            "back-action subtraction needs a separately measured "
            "back-action record; the monochromatic scheme has none"
        )
    channels = dict(record.channels)
    channels["combined"] = combined
    if scheme.kind == "four_probe":
        channels["backaction_monitor"] = monitor
    return replace(record, channels=channels)


# ----------------------------------------------------------------------
# record export
# ----------------------------------------------------------------------

def export_records(record: HomodyneRecord, path: str, fmt: str = "npy"):
    """Write the raw time series to disk.

    ``npy``: one stacked float64 array of shape
    (channels, trajectories, samples), channel order alphabetical (the
    order is also recorded in the returned manifest); deterministic
    bytes.  ``csv``: time column plus one column per channel
    (single-trajectory records only).
    """
    from .io import atomic_write, write_csv  # deferred: io imports schemes

    names = sorted(record.channels)
    if fmt == "npy":
        import io as _io

        stacked = np.stack([np.asarray(record.channels[n]) for n in names])
        buf = _io.BytesIO()
        np.save(buf, stacked, allow_pickle=False)
        atomic_write(path, buf.getvalue())
    elif fmt == "csv":
        if record.trajectories != 1:
            raise StructureError("CSV record export needs a single trajectory")
        columns = {"time_s": np.arange(record.samples) * record.dt}
        for n in names:
            columns[n] = record.channels[n][0]
        write_csv(path, columns)
    else:
        raise StructureError(f"unknown record export format {fmt!r}")
    return {"format": fmt, "channels": names,
            "trajectories": record.trajectories, "samples": record.samples,
            "dt": record.dt}


# ----------------------------------------------------------------------
# Monte Carlo detection
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class DetectionResult:
    amplitudes: np.ndarray
    snr: np.ndarray                # empirical SNR per amplitude
    estimates_mean: np.ndarray
    estimates_std: np.ndarray
    empirical_threshold: float     # amplitude with empirical SNR = 1
    analytic_threshold: float      # sqrt(S_n / tau)
    bracketed: bool
    trials: int
    s_n: float

    @property
    def ratio(self) -> float:
        return self.empirical_threshold / self.analytic_threshold


def _noise_free_record(cfg: OracleConfig) -> np.ndarray:
    """Deterministic unit-amplitude signal response of the processed
    record (all noise inputs zeroed); length and alignment match
    :func:`simulate` output."""
    scheme = cfg.scheme
    osc = scheme.osc
    if scheme.kind == "monochromatic":
        nburn = _burn_in(max(osc.gamma_m, osc.omega_m / 100.0), cfg.dt)
        n_total = cfg.samples + nburn
        psi = float(np.asarray(scheme.meta["angle"]).flat[0])
        t = np.arange(n_total) * cfg.dt
        f_sig = np.cos(cfg.signal_omega * t + cfg.signal_phase)
        x = _oscillator_step_filter(osc, cfg.dt, 2.0 * osc.omega_m * f_sig)
        y = np.sin(psi) * np.sqrt(scheme.strength / (2.0 * osc.omega_m)) * x
        return y[nburn:]
    nburn = _burn_in(osc.gamma_m, cfg.dt)
    n_total = cfg.samples + nburn
    g_mag = np.sqrt(scheme.strength / (4.0 * osc.omega_m))
    f_env = _signal_envelope(replace(cfg, signal_amplitude=1.0), n_total, osc)
    d_env = _envelope_filter(osc.gamma_m, cfg.dt, 1j * f_env)
    toy_response = -2.0 * g_mag * np.imag(d_env)[nburn:]
    if scheme.kind == "four_probe":
        # the signed half-sum doubles the per-pair response and flips its
        # sign (transfer -2x the toy one at equal strength)
        return -2.0 * toy_response
    return toy_response


def detection_mc(cfg: OracleConfig, amplitudes, trials: int) -> DetectionResult:
    """Monte Carlo realization of the narrow-band detection threshold.

    For each force amplitude, ``trials`` independent noise realizations
    are simulated, the signal is estimated by least squares against the
    known deterministic response of the processed record, and the
    empirical SNR (mean / std of the estimates) is compared with the
    closed-form threshold sqrt(S_n(W0) / tau).
    """
    amplitudes = np.asarray(amplitudes, dtype=float)
    if amplitudes.ndim != 1 or amplitudes.size == 0 or np.any(amplitudes < 0):
        raise StructureError("need a non-empty, non-negative amplitude grid")
    if trials < 2:
        raise StructureError("need at least two trials")
    scheme = cfg.scheme

    template = _noise_free_record(replace(cfg, signal_amplitude=1.0))
    norm = float(np.dot(template, template))
    if norm == 0:
        raise StructureError("signal template is identically zero")

    # engine S_n at the signal frequency for the analytic threshold
    name = "combined" if scheme.kind != "monochromatic" else "homodyne"
    w0 = abs(cfg.signal_omega)
    if w0 > 0:
        grid = FrequencyGrid.from_positive([w0], band=scheme.grid.band,
                                           include_zero=False)
        spectrum = force_referred_psd(rebuild_on_grid(scheme, grid), name)
        s_n = spectrum.at(w0)
    else:
        grid = FrequencyGrid.from_positive([scheme.osc.gamma_m],
                                           band=scheme.grid.band)
        spectrum = force_referred_psd(rebuild_on_grid(scheme, grid), name)
        s_n = float(spectrum.total[grid.zero_index])
    spec = DetectionSpec(force_amplitude=0.0, signal_omega=w0, duration=cfg.duration)
    analytic = detection_threshold(spec, s_n)

    chunk = _trajectory_chunk()
    means = np.empty(amplitudes.size)
    stds = np.empty(amplitudes.size)
    for ia, amp in enumerate(amplitudes):
        estimates = np.empty(trials)
        done = 0
        while done < trials:
            size = min(chunk, trials - done)
            sub = replace(
                cfg,
                trajectories=size,
                signal_amplitude=float(amp),
                seed=_derived_seed(cfg.seed, ia, done),
            )
            rec = simulate(sub)
            if scheme.kind == "monochromatic":
                y = rec.channel("homodyne")
            else:
                y = postprocess_subtraction(rec).channel("combined")
            estimates[done : done + size] = y @ template / norm
            done += size
        means[ia] = estimates.mean()
        stds[ia] = estimates.std(ddof=1)

    snr_emp = means / stds
    positive = amplitudes > 0
    if np.any(positive):
        slope = float(
            np.sum(snr_emp[positive] * amplitudes[positive])
            / np.sum(amplitudes[positive] ** 2)
        )
        empirical = 1.0 / slope if slope > 0 else np.inf
    else:
        empirical = np.inf
    bracketed = bool(np.any(snr_emp < 1) and np.any(snr_emp > 1))
    return DetectionResult(
        amplitudes=amplitudes,
        snr=snr_emp,
        estimates_mean=means,
        estimates_std=stds,
        empirical_threshold=empirical,
        analytic_threshold=analytic,
        bracketed=bracketed,
        trials=trials,
        s_n=s_n,
    )
