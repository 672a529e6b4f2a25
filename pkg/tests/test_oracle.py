"""Time-domain oracle: synthesis, spectral estimation, subtraction,
detection.  Statistical assertions use generous but meaningful bounds;
the tight 5% cross-checks live in the acceptance suite."""

import numpy as np
import pytest

from forcemeter import (
    FrequencyGrid,
    OracleConfig,
    Oscillator,
    ProbeMode,
    StructureError,
    UnsupportedSchemeError,
    analytic_record_psd,
    detection_mc,
    evaded_noise_toy,
    postprocess_subtraction,
    probe_from_strength,
    rebuild_on_grid,
    simulate,
    welch_psd,
)
from forcemeter.oracle import HomodyneRecord, _envelope_filter

from conftest import make_four_probe, make_monochromatic, make_toy


def toy_oracle_scheme(strength=20.0, n_occ=0.5, gamma=1.0):
    osc = Oscillator(omega_m=1.0, gamma_m=gamma)
    grid = FrequencyGrid.symmetric(20.0, 201, band="baseband")
    return make_toy(osc, grid, strength=strength, n_occ=n_occ)


def central_band_rms(record, name, band_max, nperseg=2048):
    est = welch_psd(record, name, nperseg=nperseg)
    keep = (est.omega > 0) & (est.omega <= band_max)
    omega = est.omega[keep]
    lo, hi = int(0.1 * omega.size), int(0.9 * omega.size)
    pred = analytic_record_psd(record, name, omega[lo:hi])
    rel = est.values[keep][lo:hi] / pred - 1
    return float(np.sqrt(np.mean(rel**2)))


class TestConfigValidation:
    def test_unstable_dt_rejected(self):
        scheme = toy_oracle_scheme()
        with pytest.raises(StructureError, match="dt too coarse"):
            OracleConfig(scheme=scheme, dt=0.2, duration=1e4, seed=1)

    def test_too_short_for_welch(self):
        scheme = toy_oracle_scheme()
        with pytest.raises(StructureError, match="segments"):
            OracleConfig(scheme=scheme, dt=0.01, duration=10.0, seed=1)

    def test_zero_trajectories_rejected(self):
        scheme = toy_oracle_scheme()
        with pytest.raises(StructureError):
            OracleConfig(scheme=scheme, dt=0.01, duration=1e3, seed=1, trajectories=0)


class TestEnvelopeIntegrator:
    def test_zero_input_stays_zero(self):
        out = _envelope_filter(1.0, 0.01, np.zeros(1000, dtype=complex))
        assert np.all(out == 0)

    def test_step_force_relaxation(self):
        # d' = -g d + i f0: |d| -> f0 / g with time constant 1/g
        gamma, dt, f0 = 0.5, 0.002, 0.3
        n = 40000
        drive = np.full(n, 1j * f0)
        d = _envelope_filter(gamma, dt, drive)
        assert abs(d[-1]) == pytest.approx(f0 / gamma, rel=1e-6)
        t_cross = np.argmax(np.abs(d) > (1 - np.exp(-1)) * f0 / gamma) * dt
        assert t_cross == pytest.approx(1 / gamma, rel=0.01)


class TestRecordSynthesis:
    def test_determinism(self):
        scheme = toy_oracle_scheme()
        cfg = OracleConfig(scheme=scheme, dt=0.01, duration=600.0, seed=99,
                           welch_nperseg=16)
        r1 = simulate(cfg)
        r2 = simulate(cfg)
        for name in r1.channels:
            np.testing.assert_array_equal(r1.channels[name], r2.channels[name])

    def test_seed_changes_records(self):
        scheme = toy_oracle_scheme()
        base = dict(scheme=scheme, dt=0.01, duration=600.0, welch_nperseg=16)
        r1 = simulate(OracleConfig(seed=1, **base))
        r2 = simulate(OracleConfig(seed=2, **base))
        assert not np.array_equal(
            r1.channels["diff_amplitude"], r2.channels["diff_amplitude"]
        )

    def test_force_linearity_with_shared_seed(self):
        # doubling the force doubles its contribution, noise held fixed
        scheme = toy_oracle_scheme()
        base = dict(scheme=scheme, dt=0.01, duration=600.0, seed=5,
                    welch_nperseg=16, signal_omega=2.0)
        r0 = simulate(OracleConfig(signal_amplitude=0.0, **base))
        r1 = simulate(OracleConfig(signal_amplitude=0.5, **base))
        r2 = simulate(OracleConfig(signal_amplitude=1.0, **base))
        d0 = r0.channels["diff_amplitude"]
        d1 = r1.channels["diff_amplitude"]
        d2 = r2.channels["diff_amplitude"]
        np.testing.assert_allclose(d2 - d0, 2 * (d1 - d0), rtol=0, atol=1e-10)

    def test_vacuum_record_at_shot_level(self):
        scheme = toy_oracle_scheme(strength=1e-6, n_occ=0.0)
        cfg = OracleConfig(scheme=scheme, dt=0.01, duration=2048 * 0.01 * 200,
                           seed=17, welch_nperseg=2048)
        rec = simulate(cfg)
        est = welch_psd(rec, "sum_amplitude", nperseg=2048)
        dev = (est.values[1:] - 1.0) / est.stderr[1:]
        # flat at the shot level: 95%+ of bins within 3 standard errors
        assert np.mean(np.abs(dev) < 3) > 0.95
        assert abs(np.mean(est.values[1:]) - 1.0) < 0.01


class TestWelchEstimator:
    def test_sine_peak_power(self):
        # deterministic sinusoid: integrated peak power = a^2 / 2
        dt, n, a, w0 = 0.01, 2**17, 0.7, 3.0
        t = np.arange(n) * dt
        scheme = toy_oracle_scheme()
        rec = HomodyneRecord(
            scheme=scheme, dt=dt,
            channels={"x": (a * np.cos(w0 * t))[None, :]}, seed=0,
        )
        est = welch_psd(rec, "x", nperseg=4096, overlap=0.0, window="hann")
        df = (est.omega[1] - est.omega[0]) / (2 * np.pi)
        power = np.sum(est.values) * df
        assert power == pytest.approx(a**2 / 2, rel=0.01)

    def test_error_bar_scaling_with_segments(self):
        # estimator spread shrinks like 1/sqrt(segments)
        scheme = toy_oracle_scheme(strength=1e-6, n_occ=0.0)
        dt = 0.01
        devs = []
        for factor in (1, 4):
            cfg = OracleConfig(scheme=scheme, dt=dt,
                               duration=256 * dt * 50 * factor,
                               seed=3, welch_nperseg=256)
            rec = simulate(cfg)
            est = welch_psd(rec, "sum_amplitude", nperseg=256, overlap=0.0)
            devs.append(np.std(est.values[1:] - 1.0))
        ratio = devs[0] / devs[1]
        assert 1.5 < ratio < 2.6  # expect ~2

    def test_too_short_record(self):
        scheme = toy_oracle_scheme()
        cfg = OracleConfig(scheme=scheme, dt=0.01, duration=600.0, seed=1,
                           welch_nperseg=16)
        rec = simulate(cfg)
        with pytest.raises(StructureError, match="too short"):
            welch_psd(rec, "sum_amplitude", nperseg=8192)

    def test_missing_channel(self):
        scheme = toy_oracle_scheme()
        cfg = OracleConfig(scheme=scheme, dt=0.01, duration=600.0, seed=1,
                           welch_nperseg=16)
        rec = simulate(cfg)
        with pytest.raises(StructureError):
            welch_psd(rec, "nope")


class TestAnalyticEquivalence:
    def test_toy_channels(self):
        scheme = toy_oracle_scheme()
        cfg = OracleConfig(scheme=scheme, dt=0.01, duration=2048 * 0.01 * 250,
                           seed=11, welch_nperseg=2048)
        rec = postprocess_subtraction(simulate(cfg))
        for name in ("sum_amplitude", "diff_amplitude", "combined"):
            assert central_band_rms(rec, name, 20.0) < 0.10, name

    def test_monochromatic_channel(self):
        osc = Oscillator(omega_m=1.0, gamma_m=0.2)
        grid = FrequencyGrid.symmetric(8.0, 101, band="absolute")
        scheme = make_monochromatic(osc, grid, strength=1.3, n_occ=1.0,
                                    thermal_coupling="flat")
        cfg = OracleConfig(scheme=scheme, dt=0.05, duration=4096 * 0.05 * 150,
                           seed=2, welch_nperseg=4096)
        rec = simulate(cfg)
        assert central_band_rms(rec, "homodyne", 8.0, nperseg=4096) < 0.10

    def test_monochromatic_needs_flat_bath(self, osc, abs_grid):
        scheme = make_monochromatic(osc, abs_grid, n_occ=1.0)  # ohmic
        cfg_kw = dict(dt=0.05, duration=4096 * 0.05 * 30, seed=2,
                      welch_nperseg=1024)
        with pytest.raises(UnsupportedSchemeError):
            simulate(OracleConfig(scheme=scheme, **cfg_kw))


class TestSubtraction:
    def test_zero_weight_returns_raw_record(self):
        scheme = toy_oracle_scheme()
        cfg = OracleConfig(scheme=scheme, dt=0.01, duration=600.0, seed=21,
                           welch_nperseg=16)
        rec = simulate(cfg)
        out = postprocess_subtraction(rec, weight_scale=0.0)
        np.testing.assert_allclose(
            out.channels["combined"], rec.channels["diff_amplitude"], atol=1e-12
        )

    def test_backaction_removed(self):
        # drive hard enough that the raw record is back-action dominated
        scheme = toy_oracle_scheme(strength=100.0, n_occ=0.0)
        cfg = OracleConfig(scheme=scheme, dt=0.01, duration=2048 * 0.01 * 200,
                           seed=23, welch_nperseg=2048)
        rec = simulate(cfg)
        out = postprocess_subtraction(rec)
        est_raw = welch_psd(rec, "diff_amplitude", nperseg=2048)
        est_comb = welch_psd(out, "combined", nperseg=2048)
        low = (est_raw.omega > 0) & (est_raw.omega < 2.0)
        # raw record sits far above the floor; combined sits on it
        pred_floor = analytic_record_psd(out, "combined", est_raw.omega[low])
        assert np.mean(est_raw.values[low]) > 10 * np.mean(pred_floor)
        np.testing.assert_allclose(
            np.mean(est_comb.values[low] / pred_floor), 1.0, atol=0.05
        )

    def test_monochromatic_unsupported(self, osc, abs_grid):
        scheme = make_monochromatic(osc, abs_grid, thermal_coupling="flat")
        cfg = OracleConfig(scheme=scheme, dt=0.05, duration=4096 * 0.05 * 30,
                           seed=2, welch_nperseg=1024)
        rec = simulate(cfg)
        with pytest.raises(UnsupportedSchemeError):
            postprocess_subtraction(rec)


class TestRebuildHelpers:
    def test_rebuild_preserves_parameters(self):
        scheme = toy_oracle_scheme(strength=8.0, n_occ=2.0)
        grid = FrequencyGrid.from_positive([0.5, 1.5], band="baseband")
        other = rebuild_on_grid(scheme, grid)
        assert other.strength == pytest.approx(scheme.strength, rel=1e-12)
        assert other.n_occ == scheme.n_occ
        assert other.grid == grid

    def test_analytic_record_psd_matches_direct(self):
        from forcemeter import psd

        scheme = toy_oracle_scheme()
        cfg = OracleConfig(scheme=scheme, dt=0.01, duration=600.0, seed=1,
                           welch_nperseg=16)
        rec = simulate(cfg)
        omega = np.array([0.5, 1.0, 4.0])
        got = analytic_record_psd(rec, "diff_amplitude", omega)
        grid = FrequencyGrid.from_positive(omega, band="baseband")
        want = psd(rebuild_on_grid(scheme, grid).observable("diff_amplitude"))
        want = np.array([want[grid.index_of(w)] for w in omega])
        np.testing.assert_allclose(got, want, rtol=1e-12)


class TestRecordExport:
    def record(self, trajectories=1):
        scheme = toy_oracle_scheme()
        cfg = OracleConfig(scheme=scheme, dt=0.01, duration=600.0, seed=51,
                           welch_nperseg=16, trajectories=trajectories)
        return simulate(cfg)

    def test_npy_roundtrip_and_determinism(self, tmp_path):
        from forcemeter.oracle import export_records

        rec = self.record()
        path = tmp_path / "records.npy"
        manifest = export_records(rec, str(path), fmt="npy")
        data = np.load(path)
        assert data.shape == (2, 1, rec.samples)
        for j, name in enumerate(manifest["channels"]):
            np.testing.assert_array_equal(data[j], rec.channels[name])
        first = path.read_bytes()
        export_records(rec, str(path), fmt="npy")
        assert path.read_bytes() == first

    def test_csv_export(self, tmp_path):
        from forcemeter.oracle import export_records

        rec = self.record()
        path = tmp_path / "records.csv"
        export_records(rec, str(path), fmt="csv")
        header = path.read_text().splitlines()[0].split(",")
        assert header == ["time_s", "diff_amplitude", "sum_amplitude"]

    def test_csv_needs_single_trajectory(self, tmp_path):
        from forcemeter.oracle import export_records

        rec = self.record(trajectories=2)
        with pytest.raises(StructureError):
            export_records(rec, str(tmp_path / "r.csv"), fmt="csv")


class TestDetection:
    def test_null_amplitude_snr(self):
        scheme = toy_oracle_scheme(strength=8.0, n_occ=0.0)
        cfg = OracleConfig(scheme=scheme, dt=0.02, duration=500.0, seed=31,
                           welch_nperseg=16, signal_omega=2.0)
        res = detection_mc(cfg, np.array([0.0, 0.1]), trials=150)
        assert abs(res.snr[0]) < 3 / np.sqrt(150)

    def test_snr_linear_in_amplitude(self):
        scheme = toy_oracle_scheme(strength=8.0, n_occ=0.0)
        cfg = OracleConfig(scheme=scheme, dt=0.02, duration=1000.0, seed=33,
                           welch_nperseg=16, signal_omega=2.0)
        thr = np.sqrt(evaded_noise_toy(scheme.osc, scheme.strength, 2.0) / 1000.0)
        res = detection_mc(cfg, np.array([0.3 * thr, thr, 10 * thr]), trials=200)
        assert res.snr[2] == pytest.approx(10.0, rel=0.2)
        assert res.snr[2] / res.snr[1] == pytest.approx(10.0, rel=0.15)
        assert res.bracketed

    def test_threshold_agreement(self):
        scheme = toy_oracle_scheme(strength=8.0, n_occ=0.0)
        cfg = OracleConfig(scheme=scheme, dt=0.02, duration=1000.0, seed=37,
                           welch_nperseg=16, signal_omega=2.0)
        thr = np.sqrt(evaded_noise_toy(scheme.osc, scheme.strength, 2.0) / 1000.0)
        res = detection_mc(cfg, thr * np.array([0.5, 1.0, 2.0]), trials=300)
        assert 0.8 < res.ratio < 1.25

    def test_not_bracketed_flag(self):
        scheme = toy_oracle_scheme(strength=8.0, n_occ=0.0)
        cfg = OracleConfig(scheme=scheme, dt=0.02, duration=500.0, seed=39,
                           welch_nperseg=16, signal_omega=2.0)
        thr = np.sqrt(evaded_noise_toy(scheme.osc, scheme.strength, 2.0) / 500.0)
        res = detection_mc(cfg, np.array([5 * thr, 10 * thr]), trials=100)
        assert not res.bracketed
