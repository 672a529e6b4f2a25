"""CLI layer: config validation, runners, determinism, exit codes."""

import json
import os

import numpy as np
import pytest

from forcemeter import Oscillator, sql_force, susceptibility
from forcemeter.cli import EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC, EXIT_OK, main
from forcemeter.io import CONFIG_SCHEMA, config_digest, load_config, validate_config


def base_config(outdir, scheme="toy_dichromatic", **overrides):
    cfg = {
        "scheme": scheme,
        "oscillator": {"omega_m": 1.0, "gamma_m": 1.0},
        "probe": {"strength": 20.0},
        "bath": {"n_occ": 0.5},
        "grid": {"max": 20.0, "points": 201},
        "seed": 42,
        "analysis": {"spectrum": {"observable": "combined"}},
        "output": {"directory": outdir, "format": "csv"},
    }
    cfg.update(overrides)
    return cfg


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def read_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    cols = {}
    for j, name in enumerate(header):
        try:
            cols[name] = np.array([float(r[j]) for r in rows])
        except ValueError:
            cols[name] = np.array([r[j] for r in rows])
    return cols


class TestValidation:
    def test_valid_config_accepted(self, tmp_path):
        cfg = base_config(str(tmp_path / "out"))
        assert validate_config(cfg) is cfg
        path = write_config(tmp_path, cfg)
        assert main(["validate", path]) == EXIT_OK

    def test_unknown_key_rejected(self, tmp_path):
        cfg = base_config(str(tmp_path))
        cfg["surprise"] = 1
        path = write_config(tmp_path, cfg)
        assert main(["validate", path]) == EXIT_CONFIG

    def test_missing_field_reports_path(self, tmp_path, capsys):
        cfg = base_config(str(tmp_path))
        del cfg["oscillator"]["omega_m"]
        path = write_config(tmp_path, cfg)
        assert main(["validate", path]) == EXIT_CONFIG
        err = capsys.readouterr().err
        assert "oscillator" in err and "omega_m" in err

    def test_even_grid_rejected(self, tmp_path):
        outdir = tmp_path / "never_created"
        cfg = base_config(str(outdir))
        cfg["grid"]["points"] = 200
        path = write_config(tmp_path, cfg)
        assert main(["spectrum", path]) == EXIT_CONFIG
        assert not outdir.exists()  # validation failures write nothing

    def test_probe_style_conflict(self):
        cfg = base_config("out")
        cfg["probe"] = {"strength": 1.0, "wavelength_m": 1e-6, "power_W": 1.0}
        with pytest.raises(Exception, match="probe"):
            validate_config(cfg)

    def test_monochromatic_needs_angle(self):
        cfg = base_config("out", scheme="monochromatic")
        cfg["analysis"]["spectrum"]["observable"] = "phase"
        with pytest.raises(Exception, match="homodyne_angle"):
            validate_config(cfg)

    def test_si_probe_style(self, tmp_path):
        cfg = base_config(str(tmp_path / "out"), scheme="monochromatic")
        cfg["oscillator"] = {
            "omega_m": 2 * np.pi * 100.0,
            "gamma_m": 2 * np.pi * 1.0,
            "mass_kg": 1e-6,
            "temperature_K": 0.0,
        }
        cfg["probe"] = {"wavelength_m": 1.064e-6, "power_W": 1e-3}
        cfg["grid"] = {"max": 2 * np.pi * 300.0, "points": 201}
        cfg["analysis"] = {
            "spectrum": {"observable": "phase", "homodyne_angle": np.pi / 2}
        }
        path = write_config(tmp_path, cfg)
        assert main(["spectrum", path]) == EXIT_OK

    def test_bad_json_rejected(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["validate", str(path)]) == EXIT_CONFIG

    def test_schema_file_in_sync(self):
        here = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
        with open(os.path.join(here, "docs", "config.schema.json")) as fh:
            on_disk = json.load(fh)
        assert on_disk == CONFIG_SCHEMA


class TestSpectrumCommand:
    def test_evaded_scheme_backaction_column_zero(self, tmp_path):
        outdir = str(tmp_path / "out")
        cfg = base_config(outdir)
        cfg["probe"]["strength"] = 4e3 * 1.0 * 1.0  # strong drive
        path = write_config(tmp_path, cfg)
        assert main(["spectrum", path]) == EXIT_OK
        cols = read_csv(os.path.join(outdir, "spectrum.csv"))
        assert np.all(cols["backaction"] == 0.0)
        np.testing.assert_allclose(
            cols["total"], cols["shot"] + cols["thermal"], rtol=1e-12
        )

    def test_phase_readout_touches_sql(self, tmp_path):
        # gamma = 0, strength = |Z(w_f)|: budget at w_f equals the SQL
        outdir = str(tmp_path / "out")
        osc = Oscillator(omega_m=1.0, gamma_m=0.0)
        w_f = 2.4
        cfg = base_config(outdir, scheme="monochromatic")
        cfg["oscillator"] = {"omega_m": 1.0, "gamma_m": 0.0}
        cfg["bath"] = {"n_occ": 0.0}
        cfg["probe"]["strength"] = abs(susceptibility(osc, w_f))
        cfg["grid"] = {"max": 4.0, "points": 11}  # contains 2.4, avoids 1.0
        cfg["analysis"] = {
            "spectrum": {
                "observable": "phase",
                "homodyne_angle": np.pi / 2,
                "signal_omega": w_f,
            }
        }
        path = write_config(tmp_path, cfg)
        assert main(["spectrum", path]) == EXIT_OK
        with open(os.path.join(outdir, "envelope.json")) as fh:
            envelope = json.load(fh)
        got = envelope["results"]["total_at_signal_omega"]
        assert got == pytest.approx(sql_force(osc, w_f), rel=1e-12)

    def test_zero_transfer_is_numeric_error(self, tmp_path):
        cfg = base_config(str(tmp_path / "out"))
        cfg["analysis"]["spectrum"]["observable"] = "sum_amplitude"
        path = write_config(tmp_path, cfg)
        assert main(["spectrum", path]) == EXIT_NUMERIC

    def test_unwritable_output_is_io_error(self, tmp_path):
        target = tmp_path / "blocked"
        target.write_text("a file, not a directory")
        cfg = base_config(str(target / "out"))
        path = write_config(tmp_path, cfg)
        assert main(["spectrum", path]) == EXIT_IO

    def test_plot_flag_renders_png(self, tmp_path):
        outdir = str(tmp_path / "out")
        cfg = base_config(outdir)
        path = write_config(tmp_path, cfg)
        assert main(["spectrum", path, "--plot"]) == EXIT_OK
        assert os.path.exists(os.path.join(outdir, "spectrum.png"))


class TestSweepCommand:
    def test_strength_sweep_brackets_optimum(self, tmp_path):
        outdir = str(tmp_path / "out")
        osc = Oscillator(omega_m=1.0, gamma_m=0.0)
        w_f = 2.0
        k_star = abs(susceptibility(osc, w_f))
        cfg = base_config(outdir, scheme="monochromatic")
        cfg["oscillator"] = {"omega_m": 1.0, "gamma_m": 0.0}
        cfg["bath"] = {"n_occ": 0.0}
        cfg["analysis"] = {
            "sweep": {
                "variable": "strength",
                "start": k_star / 10,
                "stop": k_star * 10,
                "points": 200,
                "log": True,
                "observable": "phase",
                "homodyne_angle": np.pi / 2,
                "signal_omega": w_f,
            }
        }
        path = write_config(tmp_path, cfg)
        assert main(["sweep", path]) == EXIT_OK
        with open(os.path.join(outdir, "envelope.json")) as fh:
            envelope = json.load(fh)
        got = envelope["results"]["argmin_value"]
        step = (10.0) ** (2.0 / 199)
        assert abs(np.log(got / k_star)) <= np.log(step)

    def test_evaded_strength_sweep_monotone(self, tmp_path):
        outdir = str(tmp_path / "out")
        cfg = base_config(outdir)
        cfg["oscillator"]["gamma_m"] = 0.0  # undamped: pure 1/K scaling
        cfg["bath"] = {"n_occ": 0.0}
        cfg["analysis"] = {
            "sweep": {
                "variable": "strength",
                "start": 0.1,
                "stop": 10.0,
                "points": 25,
                "log": True,
                "observable": "combined",
                "signal_omega": 2.0,
            }
        }
        path = write_config(tmp_path, cfg)
        assert main(["sweep", path]) == EXIT_OK
        with open(os.path.join(outdir, "envelope.json")) as fh:
            envelope = json.load(fh)
        assert envelope["results"]["monotone_decreasing"] is True

    def test_single_point_sweep_matches_spectrum(self, tmp_path):
        out1 = str(tmp_path / "a")
        out2 = str(tmp_path / "b")
        w_f = 2.0
        cfg1 = base_config(out1)
        cfg1["grid"] = {"max": 4.0, "points": 41}
        cfg1["analysis"] = {
            "spectrum": {"observable": "combined", "signal_omega": w_f}
        }
        path1 = write_config(tmp_path, cfg1, "a.json")
        assert main(["spectrum", path1]) == EXIT_OK
        cfg2 = base_config(out2)
        cfg2["analysis"] = {
            "sweep": {
                "variable": "signal_omega",
                "start": w_f,
                "stop": w_f,
                "points": 1,
                "observable": "combined",
                "signal_omega": w_f,
            }
        }
        path2 = write_config(tmp_path, cfg2, "b.json")
        assert main(["sweep", path2]) == EXIT_OK
        with open(os.path.join(out1, "envelope.json")) as fh:
            v1 = json.load(fh)["results"]["total_at_signal_omega"]
        with open(os.path.join(out2, "envelope.json")) as fh:
            v2 = json.load(fh)["results"]["min_s_n"]
        assert v1 == pytest.approx(v2, rel=1e-12)


class TestOracleCommand:
    def oracle_config(self, outdir):
        cfg = base_config(outdir)
        cfg["analysis"] = {
            "oracle": {
                "dt": 0.01,
                "duration": 1200.0,
                "trajectories": 1,
                "welch": {"nperseg": 1024},
            }
        }
        return cfg

    def test_runs_and_reports_rms(self, tmp_path):
        outdir = str(tmp_path / "out")
        path = write_config(tmp_path, self.oracle_config(outdir))
        assert main(["oracle", path]) == EXIT_OK
        with open(os.path.join(outdir, "envelope.json")) as fh:
            envelope = json.load(fh)
        assert envelope["results"]["rms_worst"] < 0.25
        cols = read_csv(os.path.join(outdir, "oracle.csv"))
        assert set(cols["channel"]) == {"sum_amplitude", "diff_amplitude", "combined"}
        assert np.all(cols["stderr"] > 0)

    def test_determinism_byte_identical(self, tmp_path):
        outdir = str(tmp_path / "out")
        path = write_config(tmp_path, self.oracle_config(outdir))
        assert main(["oracle", path]) == EXIT_OK
        first = {}
        for name in ("oracle.csv", "envelope.json"):
            with open(os.path.join(outdir, name), "rb") as fh:
                first[name] = fh.read()
        assert main(["oracle", path]) == EXIT_OK
        for name, payload in first.items():
            with open(os.path.join(outdir, name), "rb") as fh:
                assert fh.read() == payload, name

    def test_zero_trajectories_rejected(self, tmp_path):
        cfg = self.oracle_config(str(tmp_path / "out"))
        cfg["analysis"]["oracle"]["trajectories"] = 0
        path = write_config(tmp_path, cfg)
        assert main(["oracle", path]) == EXIT_CONFIG

    def test_record_export(self, tmp_path):
        outdir = str(tmp_path / "out")
        cfg = self.oracle_config(outdir)
        cfg["analysis"]["oracle"]["save_records"] = "npy"
        path = write_config(tmp_path, cfg)
        assert main(["oracle", path]) == EXIT_OK
        data = np.load(os.path.join(outdir, "records.npy"))
        assert data.shape[0] == 3  # combined + the two raw quadratures
        with open(os.path.join(outdir, "envelope.json")) as fh:
            envelope = json.load(fh)
        assert envelope["files"]["records"] == "records.npy"
        assert envelope["results"]["records"]["channels"] == [
            "combined", "diff_amplitude", "sum_amplitude"
        ]


class TestDetectCommand:
    def test_threshold_table(self, tmp_path):
        outdir = str(tmp_path / "out")
        cfg = base_config(outdir)
        cfg["bath"] = {"n_occ": 0.0}
        cfg["probe"]["strength"] = 8.0
        cfg["analysis"] = {
            "detect": {
                "dt": 0.02,
                "tau": 400.0,
                "signal_omega": 2.0,
                "amplitudes": [0.05, 0.1, 0.3],
                "trials": 120,
            }
        }
        path = write_config(tmp_path, cfg)
        assert main(["detect", path]) == EXIT_OK
        with open(os.path.join(outdir, "envelope.json")) as fh:
            results = json.load(fh)["results"]
        assert 0.5 < results["threshold_ratio"] < 2.0
        cols = read_csv(os.path.join(outdir, "detect.csv"))
        np.testing.assert_allclose(
            cols["snr_analytic"],
            np.array([0.05, 0.1, 0.3]) / results["analytic_threshold"],
            rtol=1e-12,
        )

    def test_unbracketed_warning(self, tmp_path):
        outdir = str(tmp_path / "out")
        cfg = base_config(outdir)
        cfg["bath"] = {"n_occ": 0.0}
        cfg["probe"]["strength"] = 8.0
        cfg["analysis"] = {
            "detect": {
                "dt": 0.02,
                "tau": 400.0,
                "signal_omega": 2.0,
                "amplitudes": [2.0, 4.0],  # far above threshold
                "trials": 60,
            }
        }
        path = write_config(tmp_path, cfg)
        assert main(["detect", path]) == EXIT_OK
        with open(os.path.join(outdir, "envelope.json")) as fh:
            results = json.load(fh)["results"]
        assert results["bracketed"] is False
        assert "not bracketed" in results.get("warning", "")


class TestEnvelope:
    def test_config_echo_round_trips(self, tmp_path):
        outdir = str(tmp_path / "out")
        cfg = base_config(outdir)
        path = write_config(tmp_path, cfg)
        assert main(["spectrum", path]) == EXIT_OK
        with open(os.path.join(outdir, "envelope.json")) as fh:
            envelope = json.load(fh)
        assert envelope["config"] == cfg
        assert envelope["provenance"]["config_sha256"] == config_digest(cfg)
        assert envelope["provenance"]["seed"] == cfg["seed"]
        assert envelope["engine"]["name"] == "forcemeter"
        # echo is itself a valid config (parse(emit(config)) = config)
        assert validate_config(envelope["config"]) == cfg

    def test_loaded_equals_validated(self, tmp_path):
        cfg = base_config(str(tmp_path / "out"))
        path = write_config(tmp_path, cfg)
        assert load_config(path) == cfg
