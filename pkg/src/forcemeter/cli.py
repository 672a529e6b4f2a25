"""Command-line entry point.

One scenario per invocation::

    forcemeter validate  config.json
    forcemeter spectrum  config.json [--plot]
    forcemeter sweep     config.json [--plot]
    forcemeter oracle    config.json [--plot]
    forcemeter detect    config.json [--plot]

Exit codes: 0 success, 2 invalid configuration, 3 numeric/singularity
failure, 4 I/O failure.  All outputs land in ``output.directory`` as
CSV tables plus ``envelope.json``; reruns with the same configuration
and seed are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, io
from .algebra import FrequencyGrid
from .budget import (
    force_referred_psd,
    resonant_sql_reference,
    sql_force,
)
from .errors import ConfigError, EngineError
from .oracle import (
    OracleConfig,
    analytic_record_psd,
    detection_mc,
    postprocess_subtraction,
    simulate,
    welch_psd,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _analysis_block(cfg, name):
    block = cfg["analysis"].get(name)
    if block is None:
        raise ConfigError(f"config has no 'analysis.{name}' block")
    return block


def _angle_arg(block):
    angle = block.get("homodyne_angle")
    return angle if angle is not None else np.pi / 2


def _sql_reference(scheme):
    """SQL reference column: the optimal-strength floor in the scheme's
    own frequency band (laboratory frame directly; for rotating frames
    the resonant-force convention at w_m + |W|)."""
    if scheme.kind == "monochromatic":
        osc = scheme.osc
        n_occ = scheme.n_occ if np.isscalar(scheme.n_occ) else 0.0
        return np.array(
            [sql_force(osc, abs(w), n_occ) if w != 0 else sql_force(osc, 0.0, n_occ)
             for w in scheme.grid.samples]
        )
    return resonant_sql_reference(scheme.osc, scheme.grid.samples)


def _gamma_units(scheme, omega):
    gm = scheme.osc.gamma_m
    return omega / gm if gm > 0 else np.full_like(omega, np.nan)


def run_spectrum(cfg, outdir, plot=False):
    block = _analysis_block(cfg, "spectrum")
    scheme = io.scheme_from_config(
        cfg,
        angle=_angle_arg(block) if cfg["scheme"] == "monochromatic" else None,
        thermal_coupling=block.get("thermal_coupling"),
    )
    result = force_referred_psd(scheme, block["observable"])
    sql_ref = _sql_reference(scheme)
    omega = scheme.grid.samples
    csv_path = os.path.join(outdir, "spectrum.csv")
    io.write_csv(
        csv_path,
        {
            "omega_rad_s": omega,
            "omega_per_gamma": _gamma_units(scheme, omega),
            "total": result.total,
            "shot": result.shot,
            "backaction": result.backaction,
            "thermal": result.thermal,
            "sql_reference": sql_ref,
        },
    )
    results = {
        "observable": block["observable"],
        "strength": scheme.strength,
        "min_total": float(result.total.min()),
        "argmin_omega": float(omega[int(np.argmin(result.total))]),
        "backaction_max": float(result.backaction.max()),
    }
    if "signal_omega" in block:
        j = scheme.grid.index_of(block["signal_omega"])
        results["total_at_signal_omega"] = float(result.total[j])
    files = {"spectrum_csv": os.path.basename(csv_path)}
    if plot:
        from .plotting import plot_spectrum

        fig_path = os.path.join(outdir, "spectrum.png")
        plot_spectrum(result, sql_ref, fig_path,
                      f"{cfg['scheme']} / {block['observable']}")
        files["spectrum_png"] = os.path.basename(fig_path)
    return results, files


def _sweep_values(block):
    points = block["points"]
    if points == 1:
        return np.array([block["start"]], dtype=float)
    if block.get("log", False):
        if block["start"] <= 0 or block["stop"] <= 0:
            raise ConfigError("log sweep needs positive bounds")
        return np.geomspace(block["start"], block["stop"], points)
    if block["start"] >= block["stop"]:
        raise ConfigError("sweep needs start < stop")
    return np.linspace(block["start"], block["stop"], points)


def run_sweep(cfg, outdir, plot=False):
    block = _analysis_block(cfg, "sweep")
    variable = block["variable"]
    values = _sweep_values(block)
    w_signal = block["signal_omega"]
    mono = cfg["scheme"] == "monochromatic"

    def evaluate(value):
        angle = _angle_arg(block) if mono else None
        strength = None
        n_occ = None
        w_eval = w_signal
        if variable == "strength":
            strength = value
        elif variable == "angle":
            angle = value
        elif variable == "n_occ":
            if value < 0:
                raise ConfigError("n_occ sweep reached a negative value")
            n_occ = value
        else:
            w_eval = value
        band = "absolute" if mono else "baseband"
        grid = FrequencyGrid.from_positive([w_eval], band=band, include_zero=False)
        scheme = io.scheme_from_config(
            cfg, grid=grid, angle=angle, strength_override=strength,
            n_occ_override=n_occ,
        )
        result = force_referred_psd(scheme, block["observable"])
        return result.total[grid.index_of(w_eval)]

    s_n = np.array([evaluate(v) for v in values])
    argmin = int(np.argmin(s_n))
    marker = np.zeros(values.size, dtype=int)
    marker[argmin] = 1
    csv_path = os.path.join(outdir, "sweep.csv")
    io.write_csv(csv_path, {variable: values, "s_n": s_n, "is_min": marker})
    results = {
        "variable": variable,
        "argmin_value": float(values[argmin]),
        "min_s_n": float(s_n[argmin]),
        "monotone_decreasing": bool(np.all(np.diff(s_n) < 0)),
    }
    files = {"sweep_csv": os.path.basename(csv_path)}
    if plot:
        from .plotting import plot_sweep

        fig_path = os.path.join(outdir, "sweep.png")
        plot_sweep(values, s_n, argmin, variable, fig_path,
                   log_x=block.get("log", False))
        files["sweep_png"] = os.path.basename(fig_path)
    return results, files


def run_oracle(cfg, outdir, plot=False):
    block = _analysis_block(cfg, "oracle")
    angle = block.get("homodyne_angle", np.pi / 2)
    scheme = io.scheme_from_config(
        cfg,
        angle=angle if cfg["scheme"] == "monochromatic" else None,
        thermal_coupling="flat" if cfg["scheme"] == "monochromatic" else None,
    )
    welch = block.get("welch", {})
    nperseg = welch.get("nperseg", 2048)
    oracle_cfg = OracleConfig(
        scheme=scheme,
        dt=block["dt"],
        duration=block["duration"],
        seed=cfg["seed"],
        trajectories=block["trajectories"],
        welch_nperseg=nperseg,
        welch_overlap=welch.get("overlap", 0.5),
        welch_window=welch.get("window", "hann"),
    )
    record = simulate(oracle_cfg)
    if scheme.kind != "monochromatic":
        record = postprocess_subtraction(record)

    export_manifest = None
    if "save_records" in block:
        from .oracle import export_records

        fmt = block["save_records"]
        records_path = os.path.join(outdir, f"records.{fmt}")
        export_manifest = export_records(record, records_path, fmt=fmt)

    band_max = cfg["grid"]["max"]
    tables = {}
    rows_channel, rows_omega, rows_emp, rows_err, rows_ana = [], [], [], [], []
    rms = {}
    segments = None
    for name in sorted(record.channels):
        est = welch_psd(record, name, nperseg=oracle_cfg.welch_nperseg,
                        overlap=oracle_cfg.welch_overlap,
                        window=oracle_cfg.welch_window)
        segments = est.segments
        keep = (est.omega > 0) & (est.omega <= band_max)
        omega = est.omega[keep]
        analytic = analytic_record_psd(record, name, omega)
        empirical = est.values[keep]
        stderr = est.stderr[keep]
        tables[name] = {
            "omega": omega, "empirical": empirical,
            "stderr": stderr, "analytic": analytic,
        }
        lo, hi = int(0.1 * omega.size), int(0.9 * omega.size)
        rel = empirical[lo:hi] / analytic[lo:hi] - 1
        rms[name] = float(np.sqrt(np.mean(rel**2)))
        rows_channel.append(np.full(omega.size, name, dtype=object))
        rows_omega.append(omega)
        rows_emp.append(empirical)
        rows_err.append(stderr)
        rows_ana.append(analytic)

    csv_path = os.path.join(outdir, "oracle.csv")
    names = np.concatenate(rows_channel)
    io.write_csv(
        csv_path,
        {
            "channel": names,
            "omega_rad_s": np.concatenate(rows_omega),
            "omega_per_gamma": _gamma_units(scheme, np.concatenate(rows_omega)),
            "empirical": np.concatenate(rows_emp),
            "stderr": np.concatenate(rows_err),
            "analytic": np.concatenate(rows_ana),
        },
    )
    results = {
        "rms_agreement": rms,
        "rms_worst": max(rms.values()),
        "segments_effective": segments,
    }
    files = {"oracle_csv": os.path.basename(csv_path)}
    if export_manifest is not None:
        results["records"] = export_manifest
        files["records"] = f"records.{export_manifest['format']}"
    if plot:
        from .plotting import plot_oracle

        fig_path = os.path.join(outdir, "oracle.png")
        plot_oracle(tables, fig_path)
        files["oracle_png"] = os.path.basename(fig_path)
    return results, files


def run_detect(cfg, outdir, plot=False):
    block = _analysis_block(cfg, "detect")
    scheme = io.scheme_from_config(
        cfg,
        angle=block.get("homodyne_angle", np.pi / 2)
        if cfg["scheme"] == "monochromatic"
        else None,
        thermal_coupling="flat" if cfg["scheme"] == "monochromatic" else None,
    )
    oracle_cfg = OracleConfig(
        scheme=scheme,
        dt=block["dt"],
        duration=block["tau"],
        seed=cfg["seed"],
        welch_nperseg=8,
        signal_omega=block["signal_omega"],
    )
    result = detection_mc(oracle_cfg, np.asarray(block["amplitudes"], float),
                          trials=block["trials"])
    analytic = result.amplitudes / result.analytic_threshold
    csv_path = os.path.join(outdir, "detect.csv")
    io.write_csv(
        csv_path,
        {
            "amplitude": result.amplitudes,
            "snr_empirical": result.snr,
            "snr_analytic": analytic,
            "estimate_mean": result.estimates_mean,
            "estimate_std": result.estimates_std,
        },
    )
    results = {
        "empirical_threshold": float(result.empirical_threshold),
        "analytic_threshold": float(result.analytic_threshold),
        "threshold_ratio": float(result.ratio),
        "bracketed": result.bracketed,
        "s_n_at_signal": float(result.s_n),
        "trials": result.trials,
    }
    if not result.bracketed:
        results["warning"] = "threshold not bracketed by the amplitude grid"
    files = {"detect_csv": os.path.basename(csv_path)}
    if plot:
        from .plotting import plot_detection

        fig_path = os.path.join(outdir, "detect.png")
        plot_detection(result.amplitudes, result.snr, result.analytic_threshold,
                       result.empirical_threshold, fig_path)
        files["detect_png"] = os.path.basename(fig_path)
    return results, files


_RUNNERS = {
    "spectrum": run_spectrum,
    "sweep": run_sweep,
    "oracle": run_oracle,
    "detect": run_detect,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="forcemeter",
        description="Quantum noise budgets for optomechanical force measurement.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("validate", *_RUNNERS):
        p = sub.add_parser(name)
        p.add_argument("config", help="scenario JSON file")
        if name != "validate":
            p.add_argument("--plot", action="store_true",
                           help="also render a PNG figure next to the CSV")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = io.load_config(args.config)
        if args.command == "validate":
            print("configuration valid")
            return EXIT_OK
        outdir = cfg["output"]["directory"]
        plot = cfg["output"].get("plot", False) or args.plot
        results, files = _RUNNERS[args.command](cfg, outdir, plot=plot)
        envelope_path = os.path.join(outdir, "envelope.json")
        io.write_envelope(envelope_path, args.command, cfg, results, files)
        print(json.dumps({"command": args.command, "results": results},
                         sort_keys=True))
        return EXIT_OK
    except ConfigError as exc:
        print(json.dumps({"error": "config", "detail": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(json.dumps({"error": "io", "detail": str(exc)}), file=sys.stderr)
        return EXIT_IO
    except EngineError as exc:
        print(
            json.dumps({"error": type(exc).__name__, "detail": str(exc)}),
            file=sys.stderr,
        )
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
