"""Figure rendering for the report path.

Every CLI analysis can emit a PNG next to its CSV (``output.plot`` or
``--plot``).  Figures are rendered headless through the Agg backend and
are presentation aids only; the CSV/JSON payload stays the source of
truth.
"""

from __future__ import annotations

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def plot_spectrum(result, sql_reference, path, title):
    """Force-referred budget with its components and the SQL reference."""
    plt = _pyplot()
    w = result.grid.samples
    mask = w > 0
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.loglog(w[mask], result.total[mask], "k-", lw=1.6, label="total")
    for name, color in (("shot", "tab:blue"), ("backaction", "tab:red"),
                        ("thermal", "tab:orange")):
        comp = result.component(name)[mask]
        if np.any(comp > 0):
            ax.loglog(w[mask], comp, color=color, lw=1.0, label=name)
    ref = np.asarray(sql_reference)[mask]
    if np.any(ref > 0):
        ax.loglog(w[mask], ref, "g--", lw=1.0, label="SQL reference")
    ax.set_xlabel("frequency (rad/s)")
    ax.set_ylabel("force-referred PSD (1/Hz)")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_sweep(values, s_n, argmin_index, variable, path, log_x=False):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    plot = ax.loglog if log_x and np.all(np.asarray(values) > 0) else ax.semilogy
    plot(values, s_n, "k.-", lw=1.0)
    ax.axvline(values[argmin_index], color="tab:red", ls="--", lw=1.0,
               label=f"minimum at {values[argmin_index]:.4g}")
    ax.set_xlabel(variable)
    ax.set_ylabel("force-referred PSD at signal frequency (1/Hz)")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_oracle(tables, path):
    """Empirical Welch estimates with error bands against the
    operator-algebra prediction, one panel per record channel."""
    plt = _pyplot()
    names = list(tables)
    ncol = 2 if len(names) > 1 else 1
    nrow = (len(names) + ncol - 1) // ncol
    fig, axes = plt.subplots(nrow, ncol, figsize=(6.0 * ncol, 3.2 * nrow),
                             squeeze=False)
    for k, name in enumerate(names):
        ax = axes[k // ncol][k % ncol]
        t = tables[name]
        ax.semilogy(t["omega"], t["analytic"], "k-", lw=1.2, label="analytic")
        ax.fill_between(
            t["omega"],
            np.maximum(t["empirical"] - 2 * t["stderr"], 1e-300),
            t["empirical"] + 2 * t["stderr"],
            color="tab:blue",
            alpha=0.35,
            label="Welch +/- 2 s.e.",
        )
        ax.set_title(name, fontsize=9)
        ax.set_xlabel("frequency (rad/s)")
        ax.grid(True, alpha=0.3)
        if k == 0:
            ax.legend(loc="best", fontsize=8)
    for k in range(len(names), nrow * ncol):
        axes[k // ncol][k % ncol].set_axis_off()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_detection(amplitudes, snr_values, analytic_threshold,
                   empirical_threshold, path):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(amplitudes, snr_values, "ko", label="empirical SNR")
    span = np.linspace(0, max(amplitudes.max(), analytic_threshold) * 1.1, 64)
    ax.plot(span, span / analytic_threshold, "g--", lw=1.0, label="analytic")
    if np.isfinite(empirical_threshold):
        ax.axvline(empirical_threshold, color="tab:red", ls=":",
                   label="empirical SNR = 1")
    ax.axhline(1.0, color="gray", lw=0.8)
    ax.set_xlabel("force amplitude (normalized)")
    ax.set_ylabel("SNR")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
