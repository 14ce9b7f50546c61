"""Figure rendering for the report-producing commands.

Figures are written straight to files through the Agg canvas; nothing
touches the pyplot state machine, so rendering is safe from worker threads.
"""

from __future__ import annotations

import io

import matplotlib as mpl
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .imageio import atomic_write_bytes

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "savefig.dpi": 120,
}
COLORS = ["#1b6ca8", "#d1495b", "#2e933c", "#edae49", "#6c4f77", "#00798c"]


def new_figure(width=4.8, height=3.4):
    with mpl.rc_context(STYLE):
        fig = Figure(figsize=(width, height))
        FigureCanvasAgg(fig)
        ax = fig.add_subplot(1, 1, 1)
    return fig, ax


def save_figure(fig, path) -> None:
    """Save as PNG without a timestamp so reruns give identical bytes."""
    buf = io.BytesIO()
    with mpl.rc_context(STYLE):
        fig.tight_layout()
        fig.savefig(buf, format="png", metadata={"Software": None})
    atomic_write_bytes(path, buf.getvalue())


def plot_spectra(profiles: dict, path, f_cutoff=None, title="Radially averaged power spectrum"):
    """Log-power curves of one or more ``SpectrumProfile`` objects."""
    fig, ax = new_figure()
    with mpl.rc_context(STYLE):
        for i, (label, prof) in enumerate(profiles.items()):
            power = np.maximum(prof.power, 1e-30)
            ax.semilogy(prof.freq, power, marker=".", color=COLORS[i % len(COLORS)], label=label)
        if f_cutoff is not None:
            ax.axvline(f_cutoff, color="0.3", ls="--", lw=1, label=f"f_cutoff = {f_cutoff:g}")
        ax.set_xlabel("radial frequency [cycles/pixel]")
        ax.set_ylabel("power")
        ax.set_title(title)
        ax.legend(loc="best", frameon=False)
    save_figure(fig, path)


def plot_eval(report, path, labels=("a", "b")):
    """Two stacked panels: both spectra, and their per-bin log gap."""
    with mpl.rc_context(STYLE):
        fig = Figure(figsize=(4.8, 5.2))
        FigureCanvasAgg(fig)
        top, bottom = fig.subplots(2, 1, sharex=True)
        top.semilogy(report.freq, np.maximum(report.power_a, report.floor), marker=".",
                     color=COLORS[0], label=labels[0])
        top.semilogy(report.freq, np.maximum(report.power_b, report.floor), marker=".",
                     color=COLORS[1], label=labels[1])
        top.set_ylabel("power")
        top.legend(frameon=False)
        top.set_title(f"log-spectral distance = {report.distance:.4g}")
        colors = [COLORS[2] if s else "0.7" for s in report.selected]
        width = 0.8 * (report.freq[1] - report.freq[0])
        bottom.bar(report.freq, report.gap, width=width, color=colors)
        bottom.axhline(0, color="0.2", lw=0.8)
        bottom.set_xlabel("radial frequency [cycles/pixel]")
        bottom.set_ylabel("ln P_a - ln P_b")
    save_figure(fig, path)


def plot_snr(schedule, p0, pT, f_cutoff, t_prime, path):
    """SNR at ``f_cutoff`` over the whole schedule with the chosen step marked."""
    a = schedule.alpha_bars[1:]
    t = np.arange(1, schedule.T + 1)
    snr = a * float(p0(f_cutoff)) / ((1.0 - a) * float(pT(f_cutoff)))
    fig, ax = new_figure()
    with mpl.rc_context(STYLE):
        ax.semilogy(t, snr, color=COLORS[0], label=f"SNR at f = {f_cutoff:g}")
        ax.axhline(1.0, color="0.3", ls=":", lw=1)
        ax.axvline(t_prime, color=COLORS[1], ls="--", lw=1, label=f"t' = {t_prime}")
        ax.set_xlabel("timestep t")
        ax.set_ylabel("signal-to-noise ratio")
        ax.legend(frameon=False)
    save_figure(fig, path)
