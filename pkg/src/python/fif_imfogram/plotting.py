"PNG rendering of decompositions and time-frequency grids (matplotlib, Agg backend)."
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .imfogram import periodogram  # noqa: E402


def plot_tfgrid(grid, path, *, title=None, log_scale=True):
    "Heat map with time on x and frequency on y."
    energy = grid.energy.T
    if log_scale:
        floor = energy[energy > 0].min() if np.any(energy > 0) else 1.0
        energy = np.log10(np.maximum(energy, floor))
    fig, ax = plt.subplots(figsize=(8, 4.5), dpi=120)
    mesh = ax.pcolormesh(grid.time_edges, grid.freq_edges, energy, shading="flat", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="log10 energy" if log_scale else "energy")
    ax.set_xlabel("time")
    ax.set_ylabel("frequency")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_decomposition(result, path, *, max_panels=8):
    "Signal, IMFs and remainder on the left; their periodograms on the right."
    pieces = [("signal", result.reconstruct())]
    pieces += [(f"IMF {r.index}", r.values) for r in result.imfs[:max_panels]]
    pieces.append(("remainder", result.remainder))

    fig, axes = plt.subplots(len(pieces), 2, figsize=(11, 1.6 * len(pieces)), dpi=120, squeeze=False)
    for (label, signal), (ax_t, ax_f) in zip(pieces, axes):
        ax_t.plot(signal.times(), signal.values, linewidth=0.7)
        ax_t.set_ylabel(label, fontsize=8)
        freqs, power = periodogram(signal)
        ax_f.plot(freqs, power, linewidth=0.7)
    axes[-1, 0].set_xlabel("time")
    axes[-1, 1].set_xlabel("frequency")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_decomposition_2d(result, path, *, max_panels=8):
    pieces = [("input", result.reconstruct())]
    pieces += [(f"IMF {r.index}", r.values) for r in result.imfs[:max_panels]]
    pieces.append(("remainder", result.remainder))

    fig, axes = plt.subplots(1, len(pieces), figsize=(2.6 * len(pieces), 2.8), dpi=120, squeeze=False)
    for (label, signal), ax in zip(pieces, axes[0]):
        ax.imshow(signal.values, cmap="gray", interpolation="nearest")
        ax.set_title(label, fontsize=8)
        ax.axis("off")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
