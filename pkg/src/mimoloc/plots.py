"""Figure rendering for the report path.

Each function writes one PNG next to the corresponding CSV so a run leaves
both machine-readable and eyeball-ready artifacts. Uses the Agg backend;
nothing here opens a window.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_METHOD_STYLE = {
    "fused": dict(color="tab:red", lw=2.0),
    "cov": dict(color="tab:blue", lw=1.4),
    "cir": dict(color="tab:green", lw=1.4),
    "raw": dict(color="tab:gray", lw=1.4),
}


def save_cdf_figure(path, cdf_tables: dict, wavelength: float | None = None):
    """Error CDFs for every method on one set of axes."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for name, table in cdf_tables.items():
        style = _METHOD_STYLE.get(name, {})
        ax.plot(table[:, 0], table[:, 1], label=name, **style)
    if wavelength is not None:
        ax.axvline(wavelength, color="k", ls=":", lw=1.0, label="wavelength")
    ax.set_xlabel("positioning error [m]")
    ax.set_ylabel("cumulative fraction")
    ax.set_ylim(0.0, 1.0)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_loss_figure(path, histories: dict):
    """Training loss per epoch, one curve per network, log scale."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for name, history in histories.items():
        style = _METHOD_STYLE.get(name, {})
        ax.semilogy(range(len(history)), history, label=name, **style)
    ax.set_xlabel("epoch")
    ax.set_ylabel("training loss")
    ax.grid(True, alpha=0.3, which="both")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_spatialcorr_figure(path, rows, wavelength: float):
    """|rho| against separation in wavelengths."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    xs = [d / wavelength for d, _ in rows]
    ys = [r for _, r in rows]
    ax.plot(xs, ys, marker="o", ms=3.5, color="tab:blue")
    ax.set_xlabel("separation [wavelengths]")
    ax.set_ylabel("|spatial correlation|")
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
