"""Figures written next to the text reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .protocol import FIDELITY_TOL, BranchReport  # noqa: E402

FLOOR = 1e-17


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_checkpoints(report: BranchReport, path, title: str = "") -> None:
    """Bar chart of checkpoint fidelities along one branch."""
    names = [n for n, v in report.checkpoints.items() if v is not None]
    values = [report.checkpoints[n] for n in names]
    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.bar(names, values, color="tab:blue")
    ax.set_ylim(0, 1.05)
    ax.axhline(1.0, color="k", lw=0.8, ls="--")
    ax.set_ylabel("fidelity")
    ax.set_title(title or f"branch {report.bit_string}")
    _finish(fig, path)


def plot_branches(reports: list[BranchReport], path, title: str = "") -> None:
    """Final fidelity per branch (top) and worst checkpoint per branch (bottom)."""
    idx = np.array([r.index for r in reports])
    final = np.array([np.nan if r.fidelity_final is None else r.fidelity_final for r in reports])
    worst = np.array(
        [min((v for v in r.checkpoints.values() if v is not None), default=np.nan) for r in reports]
    )
    dead = np.array([not r.live for r in reports])
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 4.5), sharex=True)
    for ax, values, color, label in (
        (ax1, final, "tab:blue", "1 - final fidelity"),
        (ax2, worst, "tab:orange", "1 - worst checkpoint"),
    ):
        ax.semilogy(idx, np.maximum(1 - values, FLOOR), ".", ms=2, color=color)
        ax.axhline(FIDELITY_TOL, color="k", lw=0.8, ls="--", label="tolerance")
        ax.set_ylim(FLOOR / 2, 1)
        ax.set_ylabel(label)
        if dead.any():
            ax.plot(idx[dead], np.full(dead.sum(), 0.5), "x", color="tab:red", label="dead")
    ax1.legend(loc="upper right", fontsize="small")
    ax2.set_xlabel("branch index")
    ax1.set_title(title or f"{len(reports)} branches")
    _finish(fig, path)
