"""Self-contained SVG figures.

Text is rendered as paths and the id salt and date are pinned, so the same
data always gives byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {"svg.fonttype": "path", "svg.hashsalt": "fxts", "font.size": 9}


def _save(fig, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)


def line_chart(path: Path, x, y, xlabel: str, ylabel: str, title: str = "") -> None:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(x, y, "o-")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        _save(fig, path)


def input_traces(path: Path, runs, label: str = "u_max") -> None:
    """|u(t)| for each run, colored from blue (first) to red (last)."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        colors = plt.cm.coolwarm(np.linspace(0, 1, max(len(runs), 2)))
        for color, (value, times, inputs) in zip(colors, runs):
            ax.plot(times, np.linalg.norm(np.atleast_2d(inputs), axis=1), color=color, lw=1, label=f"{label}={value:g}")
        ax.set_xlabel("t [s]")
        ax.set_ylabel("|u(t)|")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=6, ncol=2)
        fig.tight_layout()
        _save(fig, path)


def doa_circles(path: Path, r_m_list, radii) -> None:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4, 4))
        theta = np.linspace(0.0, 2.0 * np.pi, 361)
        for r_m, rad in zip(r_m_list, radii):
            ax.plot(rad * np.cos(theta), rad * np.sin(theta), lw=1, label=f"r_M={r_m:g}")
        ax.set_aspect("equal")
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=6)
        fig.tight_layout()
        _save(fig, path)


def trajectory_figure(path: Path, traj) -> None:
    with plt.rc_context(_RC):
        fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(5, 5), sharex=True)
        for i in range(traj.states.shape[1]):
            ax1.plot(traj.times, traj.states[:, i], lw=1, label=f"x{i + 1}")
        ax1.plot(traj.times, traj.h_values, "k--", lw=1, label="h_G")
        ax1.legend(fontsize=7)
        ax1.grid(True, alpha=0.3)
        for j in range(traj.inputs.shape[1]):
            ax2.plot(traj.times, traj.inputs[:, j], lw=1, label=f"u{j + 1}")
        ax2.set_xlabel("t [s]")
        ax2.legend(fontsize=7)
        ax2.grid(True, alpha=0.3)
        fig.tight_layout()
        _save(fig, path)
