"""Trajectory figure rendering (SVG, non-interactive backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_trajectory_svg(traj, path, title: str | None = None) -> None:
    """Render state components, control inputs and the canonical norm versus
    time as stacked panels into one SVG file."""
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(8.0, 9.0))
    t = traj.times
    for i in range(traj.states.shape[1]):
        axes[0].plot(t, traj.states[:, i], label=f"$x_{{{i + 1}}}$", lw=1.0)
    axes[0].set_ylabel("states")
    axes[0].legend(loc="upper right", fontsize=8, ncol=2)
    for i in range(traj.inputs.shape[1]):
        axes[1].plot(t, traj.inputs[:, i], label=f"$u_{{{i + 1}}}$", lw=1.0)
    axes[1].set_ylabel("inputs")
    axes[1].legend(loc="upper right", fontsize=8)
    axes[2].plot(t, traj.vnorm, color="k", lw=1.2)
    axes[2].set_ylabel(r"$\|x\|_{\mathbf{d}}$")
    axes[2].set_xlabel("t [s]")
    for ax in axes:
        for ev in traj.events:
            if ev["kind"] == "switch":
                ax.axvline(ev["t"], color="gray", ls="--", lw=0.6, alpha=0.6)
        ax.grid(True, alpha=0.3)
    if title:
        axes[0].set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
