"""Convergence figures for solver runs (file output only, no display)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .engine import RunReport  # noqa: E402


def plot_trace(report: RunReport, path: str, title: str | None = None) -> None:
    """Write the per-sweep belief change and, when tracked, the dual bound."""
    panels = 2 if report.lb_trace is not None else 1
    fig, axes = plt.subplots(panels, 1, figsize=(6, 2.6 * panels), sharex=True, squeeze=False)
    ax = axes[0, 0]
    sweeps = list(range(1, len(report.delta_trace) + 1))
    # zero deltas cannot sit on a log axis
    deltas = [max(d, 1e-300) for d in report.delta_trace]
    ax.semilogy(sweeps, deltas, marker=".", color="tab:blue")
    ax.set_ylabel("max belief change")
    ax.grid(True, which="both", alpha=0.3)
    if report.lb_trace is not None:
        ax2 = axes[1, 0]
        ax2.plot(range(len(report.lb_trace)), report.lb_trace, marker=".", color="tab:red")
        ax2.set_ylabel("lower bound")
        ax2.grid(True, alpha=0.3)
    axes[-1, 0].set_xlabel("sweep")
    fig.suptitle(title or f"{report.status.value} after {report.sweeps} sweeps")
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None} if str(path).endswith(".png") else None)
    plt.close(fig)
