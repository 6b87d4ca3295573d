"""Static figures for benchmark output (rendered with the Agg backend).

Figures are saved without a Software/creation-date stamp so reruns produce
identical PNG bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .metrics import AXES  # noqa: E402

STYLE = {
    "figure.dpi": 100,
    "savefig.dpi": 120,
    "font.size": 8,
    "axes.labelsize": 8,
    "axes.titlesize": 9,
    "axes.linewidth": 0.6,
    "lines.linewidth": 0.8,
    "legend.fontsize": 7,
    "legend.frameon": False,
    "xtick.labelsize": 7,
    "ytick.labelsize": 7,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "attitude-fusion",
}

# fixed colours so an estimator keeps its colour across figures
COLORS = {
    "reference": "black",
    "lstm-inc": "tab:red",
    "lstm": "tab:blue",
    "ekf": "tab:green",
    "gyro": "tab:orange",
    "accelmag": "tab:purple",
}


def _color(name):
    return COLORS.get(name, "tab:gray")


def save(fig, path):
    fig.savefig(path, format="png", metadata={"Software": None})
    plt.close(fig)


def attitude_figure(t, reference, estimates, title=None):
    """Reference vs each estimator, one panel per axis (degrees)."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(3, 1, figsize=(7.0, 6.0), sharex=True)
        for i, (ax, name) in enumerate(zip(axes, AXES)):
            if reference is not None:
                ax.plot(t, np.degrees(reference[:, i]), color=_color("reference"), label="reference")
            for est_name, est in estimates.items():
                ax.plot(t, np.degrees(est[:, i]), color=_color(est_name), label=est_name, alpha=0.85)
            ax.set_ylabel(f"{name} [deg]")
        axes[0].legend(loc="upper right", ncol=len(estimates) + 1)
        axes[-1].set_xlabel("time [s]")
        if title:
            axes[0].set_title(title)
        fig.tight_layout()
    return fig


def rmse_figure(report, unwrapped=False):
    """Grouped bars of per-axis and average RMSE for every report row."""
    rows = list(report.rows)
    names = report.estimators
    x = np.arange(len(rows))
    width = 0.8 / max(len(names), 1)
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(2, 2, figsize=(8.0, 5.5), sharex=True)
        for k, (ax, label) in enumerate(zip(axes.ravel(), AXES + ("average",))):
            for j, name in enumerate(names):
                table = report.unwrapped if unwrapped else report.rows
                vals = [table[r][name].as_tuple()[k] for r in rows]
                ax.bar(x + (j - (len(names) - 1) / 2) * width, vals, width, color=_color(name), label=name)
            ax.set_title(label)
            ax.set_ylabel("RMSE [rad]")
            ax.set_xticks(x)
            ax.set_xticklabels(rows, rotation=30, ha="right")
        axes[0, 0].legend()
        fig.tight_layout()
    return fig


def loss_figure(losses, events=None):
    """Offline loss per epoch and, if given, pre/post loss of each update."""
    n = 2 if events else 1
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, n, figsize=(4.0 * n, 3.0), squeeze=False)
        ax = axes[0, 0]
        ax.semilogy(np.arange(1, len(losses) + 1), losses, marker="o", ms=2, color="tab:blue")
        ax.set_xlabel("epoch")
        ax.set_ylabel("training loss")
        if events:
            ax = axes[0, 1]
            idx = [e.sample_index for e in events]
            ax.semilogy(idx, [e.pre_loss for e in events], "o-", ms=2, color="tab:gray", label="before update")
            ax.semilogy(idx, [e.post_loss for e in events], "o-", ms=2, color="tab:red", label="after update")
            ax.set_xlabel("sample index")
            ax.set_ylabel("window loss")
            ax.legend()
        fig.tight_layout()
    return fig
