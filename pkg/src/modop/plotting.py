"""Figures for suite reports.

Residuals are shown as ratios to their thresholds on a log scale, so the
line at 1 is the pass/fail boundary for every invariant.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

FLOOR = 1e-18


def _log_ratio(x):
    return math.log10(max(x, FLOOR))


def _new_fig(width=8.0, height=None, rows=1):
    if height is None:
        height = max(3.0, 0.32 * rows + 1.5)
    fig, ax = plt.subplots(figsize=(width, height))
    return fig, ax


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_margins(report, path):
    """Per-suite spread of each trial's worst residual/threshold ratio."""
    names = [s["name"] for s in report.suites if report.margins.get(s["name"])]
    data = [[_log_ratio(m) for m in report.margins[n]] for n in names]
    fig, ax = _new_fig(rows=len(names))
    if data:
        ax.boxplot(data, orientation="horizontal", showfliers=True, flierprops={"markersize": 2})
        ax.set_yticks(range(1, len(names) + 1), names)
    ax.axvline(0.0, color="tab:red", lw=1, ls="--")
    ax.set_xlabel("log10(residual / threshold), worst check per trial")
    ax.set_title(f"seed {report.config['seed']}")
    return _save(fig, path)


def plot_worst_residuals(report, path):
    """Worst residual/threshold ratio for every named invariant."""
    labels, values, colors = [], [], []
    for i, s in enumerate(report.suites):
        for name, w in s["worst_residuals"].items():
            labels.append(f"{s['name']}: {name}")
            values.append(_log_ratio(w["ratio"]))
            colors.append(f"C{i % 10}")
    fig, ax = _new_fig(height=max(3.0, 0.18 * len(labels) + 1.0))
    ax.barh(range(len(values)), [v - math.log10(FLOOR) for v in values],
            left=math.log10(FLOOR), color=colors)
    ax.set_yticks(range(len(labels)), labels, fontsize=6)
    ax.invert_yaxis()
    ax.axvline(0.0, color="tab:red", lw=1, ls="--")
    ax.set_xlabel("log10(worst residual / threshold)")
    return _save(fig, path)


def plot_outcomes(report, path):
    names = [s["name"] for s in report.suites]
    fig, ax = _new_fig(rows=len(names))
    left = [0] * len(names)
    for key, color in (("pass", "tab:green"), ("indeterminate", "tab:orange"), ("fail", "tab:red")):
        counts = [s[key] for s in report.suites]
        ax.barh(names, counts, left=left, color=color, label=key)
        left = [a + b for a, b in zip(left, counts)]
    ax.invert_yaxis()
    ax.set_xlabel("trials")
    ax.legend(loc="lower right", fontsize=8)
    return _save(fig, path)


def render_report_figures(report, directory):
    directory = Path(directory)
    return [
        plot_outcomes(report, directory / "outcomes.png"),
        plot_margins(report, directory / "margins.png"),
        plot_worst_residuals(report, directory / "worst_residuals.png"),
    ]
