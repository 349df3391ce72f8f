"""Figure rendering for run reports.

Figures are a convenience view over the CSV output, written next to it.
Everything uses the Agg backend so headless runs work.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams.update({
    "figure.dpi": 110,
    "savefig.dpi": 150,
    "axes.grid": True,
    "grid.linestyle": ":",
    "font.size": 9,
})

_OBJECTIVE_LABELS = (
    ("ru", "Resource utilization"),
    ("phi", "Conflicting servers (%)"),
    ("theta", "Communication cost (%)"),
    ("pw", "Power (W)"),
)


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def render_convergence(histories: dict[int, list], path) -> Path:
    """Best objective values per generation, one line per seed."""
    fig, axes = plt.subplots(2, 2, figsize=(9, 6))
    for (attr, label), ax in zip(_OBJECTIVE_LABELS, axes.flat):
        for seed, history in sorted(histories.items()):
            xs = [h.generation for h in history]
            ys = [getattr(h.best, attr) for h in history]
            ax.plot(xs, ys, lw=1, alpha=0.8, label=f"seed {seed}")
        ax.set_xlabel("generation")
        ax.set_ylabel(label)
    if len(histories) <= 6:
        axes.flat[0].legend(fontsize=7)
    fig.suptitle("Search convergence")
    return _save(fig, path)


def render_front(objectives, path) -> Path:
    """Scatter the final front on utilization/power and security/network axes."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.scatter([o.ru for o in objectives], [o.pw for o in objectives], s=18)
    ax1.set_xlabel("resource utilization")
    ax1.set_ylabel("power (W)")
    ax2.scatter([o.phi for o in objectives], [o.theta for o in objectives], s=18)
    ax2.set_xlabel("conflicting servers (%)")
    ax2.set_ylabel("communication cost (%)")
    fig.suptitle("Final non-dominated front")
    return _save(fig, path)


def render_epochs(reports, path) -> Path:
    """Objective and migration trajectories over a dynamic run."""
    fig, (ax1, ax2, ax3) = plt.subplots(3, 1, figsize=(8, 8), sharex=True)
    xs = [r.epoch for r in reports]
    ax1.plot(xs, [r.objectives.ru for r in reports], label="RU", color="tab:blue")
    twin = ax1.twinx()
    twin.plot(xs, [r.objectives.pw for r in reports], label="power", color="tab:red")
    twin.grid(False)
    ax1.set_ylabel("RU")
    twin.set_ylabel("power (W)")
    ax2.plot(xs, [r.objectives.phi for r in reports], label="conflicting %")
    ax2.plot(xs, [r.objectives.theta for r in reports], label="comm cost %")
    ax2.set_ylabel("percent")
    ax2.legend(fontsize=7)
    ax3.bar(xs, [r.migrations for r in reports], width=0.8)
    ax3.set_ylabel("migrations")
    ax3.set_xlabel("epoch")
    fig.suptitle("Dynamic run")
    return _save(fig, path)


def render_compare(summaries: list[dict], path) -> Path:
    """Grouped bars: one panel per objective, one bar per strategy."""
    fig, axes = plt.subplots(2, 2, figsize=(9, 6))
    names = [s["strategy"] for s in summaries]
    keys = (
        ("ru_mean", "Resource utilization"),
        ("conflicting_pct_mean", "Conflicting servers (%)"),
        ("comm_cost_pct_mean", "Communication cost (%)"),
        ("power_w_mean", "Power (W)"),
    )
    for (key, label), ax in zip(keys, axes.flat):
        ax.bar(range(len(names)), [s[key] for s in summaries], width=0.6)
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=30, ha="right", fontsize=7)
        ax.set_ylabel(label)
    fig.suptitle("Strategy comparison")
    return _save(fig, path)
