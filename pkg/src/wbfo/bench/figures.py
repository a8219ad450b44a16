"""PNG renderings of the plot-data tables (headless backend)."""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _by_algorithm(summary):
    out = {}
    for s in summary:
        out.setdefault(s["algorithm"], []).append(s)
    for rows in out.values():
        rows.sort(key=lambda s: s["n_samples"])
    return out


def _bars(ax, summary, value, err=None):
    labels = [f"{s['algorithm']}\nN={s['n_samples']}" for s in summary]
    heights = [s[value] for s in summary]
    yerr = [s[err] for s in summary] if err else None
    ax.bar(range(len(summary)), heights, yerr=yerr, capsize=3, color="tab:blue")
    ax.set_xticks(range(len(summary)))
    ax.set_xticklabels(labels, fontsize=7)


def render(summary, outdir, title=""):
    """Write cost-vs-N, success-rate and steps figures; returns the paths."""
    if not summary:
        return []
    os.makedirs(outdir, exist_ok=True)
    paths = []

    fig, ax = plt.subplots(figsize=(5, 3.5))
    for algo, rows in _by_algorithm(summary).items():
        n = [s["n_samples"] for s in rows]
        m = [s["objective_mean"] for s in rows]
        sd = [s["objective_std"] for s in rows]
        ax.plot(n, m, marker="o", label=algo)
        ax.fill_between(n, [a - b for a, b in zip(m, sd)], [a + b for a, b in zip(m, sd)], alpha=0.2)
    ax.set_xlabel("samples N")
    ax.set_ylabel("final cost J")
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    paths.append(os.path.join(outdir, "cost_vs_samples.png"))
    fig.savefig(paths[-1], dpi=100)
    plt.close(fig)

    for name, value, err, ylabel in (
        ("success_rate.png", "success_rate", None, "success rate"),
        ("steps_to_completion.png", "steps_mean", "steps_std", "steps"),
    ):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        _bars(ax, summary, value, err)
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        fig.tight_layout()
        paths.append(os.path.join(outdir, name))
        fig.savefig(paths[-1], dpi=100)
        plt.close(fig)
    return paths
