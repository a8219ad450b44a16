"""CSV outputs: trial rows, aggregates, plot data, replays and score exports."""

import csv
import logging
import math
import os
from collections import defaultdict

import numpy as np

from .runner import ROW_FIELDS

log = logging.getLogger(__name__)

SUMMARY_FIELDS = (
    "experiment", "algorithm", "n_samples", "trials", "objective_mean", "objective_std",
    "success_rate", "steps_mean", "steps_std", "mean_reward", "win_rate",
)
SCORE_FIELDS = ("step", "iteration", "dim", "node", "prior", "delta", "sigma")


def fmt(value):
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def _groups(rows):
    groups = defaultdict(list)
    order = []
    for row in rows:
        key = (row["algorithm"], int(row["n_samples"]))
        if key not in groups:
            order.append(key)
        groups[key].append(row)
    return order, groups


def win_rates(rows):
    """Paired win rate of each (algorithm, N): a win is a strictly lower final
    objective than another algorithm on the same seed, a tie counts one half."""
    by_seed = defaultdict(dict)
    for i, row in enumerate(rows):
        by_seed[(int(row["n_samples"]), int(row["seed"]))][i] = float(row["final_objective"])
    score = defaultdict(float)
    count = defaultdict(int)
    for i, row in enumerate(rows):
        key = (row["algorithm"], int(row["n_samples"]))
        mine = float(row["final_objective"])
        for j, other in by_seed[(int(row["n_samples"]), int(row["seed"]))].items():
            if j == i:
                continue
            count[key] += 1
            if mine < other:
                score[key] += 1.0
            elif mine == other:
                score[key] += 0.5
    return {k: score[k] / count[k] for k in count}


def summarize(rows):
    """Aggregate rows per (algorithm, N); std is the population std over seeds."""
    order, groups = _groups(rows)
    wins = win_rates(rows)
    out = []
    for key in order:
        g = groups[key]
        obj = np.array([float(r["final_objective"]) for r in g])
        steps = np.array([float(r["steps"]) for r in g])
        succ = np.array([float(r["success"]) for r in g])
        mean_r = np.array([float(r["mean_reward"]) for r in g])
        out.append({
            "experiment": g[0]["experiment"],
            "algorithm": key[0],
            "n_samples": key[1],
            "trials": len(g),
            "objective_mean": float(obj.mean()),
            "objective_std": float(obj.std()),
            "success_rate": float(succ.mean()),
            "steps_mean": float(steps.mean()),
            "steps_std": float(steps.std()),
            "mean_reward": float(mean_r.mean()),
            "win_rate": wins.get(key, float("nan")),
        })
    return out


def write_trials(path, rows):
    write_csv(path, ROW_FIELDS, ([r[f] for f in ROW_FIELDS] for r in rows))


def write_summary(path, summary):
    write_csv(path, SUMMARY_FIELDS, ([s[f] for f in SUMMARY_FIELDS] for s in summary))


def export_plotdata(rows, outdir):
    """Per-figure columnar files: cost-vs-N with std bands, success rates and
    steps-to-completion.  Returns the written paths (empty for no rows)."""
    if not rows:
        log.warning("empty result table; no plot data written")
        return []
    summary = summarize(rows)
    paths = {
        "cost": os.path.join(outdir, "cost_vs_samples.csv"),
        "success": os.path.join(outdir, "success_rate.csv"),
        "steps": os.path.join(outdir, "steps_to_completion.csv"),
    }
    write_csv(
        paths["cost"],
        ("algorithm", "n_samples", "mean", "std", "lower", "upper"),
        (
            (s["algorithm"], s["n_samples"], s["objective_mean"], s["objective_std"],
             s["objective_mean"] - s["objective_std"], s["objective_mean"] + s["objective_std"])
            for s in summary
        ),
    )
    write_csv(
        paths["success"],
        ("algorithm", "n_samples", "success_rate"),
        ((s["algorithm"], s["n_samples"], s["success_rate"]) for s in summary),
    )
    write_csv(
        paths["steps"],
        ("algorithm", "n_samples", "steps_mean", "steps_std"),
        ((s["algorithm"], s["n_samples"], s["steps_mean"], s["steps_std"]) for s in summary),
    )
    return list(paths.values())


def replay_header(state_dim, control_dim):
    return (
        ["k"] + [f"x{i}" for i in range(state_dim)] + [f"u{i}" for i in range(control_dim)]
        + ["reward", "task", "obstacle", "control"]
    )


def trial_stem(row):
    label = row["algorithm"].replace("+", "_ws").replace("-", "_nows")
    return f"{row['experiment']}_{label}_N{row['n_samples']}_s{row['seed']}"
