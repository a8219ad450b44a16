"""Command line entry point: ``run``, ``compare`` and ``sweep``."""

import argparse
import logging
import os
import sys

from ..errors import ConfigurationError
from . import config as cfgmod
from . import export, figures
from .runner import resolved_flat, run_battery


def _csv_list(text, cast=str):
    return [cast(part.strip()) for part in text.split(",") if part.strip()]


def _parser():
    p = argparse.ArgumentParser(prog="wbfo-bench", description="Seeded trajectory-optimization benchmarks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", help="experiment file (key = value lines)")
        sp.add_argument("--seed", type=int, help="base seed (overrides experiment.base_seed/seeds)")
        sp.add_argument("--trials", type=int, help="number of seeds")
        sp.add_argument("--workers", type=int, default=1, help="concurrent trials")
        sp.add_argument("--output-dir", help="results directory (overrides experiment.output_dir)")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config entry (repeatable)")

    common(sub.add_parser("run", help="execute the configured battery"))
    sp = sub.add_parser("compare", help="paired battery over several algorithms")
    common(sp)
    sp.add_argument("--algorithms", required=True, help="comma list, e.g. wbfo,avwbfo,mppi")
    sp = sub.add_parser("sweep", help="battery over sample counts")
    common(sp)
    sp.add_argument("--samples", required=True, help="comma list, e.g. 5,10,20,50,100")
    sp.add_argument("--algorithms", help="comma list (default: configured)")
    return p


def _apply_overrides(flat, args):
    flat = dict(flat)
    for item in args.set:
        flat.update(cfgmod.parse_text(item, "--set"))
    if args.seed is not None:
        flat.pop("experiment.seeds", None)
        flat["experiment.base_seed"] = args.seed
    if args.trials is not None:
        flat.pop("experiment.seeds", None)
        flat["experiment.trials"] = args.trials
    if args.output_dir:
        flat["experiment.output_dir"] = args.output_dir
    return flat


def write_outputs(cfg, results, algorithms, sweep, outdir):
    """Write every result file for a finished battery; returns the summary."""
    os.makedirs(outdir, exist_ok=True)
    rows = [r.row for r in results]
    summary = export.summarize(rows)
    export.write_trials(os.path.join(outdir, "trials.csv"), rows)
    export.write_summary(os.path.join(outdir, "summary.csv"), summary)
    export.write_csv(
        os.path.join(outdir, "timing.csv"),
        ("algorithm", "n_samples", "seed", "wall_time"),
        ((r.row["algorithm"], r.row["n_samples"], r.row["seed"], r.wall_time) for r in results),
    )
    export.export_plotdata(rows, os.path.join(outdir, "plotdata"))
    with open(os.path.join(outdir, "manifest.cfg"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(cfgmod.dump(resolved_flat(cfg, algorithms, sweep)))
    if cfg.experiment["replays"]:
        env_cls = cfgmod.ENV_KINDS[cfg.env_kind][1]
        header = export.replay_header(env_cls.state_dim, env_cls.control_dim)
        for r in results:
            if r.replay:
                path = os.path.join(outdir, "replays", export.trial_stem(r.row) + ".csv")
                export.write_csv(path, header, r.replay)
    if cfg.experiment["export_scores"]:
        for r in results:
            if r.scores:
                path = os.path.join(outdir, "scores", export.trial_stem(r.row) + ".csv")
                export.write_csv(path, export.SCORE_FIELDS, r.scores)
    if cfg.experiment["figures"]:
        figures.render(summary, os.path.join(outdir, "figures"), cfg.experiment["id"])
    return summary


def _ordering(summary):
    lines = []
    for n in sorted({s["n_samples"] for s in summary}):
        group = sorted((s for s in summary if s["n_samples"] == n), key=lambda s: s["objective_mean"])
        lines.append(f"N={n}: " + " < ".join(f"{s['algorithm']}({s['objective_mean']:.4g})" for s in group))
    return lines


def _print_summary(summary, out):
    cols = ("algorithm", "n_samples", "trials", "objective_mean", "objective_std",
            "success_rate", "steps_mean", "win_rate")
    out.write("|".join(cols) + "\n")
    for s in summary:
        out.write("|".join(export.fmt(round(s[c], 6) if isinstance(s[c], float) else s[c]) for c in cols) + "\n")


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        flat = _apply_overrides(cfgmod.load(args.config), args)
        cfg = cfgmod.build(flat)
        algorithms = cfg.algorithms
        sweep = cfg.sample_sweep
        if args.command in ("compare", "sweep") and args.algorithms:
            algorithms = _csv_list(args.algorithms)
        if args.command == "sweep":
            sweep = _csv_list(args.samples, int)
        if args.workers < 1:
            raise ConfigurationError("must be >= 1", key="--workers")
        cfg, results = run_battery(flat, algorithms, sweep, args.workers)
    except ConfigurationError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    outdir = cfg.experiment["output_dir"]
    summary = write_outputs(cfg, results, algorithms, sweep, outdir)
    _print_summary(summary, sys.stdout)
    if args.command == "compare":
        for line in _ordering(summary):
            print(line)
    faults = sum(1 for r in results if r.row["fault"])
    if faults:
        print(f"{faults} trial(s) flagged with faults", file=sys.stderr)
    print(f"wrote {len(results)} rows to {outdir}", file=sys.stderr)
    return 0
