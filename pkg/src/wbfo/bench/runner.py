"""Seeded trial batteries over algorithms, sample counts and seeds."""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .. import __version__
from ..envs import make_env, rollout, total_cost
from ..errors import EvaluationError, SimulationFault
from ..optim import AVWBFO, optimize
from ..planner import plan_episode, run_policy_episode, warm_start_init
from ..policies import make_policy
from ..spline import build_basis, nodes_to_dense
from . import config as cfgmod

log = logging.getLogger(__name__)

ROW_FIELDS = (
    "experiment", "algorithm", "n_samples", "seed", "final_objective",
    "success", "steps", "mean_reward", "fault",
)


@dataclass
class TrialResult:
    row: dict
    wall_time: float
    replay: list = field(default_factory=list)
    scores: list = field(default_factory=list)


def _optimizer_for(cfg, algo, n_samples):
    gamma = cfg.opt.gamma
    if algo == AVWBFO and gamma == 0.0:
        gamma = 1.0
    return replace(cfg.opt, algorithm=algo, n_samples=int(n_samples), gamma=gamma)


def _replay_rows(states, controls, rewards, terms):
    rows = []
    for k in range(len(rewards)):
        x = np.asarray(states[k], dtype=float)
        u = np.asarray(controls[k], dtype=float)
        t = terms[k]
        rows.append([k, *x.tolist(), *u.tolist(), float(rewards[k]), *t])
    return rows


def _score_rows(step, iteration, prior, score):
    D, K = prior.shape
    return [
        [step, iteration, d, k, float(prior[d, k]), float(score.delta[d, k]), float(score.sigma_used[k])]
        for d in range(D)
        for k in range(K)
    ]


def _first_success(env, xs, radius):
    for k, x in enumerate(xs):
        state = type(env.reset())(x)
        if env.success(state, radius):
            return k, True
    return len(xs) - 1, False


def _run_optimize(cfg, env, algo, warm, n_samples, seed, want_scores):
    basis = build_basis(cfg.nodes, cfg.dense)
    start = env.reset()
    opt = _optimizer_for(cfg, algo, n_samples)
    if warm:
        prior = warm_start_init(make_policy(cfg.experiment["policy"], env), env, start, basis)
    else:
        prior = np.zeros((env.control_dim, cfg.nodes))
    scores = []

    def record(it, nodes, score):
        if want_scores:
            scores.extend(_score_rows(0, it, nodes - score.delta, score))

    def evaluator(dense):
        return rollout(env, start, dense).rewards

    nodes, _ = optimize(prior, basis, cfg.noise, evaluator, opt, key=(seed,), callback=record)
    dense = nodes_to_dense(nodes, basis)
    batch = rollout(env, start, dense[None])
    rewards = batch.rewards[0]
    steps, success = _first_success(env, batch.states[0], cfg.planner.success_radius)
    objective = float(total_cost(rewards, opt.alpha, env.dt))
    replay = _replay_rows(batch.states[0], dense.T, rewards, batch.terms[0].tolist())
    fault = "fault" if batch.faulted[0] else ""
    return objective, success, steps, float(rewards.mean()), fault, replay, scores


def _run_plan(cfg, env, algo, warm, n_samples, seed, want_scores):
    planner = cfg.planner
    if algo == "policy":
        policy = make_policy(cfg.experiment["policy"], env)
        result = run_policy_episode(env, policy, planner.max_steps, planner.success_radius)
        opt_alpha = cfg.opt.alpha
    else:
        if warm is not None:
            planner = replace(planner, warm_start=cfg.experiment["policy"] if warm else "none")
        opt = _optimizer_for(cfg, algo, n_samples)
        opt_alpha = opt.alpha
        result = plan_episode(env, planner, opt, cfg.noise, seed=seed, record_scores=want_scores)
    rewards = np.asarray(result.rewards, dtype=float)
    objective = float(total_cost(rewards, opt_alpha, env.dt)) if rewards.size else 0.0
    terms = [[t.task, t.obstacle, t.control] for t in result.terms]
    n = min(len(terms), len(result.controls))
    replay = _replay_rows(result.states, result.controls[:n], rewards[:n], terms[:n])
    scores = []
    for step, it, prior, score in result.scores:
        scores.extend(_score_rows(step, it, prior, score))
    return objective, result.success, result.steps, result.mean_reward, result.fault, replay, scores


def run_trial(flat, label, n_samples, seed):
    """Run one (algorithm, N, seed) trial; ``flat`` is the raw config mapping."""
    cfg = cfgmod.build(flat)
    algo, warm = cfgmod.parse_variant(label)
    want_scores = bool(cfg.experiment["export_scores"])
    t0 = time.perf_counter()
    try:
        env = make_env(cfg.env_kind, cfg.env, seed)
        run = _run_plan if cfg.experiment["mode"] == "plan" else _run_optimize
        objective, success, steps, mean_reward, fault, replay, scores = run(
            cfg, env, algo, warm, n_samples, seed, want_scores
        )
    except (SimulationFault, EvaluationError) as exc:
        log.warning("trial %s N=%s seed=%s faulted: %s", label, n_samples, seed, exc)
        objective, success, steps, mean_reward, fault, replay, scores = (
            float("nan"), False, 0, float("nan"), str(exc), [], [],
        )
    wall = time.perf_counter() - t0
    row = {
        "experiment": cfg.experiment["id"],
        "algorithm": label,
        "n_samples": int(n_samples),
        "seed": int(seed),
        "final_objective": objective,
        "success": int(bool(success)),
        "steps": int(steps),
        "mean_reward": float(mean_reward),
        "fault": fault,
    }
    return TrialResult(row, wall, replay, scores)


def trial_grid(cfg, algorithms=None, sweep=None):
    algorithms = algorithms or cfg.algorithms
    sweep = sweep or cfg.sample_sweep
    return [(a, n, s) for a in algorithms for n in sweep for s in cfg.seeds]


def run_battery(flat, algorithms=None, sweep=None, workers=1):
    """Execute every (algorithm x sweep point x seed) trial, in a fixed order."""
    cfg = cfgmod.build(flat)
    grid = trial_grid(cfg, algorithms, sweep)
    for label, _, _ in grid:
        cfgmod.parse_variant(label)
    if workers > 1 and len(grid) > 1:
        with ProcessPoolExecutor(workers) as pool:
            futures = [pool.submit(run_trial, flat, *g) for g in grid]
            results = [f.result() for f in futures]
    else:
        results = [run_trial(flat, *g) for g in grid]
    return cfg, results


def resolved_flat(cfg, algorithms, sweep):
    """Fully resolved configuration for the run manifest."""
    flat = {"env.kind": cfg.env_kind}
    for prefix, obj in (("env", cfg.env), ("noise", cfg.noise)):
        for k, v in asdict(obj).items():
            flat[f"{prefix}.{k}"] = list(v) if isinstance(v, tuple) else v
    for k, v in asdict(cfg.opt).items():
        flat[f"opt.{'lambda' if k == 'lam' else k}"] = v
    for k, v in asdict(cfg.planner).items():
        if k not in ("horizon", "n_nodes"):
            flat[f"planner.{k}"] = v
    flat["planner.policy"] = cfg.experiment["policy"]
    flat["basis.nodes"] = cfg.nodes
    flat["basis.dense"] = cfg.dense
    for k, v in cfg.experiment.items():
        if k == "policy":
            continue
        flat[f"experiment.{k}"] = v
    flat["experiment.seeds"] = list(cfg.seeds)
    flat["experiment.trials"] = len(cfg.seeds)
    flat["experiment.algorithms"] = list(algorithms)
    flat["experiment.sample_sweep"] = list(sweep)
    flat["manifest.version"] = __version__
    return flat
