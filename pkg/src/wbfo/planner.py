"""Receding-horizon rolling-denoising planner.

Each control step runs a few optimizer iterations on the node trajectory
against branching rollouts from the current main state, executes the first
dense control, then shifts the trajectory forward and appends a policy action
at the tail.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .envs.rollout import FAULT_PENALTY, rollout
from .errors import ConfigurationError, EvaluationError, SimulationFault
from .optim import optimizer_step
from .policies import ZeroPolicy, make_policy
from .spline import build_basis, dense_to_nodes, nodes_to_dense

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PlannerConfig:
    horizon: int = 64
    n_nodes: int = 16
    n_denoise: int = 3
    max_steps: int = 300
    success_radius: float = 0.2
    warm_start: str = "none"
    execute_steps: int = 1
    project_controls: bool = False

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigurationError("must be >= 1", key="planner.horizon")
        if self.n_denoise < 1:
            raise ConfigurationError("must be >= 1", key="planner.n_denoise")
        if self.max_steps < 1:
            raise ConfigurationError("must be >= 1", key="planner.max_steps")
        if not 1 <= self.execute_steps <= self.horizon:
            raise ConfigurationError("must lie in [1, horizon]", key="planner.execute_steps")


@dataclass
class EpisodeResult:
    success: bool
    steps: int
    total_reward: float
    rewards: list = field(default_factory=list)
    terms: list = field(default_factory=list)
    states: list = field(default_factory=list)
    controls: list = field(default_factory=list)
    telemetry: list = field(default_factory=list)
    scores: list = field(default_factory=list)
    fault: str = ""

    @property
    def mean_reward(self):
        return float(np.mean(self.rewards)) if self.rewards else 0.0


def _safe_action(policy, obs, fallback):
    try:
        a = np.asarray(policy(obs), dtype=float).reshape(fallback.shape)
    except Exception as exc:  # noqa: BLE001 - any policy failure falls back
        log.warning("policy failed (%s); repeating last action", exc)
        return fallback
    return a if np.isfinite(a).all() else fallback


def warm_start_init(policy, env, main, basis):
    """Node trajectory fitted to a closed-loop policy rollout from ``main``."""
    D, T = env.control_dim, basis.n_dense
    if policy is None or isinstance(policy, ZeroPolicy):
        return np.zeros((D, basis.n_nodes))
    controls = np.zeros((D, T))
    state = main
    try:
        for t in range(T):
            u = np.asarray(policy(env.observe(state)), dtype=float).reshape(D)
            controls[:, t] = u
            state, _, _ = env.step(state, u)
    except Exception as exc:  # noqa: BLE001
        log.warning("warm start policy failed (%s); using zero trajectory", exc)
        return np.zeros((D, basis.n_nodes))
    return dense_to_nodes(controls, basis)


def shift_and_append(nodes, basis, policy, tail_obs, shift=1):
    """Drop the first ``shift`` dense controls, append policy actions, refit nodes.

    ``tail_obs`` is the observation at the end of the shifted horizon; the
    same action is repeated when more than one control is appended.
    """
    dense = nodes_to_dense(nodes, basis)
    last = dense[:, -1]
    if policy is None or isinstance(policy, ZeroPolicy):
        tail = np.zeros_like(last)
    else:
        tail = _safe_action(policy, tail_obs, last)
    shifted = np.concatenate([dense[:, shift:], np.repeat(tail[:, None], shift, axis=1)], axis=1)
    return dense_to_nodes(shifted, basis)


def _tail_observation(env, state, dense_rest):
    if dense_rest.shape[1] == 0:
        return env.observe(state)
    batch = rollout(env, state, dense_rest[None])
    x_end = batch.states[0, -1]
    return np.array(x_end)


def plan_episode(env, planner, opt, schedule, seed=0, policy=None, workers=1,
                 record_scores=False, initial_nodes=None):
    """Run one receding-horizon episode in ``env`` from its reset state."""
    basis = build_basis(planner.n_nodes, planner.horizon)
    if policy is None:
        policy = make_policy(planner.warm_start, env)
    state = env.reset()
    if initial_nodes is not None:
        nodes = np.array(initial_nodes, dtype=float)
    else:
        nodes = warm_start_init(policy, env, state, basis)
    result = EpisodeResult(success=False, steps=0, total_reward=0.0, states=[state.x.copy()])
    captured = {}

    def evaluator(dense):
        batch = rollout(env, state, dense, workers=workers)
        captured["R"] = batch.rewards
        captured["faults"] = int(batch.faulted.sum())
        return batch.rewards

    step = 0
    while True:
        if env.success(state, planner.success_radius):
            result.success = True
            break
        if step >= planner.max_steps:
            break
        try:
            for it in range(planner.n_denoise):
                prior = nodes
                nodes, score = optimizer_step(
                    prior, basis, schedule, it, evaluator, opt, key=(seed, step)
                )
                R = captured["R"]
                returns = R.sum(axis=1)
                result.telemetry.append({
                    "step": step,
                    "iteration": it,
                    "best_return": float(returns.max()),
                    "mean_return": float(returns.mean()),
                    "delta_norm": float(np.linalg.norm(score.delta)),
                    "faults": captured["faults"],
                })
                if record_scores:
                    result.scores.append((step, it, prior, score))
            dense = nodes_to_dense(nodes, basis)
            if planner.project_controls:
                # keep the nominal inside the control bounds; beyond them the
                # rewards are blind to magnitude and the nodes can drift away
                bounded = env.bound_controls(dense)
                if not np.array_equal(bounded, dense):
                    nodes = dense_to_nodes(bounded, basis)
                    dense = nodes_to_dense(nodes, basis)
            m = planner.execute_steps
            for j in range(m):
                state, r, terms = env.step(state, dense[:, j])
                result.rewards.append(r)
                result.terms.append(terms)
                result.controls.append(dense[:, j].copy())
                result.states.append(state.x.copy())
                step += 1
                if env.success(state, planner.success_radius):
                    break
            tail_obs = _tail_observation(env, state, dense[:, m:])
            nodes = shift_and_append(nodes, basis, policy, tail_obs, shift=m)
        except (SimulationFault, EvaluationError) as exc:
            result.fault = str(exc)
            result.rewards.append(FAULT_PENALTY)
            break
    result.steps = step
    result.total_reward = float(np.sum(result.rewards))
    return result


def run_policy_episode(env, policy, max_steps, success_radius):
    """Closed-loop execution of ``policy`` alone, with no trajectory optimization."""
    state = env.reset()
    result = EpisodeResult(success=False, steps=0, total_reward=0.0, states=[state.x.copy()])
    step = 0
    try:
        while True:
            if env.success(state, success_radius):
                result.success = True
                break
            if step >= max_steps:
                break
            u = np.asarray(policy(env.observe(state)), dtype=float).reshape(env.control_dim)
            state, r, terms = env.step(state, u)
            result.rewards.append(r)
            result.terms.append(terms)
            result.controls.append(u)
            result.states.append(state.x.copy())
            step += 1
    except SimulationFault as exc:
        result.fault = str(exc)
    result.steps = step
    result.total_reward = float(np.sum(result.rewards))
    return result
