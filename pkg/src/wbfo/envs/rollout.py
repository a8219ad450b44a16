"""Branching rollouts from a frozen main-environment state."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, ContractError
from .base import FAULT_PENALTY, restore, snapshot


@dataclass
class RolloutBatch:
    rewards: np.ndarray  # (N, T)
    terms: np.ndarray  # (N, T, 3)
    states: np.ndarray  # (N, T + 1, n)
    faulted: np.ndarray  # (N,) bool
    clamped: np.ndarray  # (N, T) bool


def _run_lanes(env, x0, controls, command, fault_penalty):
    X0 = np.repeat(x0[None], controls.shape[0], axis=0)
    rewards, terms, states, clamped, faulted = env.rollout_lanes(X0, controls, command, fault_penalty)
    return rewards, terms, states, faulted, clamped


def rollout(env, main, candidates, command=None, workers=1, fault_penalty=FAULT_PENALTY):
    """Execute ``candidates`` (``N x D x T``) open-loop from a copy of ``main``.

    ``main`` is never modified: every lane starts from a state restored from
    its snapshot.  Lanes are split into ``workers`` contiguous chunks; the
    result is identical for any worker count.
    """
    candidates = np.asarray(candidates, dtype=float)
    if candidates.ndim != 3 or candidates.shape[1] != env.control_dim:
        raise ContractError(
            f"candidates must be (N, {env.control_dim}, T), got {candidates.shape}"
        )
    frozen = restore(snapshot(main))
    x0 = np.array(frozen.x)
    N = candidates.shape[0]
    workers = max(1, min(int(workers), N))
    if workers == 1:
        parts = [_run_lanes(env, x0, candidates, command, fault_penalty)]
    else:
        chunks = np.array_split(np.arange(N), workers)
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(
                lambda idx: _run_lanes(env, x0, candidates[idx], command, fault_penalty),
                chunks,
            ))
    rewards, terms, states, faulted, clamped = (np.concatenate(p) for p in zip(*parts))
    env.clamp_events += int(clamped.sum())
    return RolloutBatch(rewards, terms, states, faulted, clamped)


def batch_rollout(env, main, candidates, command=None, workers=1, fault_penalty=FAULT_PENALTY):
    """``N x T`` step-reward matrix of the candidates, in candidate order."""
    return rollout(env, main, candidates, command, workers, fault_penalty).rewards


def make_evaluator(env, main, command=None, workers=1, fault_penalty=FAULT_PENALTY):
    return lambda dense: batch_rollout(env, main, dense, command, workers, fault_penalty)


def replay(env, state, controls, command=None):
    """Run one dense control sequence (``D x T``) from ``state`` with :meth:`Env.step`.

    Returns the visited states (including ``state``), rewards and cost terms.
    """
    controls = np.asarray(controls, dtype=float)
    states, rewards, terms = [state], [], []
    for t in range(controls.shape[1]):
        state, r, c = env.step(state, controls[:, t], command)
        states.append(state)
        rewards.append(r)
        terms.append(c)
    return states, np.array(rewards), terms


class RolloutPool:
    """Index layout of ``n_main`` main lanes interleaved with their rollout pools.

    Main lane ``m`` occupies global index ``m * (1 + n_rollout)`` and owns the
    ``n_rollout`` indices that follow it.
    """

    def __init__(self, n_main, n_rollout):
        if n_main < 1 or n_rollout < 1:
            raise ConfigurationError("need at least one main and one rollout lane")
        self.n_main = int(n_main)
        self.n_rollout = int(n_rollout)

    @property
    def total(self):
        return self.n_main * (1 + self.n_rollout)

    def main_index(self, m):
        return m * (1 + self.n_rollout)

    def rollout_indices(self, m):
        start = self.main_index(m) + 1
        return np.arange(start, start + self.n_rollout)

    def evaluate(self, env, mains, candidates, command=None, workers=1):
        """Rollout rewards for every main lane; ``candidates[m]`` is that lane's batch."""
        if len(mains) != self.n_main or len(candidates) != self.n_main:
            raise ContractError("one candidate batch per main lane is required")
        out = []
        for state, cand in zip(mains, candidates):
            if len(cand) > self.n_rollout:
                raise ContractError(
                    f"{len(cand)} candidates exceed the rollout pool of {self.n_rollout}"
                )
            out.append(batch_rollout(env, state, cand, command, workers))
        return out


__all__ = [
    "RolloutBatch", "RolloutPool", "batch_rollout", "make_evaluator",
    "replay", "rollout",
]
