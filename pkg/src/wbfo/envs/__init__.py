"""Environment contract, built-in benchmarks and the branching rollout engine."""

from ..errors import ConfigurationError
from .base import EnvState, StageCostTerms, restore, snapshot, total_cost
from .nav2d import Nav2DConfig, Nav2DEnv
from .pendulum import PendulumConfig, PendulumEnv, wrap_angle
from .rollout import RolloutBatch, RolloutPool, batch_rollout, make_evaluator, replay, rollout

ENV_KINDS = {
    "nav2d": (Nav2DConfig, Nav2DEnv),
    "pendulum": (PendulumConfig, PendulumEnv),
}


def make_env(kind, config=None, seed=0):
    try:
        config_cls, env_cls = ENV_KINDS[kind]
    except KeyError:
        raise ConfigurationError(f"unknown environment {kind!r}", key="env.kind") from None
    return env_cls(config or config_cls(), seed=seed)


def env_reset(kind, config=None, seed=0):
    """Build the environment for ``(config, seed)`` and return it with its initial state."""
    env = make_env(kind, config, seed)
    return env, env.reset()
