"""Sampling-based node-space optimizers.

Both optimizers perturb a prior node matrix ``P`` (``D x K``), expand every
candidate to a dense trajectory, score it with an evaluator returning an
``N x T`` step-reward matrix (higher is better), and return the updated nodes
together with the applied delta.

* WBFO / AVWBFO map (optionally discounted) step rewards through the basis to
  per-node weights, standardise them across samples and take a per-node
  softmax-weighted average of the sampled nodes.
* MPPI weights each candidate by ``exp(-(J - min J) / lambda)`` where ``J`` is
  the discounted trajectory cost.
"""

from dataclasses import dataclass

import numpy as np

from .envs.base import total_cost
from .errors import ConfigurationError, ContractError, EvaluationError, SimulationFault
from .noise import gaussian_noise, sigma_at
from .spline import dense_to_nodes, nodes_to_dense

WBFO = "wbfo"
AVWBFO = "avwbfo"
MPPI = "mppi"
ALGORITHMS = (WBFO, AVWBFO, MPPI)


@dataclass(frozen=True)
class OptimizerConfig:
    algorithm: str = AVWBFO
    n_samples: int = 32
    gamma: float = 1.0
    lam: float = 1.0
    iterations: int = 10
    alpha: float = 0.0
    dt: float = 1.0
    mppi_space: str = "node"

    def __post_init__(self):
        algo = str(self.algorithm).lower()
        object.__setattr__(self, "algorithm", algo)
        if algo not in ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm {self.algorithm!r}", key="opt.algorithm")
        if algo == WBFO:
            # plain WBFO always uses step-wise rewards
            object.__setattr__(self, "gamma", 0.0)
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigurationError("must lie in [0, 1]", key="opt.gamma")
        if algo == AVWBFO and self.gamma == 0.0:
            raise ConfigurationError("AVWBFO requires gamma > 0", key="opt.gamma")
        if not self.lam > 0:
            raise ConfigurationError("must be positive", key="opt.lambda")
        if self.n_samples < 1:
            raise ConfigurationError("need at least one sample", key="opt.n_samples")
        if self.iterations < 1:
            raise ConfigurationError("need at least one iteration", key="opt.iterations")
        if self.alpha < 0:
            raise ConfigurationError("must be non-negative", key="opt.alpha")
        if self.mppi_space not in ("node", "dense"):
            raise ConfigurationError("must be 'node' or 'dense'", key="opt.mppi_space")


@dataclass(frozen=True)
class ScoreEstimate:
    delta: np.ndarray
    sigma_used: np.ndarray
    iteration: int = 0

    def score(self):
        """Implied ``grad log p_1`` per node-dimension, ``delta / sigma^2``.

        Nodes with zero noise have no defined score and report 0.
        """
        var = self.sigma_used**2
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(var > 0, self.delta / var, 0.0)
        return out


def accumulate_rewards(R, gamma):
    """Discounted suffix sums ``R_acc[i, t] = sum_{s >= t} R[i, s] gamma^(s - t)``."""
    if not 0.0 <= gamma <= 1.0:
        raise ConfigurationError(f"discount must lie in [0, 1], got {gamma}", key="opt.gamma")
    R = np.asarray(R, dtype=float)
    if gamma == 0.0:
        return R.copy()
    out = np.empty_like(R)
    acc = np.zeros(R.shape[:-1])
    for t in range(R.shape[-1] - 1, -1, -1):
        acc = R[..., t] + gamma * acc
        out[..., t] = acc
    return out


def node_weights(R_acc, basis):
    R_acc = np.asarray(R_acc, dtype=float)
    if R_acc.shape[-1] != basis.n_dense:
        raise ContractError(
            f"reward matrix has {R_acc.shape[-1]} steps, basis expects {basis.n_dense}"
        )
    return R_acc @ basis.phi.T


def normalize_weights(W, eps=1e-12):
    """Standardise each node column across samples (population std).

    Columns whose spread is below ``eps`` are degenerate ties and become 0,
    as does everything when only one sample exists.
    """
    W = np.asarray(W, dtype=float)
    if W.shape[0] < 2:
        return np.zeros_like(W)
    centered = W - W.mean(axis=0)
    std = W.std(axis=0)
    tied = std < eps
    return np.where(tied, 0.0, centered / np.where(tied, 1.0, std))


def softmax_update(W_norm, samples):
    """Per-node softmax over samples and convex update of the node values.

    ``samples`` has shape ``(N, D, K)``; ``W_norm`` has shape ``(N, K)``.
    """
    W_norm = np.asarray(W_norm, dtype=float)
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 3 or W_norm.shape != (samples.shape[0], samples.shape[2]):
        raise ContractError(
            f"weights {W_norm.shape} do not match samples {samples.shape}"
        )
    z = np.exp(W_norm - W_norm.max(axis=0))
    w = z / z.sum(axis=0)
    # weights sum to one, so averaging offsets from sample 0 is the same
    # update and stays exact when all samples coincide
    ref = samples[0]
    return ref + np.einsum("nk,ndk->dk", w, samples - ref)


def mppi_weights(costs, lam):
    costs = np.asarray(costs, dtype=float)
    z = np.exp(-(costs - costs.min()) / lam)
    return z / z.sum()


def score_export(prior, updated, schedule, iteration):
    prior = np.asarray(prior, dtype=float)
    updated = np.asarray(updated, dtype=float)
    if prior.shape != updated.shape:
        raise ContractError(f"prior {prior.shape} and update {updated.shape} differ")
    return ScoreEstimate(
        delta=updated - prior,
        sigma_used=sigma_at(schedule, iteration, prior.shape[-1]),
        iteration=iteration,
    )


def _evaluate(evaluator, dense):
    try:
        R = evaluator(dense)
    except SimulationFault as exc:
        raise EvaluationError(f"evaluator failed on sample {exc.lane}: {exc}", sample=exc.lane) from exc
    R = np.asarray(R, dtype=float)
    expected = (dense.shape[0], dense.shape[2])
    if R.shape != expected:
        raise ContractError(f"evaluator returned {R.shape}, expected {expected}")
    bad = ~np.isfinite(R).all(axis=1)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise EvaluationError(f"non-finite reward for sample {i}", sample=i)
    return R


def _sample_nodes(prior, schedule, iteration, n, key):
    D, K = prior.shape
    noise = gaussian_noise(schedule, iteration, n, D, K, key=key)
    # sample 0 is the unperturbed prior
    noise[0] = 0.0
    return prior[None] + noise


def wbfo_step(prior, basis, schedule, iteration, evaluator, config, key=()):
    """One WBFO (``gamma == 0``) or AVWBFO (``gamma > 0``) update."""
    prior = np.asarray(prior, dtype=float)
    samples = _sample_nodes(prior, schedule, iteration, config.n_samples, key)
    R = _evaluate(evaluator, nodes_to_dense(samples, basis))
    R_acc = accumulate_rewards(R, config.gamma) if config.gamma > 0 else R
    W = normalize_weights(node_weights(R_acc, basis))
    updated = softmax_update(W, samples)
    return updated, score_export(prior, updated, schedule, iteration)


def trajectory_costs(R, config):
    return total_cost(R, config.alpha, config.dt)


def mppi_step(prior, basis, schedule, iteration, evaluator, config, key=()):
    """Importance-weighted average of sampled trajectories."""
    prior = np.asarray(prior, dtype=float)
    if config.mppi_space == "dense":
        D = prior.shape[0]
        T = basis.n_dense
        base = nodes_to_dense(prior, basis)
        # per-sample ramp evaluated at dense resolution
        noise = gaussian_noise(schedule, iteration, config.n_samples, D, T, key=key)
        noise[0] = 0.0
        dense = base[None] + noise
        R = _evaluate(evaluator, dense)
        w = mppi_weights(trajectory_costs(R, config), config.lam)
        updated = prior + dense_to_nodes(np.einsum("n,ndt->dt", w, dense - base), basis)
    else:
        samples = _sample_nodes(prior, schedule, iteration, config.n_samples, key)
        R = _evaluate(evaluator, nodes_to_dense(samples, basis))
        w = mppi_weights(trajectory_costs(R, config), config.lam)
        updated = prior + np.einsum("n,ndk->dk", w, samples - prior)
    return updated, score_export(prior, updated, schedule, iteration)


def optimizer_step(prior, basis, schedule, iteration, evaluator, config, key=()):
    step = mppi_step if config.algorithm == MPPI else wbfo_step
    return step(prior, basis, schedule, iteration, evaluator, config, key=key)


def optimize(prior, basis, schedule, evaluator, config, key=(), callback=None):
    """Run ``config.iterations`` updates from ``prior``; returns nodes and score exports."""
    nodes = np.asarray(prior, dtype=float)
    scores = []
    for it in range(config.iterations):
        nodes, score = optimizer_step(nodes, basis, schedule, it, evaluator, config, key=key)
        scores.append(score)
        if callback is not None:
            callback(it, nodes, score)
    return nodes, scores
