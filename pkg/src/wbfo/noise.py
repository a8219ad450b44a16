"""Perturbation sampling: Monte Carlo and Latin hypercube Gaussians with
per-iteration exponential decay and a linear ramp across the horizon."""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import ConfigurationError

MONTE_CARLO = "mc"
LATIN_HYPERCUBE = "lhs"
_SOURCE_ALIASES = {
    "mc": MONTE_CARLO,
    "montecarlo": MONTE_CARLO,
    "monte_carlo": MONTE_CARLO,
    "lhs": LATIN_HYPERCUBE,
    "latinhypercube": LATIN_HYPERCUBE,
    "latin_hypercube": LATIN_HYPERCUBE,
}


@dataclass(frozen=True)
class NoiseSchedule:
    sigma0: float = 3.0
    decay: float = 0.6
    ramp_near: float = 1.0
    ramp_far: float = 1.0
    source: str = MONTE_CARLO
    seed: int = 0

    def __post_init__(self):
        source = _SOURCE_ALIASES.get(str(self.source).lower())
        if source is None:
            raise ConfigurationError(f"unknown noise source {self.source!r}", key="noise.source")
        object.__setattr__(self, "source", source)
        if not self.sigma0 > 0:
            raise ConfigurationError("must be positive", key="noise.sigma0")
        if not 0 < self.decay <= 1:
            raise ConfigurationError("must lie in (0, 1]", key="noise.decay")
        if not 0 <= self.ramp_near <= self.ramp_far:
            raise ConfigurationError(
                "need 0 <= ramp_near <= ramp_far", key="noise.ramp_near"
            )


def ramp(schedule, K):
    """Relative noise scale per node, linear from ``ramp_near`` to ``ramp_far``."""
    if K == 1:
        return np.array([schedule.ramp_near], dtype=float)
    return np.linspace(schedule.ramp_near, schedule.ramp_far, K)


def sigma_at(schedule, iteration, K):
    if iteration < 0:
        raise ConfigurationError("iteration must be non-negative", key="iteration")
    return schedule.sigma0 * schedule.decay**iteration * ramp(schedule, K)


def _generator(seed, key=()):
    seq = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(k) for k in key)])
    return np.random.Generator(np.random.Philox(seq))


def lhs_unit(N, M, seed, key=()):
    """Latin hypercube design in ``[0, 1)^M`` with one point per stratum per column."""
    if N < 1 or M < 1:
        raise ConfigurationError(f"need N >= 1 and M >= 1, got {N}, {M}")
    rng = _generator(seed, key)
    strata = rng.permuted(np.tile(np.arange(N), (M, 1)), axis=1).T
    offsets = rng.random((N, M))
    return (strata + offsets) / N


def standard_normal(source, N, M, seed, key=()):
    """``(N, M)`` standard normal draws from the requested source."""
    if source == LATIN_HYPERCUBE:
        u = lhs_unit(N, M, seed, key)
        # an offset of exactly 0 in stratum 0 would map to -inf
        u = np.clip(u, np.finfo(float).tiny, None)
        return ndtri(u)
    return _generator(seed, key).standard_normal((N, M))


def gaussian_noise(schedule, iteration, N, D, K, key=()):
    """Noise tensor ``(N, D, K)`` scaled by :func:`sigma_at`.

    ``key`` extends the seed (e.g. with a trial index and control step) so that
    distinct calls draw independent streams while remaining reproducible.
    """
    if N < 1:
        raise ConfigurationError("need at least one sample", key="opt.n_samples")
    sigma = sigma_at(schedule, iteration, K)
    z = standard_normal(schedule.source, N, D * K, schedule.seed, (*key, iteration))
    return z.reshape(N, D, K) * sigma
