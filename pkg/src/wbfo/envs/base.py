"""Environment state, snapshots, stage-cost bookkeeping and the discounted
trajectory cost."""

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from ..errors import IntegrityError, SimulationFault

_MAGIC = b"WBFOSNAP1"
FAULT_PENALTY = -1e3


@dataclass(frozen=True, eq=False)
class EnvState:
    x: np.ndarray
    k: int = 0
    rng_key: int = 0
    rng_counter: int = 0

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    def __eq__(self, other):
        if not isinstance(other, EnvState):
            return NotImplemented
        return snapshot(self) == snapshot(other)

    def __hash__(self):
        return hash(snapshot(self))


@dataclass(frozen=True)
class StageCostTerms:
    task: float
    obstacle: float
    control: float

    @property
    def total(self):
        return self.task + self.obstacle + self.control

    @property
    def reward(self):
        return -self.total


def snapshot(state):
    """Serialize ``state`` to an opaque, checksummed byte string."""
    payload = json.dumps(
        {
            "x": state.x.astype("<f8").tobytes().hex(),
            "k": int(state.k),
            "rng_key": int(state.rng_key),
            "rng_counter": int(state.rng_counter),
        },
        sort_keys=True,
    ).encode()
    return _MAGIC + hashlib.sha256(payload).digest() + payload


def restore(blob):
    if not isinstance(blob, (bytes, bytearray)) or not blob.startswith(_MAGIC):
        raise IntegrityError("not an environment snapshot")
    body = bytes(blob[len(_MAGIC):])
    digest, payload = body[:32], body[32:]
    if hashlib.sha256(payload).digest() != digest:
        raise IntegrityError("snapshot checksum mismatch")
    try:
        rec = json.loads(payload)
        x = np.frombuffer(bytes.fromhex(rec["x"]), dtype="<f8")
        return EnvState(x, int(rec["k"]), int(rec["rng_key"]), int(rec["rng_counter"]))
    except (ValueError, KeyError, TypeError) as exc:
        raise IntegrityError(f"undecodable snapshot: {exc}") from exc


def total_cost(rewards, alpha, dt, terminal=0.0):
    """Discounted cost ``J`` of a reward sequence (last axis is time).

    ``J = exp(-alpha (h+1) dt) l_f + sum_k exp(-alpha dt k) l_k dt`` with
    ``l_k = -reward_k`` and ``h + 1`` the number of steps.
    """
    r = np.asarray(rewards, dtype=float)
    T = r.shape[-1]
    disc = np.exp(-alpha * dt * np.arange(T))
    J = (-r * disc).sum(axis=-1) * dt
    if np.any(terminal):
        J = J + np.exp(-alpha * T * dt) * np.asarray(terminal, dtype=float)
    return J


@dataclass
class StepBatch:
    """Vectorized result of stepping ``N`` lanes once."""

    x: np.ndarray
    reward: np.ndarray
    terms: np.ndarray  # (N, 3): task, obstacle, control
    clamped: np.ndarray
    faulted: np.ndarray


class Env:
    """Base class for multi-lane environments.

    Subclasses implement :meth:`initial_x` and :meth:`rollout_lanes`, which
    runs ``N`` lanes from states ``X0`` (``N x n``) through open-loop controls
    ``U`` (``N x D x T``) and returns ``(rewards, terms, states, clamped,
    faulted)``.  Single steps go through the same routine, so stepping and
    rolling out agree bit for bit.  Inputs are never mutated.
    """

    state_dim = 0
    control_dim = 0
    dt = 1.0

    def __init__(self, seed=0):
        self.seed = int(seed)
        self.clamp_events = 0

    def initial_x(self):
        raise NotImplementedError

    def rollout_lanes(self, X0, U, command=None, fault_penalty=FAULT_PENALTY):
        raise NotImplementedError

    def step_batch(self, X, U, command=None):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        U = np.asarray(U, dtype=float).reshape(len(X), self.control_dim, 1)
        rewards, terms, states, clamped, faulted = self.rollout_lanes(X, U, command, np.nan)
        return StepBatch(states[:, 1], rewards[:, 0], terms[:, 0], clamped[:, 0], faulted)

    def bound_controls(self, U):
        """Project controls (``D x T``, time last) onto the admissible set."""
        return np.asarray(U, dtype=float)

    def terminal_cost(self, X):
        return np.zeros(len(X))

    def observe(self, state):
        return np.array(state.x)

    def success(self, state, radius):
        raise NotImplementedError

    def reset(self):
        return EnvState(self.initial_x(), 0, rng_key=self.seed, rng_counter=0)

    def step(self, state, u, command=None):
        u = np.asarray(u, dtype=float).reshape(1, self.control_dim)
        out = self.step_batch(state.x[None], u, command)
        if out.faulted[0]:
            raise SimulationFault(f"non-finite state at step {state.k}", lane=0, step=state.k)
        if out.clamped[0]:
            self.clamp_events += 1
        task, obstacle, control = (float(v) for v in out.terms[0])
        new = EnvState(out.x[0], state.k + 1, state.rng_key, state.rng_counter + 1)
        return new, float(out.reward[0]), StageCostTerms(task, obstacle, control)
