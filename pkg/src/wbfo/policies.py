"""Warm-start policies: deterministic maps from an observation to a control."""

import numpy as np
from scipy.linalg import solve_continuous_are

from .envs.nav2d import Nav2DEnv
from .envs.pendulum import PendulumEnv, wrap_angle
from .errors import ConfigurationError


class ZeroPolicy:
    def __init__(self, control_dim):
        self.control_dim = control_dim

    def __call__(self, obs):
        return np.zeros(self.control_dim)


class ProportionalNavPolicy:
    """Drive straight at the goal, saturating at the speed limit."""

    def __init__(self, goal, gain=2.0, max_speed=2.0):
        self.goal = np.asarray(goal, dtype=float)
        self.gain = gain
        self.max_speed = max_speed

    def __call__(self, obs):
        v = self.gain * (self.goal - np.asarray(obs, dtype=float)[:2])
        speed = np.linalg.norm(v)
        if speed > self.max_speed:
            v *= self.max_speed / speed
        return v


class EnergySwingUpPolicy:
    """Energy pumping far from upright, LQR balance near it."""

    def __init__(self, env, pump_gain=20.0, capture_angle=0.35):
        self.env = env
        cfg = env.config
        self.force_limit = cfg.force_limit
        self.pump_gain = pump_gain
        self.capture_angle = capture_angle
        self.upright_energy = cfg.pole_mass * cfg.gravity * cfg.half_length
        self.K = self._lqr_gain()

    def _lqr_gain(self):
        # linearize the RK4 right-hand side at the upright equilibrium
        env = self.env
        x0 = np.zeros((1, 4))
        eps = 1e-6
        A = np.empty((4, 4))
        for j in range(4):
            dx = np.zeros((1, 4))
            dx[0, j] = eps
            A[:, j] = (env.derivatives(x0 + dx, 0.0) - env.derivatives(x0 - dx, 0.0))[0] / (2 * eps)
        B = ((env.derivatives(x0, eps) - env.derivatives(x0, -eps))[0] / (2 * eps)).reshape(4, 1)
        Q = np.diag([1.0, 10.0, 1.0, 1.0])
        R = np.array([[0.1]])
        S = solve_continuous_are(A, B, Q, R)
        return (np.linalg.solve(R, B.T @ S)).ravel()

    def __call__(self, obs):
        x = np.asarray(obs, dtype=float)
        th = float(wrap_angle(x[1]))
        if abs(th) < self.capture_angle:
            err = np.array([x[0], th, x[2], x[3]])
            f = -self.K @ err
        else:
            e = float(self.env.energy(x)[0])
            # accelerating the cart against theta_dot * cos(theta) feeds energy
            # into the pole until it matches the upright level
            f = -self.pump_gain * (self.upright_energy - e) * np.sign(x[3] * np.cos(th) + 1e-12)
            f -= 0.5 * x[0] + 0.5 * x[2]
        return np.array([np.clip(f, -self.force_limit, self.force_limit)])


def make_policy(name, env):
    """Built-in policy by name; ``none`` and ``zero`` give :class:`ZeroPolicy`."""
    name = (name or "none").lower()
    if name in ("none", "zero"):
        return ZeroPolicy(env.control_dim)
    if name in ("proportional", "heuristic") and isinstance(env, Nav2DEnv):
        return ProportionalNavPolicy(env.goal, max_speed=env.config.max_speed)
    if name in ("swingup", "energy", "heuristic") and isinstance(env, PendulumEnv):
        return EnergySwingUpPolicy(env)
    raise ConfigurationError(f"no policy {name!r} for {type(env).__name__}", key="planner.warm_start")
