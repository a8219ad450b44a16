"""Frictionless cart-pole with a uniform rod, integrated with fixed-step RK4.

State ordering is ``(cart position, pole angle, cart velocity, angular
velocity)`` with the angle measured from upright, so ``theta = pi`` is
hanging down.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError
from ._kernels import cartpole_rollout
from .base import FAULT_PENALTY, Env


@dataclass(frozen=True)
class PendulumConfig:
    cart_mass: float = 1.0
    pole_mass: float = 0.1
    half_length: float = 0.5
    gravity: float = 9.81
    force_limit: float = 10.0
    dt: float = 0.02
    init: str = "down"
    theta0: float = 0.0
    init_noise: float = 0.0
    w_task: float = 1.0
    w_task2: float = 0.1
    w_ctl: float = 0.001

    def __post_init__(self):
        for key in ("cart_mass", "pole_mass", "half_length", "dt", "force_limit"):
            if not getattr(self, key) > 0:
                raise ConfigurationError("must be positive", key=f"env.{key}")
        if self.init not in ("down", "upright"):
            raise ConfigurationError("must be 'down' or 'upright'", key="env.init")


def wrap_angle(theta):
    return (np.asarray(theta) + np.pi) % (2 * np.pi) - np.pi


class PendulumEnv(Env):
    state_dim = 4
    control_dim = 1

    def __init__(self, config=None, seed=0):
        super().__init__(seed)
        self.config = config or PendulumConfig()
        self.dt = self.config.dt

    def initial_x(self):
        cfg = self.config
        theta = np.pi if cfg.init == "down" else cfg.theta0
        x = np.array([0.0, theta, 0.0, 0.0])
        if cfg.init_noise > 0:
            rng = np.random.default_rng(np.random.SeedSequence([self.seed, 0x50454E44]))
            x = x + cfg.init_noise * rng.uniform(-1, 1, 4)
        return x

    def derivatives(self, X, F):
        cfg = self.config
        mp, l, g = cfg.pole_mass, cfg.half_length, cfg.gravity
        M = cfg.cart_mass + mp
        th, xd, thd = X[:, 1], X[:, 2], X[:, 3]
        s, c = np.sin(th), np.cos(th)
        tmp = (F + mp * l * thd**2 * s) / M
        thdd = (g * s - c * tmp) / (l * (4.0 / 3.0 - mp * c**2 / M))
        xdd = tmp - mp * l * thdd * c / M
        return np.stack([xd, thd, xdd, thdd], axis=1)

    def energy(self, X):
        """Total mechanical energy (cart + rod), zero potential at pivot height."""
        cfg = self.config
        X = np.atleast_2d(X)
        mp, l, g = cfg.pole_mass, cfg.half_length, cfg.gravity
        th, xd, thd = X[:, 1], X[:, 2], X[:, 3]
        kin = (
            0.5 * (cfg.cart_mass + mp) * xd**2
            + mp * l * xd * thd * np.cos(th)
            + 0.5 * (4.0 / 3.0) * mp * l**2 * thd**2
        )
        return kin + mp * g * l * np.cos(th)

    def rollout_lanes(self, X0, U, command=None, fault_penalty=FAULT_PENALTY):
        cfg = self.config
        params = np.array([
            cfg.cart_mass, cfg.pole_mass, cfg.half_length, cfg.gravity, cfg.force_limit,
            cfg.dt, cfg.w_task, cfg.w_task2, cfg.w_ctl,
        ])
        target = 0.0 if command is None else float(command)
        return cartpole_rollout(
            np.ascontiguousarray(X0, dtype=float), np.ascontiguousarray(U, dtype=float),
            params, target, float(fault_penalty),
        )

    def bound_controls(self, U):
        lim = self.config.force_limit
        return np.clip(np.asarray(U, dtype=float), -lim, lim)

    def success(self, state, radius):
        return bool(abs(wrap_angle(state.x[1])) <= radius)
