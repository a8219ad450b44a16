"""Point-robot navigation in a square workspace with circular obstacles and
optional walls.

The robot is a velocity-controlled single integrator with a speed clamp.
Circular obstacles are soft (penalized only); walls are solid axis-aligned
rectangles that the robot slides along.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError
from ._kernels import nav_rollout
from .base import FAULT_PENALTY, Env

BARRIERS = ("none", "square", "wall")
SIDES = ("top", "bottom", "left", "right")


@dataclass(frozen=True)
class Nav2DConfig:
    size: float = 10.0
    n_obstacles: int = 25
    radius_min: float = 0.3
    radius_max: float = 0.7
    start: tuple = (1.0, 1.0)
    goal: tuple = (9.0, 9.0)
    start_jitter: float = 0.0
    goal_jitter: float = 0.0
    max_speed: float = 2.0
    dt: float = 0.1
    w_task: float = 1.0
    w_obs: float = 10.0
    w_ctl: float = 0.01
    r_safe: float = 0.3
    barrier: str = "none"
    # square barrier: centred on barrier_center (defaults to start)
    barrier_center: tuple = ()
    barrier_half_size: float = 0.5
    # wall barrier: vertical wall at x = wall_x spanning the workspace
    wall_x: float = 5.0
    wall_thickness: float = 0.05
    gap_width: float = 0.35
    gap_side: str = "top"
    gap_offset: float = 0.0

    def __post_init__(self):
        if self.barrier not in BARRIERS:
            raise ConfigurationError(f"unknown barrier {self.barrier!r}", key="env.barrier")
        if self.barrier != "none" and not self.gap_width > 0:
            raise ConfigurationError("gap width must be positive", key="env.gap_width")
        if self.gap_side not in SIDES:
            raise ConfigurationError(f"unknown side {self.gap_side!r}", key="env.gap_side")
        if self.n_obstacles < 0:
            raise ConfigurationError("must be non-negative", key="env.n_obstacles")
        if not 0 < self.radius_min <= self.radius_max:
            raise ConfigurationError("need 0 < radius_min <= radius_max", key="env.radius_min")
        if not self.dt > 0:
            raise ConfigurationError("must be positive", key="env.dt")
        if not self.max_speed > 0:
            raise ConfigurationError("must be positive", key="env.max_speed")


def _square_walls(center, half, thick, gap, side, offset):
    cx, cy = center
    x0, x1, y0, y1 = cx - half, cx + half, cy - half, cy + half
    t = thick / 2
    # (xmin, xmax, ymin, ymax) of each side, outer faces at the square edge +- t
    sides = {
        "bottom": (x0 - t, x1 + t, y0 - t, y0 + t),
        "top": (x0 - t, x1 + t, y1 - t, y1 + t),
        "left": (x0 - t, x0 + t, y0 - t, y1 + t),
        "right": (x1 - t, x1 + t, y0 - t, y1 + t),
    }
    walls = []
    for name, (a0, a1, b0, b1) in sides.items():
        if name != side:
            walls.append((a0, a1, b0, b1))
            continue
        if name in ("top", "bottom"):
            mid = cx + offset
            walls.append((a0, mid - gap / 2, b0, b1))
            walls.append((mid + gap / 2, a1, b0, b1))
        else:
            mid = cy + offset
            walls.append((a0, a1, b0, mid - gap / 2))
            walls.append((a0, a1, mid + gap / 2, b1))
    return [w for w in walls if w[1] > w[0] and w[3] > w[2]]


def _vertical_wall(x, size, thick, gap, offset):
    mid = size / 2 + offset
    t = thick / 2
    return [
        (x - t, x + t, 0.0, mid - gap / 2),
        (x - t, x + t, mid + gap / 2, size),
    ]


class Nav2DEnv(Env):
    state_dim = 2
    control_dim = 2

    def __init__(self, config=None, seed=0):
        super().__init__(seed)
        self.config = config = config or Nav2DConfig()
        self.dt = config.dt
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, 0x4E4156]))
        self.start = np.asarray(config.start, dtype=float) + config.start_jitter * rng.uniform(-1, 1, 2)
        self.goal = np.asarray(config.goal, dtype=float) + config.goal_jitter * rng.uniform(-1, 1, 2)
        if config.barrier == "square":
            center = config.barrier_center or tuple(config.start)
            walls = _square_walls(
                center, config.barrier_half_size, config.wall_thickness,
                config.gap_width, config.gap_side, config.gap_offset,
            )
        elif config.barrier == "wall":
            walls = _vertical_wall(
                config.wall_x, config.size, config.wall_thickness,
                config.gap_width, config.gap_offset,
            )
        else:
            walls = []
        self.walls = np.array(walls, dtype=float).reshape(-1, 4)
        for p, name in ((self.start, "start"), (self.goal, "goal")):
            if self._inside_walls(p[None])[0]:
                raise ConfigurationError(f"{name} lies inside a wall", key=f"env.{name}")
        self.centers, self.radii = self._place_obstacles(rng)

    def _place_obstacles(self, rng):
        cfg = self.config
        centers, radii = [], []
        for i in range(cfg.n_obstacles):
            for _ in range(100):
                r = rng.uniform(cfg.radius_min, cfg.radius_max)
                c = rng.uniform(r, cfg.size - r, 2)
                clear = min(np.linalg.norm(c - self.start), np.linalg.norm(c - self.goal))
                if clear >= r + cfg.r_safe:
                    break
            else:
                raise ConfigurationError(
                    f"could not place obstacle {i} clear of start and goal after 100 tries",
                    key="env.n_obstacles",
                )
            centers.append(c)
            radii.append(r)
        return np.array(centers).reshape(-1, 2), np.array(radii)

    def initial_x(self):
        return self.start.copy()

    def _inside_walls(self, P):
        if not len(self.walls):
            return np.zeros(len(P), dtype=bool)
        w = self.walls
        x, y = P[:, :1], P[:, 1:2]
        return ((x > w[:, 0]) & (x < w[:, 1]) & (y > w[:, 2]) & (y < w[:, 3])).any(axis=1)

    def obstacle_cost(self, P):
        r_safe = self.config.r_safe
        cost = np.zeros(len(P))
        if len(self.radii):
            d = np.linalg.norm(P[:, None, :] - self.centers[None], axis=2) - self.radii
            cost += (np.maximum(0.0, r_safe - d) ** 2).sum(axis=1)
        if len(self.walls):
            w = self.walls
            dx = np.maximum(np.maximum(w[:, 0] - P[:, :1], 0.0), P[:, :1] - w[:, 1])
            dy = np.maximum(np.maximum(w[:, 2] - P[:, 1:2], 0.0), P[:, 1:2] - w[:, 3])
            d = np.hypot(dx, dy)
            cost += (np.maximum(0.0, r_safe - d) ** 2).sum(axis=1)
        return cost

    def rollout_lanes(self, X0, U, command=None, fault_penalty=FAULT_PENALTY):
        cfg = self.config
        goal = self.goal if command is None else np.asarray(command, dtype=float)
        params = np.array([cfg.dt, cfg.max_speed, cfg.w_task, cfg.w_obs, cfg.w_ctl, cfg.r_safe])
        return nav_rollout(
            np.ascontiguousarray(X0, dtype=float), np.ascontiguousarray(U, dtype=float),
            goal, self.walls, self.centers, self.radii, params, float(fault_penalty),
        )

    def bound_controls(self, U):
        U = np.asarray(U, dtype=float)
        speed = np.linalg.norm(U, axis=0)
        limit = self.config.max_speed
        return U * np.where(speed > limit, limit / np.maximum(speed, 1e-300), 1.0)

    def success(self, state, radius):
        return bool(np.linalg.norm(state.x - self.goal) <= radius)

    def observe(self, state):
        return np.array(state.x)
