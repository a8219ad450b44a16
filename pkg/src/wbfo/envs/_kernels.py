"""Compiled multi-lane rollout loops for the built-in environments.

Every lane advances independently, so a lane's result never depends on how
many other lanes share the call.  A lane whose state turns non-finite is
frozen at its last finite state and receives ``fault_penalty`` per step.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _nav_obstacle(px, py, centers, radii, walls, r_safe):
    cost = 0.0
    for j in range(radii.shape[0]):
        d = math.sqrt((px - centers[j, 0]) ** 2 + (py - centers[j, 1]) ** 2) - radii[j]
        h = r_safe - d
        if h > 0.0:
            cost += h * h
    for j in range(walls.shape[0]):
        dx = max(max(walls[j, 0] - px, 0.0), px - walls[j, 1])
        dy = max(max(walls[j, 2] - py, 0.0), py - walls[j, 3])
        h = r_safe - math.sqrt(dx * dx + dy * dy)
        if h > 0.0:
            cost += h * h
    return cost


@njit(cache=True)
def _nav_move(x, y, vx, vy, dt, walls):
    tx = x + vx * dt
    ty = y + vy * dt
    # x first, tested against the wall's y-extent at the current y
    nx = tx
    for j in range(walls.shape[0]):
        if walls[j, 2] < y < walls[j, 3]:
            if x <= walls[j, 0] and tx > walls[j, 0]:
                nx = min(nx, walls[j, 0])
            elif x >= walls[j, 1] and tx < walls[j, 1]:
                nx = max(nx, walls[j, 1])
    ny = ty
    for j in range(walls.shape[0]):
        if walls[j, 0] < nx < walls[j, 1]:
            if y <= walls[j, 2] and ty > walls[j, 2]:
                ny = min(ny, walls[j, 2])
            elif y >= walls[j, 3] and ty < walls[j, 3]:
                ny = max(ny, walls[j, 3])
    return nx, ny


@njit(cache=True)
def nav_rollout(X0, U, goal, walls, centers, radii, params, fault_penalty):
    dt, max_speed, w_task, w_obs, w_ctl, r_safe = params[0], params[1], params[2], params[3], params[4], params[5]
    N, _, T = U.shape
    states = np.empty((N, T + 1, 2))
    rewards = np.empty((N, T))
    terms = np.zeros((N, T, 3))
    clamped = np.zeros((N, T), dtype=np.bool_)
    faulted = np.zeros(N, dtype=np.bool_)
    for i in range(N):
        x = X0[i, 0]
        y = X0[i, 1]
        states[i, 0, 0] = x
        states[i, 0, 1] = y
        for t in range(T):
            vx = U[i, 0, t]
            vy = U[i, 1, t]
            if not faulted[i]:
                speed = math.sqrt(vx * vx + vy * vy)
                if speed > max_speed:
                    clamped[i, t] = True
                    vx *= max_speed / speed
                    vy *= max_speed / speed
                nx, ny = _nav_move(x, y, vx, vy, dt, walls)
                task = w_task * ((nx - goal[0]) ** 2 + (ny - goal[1]) ** 2)
                obstacle = w_obs * _nav_obstacle(nx, ny, centers, radii, walls, r_safe)
                control = w_ctl * (vx * vx + vy * vy)
                r = -(task + obstacle + control)
                if math.isfinite(nx) and math.isfinite(ny) and math.isfinite(r):
                    x = nx
                    y = ny
                    rewards[i, t] = r
                    terms[i, t, 0] = task
                    terms[i, t, 1] = obstacle
                    terms[i, t, 2] = control
                else:
                    faulted[i] = True
                    clamped[i, t] = False
            if faulted[i]:
                rewards[i, t] = fault_penalty
            states[i, t + 1, 0] = x
            states[i, t + 1, 1] = y
    return rewards, terms, states, clamped, faulted


@njit(cache=True)
def _cartpole_deriv(s, F, mc, mp, l, g):
    th = s[1]
    xd = s[2]
    thd = s[3]
    M = mc + mp
    sn = math.sin(th)
    cs = math.cos(th)
    tmp = (F + mp * l * thd * thd * sn) / M
    thdd = (g * sn - cs * tmp) / (l * (4.0 / 3.0 - mp * cs * cs / M))
    xdd = tmp - mp * l * thdd * cs / M
    out = np.empty(4)
    out[0] = xd
    out[1] = thd
    out[2] = xdd
    out[3] = thdd
    return out


@njit(cache=True)
def _wrap(a):
    return (a + math.pi) % (2.0 * math.pi) - math.pi


@njit(cache=True)
def cartpole_rollout(X0, U, params, target, fault_penalty):
    mc, mp, l, g, fmax, h, w_task, w_task2, w_ctl = (
        params[0], params[1], params[2], params[3], params[4],
        params[5], params[6], params[7], params[8],
    )
    N, _, T = U.shape
    states = np.empty((N, T + 1, 4))
    rewards = np.empty((N, T))
    terms = np.zeros((N, T, 3))
    clamped = np.zeros((N, T), dtype=np.bool_)
    faulted = np.zeros(N, dtype=np.bool_)
    for i in range(N):
        s = X0[i].copy()
        states[i, 0] = s
        for t in range(T):
            if not faulted[i]:
                raw = U[i, 0, t]
                F = min(max(raw, -fmax), fmax)
                clamped[i, t] = F != raw
                k1 = _cartpole_deriv(s, F, mc, mp, l, g)
                k2 = _cartpole_deriv(s + 0.5 * h * k1, F, mc, mp, l, g)
                k3 = _cartpole_deriv(s + 0.5 * h * k2, F, mc, mp, l, g)
                k4 = _cartpole_deriv(s + h * k3, F, mc, mp, l, g)
                sn = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                ang = _wrap(sn[1])
                task = w_task * ang * ang + w_task2 * (sn[0] - target) ** 2
                control = w_ctl * F * F
                r = -(task + 0.0 + control)
                ok = math.isfinite(r)
                for j in range(4):
                    ok = ok and math.isfinite(sn[j])
                if ok:
                    s = sn
                    rewards[i, t] = r
                    terms[i, t, 0] = task
                    terms[i, t, 2] = control
                else:
                    faulted[i] = True
                    clamped[i, t] = False
            if faulted[i]:
                rewards[i, t] = fault_penalty
            states[i, t + 1] = s
    return rewards, terms, states, clamped, faulted
