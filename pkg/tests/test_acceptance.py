"""End-to-end acceptance checks.

Each test records one PASS/FAIL line that is printed in the pytest terminal
summary (and to stdout when this file is run as a script).
"""

import os
import time
from collections import defaultdict

import numpy as np
import pytest

from wbfo.bench import config as cfgmod
from wbfo.bench.runner import run_battery
from wbfo.envs import EnvState, Nav2DConfig, Nav2DEnv, PendulumEnv, batch_rollout, rollout, snapshot
from wbfo.noise import NoiseSchedule
from wbfo.optim import OptimizerConfig, accumulate_rewards, mppi_weights, wbfo_step
from wbfo.spline import build_basis, dense_to_nodes, nodes_to_dense

CONFIGS = os.path.join(os.path.dirname(__file__), os.pardir, "configs")
RESULTS = []


def record(number, passed, detail):
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    return passed


def load(name, **overrides):
    flat = cfgmod.load(os.path.join(CONFIGS, name))
    flat.update(overrides)
    return flat


def rows_of(results):
    return [r.row for r in results]


def by_algo(rows):
    out = defaultdict(list)
    for row in rows:
        out[row["algorithm"]].append(row)
    return out


def test_spline_exactness():
    rng = np.random.default_rng(0)
    t0 = time.perf_counter()
    worst_trip, worst_sum = 0.0, 0.0
    for _ in range(1000):
        D = int(rng.integers(1, 5))
        K = int(rng.integers(4, 33))
        T = int(rng.integers(K, 257))
        basis = build_basis(K, T)
        P = rng.normal(scale=3.0, size=(D, K))
        back = dense_to_nodes(nodes_to_dense(P, basis), basis)
        worst_trip = max(worst_trip, float(np.abs(back - P).max()))
        worst_sum = max(worst_sum, float(np.abs(basis.phi.sum(axis=0) - 1.0).max()))
    elapsed = time.perf_counter() - t0
    ok = worst_trip < 1e-9 and worst_sum <= 1e-12 and elapsed < 5.0
    record(1, ok, f"round trip {worst_trip:.2e}, column sums {worst_sum:.2e}, {elapsed:.2f} s")
    assert ok


def brute_accumulate(R, gamma):
    N, T = R.shape
    out = np.zeros_like(R)
    for i in range(N):
        for t in range(T):
            total = 0.0
            for s in range(t, T):
                total += R[i, s] * (gamma ** (s - t) if s > t else 1.0)
            out[i, t] = total
    return out


def test_discounting_oracle():
    rng = np.random.default_rng(1)
    worst = 0.0
    for case in range(500):
        N = int(rng.integers(1, 17))
        T = int(rng.integers(1, 65))
        gamma = (0.0, 0.5, 0.9, 1.0)[case % 4]
        R = rng.normal(size=(N, T))
        worst = max(worst, float(np.abs(accumulate_rewards(R, gamma) - brute_accumulate(R, gamma)).max()))
    ok = worst <= 1e-10
    record(2, ok, f"max deviation {worst:.2e} over 500 cases")
    assert ok


def test_mppi_limits():
    rng = np.random.default_rng(2)
    worst_min, worst_mean = 0.0, 0.0
    for _ in range(200):
        N = int(rng.integers(2, 64))
        samples = rng.normal(size=(N, 2, 8))
        costs = rng.uniform(0, 10, N)
        w = mppi_weights(costs, 1e-9)
        est = np.einsum("n,ndk->dk", w, samples)
        worst_min = max(worst_min, float(np.abs(est - samples[np.argmin(costs)]).max()))
        w = mppi_weights(np.full(N, rng.uniform(-5, 5)), 1.0)
        est = np.einsum("n,ndk->dk", w, samples)
        worst_mean = max(worst_mean, float(np.abs(est - samples.mean(axis=0)).max()))
    ok = worst_min <= 1e-6 and worst_mean <= 1e-12
    record(3, ok, f"argmin error {worst_min:.2e}, mean error {worst_mean:.2e}")
    assert ok


def test_convexity_and_determinism():
    env = Nav2DEnv(Nav2DConfig(), 0)
    main = env.reset()
    basis = build_basis(8, 32)
    inside, identical = True, True
    for seed in range(200):
        rng = np.random.default_rng(seed)
        prior = rng.normal(size=(2, 8))
        schedule = NoiseSchedule(sigma0=1.5, decay=0.8, seed=seed, source=("lhs", "mc")[seed % 2])
        cfg = OptimizerConfig(algorithm="wbfo", n_samples=16, gamma=(0.0, 1.0)[seed % 2], dt=env.dt)
        seen = []

        def evaluator(dense, workers):
            seen.append(dense)
            return rollout(env, main, dense, workers=workers).rewards

        a, _ = wbfo_step(prior, basis, schedule, seed % 3, lambda d: evaluator(d, 1), cfg, key=(seed,))
        b, _ = wbfo_step(prior, basis, schedule, seed % 3, lambda d: evaluator(d, 4), cfg, key=(seed,))
        identical &= np.array_equal(a, b)
        samples = dense_to_nodes(seen[0], basis)
        lo = samples.min(axis=0) - 1e-9
        hi = samples.max(axis=0) + 1e-9
        inside &= bool(np.all((a >= lo) & (a <= hi)))
    ok = inside and identical
    record(4, ok, f"hull {'ok' if inside else 'violated'}, workers 1 vs 4 {'identical' if identical else 'differ'}")
    assert ok


def test_nav_sample_efficiency():
    t0 = time.perf_counter()
    _, results = run_battery(load("nav2d_samples.cfg"), algorithms=["wbfo", "mppi"])
    elapsed = time.perf_counter() - t0
    rows = rows_of(results)
    cost = {(r["algorithm"], r["n_samples"], r["seed"]): r["final_objective"] for r in rows}
    seeds = sorted({r["seed"] for r in rows})
    ok = elapsed < 120.0
    parts = []
    for n in (5, 10, 20):
        wbfo = np.array([cost[("wbfo", n, s)] for s in seeds])
        mppi = np.array([cost[("mppi", n, s)] for s in seeds])
        wins = int((wbfo < mppi).sum())
        ok &= wins >= 4 and wbfo.mean() < mppi.mean()
        parts.append(f"N={n} {wins}/{len(seeds)} ({wbfo.mean():.0f} vs {mppi.mean():.0f})")
    record(5, ok, "WBFO vs MPPI cost: " + ", ".join(parts) + f", {elapsed:.1f} s")
    assert ok


def test_pendulum_ordering():
    t0 = time.perf_counter()
    _, results = run_battery(load("pendulum_samples.cfg"))
    elapsed = time.perf_counter() - t0
    groups = by_algo(rows_of(results))
    mean = {a: float(np.mean([r["final_objective"] for r in g])) for a, g in groups.items()}
    # final objective is a cost: lower is better
    ok = mean["avwbfo"] <= mean["mppi"] and mean["avwbfo"] < mean["wbfo"] and elapsed < 180.0
    record(6, ok, f"cost avwbfo {mean['avwbfo']:.3f}, mppi {mean['mppi']:.3f}, wbfo {mean['wbfo']:.3f}, {elapsed:.1f} s")
    assert ok


@pytest.mark.slow
def test_lhs_reaching():
    stats = {}
    for source in ("mc", "lhs"):
        _, results = run_battery(load("wallgap.cfg", **{"noise.source": source}))
        rows = rows_of(results)
        # failed trials count at the step cap
        steps = [r["steps"] if r["success"] else 150 for r in rows]
        stats[source] = (np.mean([r["success"] for r in rows]), float(np.mean(steps)), len(rows))
    ok = stats["lhs"][0] >= stats["mc"][0] and stats["lhs"][1] <= stats["mc"][1] and stats["lhs"][2] == 30
    record(7, ok, "completion/steps lhs {:.2f}/{:.1f}, mc {:.2f}/{:.1f}".format(*stats["lhs"][:2], *stats["mc"][:2]))
    assert ok


@pytest.mark.slow
def test_barrier_navigation():
    t0 = time.perf_counter()
    _, results = run_battery(load("barrier.cfg"))
    elapsed = time.perf_counter() - t0
    groups = by_algo(rows_of(results))
    succ = {a: float(np.mean([r["success"] for r in g])) for a, g in groups.items()}
    steps = {a: float(np.mean([r["steps"] for r in g])) for a, g in groups.items()}
    cold = min(succ["avwbfo-ws"], succ["mppi-ws"])
    ordering = (
        succ["avwbfo+ws"] >= succ["mppi+ws"] >= max(succ["avwbfo-ws"], succ["mppi-ws"])
        and cold >= succ["policy"]
    )
    ok = ordering and succ["avwbfo+ws"] >= 0.9 and steps["avwbfo+ws"] < steps["mppi+ws"] and elapsed < 600.0
    detail = ", ".join(f"{a} {succ[a]:.2f}/{steps[a]:.1f}" for a in groups)
    record(8, ok, f"success/steps {detail}, {elapsed:.0f} s")
    assert ok


def test_physics_sanity():
    env = PendulumEnv()
    X = np.array([[0.0, 2.0, 0.3, 1.0]])
    e0 = env.energy(X)[0]
    _, _, states, _, _ = env.rollout_lanes(X, np.zeros((1, 1, 1000)))
    cfg = env.config
    scale = max(abs(e0), cfg.pole_mass * cfg.gravity * cfg.half_length)
    drift = float(np.abs(env.energy(states[0]) - e0).max() / scale)

    rng = np.random.default_rng(9)
    nav = Nav2DEnv(Nav2DConfig(), 0)
    untouched = True
    for i in range(10_000):
        if i % 2:
            main = EnvState(rng.uniform(-2, 2, 4), int(rng.integers(0, 100)))
            target, cand = env, rng.normal(scale=5, size=(2, 1, 4))
        else:
            main = EnvState(rng.uniform(0, 10, 2), int(rng.integers(0, 100)))
            target, cand = nav, rng.normal(size=(2, 2, 4))
        before, x_before = snapshot(main), main.x.copy()
        batch_rollout(target, main, cand)
        untouched &= snapshot(main) == before and np.array_equal(main.x, x_before)
    ok = drift <= 1e-3 and untouched
    record(9, ok, f"energy drift {drift:.2e}, main state {'untouched' if untouched else 'modified'} in 10^4 checks")
    assert ok


def test_score_sign():
    basis = build_basis(4, 16)
    cfg = OptimizerConfig(algorithm="wbfo", n_samples=32)
    hits = 0
    for seed in range(1000):
        rng = np.random.default_rng(seed)
        target = rng.uniform(-5, 5)
        offset = rng.uniform(0.1, 5) * rng.choice([-1, 1])
        prior = np.full((1, 4), target + offset)
        schedule = NoiseSchedule(sigma0=0.1 * abs(offset), decay=1.0, seed=seed)
        _, score = wbfo_step(prior, basis, schedule, 0, lambda d: -((d[:, 0] - target) ** 2), cfg)
        hits += bool(np.all(np.sign(score.delta) == np.sign(target - prior)))
    ok = hits >= 950
    record(10, ok, f"delta sign matches gradient in {hits}/1000 steps")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
