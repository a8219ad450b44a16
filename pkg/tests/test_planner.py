import numpy as np
import pytest

from wbfo.envs import Nav2DConfig, Nav2DEnv, PendulumEnv
from wbfo.errors import ConfigurationError
from wbfo.noise import NoiseSchedule
from wbfo.optim import OptimizerConfig
from wbfo.planner import (
    PlannerConfig,
    _tail_observation,
    plan_episode,
    run_policy_episode,
    shift_and_append,
    warm_start_init,
)
from wbfo.policies import EnergySwingUpPolicy, ProportionalNavPolicy, ZeroPolicy, make_policy
from wbfo.spline import build_basis, nodes_to_dense


class ConstantPolicy:
    def __init__(self, value):
        self.value = np.asarray(value, dtype=float)

    def __call__(self, obs):
        return self.value


class BrokenPolicy:
    def __call__(self, obs):
        raise RuntimeError("policy crashed")


def empty_nav(**kw):
    base = dict(n_obstacles=0)
    base.update(kw)
    return Nav2DEnv(Nav2DConfig(**base))


def test_warm_start_zero_policy():
    env = empty_nav()
    b = build_basis(8, 32)
    assert not warm_start_init(ZeroPolicy(2), env, env.reset(), b).any()
    assert not warm_start_init(make_policy("none", env), env, env.reset(), b).any()


def test_warm_start_points_to_goal():
    env = empty_nav(start=(1.0, 2.0), goal=(8.0, 6.0))
    b = build_basis(16, 64)
    main = env.reset()
    nodes = warm_start_init(make_policy("proportional", env), env, main, b)
    direction = env.goal - env.start
    assert (direction @ nodes > 0).all()
    assert main.k == 0 and np.array_equal(main.x, env.start)


def test_warm_start_policy_fault_falls_back():
    env = empty_nav()
    b = build_basis(6, 24)
    assert not warm_start_init(BrokenPolicy(), env, env.reset(), b).any()


def test_shift_constant():
    b = build_basis(8, 40)
    nodes = np.full((2, 8), 0.75)
    out = shift_and_append(nodes, b, ConstantPolicy([0.75, 0.75]), None)
    assert np.allclose(out, nodes, atol=1e-9)


def test_shift_appends_zero_without_policy():
    b = build_basis(8, 40)
    nodes = np.random.default_rng(0).normal(size=(2, 8))
    out = shift_and_append(nodes, b, ZeroPolicy(2), None)
    expect = np.concatenate([nodes_to_dense(nodes, b)[:, 1:], np.zeros((2, 1))], axis=1)
    from wbfo.spline import dense_to_nodes
    assert np.allclose(out, dense_to_nodes(expect, b), atol=1e-12)
    assert out.shape == nodes.shape


def test_shift_linear_ramp():
    K, T = 8, 36
    b = build_basis(K, T)
    a, slope = 0.2, 0.05
    dense = a + slope * np.arange(T)
    from wbfo.spline import dense_to_nodes
    nodes = dense_to_nodes(dense[None], b)
    nxt = a + slope * T
    out = shift_and_append(nodes, b, ConstantPolicy([nxt]), None)
    assert np.allclose(nodes_to_dense(out, b)[0], a + slope * np.arange(1, T + 1), atol=1e-6)


def test_shift_policy_fault_repeats_last():
    b = build_basis(6, 24)
    nodes = np.random.default_rng(2).normal(size=(1, 6))
    dense = nodes_to_dense(nodes, b)
    out = shift_and_append(nodes, b, BrokenPolicy(), np.zeros(2))
    from wbfo.spline import dense_to_nodes
    expect = dense_to_nodes(np.concatenate([dense[:, 1:], dense[:, -1:]], axis=1), b)
    assert np.allclose(out, expect)


def test_tail_observation_is_rollout_end():
    env = empty_nav(start=(1.0, 1.0), dt=0.1)
    obs = _tail_observation(env, env.reset(), np.ones((2, 10)))
    assert np.allclose(obs, [2.0, 2.0])


def test_success_at_step_zero():
    env = empty_nav(start=(1.0, 1.0), goal=(1.5, 1.0))
    planner = PlannerConfig(horizon=16, n_nodes=4, success_radius=0.6)
    res = plan_episode(env, planner, OptimizerConfig(n_samples=4), NoiseSchedule())
    assert res.success and res.steps == 0 and res.rewards == []


def test_episode_bookkeeping():
    env = empty_nav()
    planner = PlannerConfig(horizon=32, n_nodes=8, n_denoise=2, max_steps=7)
    res = plan_episode(env, planner, OptimizerConfig(n_samples=8, dt=env.dt), NoiseSchedule(), seed=3, record_scores=True)
    assert res.steps == 7 and not res.success
    assert len(res.rewards) == len(res.controls) == 7 and len(res.states) == 8
    assert len(res.telemetry) == 7 * 2
    assert [t["iteration"] for t in res.telemetry[:4]] == [0, 1, 0, 1]
    assert len(res.scores) == 14
    for step, it, prior, score in res.scores:
        assert prior.shape == (2, 8) and score.delta.shape == (2, 8)
    assert np.isclose(res.total_reward, sum(res.rewards))


def test_episode_deterministic():
    env = Nav2DEnv(Nav2DConfig(), 1)
    planner = PlannerConfig(horizon=32, n_nodes=8, n_denoise=2, max_steps=10)
    opt = OptimizerConfig(n_samples=16, dt=env.dt)
    a = plan_episode(env, planner, opt, NoiseSchedule(source="lhs"), seed=5)
    b = plan_episode(env, planner, opt, NoiseSchedule(source="lhs"), seed=5, workers=3)
    assert np.array_equal(np.array(a.controls), np.array(b.controls))
    assert a.rewards == b.rewards


def test_zero_noise_is_open_loop_refit():
    env = empty_nav(start=(1.0, 1.0), goal=(6.0, 3.0))
    planner = PlannerConfig(horizon=24, n_nodes=6, n_denoise=1, max_steps=6, warm_start="proportional")
    schedule = NoiseSchedule(ramp_near=0.0, ramp_far=0.0)
    res = plan_episode(env, planner, OptimizerConfig(n_samples=4, dt=env.dt), schedule)
    b = build_basis(6, 24)
    policy = make_policy("proportional", env)
    state = env.reset()
    nodes = warm_start_init(policy, env, state, b)
    for j in range(6):
        dense = nodes_to_dense(nodes, b)
        assert np.allclose(res.controls[j], dense[:, 0], atol=1e-12)
        state, _, _ = env.step(state, dense[:, 0])
        nodes = shift_and_append(nodes, b, policy, _tail_observation(env, state, dense[:, 1:]))


@pytest.mark.parametrize("seed", range(5))
def test_empty_nav_reaches_goal(seed):
    env = Nav2DEnv(Nav2DConfig(n_obstacles=0), seed)
    planner = PlannerConfig(horizon=64, n_nodes=16, n_denoise=3, max_steps=300)
    res = plan_episode(env, planner, OptimizerConfig(algorithm="avwbfo", n_samples=32, dt=env.dt), NoiseSchedule(seed=seed), seed=seed)
    assert res.success and res.steps < 300


def test_proportional_policy_alone():
    env = empty_nav()
    res = run_policy_episode(env, ProportionalNavPolicy(env.goal, max_speed=2.0), 300, 0.2)
    assert res.success and res.steps < 100


def test_policy_blocked_by_barrier():
    env = empty_nav(barrier="square", start=(5.0, 5.0), goal=(8.0, 5.0))
    res = run_policy_episode(env, make_policy("proportional", env), 300, 0.2)
    assert not res.success


def test_swingup_policy_balances():
    env = PendulumEnv()
    policy = EnergySwingUpPolicy(env)
    res = run_policy_episode(env, policy, 1500, 0.05)
    assert res.success and res.steps < 600
    state = env.reset()
    for _ in range(res.steps + 300):
        state, _, _ = env.step(state, policy(state.x))
    assert env.success(state, 0.05)


def test_planner_config_validation():
    for kw, key in [
        (dict(horizon=0), "planner.horizon"),
        (dict(n_denoise=0), "planner.n_denoise"),
        (dict(max_steps=0), "planner.max_steps"),
        (dict(execute_steps=0), "planner.execute_steps"),
    ]:
        with pytest.raises(ConfigurationError) as err:
            PlannerConfig(**kw)
        assert err.value.key == key


def test_unknown_policy():
    with pytest.raises(ConfigurationError):
        make_policy("swingup", empty_nav())
