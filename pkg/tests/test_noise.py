import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wbfo.errors import ConfigurationError
from wbfo.noise import NoiseSchedule, gaussian_noise, lhs_unit, ramp, sigma_at, standard_normal


def test_sigma_default_schedule():
    s = NoiseSchedule(sigma0=3.0, decay=0.6)
    assert np.allclose(sigma_at(s, 0, 16), 3.0)
    assert np.allclose(sigma_at(s, 2, 16), 1.08, atol=1e-12)


def test_sigma_ramp():
    s = NoiseSchedule(sigma0=1.0, decay=1.0, ramp_near=0.5, ramp_far=1.5)
    assert np.allclose(sigma_at(s, 0, 3), [0.5, 1.0, 1.5])
    assert np.allclose(ramp(s, 1), [0.5])


@given(st.floats(0.01, 5), st.floats(0.05, 0.99), st.floats(0, 2), st.floats(0, 2), st.integers(1, 40), st.integers(0, 8))
def test_sigma_monotone(sigma0, decay, a, b, K, it):
    s = NoiseSchedule(sigma0=sigma0, decay=decay, ramp_near=min(a, b), ramp_far=max(a, b))
    sig = sigma_at(s, it, K)
    assert (np.diff(sig) >= -1e-15).all()
    nxt = sigma_at(s, it + 1, K)
    assert ((nxt < sig) | (sig == 0)).all()


@pytest.mark.parametrize(
    "kwargs,key",
    [
        (dict(sigma0=0.0), "noise.sigma0"),
        (dict(decay=0.0), "noise.decay"),
        (dict(decay=1.5), "noise.decay"),
        (dict(ramp_near=2.0, ramp_far=1.0), "noise.ramp_near"),
        (dict(source="sobol"), "noise.source"),
    ],
)
def test_schedule_validation(kwargs, key):
    with pytest.raises(ConfigurationError) as err:
        NoiseSchedule(**kwargs)
    assert err.value.key == key


def test_negative_iteration():
    with pytest.raises(ConfigurationError):
        sigma_at(NoiseSchedule(), -1, 4)


def test_lhs_single_point():
    u = lhs_unit(1, 5, seed=3)
    assert u.shape == (1, 5) and ((u >= 0) & (u < 1)).all()


def test_lhs_four_strata():
    u = lhs_unit(4, 3, seed=11)
    for col in u.T:
        assert np.array_equal(np.floor(np.sort(col) * 4), [0, 1, 2, 3])


def test_lhs_uniform_occupancy():
    u = lhs_unit(16, 8, seed=5)
    for col in u.T:
        assert np.array_equal(np.bincount(np.floor(col * 16).astype(int), minlength=16), np.ones(16))


@given(st.integers(1, 64), st.integers(1, 12), st.integers(0, 2**40))
def test_lhs_ranks_are_permutation(N, M, seed):
    u = lhs_unit(N, M, seed)
    assert ((u >= 0) & (u < 1)).all()
    strata = np.floor(u * N).astype(int)
    for col in strata.T:
        assert np.array_equal(np.sort(col), np.arange(N))


def test_zero_sigma_gives_zero_tensor():
    s = NoiseSchedule(ramp_near=0.0, ramp_far=0.0, source="lhs")
    assert not gaussian_noise(s, 0, 7, 2, 5).any()


def test_lhs_gaussian_moments():
    s = NoiseSchedule(sigma0=1.0, decay=1.0, source="lhs", seed=2024)
    z = gaussian_noise(s, 0, 1000, 1, 1).ravel()
    assert abs(z.mean()) <= 0.1
    assert 0.9 <= z.std(ddof=1) <= 1.1
    assert np.isfinite(z).all()


def test_mc_gaussian_moments():
    s = NoiseSchedule(sigma0=2.0, decay=1.0, source="mc", seed=7)
    z = gaussian_noise(s, 0, 20000, 1, 1).ravel()
    assert abs(z.mean()) < 0.05
    assert abs(z.std() - 2.0) < 0.05


@pytest.mark.parametrize("source", ["mc", "lhs"])
def test_deterministic_and_keyed(source):
    s = NoiseSchedule(source=source, seed=99)
    a = gaussian_noise(s, 1, 8, 2, 6, key=(4, 10))
    b = gaussian_noise(s, 1, 8, 2, 6, key=(4, 10))
    assert a.shape == (8, 2, 6)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, gaussian_noise(s, 1, 8, 2, 6, key=(4, 11)))
    assert not np.array_equal(a, gaussian_noise(s, 2, 8, 2, 6, key=(4, 10)) / 0.6)


def test_per_node_scale():
    s = NoiseSchedule(sigma0=1.0, decay=1.0, ramp_near=0.1, ramp_far=2.0, source="lhs", seed=1)
    z = gaussian_noise(s, 0, 4000, 1, 5)
    assert np.allclose(z.std(axis=0)[0], sigma_at(s, 0, 5), rtol=0.05)


def test_source_aliases():
    assert NoiseSchedule(source="Latin_Hypercube").source == "lhs"
    assert NoiseSchedule(source="MonteCarlo").source == "mc"


def test_lhs_variance_reduction():
    # estimator of E[f(z)] for monotone f, N=32, across 200 seeds
    f = np.tanh
    est = {"mc": [], "lhs": []}
    for seed in range(200):
        for source in est:
            est[source].append(f(standard_normal(source, 32, 1, seed)).mean())
    assert np.var(est["lhs"]) <= np.var(est["mc"])
