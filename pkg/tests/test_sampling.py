import numpy as np
import pytest
from scipy import stats

from affinecert import F1, SampleConfig, draw_samples, make_rng, read_csv, step, write_csv
from affinecert.sampling import RNG_NAME, uniform_mode, uniform_sphere


def test_sphere_radius_exact():
    x = uniform_sphere(4, 2.5, make_rng(1), size=1000)
    np.testing.assert_allclose(np.linalg.norm(x, axis=1), 2.5, rtol=1e-12)
    assert uniform_sphere(3, 1.0, make_rng(1)).shape == (3,)


def test_sphere_mean_near_origin():
    x = uniform_sphere(2, 3.0, make_rng(2), size=100_000)
    assert np.all(np.abs(x.mean(axis=0)) <= 3 * 3 / np.sqrt(100_000))


def test_sphere_marginal_is_arcsine():
    u = uniform_sphere(2, 1.0, make_rng(3), size=10_000)[:, 0]
    # cos of a uniform angle: F(t) = 1 - arccos(t)/pi
    res = stats.kstest(u, lambda t: 1 - np.arccos(np.clip(t, -1, 1)) / np.pi)
    assert res.pvalue > 0.001


def test_modes_uniform_and_independent():
    rng = make_rng(4)
    assert set(uniform_mode(1, rng, size=100)) == {1}
    m = uniform_mode(2, rng, size=100_000)
    assert 0.49 <= np.mean(m == 1) <= 0.51
    omega = draw_samples(F1, SampleConfig(R=1.0, N=100_000, seed=5))
    for j in range(2):
        assert abs(np.corrcoef(omega.modes, omega.x0[:, j])[0, 1]) < 0.02


def test_same_seed_same_stream():
    a = make_rng(9).standard_normal(5)
    b = make_rng(9).standard_normal(5)
    np.testing.assert_array_equal(a, b)
    c = make_rng(9, stream=1).standard_normal(5)
    assert not np.array_equal(a, c)


def test_draw_samples_contract():
    cfg = SampleConfig(R=3.0, N=200, seed=11)
    omega = draw_samples(F1, cfg)
    assert len(omega) == 200
    np.testing.assert_allclose(np.linalg.norm(omega.x0, axis=1), 3.0, rtol=1e-12)
    for pair in omega:
        np.testing.assert_allclose(pair.x1, step(F1, pair.x0, pair.mode), rtol=1e-15, atol=1e-15)
    again = draw_samples(F1, cfg)
    assert np.array_equal(omega.x0, again.x0) and np.array_equal(omega.x1, again.x1)
    assert np.array_equal(omega.modes, again.modes)


def test_lifted_draws():
    omega = draw_samples(F1, SampleConfig(R=1.0, N=50, seed=1, l=3))
    assert omega.M == 8
    assert omega.modes.max() <= 8


def test_config_validation():
    with pytest.raises(ValueError):
        SampleConfig(R=0.0, N=1)
    with pytest.raises(ValueError):
        SampleConfig(R=1.0, N=0)
    with pytest.raises(ValueError):
        SampleConfig(R=1.0, N=1, seed=-1)


def test_csv_round_trip(tmp_path):
    omega = draw_samples(F1, SampleConfig(R=3.0, N=25, seed=2, stream=4))
    path = tmp_path / "s.csv"
    text = write_csv(omega, path)
    assert "i,mode,x0_1,x0_2,x1_1,x1_2" in text.splitlines()
    assert RNG_NAME in text
    back = read_csv(path)
    np.testing.assert_array_equal(back.x0, omega.x0)
    np.testing.assert_array_equal(back.x1, omega.x1)
    np.testing.assert_array_equal(back.modes, omega.modes)
    assert back.config == omega.config and back.M == 2
    assert write_csv(back) == text
