import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from affinecert import F1, SwitchedAffineSystem, lifted_system, simulate, step
from affinecert.errors import DimensionError, ModeIndexError, SizeLimitError
from affinecert.system import mode_fixed_point, words

finite = st.floats(-2, 2, allow_nan=False, allow_infinity=False)


@st.composite
def systems(draw, n=None, M=None):
    n = n or draw(st.integers(1, 3))
    M = M or draw(st.integers(1, 3))
    A = draw(arrays(float, (M, n, n), elements=finite))
    b = draw(arrays(float, (M, n), elements=finite))
    return SwitchedAffineSystem(A, b)


def test_step_origin_returns_affine_term():
    np.testing.assert_array_equal(step(F1, [0.0, 0.0], 1), [0.1, 0.2])


def test_step_unit_vector():
    np.testing.assert_allclose(step(F1, [1.0, 0.0], 1), [0.5, -0.3], atol=1e-15)


def test_zero_dynamics_return_b():
    sys = SwitchedAffineSystem.from_modes([(np.zeros((2, 2)), [1, 2]), (np.zeros((2, 2)), [3, 4])])
    np.testing.assert_array_equal(step(sys, [5.0, -7.0], 2), [3, 4])


def test_step_errors():
    with pytest.raises(ModeIndexError):
        step(F1, [0.0, 0.0], 3)
    with pytest.raises(ModeIndexError):
        step(F1, [0.0, 0.0], 0)
    with pytest.raises(DimensionError):
        step(F1, [0.0, 0.0, 0.0], 1)


def test_construction_rejects_bad_shapes_and_nan():
    with pytest.raises(DimensionError):
        SwitchedAffineSystem.from_modes([(np.eye(2), [0, 0]), (np.eye(3), [0, 0, 0])])
    with pytest.raises(ValueError):
        SwitchedAffineSystem.from_modes([([[np.nan]], [0.0])])
    with pytest.raises(DimensionError):
        SwitchedAffineSystem.from_modes([])


def test_system_is_immutable():
    with pytest.raises(ValueError):
        F1.A[0, 0, 0] = 1.0


def test_geometric_trajectory(shifted_half):
    traj = simulate(shifted_half, [0.0, 0.0], [1, 1, 1])
    np.testing.assert_allclose(traj.states, [[0, 0], [1, 0], [1.5, 0], [1.75, 0]], atol=1e-15)


def test_empty_mode_sequence():
    traj = simulate(F1, [1.0, 2.0], [])
    assert traj.states.shape == (1, 2)
    assert traj.modes == ()


def test_constant_mode_converges_to_fixed_point():
    traj = simulate(F1, [3.0, -3.0], [1] * 300)
    np.testing.assert_allclose(traj.last, [-1 / 15, 7 / 15], atol=1e-12)


def test_fixed_points():
    np.testing.assert_allclose(mode_fixed_point(F1, 1), [-1 / 15, 7 / 15], atol=1e-14)
    zero = SwitchedAffineSystem.from_modes([(np.zeros((2, 2)), [0.3, -0.2])])
    np.testing.assert_allclose(mode_fixed_point(zero, 1), [0.3, -0.2])
    ident = SwitchedAffineSystem.from_modes([(np.eye(2), [0.3, -0.2])])
    assert mode_fixed_point(ident, 1) is None


def test_lifted_examples(shifted_half):
    assert lifted_system(F1, 1).M == 2
    np.testing.assert_array_equal(lifted_system(F1, 1).A, F1.A)
    assert lifted_system(F1, 2).M == 4
    two = lifted_system(shifted_half, 2)
    np.testing.assert_allclose(two.A[0], 0.25 * np.eye(2))
    np.testing.assert_allclose(two.b[0], [1.5, 0.0])
    with pytest.raises(SizeLimitError):
        lifted_system(F1, 13)


def test_word_order_is_lexicographic():
    assert words(2, 2) == [(1, 1), (1, 2), (2, 1), (2, 2)]


def test_json_round_trip(tmp_path):
    doc = F1.to_json()
    again = SwitchedAffineSystem.from_json(doc)
    np.testing.assert_array_equal(again.A, F1.A)
    path = tmp_path / "sys.json"
    path.write_text(doc)
    np.testing.assert_array_equal(SwitchedAffineSystem.from_json(path).b, F1.b)
    bad = json.loads(doc)
    bad["n"] = 3
    with pytest.raises(DimensionError):
        SwitchedAffineSystem.from_dict(bad)


@given(systems(), st.data())
def test_semigroup(sys, data):
    modes = st.lists(st.integers(1, sys.M), max_size=5)
    s1, s2 = data.draw(modes), data.draw(modes)
    x0 = data.draw(arrays(float, sys.n, elements=finite))
    whole = simulate(sys, x0, s1 + s2)
    first = simulate(sys, x0, s1)
    second = simulate(sys, first.last, s2)
    np.testing.assert_allclose(whole.states, np.vstack([first.states, second.states[1:]]), rtol=1e-12, atol=1e-12)


@given(systems(M=2), st.integers(1, 4), st.data())
def test_lifted_consistency(sys, l, data):
    lifted = lifted_system(sys, l)
    k = data.draw(st.integers(1, lifted.M))
    x0 = data.draw(arrays(float, sys.n, elements=finite))
    expect = simulate(sys, x0, words(sys.M, l)[k - 1]).last
    got = step(lifted, x0, k)
    np.testing.assert_allclose(got, expect, rtol=1e-12, atol=1e-12 * (1 + np.abs(expect).max()))


@given(systems(), st.floats(0, 1), st.data())
def test_affinity(sys, lam, data):
    x = data.draw(arrays(float, sys.n, elements=finite))
    y = data.draw(arrays(float, sys.n, elements=finite))
    i = data.draw(st.integers(1, sys.M))
    lhs = step(sys, lam * x + (1 - lam) * y, i)
    rhs = lam * step(sys, x, i) + (1 - lam) * step(sys, y, i)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)
