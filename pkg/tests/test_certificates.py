import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from affinecert import (
    F1,
    F2,
    AffinePrior,
    ConfidenceParams,
    SampleConfig,
    certify,
    delta_fn,
    draw_samples,
    epsilon_fn,
    epsilon_fn_d,
    rho1_bound,
    rho2_bound,
)
from affinecert.certificates import cap_measure, condition_ratio, first_bound, kappa_bar, second_bound
from affinecert.errors import DomainError
from affinecert.scenario import SOLVED, ScenarioSolution, SupportInfo

from oracles import hull_oracle


def eps_direct(k, N, beta, denom):
    return 1 - (beta / (denom * math.comb(N, k))) ** (1 / (N - k))


def solution(gamma, P):
    return ScenarioSolution(SOLVED, gamma, np.asarray(P, dtype=float), float(np.linalg.eigvalsh(P)[-1]), gamma)


def test_epsilon_examples():
    assert epsilon_fn(200, 200, 0.05) == 1.0
    assert epsilon_fn(0, 1, 0.5) == pytest.approx(0.5, abs=1e-15)
    assert epsilon_fn(3, 200, 0.05) == pytest.approx(0.1074, abs=1e-4)
    assert epsilon_fn(3, 200, 0.05) == pytest.approx(eps_direct(3, 200, 0.05, 200), rel=1e-12)


def test_epsilon_d_examples():
    assert epsilon_fn_d(4, 200, 0.05, 3) == 1.0
    assert epsilon_fn_d(3, 200, 0.05, 3) == pytest.approx(0.0895, abs=1e-4)
    assert epsilon_fn_d(3, 200, 0.05, 3) == pytest.approx(eps_direct(3, 200, 0.05, 4), rel=1e-12)
    assert epsilon_fn_d(0, 1, 0.5, 1) == pytest.approx(0.75, abs=1e-15)


def test_epsilon_domain_and_large_n():
    with pytest.raises(DomainError):
        epsilon_fn(5, 4, 0.1)
    with pytest.raises(DomainError):
        epsilon_fn_d(1, 10, 1.5, 3)
    v = epsilon_fn(500, 1_000_000, 1e-6)
    assert 0 < v < 1 and math.isfinite(v)


@given(st.integers(1, 400), st.floats(1e-6, 0.5), st.integers(0, 20))
def test_epsilon_monotone(N, beta, k):
    k = min(k, N - 1)
    e = epsilon_fn(k, N, beta)
    assert e <= epsilon_fn(k + 1, N, beta) + 1e-15
    assert epsilon_fn(k, N + 1, beta) <= e + 1e-15
    # a looser confidence level (larger beta) shrinks epsilon
    assert epsilon_fn(k, N, beta * 1.5) <= e
    assert epsilon_fn(k, N, beta / 2) > e


def test_delta_examples():
    assert delta_fn(0.0, 2) == 1.0 and delta_fn(1.0, 2) == 0.0
    assert delta_fn(0.0, 5) == 1.0 and delta_fn(1.0, 5) == 0.0
    assert delta_fn(0.25, 2) == pytest.approx(math.cos(math.pi / 4), abs=1e-12)
    assert delta_fn(0.5, 3) == 0.0
    with pytest.raises(DomainError):
        delta_fn(1.2, 2)
    with pytest.raises(DomainError):
        delta_fn(0.1, 1)


def test_delta_n2_closed_form():
    for e in np.linspace(0, 0.499, 200):
        assert abs(delta_fn(float(e), 2) - math.cos(math.pi * e)) <= 1e-9


@pytest.mark.parametrize("eps", [0.05, 0.1, 0.2])
def test_delta_n3_hull_oracle(eps):
    assert abs(delta_fn(eps, 3) - hull_oracle(eps)) <= 1e-2


@pytest.mark.parametrize("n", [4, 5, 7])
def test_cap_measure_quadrature(n):
    # independent check of the regularized incomplete beta form
    total = integrate.quad(lambda t: math.sin(t) ** (n - 2), 0, math.pi)[0]
    for theta in (0.3, 1.0, 1.4, 2.0):
        part = integrate.quad(lambda t: math.sin(t) ** (n - 2), 0, theta)[0]
        assert cap_measure(theta, n) == pytest.approx(part / total, abs=1e-10)
    d = delta_fn(0.1, n)
    assert cap_measure(math.acos(d), n) == pytest.approx(0.1, abs=1e-10)


def test_delta_n4_hull_oracle():
    assert abs(delta_fn(0.1, 4) - hull_oracle(0.1, n=4, m=40000)) <= 2e-2


@given(st.integers(2, 6), st.floats(0, 0.498), st.floats(1e-4, 0.4))
def test_delta_strictly_decreasing(n, e1, gap):
    e2 = min(e1 + gap, 0.499)
    if e2 > e1:
        assert delta_fn(e1, n) > delta_fn(e2, n)


def test_rho1_linear_limit():
    r, d = first_bound(0.9, np.eye(2), 0.0, 2, 0.0, 3.0)
    assert r == pytest.approx(0.9, abs=1e-15) and d == 1.0


def test_rho1_no_certificate():
    P = np.eye(2)
    # M * kbar * eps = 2 * 1 * 0.3 = 0.6
    assert first_bound(0.5, P, 0.3, 2, 0.1, 3.0)[0] is None
    assert rho1_bound(solution(0.5, P), SupportInfo(3, (), "d-bound"), AffinePrior(0.1),
                      ConfidenceParams(0.05, 4, 2, 2), 3.0) is None


def test_rho1_b_zero_reduction():
    P = np.array([[3.0, 0.5], [0.5, 1.0]])
    eps = 0.01
    r, d = first_bound(0.7, P, eps, 2, 0.0, 3.0)
    assert d == delta_fn(2 * kappa_bar(P) * eps, 2)
    assert r == 0.7 / math.sqrt(d)


@given(st.floats(0.1, 2.0), st.floats(0.0, 2.0), st.floats(0.5, 10.0), st.floats(1.0, 5.0))
def test_rho1_monotone(gamma, B, R, t):
    P = np.array([[2.0, 0.3], [0.3, 1.0]])
    base = first_bound(gamma, P, 0.02, 2, B, R)[0]
    assert first_bound(gamma, P, 0.02, 2, B + 0.1, R)[0] > base
    assert first_bound(gamma, P, 0.02, 2, B + 0.1, R * t)[0] <= first_bound(gamma, P, 0.02, 2, B + 0.1, R)[0]


def test_rho2_examples():
    r, ell, d = second_bound(0.5, np.eye(2), 0.0, 2, 3.0)
    assert r == 0.5 and ell.level == 3.0 and d == 1.0
    eps = math.acos(0.9) / math.pi
    r, ell, d = second_bound(0.4, np.diag([4.0, 1.0]), eps, 1, 3.0)
    assert d == pytest.approx(0.9, abs=1e-12)
    assert r == pytest.approx(0.4 * 2 / 0.9, rel=1e-12)
    assert ell.level == pytest.approx(5.4, rel=1e-12)
    assert second_bound(0.4, np.eye(2), 0.3, 2, 3.0)[:2] == (None, None)


def test_ellipsoid_rule_is_strict():
    r, ell, _ = second_bound(1.0, np.eye(2), 0.0, 2, 3.0)
    assert r == 1.0 and ell is None


def test_rho2_bound_wrapper():
    r, ell = rho2_bound(solution(0.5, np.eye(2)), SupportInfo(3, (), "d-bound"), ConfidenceParams(0.05, 200, 2, 2), 3.0)
    expect = 0.5 / math.cos(math.pi * 2 * epsilon_fn_d(3, 200, 0.05, 3))
    assert r == pytest.approx(expect, rel=1e-6)
    assert ell is not None


def test_kappa_definitions():
    P = np.diag([4.0, 1.0, 2.0])
    assert condition_ratio(P) == 4.0
    assert kappa_bar(P) == pytest.approx(math.sqrt(8.0))


def test_certify_pipeline_and_report():
    omega = draw_samples(F1, SampleConfig(R=3.0, N=200, seed=1))
    rep = certify(omega)
    assert rep.status == "solved" and rep.rho1 is None and rep.rho2 is not None
    assert rep.s == 3 and rep.epsilon == pytest.approx(0.0895, abs=1e-4)
    assert (rep.ellipsoid is not None) == (rep.rho2 < 1)
    with_prior = certify(omega, prior=AffinePrior(0.25))
    assert with_prior.rho1 is not None and with_prior.rho1 >= 0
    doc = json.loads(json.dumps(with_prior.to_dict()))
    assert doc["input"]["N"] == 200 and doc["input"]["seed"] == 1 and doc["ellipsoid_rule"] == "strict: rho2 < 1"


def test_certify_deterministic():
    omega = draw_samples(F2, SampleConfig(R=3.0, N=200, seed=2))
    a, b = certify(omega, prior=AffinePrior(1.0)), certify(omega, prior=AffinePrior(1.0))
    assert (a.gamma, a.rho1, a.rho2) == (b.gamma, b.rho1, b.rho2)


def test_params_validation():
    with pytest.raises(ValueError):
        ConfidenceParams(0.0, 10, 2, 2)
    with pytest.raises(ValueError):
        ConfidenceParams(0.1, 10, 2, 2, "eq12")
    with pytest.raises(ValueError):
        AffinePrior(-1.0)
