"""Violation levels, the cap-radius function and the two JSR certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from .errors import DomainError
from .sampling import SampleSet
from .scenario import (
    ScenarioConfig,
    ScenarioSolution,
    SupportInfo,
    d_bound,
    solve_gevp,
    support_subsample,
)

EPS_VARIANTS = ("eq10", "eq11")


def _log_binom(N: int, k: int) -> float:
    return math.lgamma(N + 1) - math.lgamma(k + 1) - math.lgamma(N - k + 1)


def _check_k(k: int, N: int, beta: float) -> None:
    if not 0 <= k <= N:
        raise DomainError(f"need 0 <= k <= N, got k={k}, N={N}")
    if not 0 < beta < 1:
        raise DomainError("beta must lie in (0, 1)")


def epsilon_fn(k: int, N: int, beta: float) -> float:
    """1 - (beta / (N * C(N, k)))**(1/(N-k)) for k < N, and 1 at k = N."""
    _check_k(k, N, beta)
    if k == N:
        return 1.0
    log_ratio = math.log(beta) - math.log(N) - _log_binom(N, k)
    return -math.expm1(log_ratio / (N - k))


def epsilon_fn_d(k: int, N: int, beta: float, d: int) -> float:
    """Variant for problems whose support is at most d: 1 once k exceeds d."""
    _check_k(k, N, beta)
    if d < 0:
        raise DomainError("d must be >= 0")
    if k >= d + 1 or k == N:
        return 1.0
    log_ratio = math.log(beta) - math.log(d + 1) - _log_binom(N, k)
    return -math.expm1(log_ratio / (N - k))


def cap_measure(theta: float, n: int) -> float:
    """Normalized surface measure of a spherical cap of half-angle theta in R^n."""
    if n < 2:
        raise DomainError("caps need n >= 2")
    theta = min(max(theta, 0.0), math.pi)
    if n == 2:
        return theta / math.pi
    if n == 3:
        return 0.5 * (1.0 - math.cos(theta))
    half = 0.5 * special.betainc(0.5 * (n - 1), 0.5, math.sin(theta) ** 2)
    return half if theta <= math.pi / 2 else 1.0 - half


def delta_fn(eps: float, n: int) -> float:
    """Largest s such that S_{sR} lies in the hull of S_R minus a cap of measure eps.

    Equals cos(theta) where the cap of half-angle theta has measure eps; zero
    once eps reaches 1/2 (the remaining hull no longer surrounds the origin).
    """
    if not 0.0 <= eps <= 1.0:
        raise DomainError(f"eps must lie in [0, 1], got {eps}")
    if n < 2:
        raise DomainError("delta is defined for n >= 2")
    if eps >= 0.5:
        return 0.0
    if eps == 0.0:
        return 1.0
    if n == 2:
        return math.cos(math.pi * eps)
    if n == 3:
        return 1.0 - 2.0 * eps
    theta = optimize.brentq(lambda t: cap_measure(t, n) - eps, 0.0, math.pi / 2, xtol=1e-13, rtol=1e-15)
    return math.cos(theta)


@dataclass(frozen=True)
class ConfidenceParams:
    beta: float
    N: int
    M: int
    n: int
    epsilon_variant: str = "eq11"

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if self.epsilon_variant not in EPS_VARIANTS:
            raise ValueError(f"epsilon_variant must be one of {EPS_VARIANTS}")

    def epsilon(self, s: int) -> float:
        if self.epsilon_variant == "eq10":
            return epsilon_fn(s, self.N, self.beta)
        return epsilon_fn_d(s, self.N, self.beta, d_bound(self.n))


@dataclass(frozen=True)
class AffinePrior:
    """B bounds the Euclidean norm of every affine term b_i."""

    B: float

    def __post_init__(self):
        if not self.B >= 0:
            raise ValueError("B must be >= 0")


@dataclass(frozen=True, eq=False)
class InvariantEllipsoid:
    """{x : x' P x <= level**2}."""

    P: np.ndarray
    level: float

    def __post_init__(self):
        if not self.level > 0:
            raise ValueError("level must be > 0")

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(math.sqrt(max(x @ self.P @ x, 0.0)) <= self.level + tol)


def condition_ratio(P: np.ndarray) -> float:
    ev = np.linalg.eigvalsh(P)
    return float(ev[-1] / ev[0])


def kappa_bar(P: np.ndarray) -> float:
    """sqrt(det(P) / lambda_min(P)**n), computed from the eigenvalues."""
    ev = np.linalg.eigvalsh(P)
    return float(math.sqrt(np.prod(ev / ev[0])))


def first_bound(gamma: float, P: np.ndarray, eps: float, M: int, B: float, R: float) -> tuple[float | None, float]:
    """(gamma + (B/R) sqrt(kappa)) / sqrt(delta(M kbar eps)); returns (bound or None, delta)."""
    if R <= 0:
        raise ValueError("R must be > 0")
    arg = M * kappa_bar(P) * eps
    if arg >= 0.5:
        return None, 0.0
    delta = delta_fn(arg, P.shape[0])
    return (gamma + (B / R) * math.sqrt(condition_ratio(P))) / math.sqrt(delta), delta


def second_bound(
    gamma: float, P: np.ndarray, eps: float, M: int, R: float
) -> tuple[float | None, InvariantEllipsoid | None, float]:
    """gamma sqrt(kappa) / delta(eps M), the ellipsoid when that is < 1, and delta."""
    if R <= 0:
        raise ValueError("R must be > 0")
    arg = eps * M
    if arg >= 0.5:
        return None, None, 0.0
    delta = delta_fn(arg, P.shape[0])
    ev = np.linalg.eigvalsh(P)
    rho2 = gamma * math.sqrt(ev[-1] / ev[0]) / delta
    ell = InvariantEllipsoid(P, math.sqrt(ev[-1]) * R * delta) if rho2 < 1.0 else None
    return rho2, ell, delta


def rho1_bound(
    solution: ScenarioSolution,
    support: SupportInfo,
    prior: AffinePrior,
    cfg: ConfidenceParams,
    R: float,
) -> float | None:
    """(gamma + (B/R) sqrt(kappa)) / sqrt(delta(M * kbar * eps(s))), or None.

    kappa is the eigenvalue ratio of P and kbar = sqrt(det P / lambda_min^n).
    None means the delta argument reached 1/2 and no bound follows.
    """
    return _rho1(solution, support, prior, cfg, R)[0]


def _rho1(solution, support, prior, cfg, R):
    eps = cfg.epsilon(support.s)
    return first_bound(solution.gamma_used, solution.P, eps, cfg.M, prior.B, R)


def rho2_bound(
    solution: ScenarioSolution,
    support: SupportInfo,
    cfg: ConfidenceParams,
    R: float,
) -> tuple[float | None, InvariantEllipsoid | None]:
    """gamma sqrt(kappa) / delta(eps(s) M) and, when it is below 1, the ellipsoid.

    The ellipsoid level is sqrt(lambda_max(P)) R delta(eps(s) M).
    """
    return _rho2(solution, support, cfg, R)[:2]


def _rho2(solution, support, cfg, R):
    return second_bound(solution.gamma_used, solution.P, cfg.epsilon(support.s), cfg.M, R)


@dataclass(frozen=True, eq=False)
class CertificateReport:
    status: str
    gamma: float
    P: np.ndarray | None
    s: int | None
    epsilon: float | None
    delta1: float | None
    delta2: float | None
    rho1: float | None
    rho2: float | None
    ellipsoid: InvariantEllipsoid | None
    beta: float
    kappa: float | None = None
    support: SupportInfo | None = None
    solution: ScenarioSolution | None = None
    echo: dict = field(default_factory=dict)
    ellipsoid_rule: str = "strict: rho2 < 1"

    @property
    def certified(self) -> bool:
        return (self.rho1 is not None and self.rho1 < 1) or (self.rho2 is not None and self.rho2 < 1)

    def to_dict(self) -> dict:
        sol = self.solution
        return {
            "status": self.status,
            "gamma": self.gamma,
            "gamma_bisection": None if sol is None else sol.gamma,
            "P": None if self.P is None else self.P.tolist(),
            "alpha": None if sol is None else sol.alpha,
            "kappa": self.kappa,
            "s": self.s,
            "method": None if self.support is None else self.support.method,
            "support_indices": None if self.support is None else list(self.support.indices),
            "epsilon": self.epsilon,
            "delta1": self.delta1,
            "delta2": self.delta2,
            "rho1": self.rho1,
            "rho2": self.rho2,
            "beta": self.beta,
            "ellipsoid": None if self.ellipsoid is None else {
                "P": self.ellipsoid.P.tolist(), "level": self.ellipsoid.level,
            },
            "ellipsoid_rule": self.ellipsoid_rule,
            "scenario_config": None if sol is None else sol.config.to_dict(),
            "input": self.echo,
        }


def certify(
    omega: SampleSet,
    scenario_cfg: ScenarioConfig = ScenarioConfig(),
    conf: ConfidenceParams | None = None,
    prior: AffinePrior | None = None,
    beta: float = 0.05,
    support_method: str = "d-bound",
    R: float | None = None,
) -> CertificateReport:
    """Solve, tie-break, bound the support and evaluate both certificates.

    ``conf`` defaults to the d-bounded epsilon built from ``beta`` and the
    data set; ``R`` defaults to the sampling radius recorded in (or
    measured from) ``omega``.
    """
    if conf is None:
        conf = ConfidenceParams(beta, len(omega), omega.M, omega.n)
    if R is None:
        R = omega.config.R if omega.config is not None else float(np.linalg.norm(omega.x0[0]))
    echo = {
        "N": len(omega), "R": R, "beta": conf.beta, "M": conf.M, "n": conf.n,
        "epsilon_variant": conf.epsilon_variant, "support_method": support_method,
        "B": None if prior is None else prior.B,
    }
    if omega.config is not None:
        echo.update(seed=omega.config.seed, stream=omega.config.stream, l=omega.config.l)
    sol = solve_gevp(omega, scenario_cfg)
    if not sol.solved:
        return CertificateReport(sol.status, sol.gamma, None, None, None, None, None, None, None, None,
                                 conf.beta, solution=sol, echo=echo)
    sup = support_subsample(omega, sol, scenario_cfg, method=support_method)
    eps = conf.epsilon(sup.s)
    rho1 = delta1 = None
    if prior is not None:
        rho1, delta1 = _rho1(sol, sup, prior, conf, R)
    rho2, ell, delta2 = _rho2(sol, sup, conf, R)
    return CertificateReport(
        sol.status, sol.gamma_used, sol.P, sup.s, eps, delta1, delta2, rho1, rho2, ell, conf.beta,
        kappa=condition_ratio(sol.P), support=sup, solution=sol, echo=echo,
    )
