"""The sampled Lyapunov problem, its tie-breaking rule and support subsamples.

For a fixed level gamma every observed pair (x0, x1) contributes the scalar
constraint ``x1' P x1 <= gamma^2 x0' P x0``, linear in the entries of P.  The
optimal gamma is located by bisection over the resulting semidefinite
feasibility problem; P is then selected by minimizing
``alpha + c ||P||_F^2`` subject to ``I <= P <= alpha I``.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict, field

import numpy as np

from .conic import ConeProgram, frobenius_weights, quad_coeffs, sym_basis, unvech
from .errors import InfeasibleError
from .sampling import SampleSet, make_rng, uniform_mode, uniform_sphere
from .system import SwitchedAffineSystem, lifted_system

SOLVED = "solved"
INFEASIBLE = "infeasible"
NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True)
class ScenarioConfig:
    gamma_tol: float = 1e-4
    gamma_hi: float = 10.0
    gamma_cap: float = 1e6
    c: float = 1e-3
    feas_tol: float = 1e-8
    gamma_inflate: float = 1e-6
    # upper bound on cond(P) inside the feasibility test; keeps it compact
    kappa_cap: float = 1e6

    def __post_init__(self):
        for name in ("gamma_tol", "gamma_hi", "gamma_cap", "c", "feas_tol", "gamma_inflate", "kappa_cap"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class Feasibility:
    status: str
    P: np.ndarray | None = None
    margin: float = float("nan")  # max_k (x1'Px1 - gamma^2 x0'Px0) / |x0|^2

    @property
    def feasible(self) -> bool:
        return self.status == SOLVED


@dataclass(frozen=True, eq=False)
class ScenarioSolution:
    """gamma is the bisection result; P certifies the level ``gamma_used``.

    ``gamma_used = gamma * (1 + gamma_inflate)`` is the level actually imposed
    on the data when P was selected, and the one downstream bounds use.
    """

    status: str
    gamma: float = float("nan")
    P: np.ndarray | None = None
    alpha: float = float("nan")
    gamma_used: float = float("nan")
    config: ScenarioConfig = field(default_factory=ScenarioConfig)

    @property
    def solved(self) -> bool:
        return self.status == SOLVED

    @property
    def kappa(self) -> float:
        """Eigenvalue ratio lambda_max(P) / lambda_min(P)."""
        ev = np.linalg.eigvalsh(self.P)
        return float(ev[-1] / ev[0])

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "gamma": self.gamma,
            "gamma_used": self.gamma_used,
            "P": None if self.P is None else self.P.tolist(),
            "alpha": self.alpha,
            "config": self.config.to_dict(),
        }


@dataclass(frozen=True)
class SupportInfo:
    s: int
    indices: tuple[int, ...]  # 0-based positions of retained samples
    method: str


def _constraint_rows(omega: SampleSet, gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """Rows a_k with a_k . vech(P) = x1'Px1 - gamma^2 x0'Px0, and |x0_k|^2."""
    A = quad_coeffs(omega.x1) - gamma**2 * quad_coeffs(omega.x0)
    return A, np.einsum("ij,ij->i", omega.x0, omega.x0)


def _check_data(omega: SampleSet) -> None:
    if len(omega) == 0:
        raise ValueError("the sample set is empty")
    if np.any(np.linalg.norm(omega.x0, axis=1) == 0.0):
        raise ValueError("x0 = 0 makes the sampled constraint trivially violated or void")


def residuals(omega: SampleSet, gamma: float, P: np.ndarray) -> np.ndarray:
    """x1'Px1 - gamma^2 x0'Px0 for every sample."""
    q1 = np.einsum("ki,ij,kj->k", omega.x1, P, omega.x1)
    q0 = np.einsum("ki,ij,kj->k", omega.x0, P, omega.x0)
    return q1 - gamma**2 * q0


def feasibility_lmi(omega: SampleSet, gamma: float, cfg: ScenarioConfig = ScenarioConfig()) -> Feasibility:
    """Decide whether some P with I <= P satisfies every sampled constraint.

    The constraints are homogeneous in P, so we solve the normalized program
    ``min t`` over (P, t) with ``a_k . P <= t |x0_k|^2``, ``tr P <= 1`` and
    ``P >= I / kappa_cap``.  A nonpositive optimum means feasibility; the
    verdict is taken on the recovered P, rescaled to lambda_min(P) = 1, with
    absolute slack ``feas_tol``.
    """
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    _check_data(omega)
    n = omega.n
    d = n * (n + 1) // 2
    rows, scale = _constraint_rows(omega, gamma)
    basis = sym_basis(n)
    prog = ConeProgram(d + 1)
    prog.add_linear(np.hstack([rows / scale[:, None], -np.ones((len(rows), 1))]), np.zeros(len(rows)))
    prog.add_linear(np.append(np.trace(basis, axis1=1, axis2=2), 0.0), np.ones(1))
    prog.add_lmi(np.concatenate([basis, np.zeros((1, n, n))]), -np.eye(n) / cfg.kappa_cap)
    c = np.zeros(d + 1)
    c[-1] = 1.0
    status, x = prog.minimize_linear(c)
    if x is None or not np.all(np.isfinite(x)):
        return Feasibility(NUMERICAL_FAILURE)
    P = unvech(x[:d], n)
    lmin = np.linalg.eigvalsh(P)[0]
    if lmin <= 0:
        return Feasibility(NUMERICAL_FAILURE)
    P = P / lmin
    res = residuals(omega, gamma, P)
    margin = float(np.max(res / scale))
    if np.max(res) <= cfg.feas_tol:
        return Feasibility(SOLVED, P, margin)
    if status == "optimal" or x[-1] > 1e-7:
        return Feasibility(INFEASIBLE, None, margin)
    return Feasibility(NUMERICAL_FAILURE, None, margin)


def tie_break(omega: SampleSet, gamma: float, cfg: ScenarioConfig = ScenarioConfig()) -> ScenarioSolution:
    """Select P at level gamma by minimizing alpha + c ||P||_F^2, I <= P <= alpha I."""
    _check_data(omega)
    n = omega.n
    d = n * (n + 1) // 2
    rows, scale = _constraint_rows(omega, gamma)
    prog = ConeProgram(d + 1)
    prog.add_linear(np.hstack([rows / scale[:, None], np.zeros((len(rows), 1))]), np.zeros(len(rows)))
    basis = sym_basis(n)
    prog.add_lmi(np.concatenate([basis, np.zeros((1, n, n))]), -np.eye(n))
    prog.add_lmi(np.concatenate([-basis, np.eye(n)[None]]), np.zeros((n, n)))
    H = np.diag(np.concatenate([2 * cfg.c * frobenius_weights(n), [0.0]]))
    q = np.zeros(d + 1)
    q[-1] = 1.0
    status, x = prog.minimize_quadratic(H, q)
    if x is None:
        raise InfeasibleError(f"tie-break solver failed at gamma={gamma} ({status})")
    P = unvech(x[:d], n)
    res = residuals(omega, gamma, P)
    if status != "optimal" and (np.max(res) > cfg.feas_tol or np.linalg.eigvalsh(P)[0] < 1 - 1e-8):
        raise InfeasibleError(f"no P satisfies the sampled constraints at gamma={gamma} ({status})")
    if np.max(res) > cfg.feas_tol:
        raise InfeasibleError(f"sampled constraints violated by {np.max(res):.3g} at gamma={gamma}")
    return ScenarioSolution(SOLVED, gamma, P, float(x[-1]), gamma, cfg)


def solve_gevp(omega: SampleSet, cfg: ScenarioConfig = ScenarioConfig()) -> ScenarioSolution:
    """Bisection on gamma followed by the tie-breaking selection of P.

    The feasible set in P grows with gamma, so the returned gamma is within
    ``gamma_tol`` above the infimum.
    """
    _check_data(omega)
    hi = cfg.gamma_hi
    while True:
        f = feasibility_lmi(omega, hi, cfg)
        if f.status == NUMERICAL_FAILURE:
            return ScenarioSolution(NUMERICAL_FAILURE, config=cfg)
        if f.feasible:
            break
        hi *= 2.0
        if hi > cfg.gamma_cap:
            return ScenarioSolution(INFEASIBLE, config=cfg)
    lo = 0.0
    while hi - lo > cfg.gamma_tol:
        mid = 0.5 * (lo + hi)
        f = feasibility_lmi(omega, mid, cfg)
        if f.status == NUMERICAL_FAILURE:
            return ScenarioSolution(NUMERICAL_FAILURE, config=cfg)
        if f.feasible:
            hi = mid
        else:
            lo = mid
    used = hi * (1.0 + cfg.gamma_inflate)
    try:
        sel = tie_break(omega, used, cfg)
    except InfeasibleError:
        return ScenarioSolution(NUMERICAL_FAILURE, gamma=hi, config=cfg)
    return ScenarioSolution(SOLVED, hi, sel.P, sel.alpha, used, cfg)


def d_bound(n: int) -> int:
    return n * (n + 1) // 2


def support_subsample(
    omega: SampleSet,
    solution: ScenarioSolution,
    cfg: ScenarioConfig = ScenarioConfig(),
    method: str = "greedy",
    p_tol: float = 1e-6,
) -> SupportInfo:
    """Upper-bound the size of a support subsample.

    ``greedy`` visits samples in index order and drops one whenever the
    remaining set still yields the same gamma (within ``gamma_tol``) and the
    same tie-broken P (within ``p_tol`` in Frobenius norm).  ``d-bound``
    returns n(n+1)/2 without solving anything.
    """
    if method == "d-bound":
        return SupportInfo(min(d_bound(omega.n), len(omega)), (), "d-bound")
    if method != "greedy":
        raise ValueError(f"unknown support method {method!r}")
    if not solution.solved:
        raise ValueError("support subsamples need a solved instance")
    keep = list(range(len(omega)))
    for i in range(len(omega)):
        cand = [k for k in keep if k != i]
        if not cand:
            continue
        sub = omega.subset(cand)
        probe = solution.gamma - cfg.gamma_tol
        if probe > 0:
            f = feasibility_lmi(sub, probe, cfg)
            if f.status != INFEASIBLE:
                continue  # gamma would drop, or we cannot tell
        try:
            P = tie_break(sub, solution.gamma_used, cfg).P
        except InfeasibleError:
            continue
        if np.linalg.norm(P - solution.P) <= p_tol:
            keep = cand
    return SupportInfo(len(keep), tuple(keep), "greedy")


def violation_estimate(
    sys: SwitchedAffineSystem,
    solution: ScenarioSolution,
    R: float,
    n_mc: int,
    rng: np.random.Generator | int,
    l: int = 1,
) -> float:
    """Monte Carlo estimate of mu{(x, mode): ||x1||_P > gamma ||x||_P} on S_R.

    White-box check: needs the true system to evaluate fresh transitions.
    """
    if n_mc < 1:
        raise ValueError("n_mc must be >= 1")
    if isinstance(rng, (int, np.integer)):
        rng = make_rng(int(rng))
    target = lifted_system(sys, l) if l > 1 else sys
    x = uniform_sphere(sys.n, R, rng, size=n_mc)
    idx = uniform_mode(target.M, rng, size=n_mc) - 1
    y = np.einsum("kij,kj->ki", target.A[idx], x) + target.b[idx]
    P = solution.P
    lhs = np.einsum("ki,ij,kj->k", y, P, y)
    rhs = solution.gamma_used**2 * np.einsum("ki,ij,kj->k", x, P, x)
    return float(np.mean(lhs > rhs))
