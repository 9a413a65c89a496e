"""Ground-truth checks that use the true (A_i, b_i).

Nothing here is part of the data-driven pipeline; these routines exist to
validate its probabilistic claims.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.spatial.distance import directed_hausdorff

from .certificates import InvariantEllipsoid
from .conic import ConeProgram, sym_basis, unvech
from .errors import DomainError, SizeLimitError
from .hull import hull_vertices
from .system import SwitchedAffineSystem

JSR_CAP = 2_000_000
POINT_CAP = 100_000


def _matrices(A_set) -> np.ndarray:
    if isinstance(A_set, SwitchedAffineSystem):
        return A_set.A
    A = np.asarray(A_set, dtype=float)
    if A.ndim == 2:
        A = A[None]
    if A.ndim != 3 or A.shape[1] != A.shape[2]:
        raise ValueError("expected a stack of square matrices")
    return A


def sqrtm_psd(P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric square root of P and its inverse (eigenvalue floor 1e-14 relative)."""
    w, V = np.linalg.eigh(P)
    if w[0] <= 0:
        raise DomainError("P must be positive definite")
    w = np.maximum(w, 1e-14 * w[-1])
    s = np.sqrt(w)
    return (V * s) @ V.T, (V / s) @ V.T


def induced_norm(X: np.ndarray, P: np.ndarray | None = None) -> np.ndarray:
    """Operator norm of X (or a stack of them) induced by ||x||_P = sqrt(x'Px)."""
    X = np.asarray(X, dtype=float)
    if P is not None:
        S, Si = sqrtm_psd(P)
        X = S @ X @ Si
    return np.linalg.norm(X, ord=2, axis=(-2, -1))


@dataclass(frozen=True)
class JsrBounds:
    lower: float
    upper: float
    depth: int
    lower_by_length: tuple[float, ...] = ()
    upper_by_length: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "depth": self.depth,
            "lower_by_length": list(self.lower_by_length),
            "upper_by_length": list(self.upper_by_length),
        }


@dataclass(frozen=True, eq=False)
class ContractiveNorm:
    """x -> sqrt(x'Px) with ||A_i x||_P <= rho_tilde ||x||_P for every i."""

    P: np.ndarray
    rho_tilde: float


def jsr_bruteforce(A_set, l_max: int, norm: ContractiveNorm | np.ndarray | None = None, cap: int = JSR_CAP) -> JsrBounds:
    """Lower and upper JSR bounds from all products of length <= l_max.

    lower = max_l max_prod rho(prod)^(1/l);
    upper = min_l max_prod ||prod||_P^(1/l) with P from ``norm`` (identity
    by default).
    """
    A = _matrices(A_set)
    M, n = A.shape[0], A.shape[1]
    if l_max < 1:
        raise ValueError("l_max must be >= 1")
    total = sum(M**l for l in range(1, l_max + 1))
    if total > cap:
        raise SizeLimitError(f"{total} products exceed the enumeration cap {cap}")
    P = norm.P if isinstance(norm, ContractiveNorm) else norm
    if P is not None:
        S, Si = sqrtm_psd(np.asarray(P, dtype=float))
        B = S @ A @ Si  # similarity keeps spectra and turns ||.||_P into ||.||_2
    else:
        B = A
    lows, ups = [], []
    prods = B
    for l in range(1, l_max + 1):
        if l > 1:
            # word (j1..jl) -> B_jl ... B_j1, lexicographic in the word
            prods = np.einsum("jpq,wqr->wjpr", B, prods).reshape(-1, n, n)
        rad = np.max(np.abs(np.linalg.eigvals(prods)))
        nrm = np.max(np.linalg.norm(prods, ord=2, axis=(1, 2)))
        lows.append(float(rad ** (1.0 / l)))
        ups.append(float(nrm ** (1.0 / l)))
    return JsrBounds(
        lower=max(lows),
        upper=min(ups),
        depth=l_max,
        lower_by_length=tuple(lows),
        upper_by_length=tuple(ups),
    )


def _lyapunov_candidate(A: np.ndarray, rho: float, kappa_cap: float) -> np.ndarray | None:
    """Best P (trace-normalized) for A_i' P A_i <= rho^2 P + t I, minimizing t."""
    n = A.shape[1]
    basis = sym_basis(n)
    d = len(basis)
    prog = ConeProgram(d + 1)
    for Ai in A:
        coeffs = rho**2 * basis - np.einsum("pi,kpq,qj->kij", Ai, basis, Ai)
        prog.add_lmi(np.concatenate([coeffs, np.eye(n)[None]]), np.zeros((n, n)))
    prog.add_linear(np.append(np.trace(basis, axis1=1, axis2=2), 0.0), np.ones(1))
    prog.add_lmi(np.concatenate([basis, np.zeros((1, n, n))]), -np.eye(n) / kappa_cap)
    c = np.zeros(d + 1)
    c[-1] = 1.0
    _, x = prog.minimize_linear(c)
    if x is None or not np.all(np.isfinite(x)):
        return None
    P = unvech(x[:d], n)
    lmin = np.linalg.eigvalsh(P)[0]
    return None if lmin <= 0 else P / lmin


def common_lyapunov_norm(A_set, tol: float = 1e-4, kappa_cap: float = 1e6) -> ContractiveNorm | None:
    """Smallest rho (within tol) admitting P >= I with A_i' P A_i <= rho^2 P.

    This is the best ellipsoidal contractive norm, which can exceed the JSR.
    Returns None when no such norm contracts (rho >= 1).
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    A = _matrices(A_set)

    def achieved(rho):
        P = _lyapunov_candidate(A, rho, kappa_cap)
        if P is None:
            return None, math.inf
        return P, float(np.max(induced_norm(A, P)))

    hi = min(float(np.max(induced_norm(A))), 1.0)
    best_P, best_rho = np.eye(A.shape[1]), float(np.max(induced_norm(A)))
    P, r = achieved(hi)
    if r < best_rho:
        best_P, best_rho = P, r
    if best_rho >= 1.0:
        return None
    lo = 0.0
    hi = best_rho
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        P, r = achieved(mid)
        if r <= mid * (1 + 1e-9):
            hi = r
            if r < best_rho:
                best_P, best_rho = P, r
        else:
            lo = mid
    return ContractiveNorm(best_P, best_rho)


@dataclass(frozen=True, eq=False)
class AttractorApprox:
    """Point sets K_0..K_k of the reachable affine combinations."""

    iterates: list
    hull_pruned: bool
    gaps: tuple[float, ...] = ()  # Hausdorff distance between successive stored sets

    @property
    def last(self) -> np.ndarray:
        return self.iterates[-1]


def attractor_iterate(sys: SwitchedAffineSystem, k_max: int, prune: bool = False, cap: int = POINT_CAP) -> AttractorApprox:
    """K_0 = {0}, K_j = {A_i x + b_i : i, x in K_(j-1)}.

    With ``prune`` each K_j is replaced by the vertices of its convex hull,
    which leaves co(K_j) and hence co(K_inf) unchanged because the maps are
    affine.  Points of K_j are ordered mode-major.
    """
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    K = [np.zeros((1, sys.n))]
    gaps = []
    for j in range(1, k_max + 1):
        prev = K[-1]
        nxt = (np.einsum("ipq,kq->ikp", sys.A, prev) + sys.b[:, None, :]).reshape(-1, sys.n)
        if prune:
            nxt = hull_vertices(nxt)
        if len(nxt) > cap:
            hint = "" if prune else "; enable hull pruning"
            raise SizeLimitError(f"K_{j} has {len(nxt)} points, above the cap of {cap}{hint}")
        gaps.append(max(directed_hausdorff(nxt, prev)[0], directed_hausdorff(prev, nxt)[0]))
        K.append(nxt)
    return AttractorApprox(K, prune, tuple(gaps))


def attractor_bound(norm: ContractiveNorm, b_set) -> float:
    """Radius r in the P-norm with K_inf inside {x : ||x||_P <= r}."""
    if norm.rho_tilde >= 1:
        raise DomainError("the bound needs rho_tilde < 1")
    b = b_set.b if isinstance(b_set, SwitchedAffineSystem) else np.atleast_2d(np.asarray(b_set, dtype=float))
    bn = np.sqrt(np.einsum("ip,pq,iq->i", b, norm.P, b))
    return float(np.max(bn) / (1.0 - norm.rho_tilde))


def maximize_on_sphere(Mat: np.ndarray, m: np.ndarray, radius: float) -> tuple[float, np.ndarray]:
    """max ||Mat y + m|| over ||y|| = radius, with a maximizer.

    Stationarity gives (lam I - H) y = g with H = Mat'Mat, g = Mat'm and
    lam >= lambda_max(H); lam solves the secular equation ||y(lam)|| = radius.
    When g has no component along the top eigenspace and the remaining
    solution is short, lam = lambda_max and the top eigenvector fills the gap.
    """
    Mat = np.atleast_2d(np.asarray(Mat, dtype=float))
    m = np.asarray(m, dtype=float)
    H = Mat.T @ Mat
    g = Mat.T @ m
    w, V = np.linalg.eigh(H)
    gh = V.T @ g
    lam_max = w[-1]
    top = w >= lam_max - 1e-12 * max(1.0, abs(lam_max))
    g_top = float(np.linalg.norm(gh[top]))
    g_all = float(np.linalg.norm(g))
    rest = ~top

    # components that enter the secular equation; top ones vanish in the degenerate case
    live = np.ones_like(top)

    def y_of(lam):
        return V[:, live] @ (gh[live] / (lam - w[live]))

    hard = False
    if g_top <= 1e-14 * max(1.0, g_all):
        live = rest
        y_part = V[:, rest] @ (gh[rest] / (lam_max - w[rest])) if rest.any() else np.zeros_like(g)
        gap = radius**2 - float(y_part @ y_part)
        if gap >= 0:
            hard = True
            z = V[:, np.flatnonzero(top)[0]]
            y = y_part + math.sqrt(gap) * z
    if not hard:
        lo = lam_max + g_top / radius
        hi = lam_max + g_all / radius
        if hi <= lo:
            lam = lo
        else:
            phi = lambda lam: float(np.linalg.norm(gh[live] / (lam - w[live]))) - radius
            lam = optimize.brentq(phi, lo, hi, xtol=1e-15 * max(1.0, abs(hi)), rtol=4 * np.finfo(float).eps)
        y = y_of(lam)
        ny = np.linalg.norm(y)
        if ny > 0:
            y = y * (radius / ny)
    return float(np.linalg.norm(Mat @ y + m)), y


def boundary_max(A: np.ndarray, b: np.ndarray, P: np.ndarray, level: float) -> tuple[float, np.ndarray]:
    """max ||A x + b||_P over x'Px = level^2, and the maximizing x."""
    S, Si = sqrtm_psd(P)
    val, y = maximize_on_sphere(S @ A @ Si, S @ b, level)
    return val, Si @ y


@dataclass(frozen=True, eq=False)
class InvarianceVerdict:
    invariant: bool
    maxima: tuple[float, ...]  # per mode, max ||A_i x + b_i||_P on the boundary
    level: float
    mode: int | None = None  # 1-based worst violating mode
    witness: np.ndarray | None = None


def verify_ellipsoid_invariance(sys: SwitchedAffineSystem, ell: InvariantEllipsoid, tol: float = 1e-9) -> InvarianceVerdict:
    """Exact check of F(E) subset E for E = {x : x'Px <= level^2}.

    ||A_i x + b_i||_P is convex, so its maximum over E sits on the boundary.
    """
    P = np.asarray(ell.P, dtype=float)
    if np.linalg.eigvalsh(P)[0] <= 0:
        raise DomainError("the ellipsoid matrix must be positive definite")
    maxima, points = [], []
    for Ai, bi in sys.modes:
        v, x = boundary_max(Ai, bi, P, ell.level)
        maxima.append(v)
        points.append(x)
    worst = int(np.argmax(maxima))
    if maxima[worst] <= ell.level + tol:
        return InvarianceVerdict(True, tuple(maxima), ell.level)
    return InvarianceVerdict(False, tuple(maxima), ell.level, worst + 1, points[worst])
