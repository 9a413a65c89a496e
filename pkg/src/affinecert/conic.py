"""Small dense cone programs over symmetric matrices, solved with cvxopt.

A symmetric n x n matrix P is parametrized by its upper-triangular entries
(row-major, i <= j), d = n(n+1)/2 numbers.  Constraints are assembled in
cvxopt's ``G x + s = h, s in K`` form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from cvxopt import matrix, solvers

SOLVER_OPTIONS = {
    "show_progress": False,
    "abstol": 1e-9,
    "reltol": 1e-9,
    "feastol": 1e-9,
    "maxiters": 200,
}
# second attempt after an interior-point breakdown: cvxopt default tolerances
FALLBACK_OPTIONS = {"show_progress": False, "maxiters": 200}
FAILED = "failed"


def sym_basis(n: int) -> np.ndarray:
    """Basis E_ij (i <= j) of symmetric matrices, shape (d, n, n)."""
    out = []
    for i in range(n):
        for j in range(i, n):
            E = np.zeros((n, n))
            E[i, j] = E[j, i] = 1.0
            out.append(E)
    return np.array(out)


def vech(P: np.ndarray) -> np.ndarray:
    return P[np.triu_indices(P.shape[0])]


def unvech(p: np.ndarray, n: int) -> np.ndarray:
    P = np.zeros((n, n))
    P[np.triu_indices(n)] = p
    return P + np.triu(P, 1).T


def frobenius_weights(n: int) -> np.ndarray:
    """w with ||P||_F^2 = sum_k w_k p_k^2."""
    iu = np.triu_indices(n)
    return np.where(iu[0] == iu[1], 1.0, 2.0)


def quad_coeffs(X: np.ndarray) -> np.ndarray:
    """Rows c_k with x_k^T P x_k = c_k . vech(P) for each row x_k of X."""
    n = X.shape[1]
    i, j = np.triu_indices(n)
    return np.where(i == j, 1.0, 2.0) * X[:, i] * X[:, j]


@dataclass
class ConeProgram:
    """Accumulates constraints ``G x <=_K h`` over ``nvar`` variables."""

    nvar: int
    lin_G: list = field(default_factory=list)
    lin_h: list = field(default_factory=list)
    sdp: list = field(default_factory=list)

    def add_linear(self, G: np.ndarray, h: np.ndarray) -> None:
        self.lin_G.append(np.atleast_2d(G))
        self.lin_h.append(np.atleast_1d(h))

    def add_lmi(self, coeffs: np.ndarray, const: np.ndarray) -> None:
        """Require sum_j x_j coeffs[j] + const to be positive semidefinite."""
        k = const.shape[0]
        G = -np.asarray(coeffs).reshape(self.nvar, k * k).T
        self.sdp.append((G, np.asarray(const, dtype=float).reshape(k * k), k))

    def _assemble(self):
        Gs = self.lin_G + [g for g, _, _ in self.sdp]
        hs = self.lin_h + [h for _, h, _ in self.sdp]
        m = sum(len(h) for h in self.lin_h)
        dims = {"l": m, "q": [], "s": [k for _, _, k in self.sdp]}
        G = np.vstack(Gs) if Gs else np.zeros((0, self.nvar))
        h = np.concatenate(hs) if hs else np.zeros(0)
        return matrix(G), matrix(h), dims

    def minimize_linear(self, c: np.ndarray, options: dict | None = None):
        G, h, dims = self._assemble()
        c = matrix(np.asarray(c, dtype=float))
        return _attempt(lambda o: solvers.conelp(c, G, h, dims, options=o), options)

    def minimize_quadratic(self, H: np.ndarray, q: np.ndarray, options: dict | None = None):
        G, h, dims = self._assemble()
        H, q = matrix(H), matrix(np.asarray(q, dtype=float))
        return _attempt(lambda o: solvers.coneqp(H, q, G, h, dims, options=o), options)


def _attempt(run, options):
    """(status, x); status is FAILED with x None when every attempt breaks down."""
    for opts in ([options] if options else [SOLVER_OPTIONS, FALLBACK_OPTIONS]):
        try:
            sol = run(opts)
        except (ArithmeticError, ValueError):
            # cvxopt signals loss of positivity as ZeroDivisionError or "domain error"
            continue
        return sol["status"], _vec(sol["x"])
    return FAILED, None


def _vec(x) -> np.ndarray | None:
    return None if x is None else np.array(x).reshape(-1)
