"""Switched affine systems x(k+1) = A_sigma(k) x(k) + b_sigma(k).

Mode indices are 1-based at every public entry point and 0-based inside
the arrays held by :class:`SwitchedAffineSystem`.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, ModeIndexError, SizeLimitError

LIFT_CAP = 4096
SINGULAR_RTOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SwitchedAffineSystem:
    """The family of pairs (A_i, b_i), i = 1..M, acting on R^n.

    ``A`` has shape (M, n, n) and ``b`` shape (M, n).
    """

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if A.ndim != 3 or A.shape[1] != A.shape[2] or A.shape[0] < 1:
            raise DimensionError(f"A must have shape (M, n, n) with M >= 1, got {A.shape}")
        if b.shape != A.shape[:2]:
            raise DimensionError(f"b must have shape {A.shape[:2]}, got {b.shape}")
        if A.shape[1] < 1:
            raise DimensionError("state dimension must be >= 1")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("system data must be finite")
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "b", _frozen(b))

    @classmethod
    def from_modes(cls, modes: Iterable[tuple[Sequence, Sequence]]) -> "SwitchedAffineSystem":
        pairs = list(modes)
        if not pairs:
            raise DimensionError("at least one mode is required")
        A = [np.atleast_2d(np.asarray(a, dtype=float)) for a, _ in pairs]
        b = [np.atleast_1d(np.asarray(v, dtype=float)) for _, v in pairs]
        shapes = {a.shape for a in A} | {(v.shape[0], v.shape[0]) for v in b}
        if len(shapes) != 1:
            raise DimensionError(f"inconsistent mode shapes: {sorted(shapes)}")
        return cls(np.stack(A), np.stack(b))

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def M(self) -> int:
        return self.A.shape[0]

    @property
    def modes(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [(self.A[i], self.b[i]) for i in range(self.M)]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "modes": [{"A": a.tolist(), "b": v.tolist()} for a, v in self.modes],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SwitchedAffineSystem":
        sys = cls.from_modes((m["A"], m["b"]) for m in doc["modes"])
        if "n" in doc and int(doc["n"]) != sys.n:
            raise DimensionError(f"declared n={doc['n']} but matrices are {sys.n}x{sys.n}")
        return sys

    @classmethod
    def from_json(cls, source: str | Path) -> "SwitchedAffineSystem":
        """Load from a JSON string or a path to a JSON file."""
        text = str(source)
        if not text.lstrip().startswith("{"):
            text = Path(source).read_text()
        return cls.from_dict(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True, eq=False)
class Trajectory:
    states: np.ndarray  # (k+1, n)
    modes: tuple[int, ...]  # 1-based, length k

    def __post_init__(self):
        if len(self.states) != len(self.modes) + 1:
            raise DimensionError("a trajectory needs exactly one more state than modes")

    @property
    def last(self) -> np.ndarray:
        return self.states[-1]


def mode_index(sys: SwitchedAffineSystem, mode: int) -> int:
    """Validate a 1-based mode index and return its 0-based position."""
    if isinstance(mode, (bool, np.bool_)) or int(mode) != mode:
        raise ModeIndexError(f"mode must be an integer, got {mode!r}")
    if not 1 <= int(mode) <= sys.M:
        raise ModeIndexError(f"mode {mode} outside 1..{sys.M}")
    return int(mode) - 1


def _state(sys: SwitchedAffineSystem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.n,):
        raise DimensionError(f"expected a state of shape ({sys.n},), got {x.shape}")
    return x


def step(sys: SwitchedAffineSystem, x, mode: int) -> np.ndarray:
    i = mode_index(sys, mode)
    return sys.A[i] @ _state(sys, x) + sys.b[i]


def simulate(sys: SwitchedAffineSystem, x0, modes: Sequence[int]) -> Trajectory:
    x = _state(sys, x0)
    idx = [mode_index(sys, m) for m in modes]
    states = [x]
    for i in idx:
        x = sys.A[i] @ x + sys.b[i]
        states.append(x)
    return Trajectory(np.array(states), tuple(i + 1 for i in idx))


def mode_fixed_point(sys: SwitchedAffineSystem, mode: int) -> np.ndarray | None:
    """Return c solving (I - A_i) c = b_i, or None when I - A_i is singular.

    Singularity is judged on the smallest singular value relative to the
    largest (threshold 1e-12).
    """
    i = mode_index(sys, mode)
    K = np.eye(sys.n) - sys.A[i]
    sv = np.linalg.svd(K, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] / sv[0] < SINGULAR_RTOL:
        return None
    return np.linalg.solve(K, sys.b[i])


def words(M: int, l: int) -> list[tuple[int, ...]]:
    """All mode words of length l in lexicographic order (1-based letters)."""
    return list(itertools.product(range(1, M + 1), repeat=l))


def lifted_system(sys: SwitchedAffineSystem, l: int, cap: int = LIFT_CAP) -> SwitchedAffineSystem:
    """The l-step map as a switched affine system with M**l modes.

    Lifted mode k (1-based) corresponds to ``words(M, l)[k-1] = (j1, ..., jl)``
    where j1 is applied first: A = A_jl ... A_j1 and
    b = sum_k A_jl ... A_j(k+1) b_jk.
    """
    if int(l) != l or l < 1:
        raise ValueError("l must be a positive integer")
    if sys.M**l > cap:
        raise SizeLimitError(f"M**l = {sys.M ** l} lifted modes exceeds the cap of {cap}")
    if l == 1:
        return SwitchedAffineSystem(sys.A.copy(), sys.b.copy())
    A = sys.A.copy()
    b = sys.b.copy()
    # appending a letter j on the right: (A, b) -> (A_j A, A_j b + b_j)
    for _ in range(l - 1):
        A = np.einsum("jpq,wqr->wjpr", sys.A, A).reshape(-1, sys.n, sys.n)
        b = (np.einsum("jpq,wq->wjp", sys.A, b) + sys.b[None, :, :]).reshape(-1, sys.n)
    return SwitchedAffineSystem(A, b)
