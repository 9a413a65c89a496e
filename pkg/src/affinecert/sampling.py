"""Uniform sampling on S_R x {1..M} and the observed data sets built from it.

All randomness flows through :func:`make_rng`, a PCG64 generator seeded by a
``SeedSequence``.  Substream ``r`` of a master seed is the sequence with
``spawn_key=(r,)``, so repetition ``r`` of an experiment is reproducible on
its own and independent of the others.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

from .system import SwitchedAffineSystem, lifted_system, LIFT_CAP

RNG_NAME = "numpy.random.PCG64 seeded by SeedSequence(entropy=seed, spawn_key=(stream,))"


def make_rng(seed: int, stream: int | None = None) -> np.random.Generator:
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    key = () if stream is None else (int(stream),)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))


def uniform_sphere(n: int, R: float, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniform draw(s) on the sphere of radius R in R^n (normalized Gaussians)."""
    if n < 1 or R <= 0:
        raise ValueError("need n >= 1 and R > 0")
    m = 1 if size is None else int(size)
    g = rng.standard_normal((m, n))
    norms = np.linalg.norm(g, axis=1)
    while np.any(norms == 0.0):  # measure-zero, but never divide by it
        bad = norms == 0.0
        g[bad] = rng.standard_normal((int(bad.sum()), n))
        norms = np.linalg.norm(g, axis=1)
    x = R * g / norms[:, None]
    return x[0] if size is None else x


def uniform_mode(M: int, rng: np.random.Generator, size: int | None = None):
    """Uniform 1-based mode index (or an array of them)."""
    if M < 1:
        raise ValueError("M must be >= 1")
    return rng.integers(1, M + 1, size=size)


@dataclass(frozen=True)
class SampleConfig:
    R: float
    N: int
    seed: int = 0
    l: int = 1
    stream: int | None = None

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("R must be > 0")
        if self.N < 1 or self.l < 1:
            raise ValueError("N and l must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


class SamplePair(NamedTuple):
    x0: np.ndarray
    mode: int
    x1: np.ndarray


@dataclass(frozen=True, eq=False)
class SampleSet:
    """N observed one-step pairs.  ``M`` counts the (possibly lifted) modes."""

    x0: np.ndarray
    modes: np.ndarray
    x1: np.ndarray
    M: int
    config: SampleConfig | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        x0 = np.atleast_2d(np.asarray(self.x0, dtype=float))
        x1 = np.atleast_2d(np.asarray(self.x1, dtype=float))
        modes = np.asarray(self.modes, dtype=np.int64).reshape(-1)
        if x0.shape != x1.shape or len(modes) != len(x0):
            raise ValueError("x0, x1 and modes must describe the same number of samples")
        if len(modes) and (modes.min() < 1 or modes.max() > self.M):
            raise ValueError(f"modes must lie in 1..{self.M}")
        for name, a in (("x0", x0), ("x1", x1), ("modes", modes)):
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self) -> Iterator[SamplePair]:
        for a, m, b in zip(self.x0, self.modes, self.x1):
            yield SamplePair(a, int(m), b)

    @property
    def n(self) -> int:
        return self.x0.shape[1]

    @property
    def N(self) -> int:
        return len(self)

    def subset(self, keep) -> "SampleSet":
        keep = np.asarray(keep)
        return SampleSet(self.x0[keep], self.modes[keep], self.x1[keep], self.M, self.config, dict(self.meta))

    def scaled(self, t: float) -> "SampleSet":
        return SampleSet(t * self.x0, self.modes, t * self.x1, self.M, None, dict(self.meta))


def draw_samples(sys: SwitchedAffineSystem, cfg: SampleConfig, lift_cap: int = LIFT_CAP) -> SampleSet:
    """Draw N i.i.d. pairs (x0 uniform on S_R, mode uniform) and observe x1.

    This is the only function of the data-driven pipeline that reads the
    system matrices.  With ``cfg.l > 1`` modes are words of length l indexed
    as in :func:`affinecert.system.lifted_system`.
    """
    target = lifted_system(sys, cfg.l, cap=lift_cap) if cfg.l > 1 else sys
    rng = make_rng(cfg.seed, cfg.stream)
    x0 = uniform_sphere(sys.n, cfg.R, rng, size=cfg.N)
    modes = uniform_mode(target.M, rng, size=cfg.N)
    idx = modes - 1
    x1 = np.einsum("kij,kj->ki", target.A[idx], x0) + target.b[idx]
    return SampleSet(x0, modes, x1, target.M, cfg, {"rng": RNG_NAME})


def write_csv(omega: SampleSet, path: str | Path | None = None) -> str:
    """Serialize as CSV; returns the text and writes it when ``path`` is given.

    Leading ``#`` lines carry the configuration; the header row follows.
    """
    buf = io.StringIO()
    cfg = omega.config
    buf.write(f"# M={omega.M}\n")
    if cfg is not None:
        stream = "" if cfg.stream is None else cfg.stream
        buf.write(f"# R={cfg.R!r} N={cfg.N} seed={cfg.seed} l={cfg.l} stream={stream}\n")
        buf.write(f"# rng={RNG_NAME}\n")
    n = omega.n
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["i", "mode"] + [f"x0_{j + 1}" for j in range(n)] + [f"x1_{j + 1}" for j in range(n)])
    for i, (a, m, b) in enumerate(omega, start=1):
        w.writerow([i, m] + [repr(float(v)) for v in a] + [repr(float(v)) for v in b])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_csv(source: str | Path, M: int | None = None) -> SampleSet:
    """Parse the CSV produced by :func:`write_csv` (a path or the text itself)."""
    text = str(source)
    if "\n" not in text:
        text = Path(source).read_text()
    meta: dict[str, str] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            content = line[1:].strip()
            if content.startswith("rng="):
                meta["rng"] = content[4:]
                continue
            for tok in content.split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    meta[k] = v
        elif line.strip():
            body.append(line)
    rows = list(csv.reader(body))
    header, data = rows[0], rows[1:]
    if header[:2] != ["i", "mode"]:
        raise ValueError("CSV header must start with 'i,mode'")
    n = (len(header) - 2) // 2
    arr = np.array([[float(v) for v in r[2:]] for r in data]).reshape(-1, 2 * n)
    modes = np.array([int(r[1]) for r in data], dtype=np.int64)
    if M is None:
        M = int(meta["M"]) if "M" in meta else int(modes.max(initial=1))
    cfg = None
    if "R" in meta:
        stream = meta.get("stream") or None
        cfg = SampleConfig(
            R=float(meta["R"]), N=int(meta["N"]), seed=int(meta["seed"]),
            l=int(meta.get("l", 1)), stream=None if stream is None else int(stream),
        )
    extra = {"rng": meta["rng"]} if "rng" in meta else {}
    return SampleSet(arr[:, :n], modes, arr[:, n:], M, cfg, extra)
