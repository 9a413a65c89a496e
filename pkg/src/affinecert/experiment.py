"""Seeded repetition studies, radius selection and the benchmark reproduction."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .benchmarks import BENCHMARKS, REPORTED
from .certificates import AffinePrior, ConfidenceParams, certify
from .plotting import plot_state_space
from .sampling import RNG_NAME, SampleConfig, draw_samples
from .scenario import ScenarioConfig
from .system import SwitchedAffineSystem, lifted_system
from .whitebox import verify_ellipsoid_invariance

log = logging.getLogger(__name__)

ROW_FIELDS = (
    "rep", "seed", "stream", "status", "gamma", "kappa", "s", "epsilon", "delta1", "delta2",
    "rho1", "rho2", "ellipsoid_level", "whitebox_verified", "failed",
)
AGGREGATED = ("gamma", "kappa", "rho1", "rho2")
TIMESTAMP_PREFIX = "# generated: "

# acceptance windows for the benchmark means (paper values sit inside)
PAPER_WINDOWS = {
    "F1": {"rho1": (0.93, 0.98), "rho2": (0.98, 1.03)},
    "F2": {"rho1": (1.01, 1.05), "rho2": (0.97, 1.00)},
}


def load_system(source) -> SwitchedAffineSystem:
    """A benchmark name ("F1", "F2"), an inline JSON object/string, or a file path."""
    if isinstance(source, SwitchedAffineSystem):
        return source
    if isinstance(source, dict):
        return SwitchedAffineSystem.from_dict(source)
    if isinstance(source, str) and source.upper() in BENCHMARKS:
        return BENCHMARKS[source.upper()]
    return SwitchedAffineSystem.from_json(source)


@dataclass(frozen=True)
class ExperimentConfig:
    system: object = "F1"
    N: int = 200
    R: float = 3.0
    beta: float = 0.05
    repetitions: int = 100
    seed: int = 0
    epsilon_variant: str = "eq11"
    B: float | None = None
    l: int = 1
    out: str | None = None
    support: str = "d-bound"
    verify: bool = True
    workers: int = 1
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.N < 1 or self.l < 1 or not self.R > 0:
            raise ValueError("N, l and R must be positive")
        if self.B is not None and self.B < 0:
            raise ValueError("B must be >= 0")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        scen = doc.pop("scenario", None)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if scen is not None:
            doc["scenario"] = ScenarioConfig(**scen)
        return cls(**doc)

    def echo(self) -> dict:
        """Everything that influences the numbers (no output dir, no worker count)."""
        sys = load_system(self.system)
        return {
            "system": sys.to_dict(),
            "N": self.N, "R": self.R, "beta": self.beta, "repetitions": self.repetitions,
            "seed": self.seed, "epsilon_variant": self.epsilon_variant, "B": self.B, "l": self.l,
            "support": self.support, "verify": self.verify, "scenario": self.scenario.to_dict(),
        }

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.echo(), sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class ExperimentSummary:
    rows: list[dict]
    aggregates: dict
    config: ExperimentConfig
    name: str = "experiment"

    def column(self, key: str) -> np.ndarray:
        return np.array([r[key] for r in self.rows if not r["failed"] and r[key] is not None], dtype=float)


def _run_rep(args) -> dict:
    cfg, r = args
    sys = load_system(cfg.system)
    row = dict.fromkeys(ROW_FIELDS)
    row.update(rep=r, seed=cfg.seed, stream=r, failed=0)
    omega = draw_samples(sys, SampleConfig(R=cfg.R, N=cfg.N, seed=cfg.seed, l=cfg.l, stream=r))
    conf = ConfidenceParams(cfg.beta, cfg.N, omega.M, sys.n, cfg.epsilon_variant)
    prior = None if cfg.B is None else AffinePrior(cfg.B)
    rep = certify(omega, cfg.scenario, conf, prior, support_method=cfg.support, R=cfg.R)
    row["status"] = rep.status
    if rep.status != "solved":
        row["failed"] = int(rep.status != "infeasible")
        return row
    row.update(
        gamma=rep.gamma, kappa=rep.kappa, s=rep.s, epsilon=rep.epsilon, delta1=rep.delta1,
        delta2=rep.delta2, rho1=rep.rho1, rho2=rep.rho2,
    )
    if rep.ellipsoid is not None:
        row["ellipsoid_level"] = rep.ellipsoid.level
        if cfg.verify:
            target = sys if cfg.l == 1 else lifted_system(sys, cfg.l)
            row["whitebox_verified"] = int(verify_ellipsoid_invariance(target, rep.ellipsoid).invariant)
    return row


def _aggregate(rows: list[dict]) -> dict:
    ok = [r for r in rows if not r["failed"]]
    agg = {"failed": len(rows) - len(ok), "repetitions": len(rows)}
    for key in AGGREGATED:
        vals = np.array([r[key] for r in ok if r[key] is not None], dtype=float)
        entry = {"count": int(len(vals)), "absent": len(ok) - int(len(vals))}
        if len(vals):
            entry["mean"] = float(np.mean(vals))
        if len(vals) > 1:
            entry["std"] = float(np.std(vals, ddof=1))
        agg[key] = entry
    return agg


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def summary_csv(summary: ExperimentSummary, timestamp: str | None = None) -> str:
    cfg = summary.config
    ts = timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds")
    lines = [
        f"# affinecert {__version__} {summary.name}",
        f"{TIMESTAMP_PREFIX}{ts}",
        f"# master_seed={cfg.seed} config_sha256={cfg.digest()}",
        f"# rng={RNG_NAME}",
        f"# config={json.dumps(cfg.echo(), sort_keys=True)}",
        ",".join(ROW_FIELDS),
    ]
    for row in summary.rows:
        lines.append(",".join(_cell(row[k]) for k in ROW_FIELDS))
    for key in AGGREGATED:
        e = summary.aggregates[key]
        parts = [f"count={e['count']}", f"absent={e['absent']}"]
        if "mean" in e:
            parts.append(f"mean={e['mean']!r}")
        if "std" in e:
            parts.append(f"std={e['std']!r}")
        lines.append(f"# aggregate {key} " + " ".join(parts))
    lines.append(f"# aggregate failed count={summary.aggregates['failed']}")
    return "\n".join(lines) + "\n"


def read_summary_csv(path: str | Path) -> tuple[list[dict], dict]:
    """Rows (as strings) and parsed aggregate lines from a summary CSV."""
    rows, aggs = [], {}
    header = None
    for line in Path(path).read_text().splitlines():
        if line.startswith("# aggregate "):
            _, _, key, *kv = line.split()
            aggs[key] = {k: float(v) for k, v in (p.split("=", 1) for p in kv)}
        elif line.startswith("#") or not line:
            continue
        elif header is None:
            header = line.split(",")
        else:
            rows.append(dict(zip(header, line.split(","))))
    return rows, aggs


def run_experiment(cfg: ExperimentConfig, name: str = "experiment") -> ExperimentSummary:
    """Repeat sample -> certify (-> white-box check) over substreams 0..reps-1.

    Repetitions may run in worker processes; results are collected in
    repetition order so the written CSV is byte-stable for a given seed.
    """
    jobs = [(cfg, r) for r in range(cfg.repetitions)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_run_rep, jobs, chunksize=max(1, len(jobs) // (4 * cfg.workers))))
    else:
        rows = [_run_rep(j) for j in jobs]
    summary = ExperimentSummary(rows, _aggregate(rows), cfg, name)
    if cfg.out is not None:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}_summary.csv").write_text(summary_csv(summary))
    return summary


def find_min_radius(
    system,
    cfg: ExperimentConfig,
    R_max: float,
    rel_tol: float = 0.05,
    max_probes: int = 60,
) -> float | None:
    """Smallest R (to ``rel_tol``) at which a fresh data set yields rho2 < 1.

    Returns None when the sampled problem fails at ``R_max`` or no
    invariance certificate is obtained there.  Probe k draws its data from
    substream k of ``cfg.seed``.
    """
    if not R_max > 0:
        raise ValueError("R_max must be > 0")
    sys = load_system(system)
    probes = iter(range(max_probes))

    def certified(R: float) -> bool | None:
        k = next(probes)
        omega = draw_samples(sys, SampleConfig(R=R, N=cfg.N, seed=cfg.seed, l=cfg.l, stream=k))
        conf = ConfidenceParams(cfg.beta, cfg.N, omega.M, sys.n, cfg.epsilon_variant)
        rep = certify(omega, cfg.scenario, conf, None, support_method=cfg.support, R=R)
        log.debug("find_min_radius: R=%g status=%s rho2=%s", R, rep.status, rep.rho2)
        if rep.status != "solved":
            return None
        return rep.rho2 is not None and rep.rho2 < 1.0

    if not certified(R_max):
        return None
    lo, hi = 0.0, R_max
    try:
        while hi - lo > rel_tol * hi:
            mid = 0.5 * (lo + hi)
            if certified(mid):
                hi = mid
            else:
                lo = mid
    except StopIteration:
        log.warning("find_min_radius: probe budget exhausted at [%g, %g]", lo, hi)
    return hi


def reproduce_paper(
    out_dir: str | Path,
    seed: int = 0,
    repetitions: int = 100,
    workers: int | None = None,
    timestamp: str | None = None,
) -> dict:
    """Run both benchmarks (N=200, R=3, beta=0.05) and write CSV/SVG artifacts.

    B for the first certificate is max_i |b_i| of each benchmark.  Returns
    ``{"F1": summary, "F2": summary, "comparison": rows}``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if workers is None:
        workers = min(4, os.cpu_count() or 1)
    results: dict = {}
    comparison = []
    for name, sys in BENCHMARKS.items():
        B = float(np.max(np.linalg.norm(sys.b, axis=1)))
        cfg = ExperimentConfig(system=name, N=200, R=3.0, beta=0.05, repetitions=repetitions,
                               seed=seed, B=B, workers=workers)
        summary = run_experiment(cfg, name=name.lower())
        (out / f"{name.lower()}_summary.csv").write_text(summary_csv(summary, timestamp))
        omega = draw_samples(sys, SampleConfig(R=3.0, N=200, seed=seed, stream=0))
        conf = ConfidenceParams(0.05, 200, sys.M, sys.n)
        rep0 = certify(omega, cfg.scenario, conf, AffinePrior(B), R=3.0)
        title = f"{name}: rho2={rep0.rho2:.4f}" if rep0.rho2 is not None else f"{name}: no rho2"
        plot_state_space(omega, out / f"{name.lower()}_state.svg", ell=rep0.ellipsoid, R=3.0, title=title)
        results[name] = summary
        for key in ("rho1", "rho2"):
            agg = summary.aggregates[key]
            lo, hi = PAPER_WINDOWS[name][key]
            mean = agg.get("mean", math.nan)
            comparison.append({
                "system": name, "bound": key,
                "paper_mean": REPORTED[name][key][0], "paper_std": REPORTED[name][key][1],
                "mean": mean, "std": agg.get("std", math.nan), "count": agg["count"],
                "window_lo": lo, "window_hi": hi, "within": int(lo <= mean <= hi),
            })
    header = list(comparison[0])
    lines = [",".join(header)] + [",".join(_cell(row[k]) for k in header) for row in comparison]
    (out / "comparison.csv").write_text("\n".join(lines) + "\n")
    results["comparison"] = comparison
    return results
