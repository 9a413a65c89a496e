"""Command-line entry point.

Exit codes: 0 when a certificate (or the requested artifact) was produced,
2 when the run completed without a certificate, 1 on error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys as _sys
from pathlib import Path

import numpy as np

from . import __version__
from .certificates import AffinePrior, ConfidenceParams, InvariantEllipsoid, certify
from .experiment import ExperimentConfig, find_min_radius, load_system, reproduce_paper, run_experiment
from .plotting import plot_state_space
from .sampling import SampleConfig, draw_samples, make_rng, read_csv, uniform_mode, write_csv
from .scenario import ScenarioConfig
from .system import simulate
from .whitebox import (
    attractor_bound,
    attractor_iterate,
    common_lyapunov_norm,
    jsr_bruteforce,
    verify_ellipsoid_invariance,
)

EXIT_OK, EXIT_ERROR, EXIT_NONE = 0, 1, 2

DEFAULTS = ExperimentConfig()


class _Ctx:
    """Merged view of command-line flags over the optional JSON config file."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file = {}
        if args.config:
            self.file = json.loads(Path(args.config).read_text())

    def get(self, key: str, default=None):
        v = getattr(self.args, key, None)
        if v is not None:
            return v
        if key in self.file:
            return self.file[key]
        return getattr(DEFAULTS, key, default) if default is None else default

    def system(self):
        return load_system(self.get("system"))

    def scenario(self) -> ScenarioConfig:
        return ScenarioConfig(**self.file.get("scenario", {}))

    def experiment(self) -> ExperimentConfig:
        doc = {k: v for k, v in self.file.items() if k in ExperimentConfig.__dataclass_fields__}
        for key in ("system", "N", "R", "beta", "repetitions", "seed", "epsilon_variant", "B", "l",
                    "out", "support", "workers"):
            v = getattr(self.args, key, None)
            if v is not None:
                doc[key] = v
        return ExperimentConfig.from_dict(doc)


def _emit(ctx: _Ctx, payload: dict, text: str) -> None:
    print(json.dumps(payload, indent=2, default=_jsonable) if ctx.args.json else text)


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not serializable: {type(o)}")


def _out_path(ctx: _Ctx, name: str) -> Path | None:
    out = ctx.get("out")
    if out is None:
        return None
    Path(out).mkdir(parents=True, exist_ok=True)
    return Path(out) / name


def _fmt(v, spec=".6f") -> str:
    return "-" if v is None else format(v, spec)


def cmd_simulate(ctx: _Ctx) -> int:
    sys = ctx.system()
    a = ctx.args
    x0 = np.array([float(t) for t in a.x0.split(",")]) if a.x0 else np.zeros(sys.n)
    if a.modes:
        modes = [int(t) for t in a.modes.split(",")]
    else:
        modes = [int(m) for m in uniform_mode(sys.M, make_rng(ctx.get("seed")), size=a.steps)]
    traj = simulate(sys, x0, modes)
    rows = ["k,mode," + ",".join(f"x_{i + 1}" for i in range(sys.n))]
    for k, x in enumerate(traj.states):
        mode = "" if k == 0 else str(traj.modes[k - 1])
        rows.append(f"{k},{mode}," + ",".join(repr(float(v)) for v in x))
    text = "\n".join(rows) + "\n"
    path = _out_path(ctx, "trajectory.csv")
    if path is not None:
        path.write_text(text)
    _emit(ctx, {"states": traj.states, "modes": list(traj.modes)}, text.rstrip())
    return EXIT_OK


def _draw(ctx: _Ctx):
    sys = ctx.system()
    cfg = SampleConfig(R=float(ctx.get("R")), N=int(ctx.get("N")), seed=int(ctx.get("seed")),
                       l=int(ctx.get("l")), stream=ctx.args.stream)
    return sys, draw_samples(sys, cfg)


def cmd_sample(ctx: _Ctx) -> int:
    _, omega = _draw(ctx)
    path = _out_path(ctx, "samples.csv")
    text = write_csv(omega, path)
    if path is None:
        print(text, end="")
    else:
        _emit(ctx, {"path": str(path), "N": len(omega)}, f"wrote {len(omega)} samples to {path}")
    return EXIT_OK


def _load_omega(ctx: _Ctx):
    if ctx.args.samples:
        omega = read_csv(ctx.args.samples)
        return None, omega
    return _draw(ctx)


def cmd_certify(ctx: _Ctx) -> int:
    _, omega = _load_omega(ctx)
    B = ctx.get("B")
    conf = ConfidenceParams(float(ctx.get("beta")), len(omega), omega.M, omega.n, ctx.get("epsilon_variant"))
    R = ctx.args.R if ctx.args.R is not None else None
    rep = certify(omega, ctx.scenario(), conf, None if B is None else AffinePrior(float(B)),
                  support_method=ctx.get("support"), R=R)
    doc = rep.to_dict()
    path = _out_path(ctx, "certificate.json")
    if path is not None:
        path.write_text(json.dumps(doc, indent=2, default=_jsonable) + "\n")
    text = "\n".join([
        f"status   {rep.status}",
        f"gamma    {_fmt(rep.gamma)}",
        f"kappa    {_fmt(rep.kappa)}",
        f"s        {rep.s}",
        f"epsilon  {_fmt(rep.epsilon)}",
        f"rho1     {_fmt(rep.rho1)}",
        f"rho2     {_fmt(rep.rho2)}",
        f"ellipsoid level {_fmt(None if rep.ellipsoid is None else rep.ellipsoid.level)}",
    ])
    _emit(ctx, doc, text)
    return EXIT_OK if rep.certified else EXIT_NONE


def cmd_whitebox(ctx: _Ctx) -> int:
    sys = ctx.system()
    a = ctx.args
    norm = common_lyapunov_norm(sys)
    bounds = jsr_bruteforce(sys, a.depth, norm=None if norm is None else norm.P)
    doc = {"jsr": bounds.to_dict(), "rho_tilde": None, "P": None, "attractor_radius": None}
    lines = [f"JSR in [{bounds.lower:.6f}, {bounds.upper:.6f}] (products up to length {bounds.depth})"]
    if norm is not None:
        r = attractor_bound(norm, sys)
        doc.update(rho_tilde=norm.rho_tilde, P=norm.P, attractor_radius=r)
        lines.append(f"contractive ellipsoidal norm: rho_tilde = {norm.rho_tilde:.6f}")
        lines.append(f"attractor inside ||x||_P <= {r:.6f}")
    else:
        lines.append("no contractive ellipsoidal norm found")
    ok = norm is not None
    if a.ellipsoid:
        cert = json.loads(Path(a.ellipsoid).read_text())
        e = cert.get("ellipsoid", cert)
        if e is None:
            raise ValueError("the certificate file carries no ellipsoid")
        verdict = verify_ellipsoid_invariance(sys, InvariantEllipsoid(np.array(e["P"]), float(e["level"])))
        doc["ellipsoid_invariant"] = verdict.invariant
        doc["ellipsoid_maxima"] = list(verdict.maxima)
        lines.append(f"ellipsoid forward invariant: {verdict.invariant} "
                     f"(max {max(verdict.maxima):.6f} vs level {verdict.level:.6f})")
        ok = verdict.invariant
    path = _out_path(ctx, "jsr_bounds.json")
    if path is not None:
        path.write_text(json.dumps(doc, indent=2, default=_jsonable) + "\n")
    _emit(ctx, doc, "\n".join(lines))
    return EXIT_OK if ok else EXIT_NONE


def cmd_attractor(ctx: _Ctx) -> int:
    sys = ctx.system()
    a = ctx.args
    approx = attractor_iterate(sys, a.k, prune=a.prune)
    if ctx.get("out") is not None:
        header = "level," + ",".join(f"x_{i + 1}" for i in range(sys.n))
        for j, K in enumerate(approx.iterates):
            rows = [header] + [f"{j}," + ",".join(repr(float(v)) for v in x) for x in K]
            _out_path(ctx, f"attractor_k{j:03d}.csv").write_text("\n".join(rows) + "\n")
    doc = {"levels": len(approx.iterates) - 1, "points": [len(K) for K in approx.iterates],
           "hausdorff_gaps": list(approx.gaps), "pruned": approx.hull_pruned}
    text = "\n".join(f"K_{j}: {len(K)} points" + (f", gap {approx.gaps[j - 1]:.3e}" if j else "")
                     for j, K in enumerate(approx.iterates))
    _emit(ctx, doc, text)
    return EXIT_OK


def cmd_plot(ctx: _Ctx) -> int:
    sys, omega = _load_omega(ctx)
    if sys is None and ctx.args.system is not None:
        sys = ctx.system()
    ell = None
    if ctx.args.certify:
        rep = certify(omega, ctx.scenario(), beta=float(ctx.get("beta")), support_method=ctx.get("support"))
        ell = rep.ellipsoid
    path = _out_path(ctx, "state.svg") or Path("state.svg")
    plot_state_space(omega, path, ell=ell, sys=sys)
    _emit(ctx, {"path": str(path), "ellipsoid": ell is not None}, f"wrote {path}")
    return EXIT_OK


def cmd_experiment(ctx: _Ctx) -> int:
    cfg = ctx.experiment()
    summary = run_experiment(cfg, name=ctx.args.name)
    agg = summary.aggregates
    lines = [f"{k}: mean {_fmt(agg[k].get('mean'))} std {_fmt(agg[k].get('std'))} "
             f"({agg[k]['count']} values)" for k in ("rho1", "rho2")]
    lines.append(f"failed repetitions: {agg['failed']}")
    _emit(ctx, agg, "\n".join(lines))
    certified = any(r["rho2"] is not None and r["rho2"] < 1 or r["rho1"] is not None and r["rho1"] < 1
                    for r in summary.rows)
    return EXIT_OK if certified else EXIT_NONE


def cmd_reproduce(ctx: _Ctx) -> int:
    out = ctx.get("out") or "reproduction"
    reps = ctx.args.repetitions or 100
    res = reproduce_paper(out, seed=int(ctx.get("seed")), repetitions=reps, workers=ctx.args.workers)
    comp = res["comparison"]
    lines = [f"{'system':6} {'bound':5} {'reported':>18} {'obtained':>18} {'window':>14} within"]
    for c in comp:
        lines.append(f"{c['system']:6} {c['bound']:5} {c['paper_mean']:>9.4f}+-{c['paper_std']:.4f} "
                     f"{c['mean']:>9.4f}+-{c['std']:.4f} [{c['window_lo']:.2f}, {c['window_hi']:.2f}] {bool(c['within'])}")
    lines.append(f"artifacts written to {out}")
    _emit(ctx, {"comparison": comp, "out": str(out)}, "\n".join(lines))
    return EXIT_OK


def cmd_find_radius(ctx: _Ctx) -> int:
    cfg = ctx.experiment()
    R = find_min_radius(ctx.system(), cfg, ctx.args.R_max, rel_tol=ctx.args.rel_tol)
    _emit(ctx, {"radius": R}, "no certifying radius up to R_max" if R is None else f"radius {R:.6f}")
    return EXIT_NONE if R is None else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="affinecert", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"affinecert {__version__}")
    p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    p.add_argument("--config", default=None, help="JSON file with experiment fields and a 'scenario' block")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--json", action="store_true", help="machine-readable stdout")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def system_arg(sp):
        sp.add_argument("--system", default=None, help="F1, F2, a JSON file or an inline JSON object")

    def sampling_args(sp):
        system_arg(sp)
        sp.add_argument("-N", type=int, default=None)
        sp.add_argument("-R", type=float, default=None)
        sp.add_argument("-l", type=int, default=None, help="trajectory length per sample")
        sp.add_argument("--stream", type=int, default=None, help="substream index of the master seed")

    def cert_args(sp):
        sp.add_argument("--beta", type=float, default=None)
        sp.add_argument("-B", type=float, default=None, help="bound on ||b_i|| (enables rho1)")
        sp.add_argument("--epsilon-variant", dest="epsilon_variant", choices=("eq10", "eq11"), default=None)
        sp.add_argument("--support", choices=("d-bound", "greedy"), default=None)

    sp = sub.add_parser("simulate", help="simulate a trajectory")
    system_arg(sp)
    sp.add_argument("--x0", default=None, help="comma-separated initial state")
    sp.add_argument("--modes", default=None, help="comma-separated 1-based modes")
    sp.add_argument("--steps", type=int, default=10, help="random modes when --modes is absent")
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("sample", help="draw a data set on the sphere")
    sampling_args(sp)
    sp.set_defaults(fn=cmd_sample)

    sp = sub.add_parser("certify", help="solve the sampled problem and evaluate both bounds")
    sampling_args(sp)
    cert_args(sp)
    sp.add_argument("--samples", default=None, help="CSV written by 'sample' (instead of drawing)")
    sp.set_defaults(fn=cmd_certify)

    sp = sub.add_parser("whitebox", help="JSR bounds, contractive norm and ellipsoid check from the true model")
    system_arg(sp)
    sp.add_argument("--depth", type=int, default=8, help="longest product length")
    sp.add_argument("--ellipsoid", default=None, help="certificate JSON whose ellipsoid is checked")
    sp.set_defaults(fn=cmd_whitebox)

    sp = sub.add_parser("attractor", help="iterate the reachable point sets K_k")
    system_arg(sp)
    sp.add_argument("-k", type=int, default=10)
    sp.add_argument("--prune", action="store_true", help="keep only convex hull vertices")
    sp.set_defaults(fn=cmd_attractor)

    sp = sub.add_parser("plot", help="SVG of a planar data set")
    sampling_args(sp)
    cert_args(sp)
    sp.add_argument("--samples", default=None)
    sp.add_argument("--certify", action="store_true", help="draw the certified ellipsoid if any")
    sp.set_defaults(fn=cmd_plot)

    sp = sub.add_parser("experiment", help="seeded repetition study from --config and flags")
    sampling_args(sp)
    cert_args(sp)
    sp.add_argument("--repetitions", type=int, default=None)
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--name", default="experiment")
    sp.set_defaults(fn=cmd_experiment)

    sp = sub.add_parser("reproduce-paper", help="both benchmark studies with CSV/SVG artifacts")
    sp.add_argument("--repetitions", type=int, default=None)
    sp.add_argument("--workers", type=int, default=None)
    sp.set_defaults(fn=cmd_reproduce)

    sp = sub.add_parser("find-radius", help="smallest sampling radius giving an invariant ellipsoid")
    sampling_args(sp)
    cert_args(sp)
    sp.add_argument("--R-max", dest="R_max", type=float, required=True)
    sp.add_argument("--rel-tol", dest="rel_tol", type=float, default=0.05)
    sp.set_defaults(fn=cmd_find_radius)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.fn(_Ctx(args))
    except Exception as exc:  # noqa: BLE001 - reported as exit code 1
        if args.verbose:
            raise
        print(f"affinecert: error: {exc}", file=_sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    _sys.exit(main())
