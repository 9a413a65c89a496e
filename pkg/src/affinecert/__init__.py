"""Data-driven stability certificates for switched affine systems."""

__version__ = "0.1.0"

from .benchmarks import BENCHMARKS, F1, F2
from .certificates import (
    AffinePrior,
    CertificateReport,
    ConfidenceParams,
    InvariantEllipsoid,
    certify,
    delta_fn,
    epsilon_fn,
    epsilon_fn_d,
    rho1_bound,
    rho2_bound,
)
from .errors import DimensionError, DomainError, InfeasibleError, ModeIndexError, SizeLimitError
from .sampling import SampleConfig, SampleSet, draw_samples, make_rng, read_csv, write_csv
from .scenario import ScenarioConfig, ScenarioSolution, solve_gevp, support_subsample, violation_estimate
from .system import SwitchedAffineSystem, Trajectory, lifted_system, simulate, step
from .whitebox import (
    attractor_bound,
    attractor_iterate,
    common_lyapunov_norm,
    jsr_bruteforce,
    verify_ellipsoid_invariance,
)

__all__ = [
    "__version__",
    "AffinePrior",
    "CertificateReport",
    "ConfidenceParams",
    "InvariantEllipsoid",
    "certify",
    "delta_fn",
    "epsilon_fn",
    "epsilon_fn_d",
    "rho1_bound",
    "rho2_bound",
    "attractor_bound",
    "attractor_iterate",
    "common_lyapunov_norm",
    "jsr_bruteforce",
    "verify_ellipsoid_invariance",
    "BENCHMARKS",
    "F1",
    "F2",
    "DimensionError",
    "DomainError",
    "InfeasibleError",
    "ModeIndexError",
    "SizeLimitError",
    "SampleConfig",
    "SampleSet",
    "draw_samples",
    "make_rng",
    "read_csv",
    "write_csv",
    "ScenarioConfig",
    "ScenarioSolution",
    "solve_gevp",
    "support_subsample",
    "violation_estimate",
    "SwitchedAffineSystem",
    "Trajectory",
    "lifted_system",
    "simulate",
    "step",
]
