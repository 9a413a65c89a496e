"""The two planar two-mode benchmark systems used in the reproduction study."""

from .system import SwitchedAffineSystem

F1 = SwitchedAffineSystem.from_modes(
    [
        ([[0.4, -0.3], [-0.5, 0.5]], [0.1, 0.2]),
        ([[-0.3, -0.1], [-0.2, -0.6]], [-0.2, -0.1]),
    ]
)

F2 = SwitchedAffineSystem.from_modes(
    [
        ([[0.6, 0.1], [-0.2, -0.5]], [-0.7, -0.7]),
        ([[-0.6, -0.1], [0.2, 0.5]], [0.2, -0.8]),
    ]
)

BENCHMARKS = {"F1": F1, "F2": F2}

# mean +- std reported for 100 repetitions at N=200, R=3, beta=0.05
REPORTED = {
    "F1": {"rho1": (0.9547, 0.0065), "rho2": (1.0061, 0.0070)},
    "F2": {"rho1": (1.0273, 0.0003), "rho2": (0.9876, 0.0010)},
}
