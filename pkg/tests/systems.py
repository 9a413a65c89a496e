"""Small systems shared by several test modules."""

import numpy as np

from affinecert import SwitchedAffineSystem


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


# two contracting rotations with small offsets; certifies an invariant ellipsoid at N=200
ROTATING = SwitchedAffineSystem.from_modes([(0.5 * rotation(0.5), [0.1, 0.0]), (0.4 * rotation(-1.0), [0.0, -0.1])])
UNSTABLE = SwitchedAffineSystem.from_modes([(2.0 * np.eye(2), [0.0, 0.0])])
SHIFTED_HALF = SwitchedAffineSystem.from_modes([(0.5 * np.eye(2), [1.0, 0.0])])
