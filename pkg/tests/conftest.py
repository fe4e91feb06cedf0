"""Shared golden datasets and random-scene helpers for the test suite."""

from __future__ import annotations

from fractions import Fraction as F

import numpy as np

import echolat as el

# --- Golden datasets (rational where exact; see oracles.py for derivations) ---

# Five sensors in R^3 whose norms satisfy the same affine relation as the
# positions; the quadratic path yields two genuine candidates.
AMBIGUOUS_3D = {
    "sensors": [
        [3, 4, 0],
        [-2, -2, 1],
        [-1, 0, 0],
        [0, F(-16, 7), F(2, 3)],
        [0, F(76, 21), 0],
    ],
    "times": [5, 3, 1, F(50, 21), F(76, 21)],
    # reduced solution line and quadratic, exact
    "u": (F(21, 55), F(34, 55), F(199, 55)),
    "alpha": F(-152, 55),
    "quadratic": (F(38173, 3025), F(152, 55), F(0)),
    "t_alt": F(-8360, 38173),
    "x_alt": (F(-152 * 21, 38173), F(-152 * 34, 38173), F(-152 * 199, 38173)),
}

# Four sensors in R^2, two candidate events, both causal.
AMBIGUOUS_2D = {
    "sensors": [[9, 12], [9, -12], [10, -24], [10, 24]],
    "times": [15, 15, 26, 26],
    "u": (F(11), F(0)),
    "alpha": F(168),
    "t_alt": F(7, 5),
    "x_alt": (F(77, 5), F(0)),
}

# Three sensors in R^2; the second root violates causality.
SPURIOUS_2D = {
    "sensors": [[4, 0], [-3, 4], [-3, -4]],
    "times": [4, 5, 5],
    "u": (F(-1, 7), F(0)),
    "alpha": F(-64, 7),
    "t_alt": F(28, 3),
    "x_alt": (F(-4, 3), F(0)),
}

# Sensors on a circle, all times equal: position is unique, time is not.
EQUAL_TIMES_2D = {
    "sensors": [[1, 0], [0, 1], [-1, 0], [0, -1]],
    "times": [1, 1, 1, 1],
}

# First sensor is a multiple of the second: the quadratic degenerates to a
# double root at the true emission time.
DOUBLE_ROOT_2D = {
    "sensors": [[2, 0], [1, 0], [0, 1]],
    "times": [2, 1, 1],
}

# The t^2 coefficient vanishes exactly; a single linear root remains.
DEGENERATE_LINEAR_2D = {
    "sensors": [[1, 0], [-1, 0], [3, 4]],
    "times": [1, 1, 5],
    "u": (F(0), F(1)),
    "alpha": F(-2),
}


def sensor_array(dataset) -> el.SensorArray:
    return el.SensorArray(np.array([[float(x) for x in row] for row in dataset["sensors"]]))


def dataset_times(dataset) -> np.ndarray:
    return np.array([float(x) for x in dataset["times"]])


# --- Random-scene helpers ---


def random_sensors(rng, count: int, dim: int, box: float = 1.0) -> el.SensorArray:
    return el.SensorArray(rng.uniform(-box, box, (count, dim)))


def random_event(rng, dim: int, box: float = 2.0, time_span: float = 1.0) -> el.EmissionEvent:
    return el.EmissionEvent(float(rng.uniform(-time_span, time_span)), rng.uniform(-box, box, dim))


def random_rotation(rng, dim: int) -> np.ndarray:
    """Haar-ish random rotation via QR with positive diagonal."""
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
