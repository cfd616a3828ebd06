"""Input validation helpers.

Small `check_*` utilities in the spirit of scikit-learn's validation module:
each one either returns a normalized value (numpy array with a canonical
dtype) or raises a :class:`~multicoh.errors.ValidityError` describing what is
wrong. They are used at every public entry point so the numerical core can
assume clean inputs.
"""

from __future__ import annotations

import numbers

import numpy as np

from .errors import ValidityError

#: Absolute tolerance for probability arithmetic; values this far outside
#: [0, 1] (or sums this far from 1) are treated as round-off and clipped.
PROB_TOL = 1e-12


def check_probability(x, name: str = "p") -> float:
    """Validate a scalar probability, clipping round-off excursions."""
    if not isinstance(x, numbers.Real) or not np.isfinite(float(x)):
        raise ValidityError(f"{name} must be a finite real number, got {x!r}")
    x = float(x)
    if x < -PROB_TOL or x > 1.0 + PROB_TOL:
        raise ValidityError(f"{name} must lie in [0, 1], got {x}")
    return min(max(x, 0.0), 1.0)


def check_unit_interval(arr, name: str = "values") -> np.ndarray:
    """Validate an array of probabilities in [0, 1] (round-off clipped)."""
    a = np.asarray(arr, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ValidityError(f"{name} contains non-finite entries")
    if np.any(a < -PROB_TOL) or np.any(a > 1.0 + PROB_TOL):
        bad = a[(a < -PROB_TOL) | (a > 1.0 + PROB_TOL)].flat[0]
        raise ValidityError(f"{name} must lie in [0, 1], found {bad}")
    return np.clip(a, 0.0, 1.0)


def check_symmetric_matrix(
    m, name: str = "matrix", k: int | None = None, unit: bool = False
) -> np.ndarray:
    """Validate a square symmetric float matrix, optionally K x K / in [0,1]."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidityError(f"{name} must be a square matrix, got shape {a.shape}")
    if k is not None and a.shape[0] != k:
        raise ValidityError(f"{name} must be {k}x{k}, got {a.shape[0]}x{a.shape[1]}")
    if not np.all(np.isfinite(a)):
        raise ValidityError(f"{name} contains non-finite entries")
    if not np.allclose(a, a.T, atol=PROB_TOL, rtol=0.0):
        raise ValidityError(f"{name} must be symmetric")
    if unit:
        a = check_unit_interval(a, name)
    return a


def check_adjacency(a, n: int | None = None, name: str = "adjacency") -> np.ndarray:
    """Validate a symmetric binary adjacency matrix with zero diagonal.

    Returns the matrix as a uint8 array.
    """
    arr = np.asarray(a)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidityError(f"{name} must be square, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValidityError(f"{name} must have {n} nodes, got {arr.shape[0]}")
    if not np.isin(arr, (0, 1)).all():
        raise ValidityError(f"{name} must be binary (0/1 entries)")
    arr = arr.astype(np.uint8)
    if np.any(np.diagonal(arr) != 0):
        raise ValidityError(f"{name} must have a zero diagonal (simple graph)")
    if not np.array_equal(arr, arr.T):
        raise ValidityError(f"{name} must be symmetric")
    return arr


def check_labels(z, n: int | None = None, name: str = "labels") -> tuple[np.ndarray, int]:
    """Validate a 1-based block label vector; returns (labels, K)."""
    arr = np.asarray(z)
    if arr.ndim != 1:
        raise ValidityError(f"{name} must be a 1-d vector")
    if n is not None and arr.shape[0] != n:
        raise ValidityError(f"{name} must have length {n}, got {arr.shape[0]}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == np.floor(arr)):
            raise ValidityError(f"{name} must contain integers")
    arr = arr.astype(np.int64)
    if arr.size and arr.min() < 1:
        raise ValidityError(f"{name} must be 1-based (smallest allowed label is 1)")
    k = int(arr.max()) if arr.size else 0
    return arr, k


def check_proportions(pi, k: int | None = None, name: str = "proportions") -> np.ndarray:
    """Validate a probability vector (positive entries summing to one)."""
    a = np.asarray(pi, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ValidityError(f"{name} must be a non-empty 1-d vector")
    if k is not None and a.size != k:
        raise ValidityError(f"{name} must have length {k}, got {a.size}")
    if not np.all(np.isfinite(a)) or np.any(a < 0):
        raise ValidityError(f"{name} must be non-negative and finite")
    total = float(a.sum())
    if abs(total - 1.0) > 1e-9:
        raise ValidityError(f"{name} must sum to 1, got {total}")
    return a / total


def ensure_rng(rng) -> np.random.Generator:
    """Coerce `rng` to a numpy Generator.

    Accepts an existing Generator (returned as-is), an integer seed, or None
    (fresh OS-seeded generator; not reproducible).
    """
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return np.random.default_rng()
    if isinstance(rng, numbers.Integral):
        return np.random.default_rng(int(rng))
    raise ValidityError(f"rng must be a numpy Generator, an int seed or None, got {rng!r}")
