"""Coefficient arithmetic for a separable Hilbert space truncated to d basis directions.

Every element is stored as its first ``d`` coefficients in a fixed orthonormal
basis.  The truncation dimension is part of the data, not a global constant, so
one process can hold vectors of different dimensions side by side; operations
that combine two vectors require equal dimensions.

Besides the inner product and norm, the module provides a diagnostic that
separates *strong* convergence (vanishing norms) from *weak* convergence
(vanishing inner products against fixed test directions) for a finite sequence
of iterates.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "HVec",
    "ConvergenceReport",
    "as_coeffs",
    "inner",
    "norm",
    "convergence_report",
]


def _validated(coeffs: np.ndarray) -> np.ndarray:
    arr = np.asarray(coeffs, dtype=float)
    if arr.ndim != 1:
        raise InvalidInputError(f"coefficient vector must be 1-D, got shape {arr.shape}")
    if arr.size < 1:
        raise InvalidInputError("coefficient vector must have dimension >= 1")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("coefficient vector contains NaN or infinite entries")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class HVec:
    """A Hilbert-space element as a read-only vector of basis coefficients."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _validated(self.coeffs))

    @property
    def dim(self) -> int:
        return int(self.coeffs.size)

    def __len__(self) -> int:
        return self.dim

    def __repr__(self) -> str:
        return f"HVec({np.array2string(self.coeffs, max_line_width=72)})"


def as_coeffs(x: "HVec | Sequence[float] | np.ndarray") -> np.ndarray:
    """Return the validated coefficient array behind ``x``.

    Accepts an :class:`HVec` or any 1-D array-like; the result is a read-only
    float array, so callers can share it without copying.
    """
    if isinstance(x, HVec):
        return x.coeffs
    return _validated(np.asarray(x))


def inner(x, y) -> float:
    """Inner product sum_i x_i y_i of two equal-dimension vectors."""
    xa, ya = as_coeffs(x), as_coeffs(y)
    if xa.size != ya.size:
        raise InvalidInputError(f"dimension mismatch: {xa.size} vs {ya.size}")
    return float(np.dot(xa, ya))


def norm(x) -> float:
    """Euclidean norm of the coefficient vector."""
    return float(np.linalg.norm(as_coeffs(x)))


@dataclass(frozen=True)
class ConvergenceReport:
    """Strong and weak gaps of a finite sequence against its claimed limit.

    ``strong_gaps[k]`` is the norm distance of iterate ``k`` to the limit.
    ``weak_gaps[i, k]`` is ``|<x_k - limit, h_i>|`` for test direction ``h_i``.
    Cauchy-Schwarz forces ``weak_gaps[i, k] <= |h_i| * strong_gaps[k]``.
    """

    strong_gaps: np.ndarray
    weak_gaps: np.ndarray
    direction_norms: np.ndarray

    def __post_init__(self):
        for name in ("strong_gaps", "weak_gaps", "direction_norms"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def convergence_report(
    seq: Iterable,
    limit,
    directions: Iterable,
) -> ConvergenceReport:
    """Measure strong and weak convergence of ``seq`` toward ``limit``.

    Parameters
    ----------
    seq : iterable of vectors
        The iterates, all of the same dimension; must be nonempty.
    limit : vector
        The candidate limit.
    directions : iterable of vectors
        Test directions for the weak gaps; may be empty.

    Returns
    -------
    ConvergenceReport
        One strong gap per iterate and one weak-gap row per direction.
    """
    lim = as_coeffs(limit)
    iterates = [as_coeffs(x) for x in seq]
    if not iterates:
        raise InvalidInputError("empty sequence")
    dirs = [as_coeffs(h) for h in directions]
    for arr in iterates + dirs:
        if arr.size != lim.size:
            raise InvalidInputError(
                f"dimension mismatch: expected {lim.size}, got {arr.size}"
            )
    diffs = np.stack(iterates) - lim[None, :]
    strong = np.linalg.norm(diffs, axis=1)
    if dirs:
        hmat = np.stack(dirs)
        weak = np.abs(hmat @ diffs.T)
        hnorms = np.linalg.norm(hmat, axis=1)
    else:
        weak = np.zeros((0, len(iterates)))
        hnorms = np.zeros(0)
    return ConvergenceReport(strong_gaps=strong, weak_gaps=weak, direction_norms=hnorms)
