"""Closed-form monotone maps and the unbounded-operator diagnostics.

Diagonal maps ``x -> sum_i r_i x_i e_i`` with nonnegative ratios are gradients
of convex quadratics and give the exact transport between centered diagonal
Gaussians (ratio = target std / source std).  The module also hosts:

* a geometric-growth diagonal operator ``A e_i = base^i e_i`` whose action on
  a fast-decaying Gaussian is computable at any truncation while the running
  sums ``S_d = sum_{i<=d} 2^i xi_i^2`` blow up with d, the finite-dimensional
  shadow of a gradient map defined only on a null set;
* a radial squash onto the unit ball, a bounded gradient-of-convex map usable
  as a closed-form population map toward a bounded reference;
* the 1-D Gaussian-to-uniform quantile map.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import InvalidInputError
from .measures import GaussianSpec, geometric_spectrum, make_rng

__all__ = [
    "DiagonalMap",
    "BallSquashMap",
    "NormalToUniform1D",
    "PathologicalOperator",
    "gaussian_map",
    "pathological_push",
    "null_domain_diagnostic",
    "partial_sum_mean",
]


@dataclass(frozen=True)
class DiagonalMap:
    """Coordinate-wise scaling map; the gradient of x -> 1/2 sum_i r_i x_i^2."""

    ratios: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.ratios, dtype=float).copy()
        if r.ndim != 1 or r.size < 1:
            raise InvalidInputError("ratios must be a nonempty 1-D array")
        if np.any(r < 0) or not np.all(np.isfinite(r)):
            raise InvalidInputError("ratios must be finite and nonnegative")
        r.flags.writeable = False
        object.__setattr__(self, "ratios", r)

    @property
    def dim(self) -> int:
        return int(self.ratios.size)

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts * self.ratios[None, :] if pts.ndim == 2 else pts * self.ratios

    def potential_values(self, points: np.ndarray) -> np.ndarray:
        """Values of the convex quadratic whose gradient is this map."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return 0.5 * np.sum(self.ratios[None, :] * pts * pts, axis=1)

    def compose(self, inner: "DiagonalMap") -> "DiagonalMap":
        """The map applying ``inner`` first; ratios multiply coordinate-wise."""
        if inner.dim != self.dim:
            raise InvalidInputError("dimension mismatch in composition")
        return DiagonalMap(self.ratios * inner.ratios)


@dataclass(frozen=True)
class BallSquashMap:
    """Radial contraction x -> scale * x / sqrt(1 + |x|^2) into the ball of
    radius ``scale``; the gradient of the convex scale * sqrt(1 + |x|^2)."""

    scale: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise InvalidInputError("scale must be positive")

    @property
    def bound(self) -> float:
        return float(self.scale)

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        denom = np.sqrt(1.0 + np.sum(pts * pts, axis=1))
        out = self.scale * pts / denom[:, None]
        return out if np.asarray(points).ndim == 2 else out[0]

    def potential_values(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return self.scale * np.sqrt(1.0 + np.sum(pts * pts, axis=1))


@dataclass(frozen=True)
class NormalToUniform1D:
    """Distribution function of N(mean, std^2): the 1-D monotone map onto Uniform(0,1)."""

    mean: float = 0.0
    std: float = 1.0

    def __post_init__(self):
        if self.std <= 0:
            raise InvalidInputError("std must be positive")

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != 1:
            raise InvalidInputError("this map is 1-D only")
        out = ndtr((pts - self.mean) / self.std)
        return out if np.asarray(points).ndim == 2 else out[0]


def gaussian_map(src: GaussianSpec, tgt: GaussianSpec) -> DiagonalMap:
    """Exact monotone transport between centered diagonal Gaussians.

    The per-coordinate ratio is tgt.stds[i] / src.stds[i]; applying the map to
    source samples reproduces the target law coordinate-wise.
    """
    if src.dim != tgt.dim:
        raise InvalidInputError("source and target dimensions differ")
    if not (src.centered and tgt.centered):
        raise InvalidInputError("closed form requires centered Gaussians")
    if not src.non_degenerate:
        raise InvalidInputError("source Gaussian must be non-degenerate")
    return DiagonalMap(tgt.stds / src.stds)


@dataclass(frozen=True)
class PathologicalOperator:
    """Diagonal operator A e_i = base^i e_i (i = 1..dim), default base 4.

    At any finite truncation the operator is everywhere defined; its
    unboundedness shows up as geometric growth of ``|A x|`` along the basis.
    """

    dim: int
    base: float = 4.0

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidInputError("dim must be >= 1")
        if self.base <= 1:
            raise InvalidInputError("base must exceed 1")

    @property
    def diagonal(self) -> np.ndarray:
        return geometric_spectrum(self.base, self.dim)

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        diag = self.diagonal
        return pts * diag[None, :] if pts.ndim == 2 else pts * diag


def pathological_push(d: int, n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Push fast-decaying Gaussian samples through the growth-4 operator.

    Draws xi ~ N(0, I), forms inputs ``X = sum_i 8^-i xi_i e_i`` and returns
    ``(X, A X)``; the images satisfy ``(A X)_i = 2^-i xi_i`` exactly (all the
    scalings are powers of two, hence float-exact), which is verified before
    returning.
    """
    if d < 1 or n < 1:
        raise InvalidInputError("d and n must be >= 1")
    rng = make_rng(seed)
    xi = rng.standard_normal((n, d))
    inputs = xi * geometric_spectrum(0.125, d)[None, :]
    outputs = PathologicalOperator(dim=d).apply(inputs)
    expected = xi * geometric_spectrum(0.5, d)[None, :]
    if not np.array_equal(outputs, expected):
        raise AssertionError("power-of-two scaling identity failed")
    return inputs, outputs


def null_domain_diagnostic(d_max: int, n_seeds: int, seed: int = 0) -> np.ndarray:
    """Trajectories S_d = sum_{i<=d} 2^i xi_i^2 for n_seeds independent draws.

    Returns an (n_seeds, d_max) array; row k is the running sum for the k-th
    seeded draw, nondecreasing in d and growing without bound as d increases
    (mean 2^(d+1) - 2).
    """
    if d_max < 1 or n_seeds < 1:
        raise InvalidInputError("d_max and n_seeds must be >= 1")
    rng = make_rng(seed)
    xi = rng.standard_normal((n_seeds, d_max))
    terms = geometric_spectrum(2.0, d_max)[None, :] * xi * xi
    return np.cumsum(terms, axis=1)


def partial_sum_mean(d: int) -> float:
    """Expected value of S_d: sum_{i<=d} 2^i = 2^(d+1) - 2."""
    return float(2.0 ** (d + 1) - 2.0)
