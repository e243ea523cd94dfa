"""Coupling and dual-certificate containers for the quadratic-cost problem.

The cost convention is the unhalved squared distance ``|x - y|^2`` throughout;
potentials derived from duals absorb the 1/2 factor in their intercepts.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError
from ..measures import DiscreteMeasure

__all__ = [
    "MARGINAL_TOL",
    "squared_distances",
    "Coupling",
    "DualSolution",
    "verify_dual",
]

MARGINAL_TOL = 1e-9


def squared_distances(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Pairwise ``|x_i - y_j|^2`` for row sets ``x`` (n, d) and ``y`` (m, d)."""
    sq = (
        np.sum(x * x, axis=1)[:, None]
        + np.sum(y * y, axis=1)[None, :]
        - 2.0 * (x @ y.T)
    )
    return np.maximum(sq, 0.0)


def _pair_costs(x_rows: np.ndarray, y_rows: np.ndarray) -> np.ndarray:
    diff = x_rows - y_rows
    return np.sum(diff * diff, axis=1)


@dataclass(frozen=True)
class DualSolution:
    """Kantorovich dual potentials: ``u`` on source atoms, ``w`` on target atoms.

    Feasibility means ``u_i + w_j <= |x_i - y_j|^2`` (up to MARGINAL_TOL) for
    every pair, with equality on the support of an optimal coupling.
    """

    u: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        for name in ("u", "w"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            if arr.ndim != 1 or not np.all(np.isfinite(arr)):
                raise InvalidInputError(f"dual potentials {name} must be finite and 1-D")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class Coupling:
    """Sparse transport plan between two discrete measures.

    ``src_idx``, ``tgt_idx`` and ``mass`` list the positive entries; row and
    column sums must reproduce the marginal weights and ``cost`` the weighted
    squared-distance total, both within MARGINAL_TOL (validated here).
    """

    src: DiscreteMeasure
    tgt: DiscreteMeasure
    src_idx: np.ndarray
    tgt_idx: np.ndarray
    mass: np.ndarray
    cost: float
    dual: DualSolution | None = None

    def __post_init__(self):
        si = np.asarray(self.src_idx, dtype=np.intp).copy()
        ti = np.asarray(self.tgt_idx, dtype=np.intp).copy()
        ms = np.asarray(self.mass, dtype=float).copy()
        if not (si.shape == ti.shape == ms.shape) or si.ndim != 1 or si.size == 0:
            raise InvalidInputError("coupling entries must be nonempty parallel 1-D arrays")
        if np.any(ms <= 0):
            raise InvalidInputError("coupling masses must be strictly positive")
        if si.min() < 0 or si.max() >= self.src.n_atoms:
            raise InvalidInputError("source index out of range")
        if ti.min() < 0 or ti.max() >= self.tgt.n_atoms:
            raise InvalidInputError("target index out of range")
        row = np.bincount(si, weights=ms, minlength=self.src.n_atoms)
        col = np.bincount(ti, weights=ms, minlength=self.tgt.n_atoms)
        if np.max(np.abs(row - self.src.weights)) > MARGINAL_TOL:
            raise InvalidInputError("row sums do not match source weights")
        if np.max(np.abs(col - self.tgt.weights)) > MARGINAL_TOL:
            raise InvalidInputError("column sums do not match target weights")
        recomputed = float(
            np.dot(ms, _pair_costs(self.src.points[si], self.tgt.points[ti]))
        )
        if abs(recomputed - self.cost) > MARGINAL_TOL * max(1.0, abs(recomputed)):
            raise InvalidInputError(
                f"stored cost {self.cost} differs from recomputation {recomputed}"
            )
        for name, arr in (("src_idx", si), ("tgt_idx", ti), ("mass", ms)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_entries(self) -> int:
        return int(self.mass.size)

    def support_points(self) -> tuple[np.ndarray, np.ndarray]:
        """Row sets (x_k, y_k) of the support pairs, aligned by entry."""
        return self.src.points[self.src_idx], self.tgt.points[self.tgt_idx]

    def as_permutation(self) -> np.ndarray:
        """For a one-to-one coupling, the map source index -> target index."""
        n = self.src.n_atoms
        if self.n_entries != n or self.tgt.n_atoms != n:
            raise InvalidInputError("coupling is not a permutation")
        perm = np.full(n, -1, dtype=np.intp)
        perm[self.src_idx] = self.tgt_idx
        if np.any(perm < 0) or np.unique(self.tgt_idx).size != n:
            raise InvalidInputError("coupling is not a permutation")
        return perm


def verify_dual(
    src: DiscreteMeasure,
    tgt: DiscreteMeasure,
    dual: DualSolution,
    coupling: Coupling | None = None,
    tol: float = MARGINAL_TOL,
) -> float:
    """Check dual feasibility (and complementary slackness when given a coupling).

    Returns the worst feasibility violation ``max(u_i + w_j - cost_ij)``;
    raises when it exceeds ``tol`` or slackness fails on a support pair.
    """
    if dual.u.size != src.n_atoms or dual.w.size != tgt.n_atoms:
        raise InvalidInputError("dual potential lengths do not match the marginals")
    c = squared_distances(src.points, tgt.points)
    gap = dual.u[:, None] + dual.w[None, :] - c
    worst = float(gap.max())
    if worst > tol:
        raise InvalidInputError(f"dual infeasible: max violation {worst}")
    if coupling is not None:
        slack = gap[coupling.src_idx, coupling.tgt_idx]
        if np.min(slack) < -tol:
            raise InvalidInputError(
                f"complementary slackness fails by {float(-np.min(slack))}"
            )
    return worst
