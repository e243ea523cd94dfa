"""Max-of-affine convex potentials and their (sub)gradients.

A discrete target with atoms ``y_j`` induces potentials of the form
``psi(x) = max_j (<x, y_j> + b_j)``; the gradient is the slope of the
attaining piece and pushes mass onto the target atoms.  Intercepts derived
from an optimal transport dual make the attainment pattern reproduce the
optimal coupling.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError
from ..hilbert import as_coeffs
from ..measures import DiscreteMeasure
from .coupling import DualSolution, squared_distances

__all__ = ["TIE_TOL", "MaxAffinePotential", "GradResult", "grad", "attaining_slopes", "potential_from_dual"]

TIE_TOL = 1e-9


@dataclass(frozen=True)
class MaxAffinePotential:
    """Finite maximum of affine pieces: slopes (m, d) and intercepts (m,)."""

    slopes: np.ndarray
    intercepts: np.ndarray

    def __post_init__(self):
        slopes = np.asarray(self.slopes, dtype=float).copy()
        if slopes.ndim == 1:
            slopes = slopes[:, None]
        intercepts = np.asarray(self.intercepts, dtype=float).copy()
        if slopes.ndim != 2 or slopes.shape[0] < 1:
            raise InvalidInputError("slopes must form a nonempty (m, d) array")
        if intercepts.shape != (slopes.shape[0],):
            raise InvalidInputError("need exactly one intercept per slope")
        if not (np.all(np.isfinite(slopes)) and np.all(np.isfinite(intercepts))):
            raise InvalidInputError("potential pieces must be finite")
        slopes.flags.writeable = False
        intercepts.flags.writeable = False
        object.__setattr__(self, "slopes", slopes)
        object.__setattr__(self, "intercepts", intercepts)

    @property
    def n_pieces(self) -> int:
        return int(self.slopes.shape[0])

    @property
    def dim(self) -> int:
        return int(self.slopes.shape[1])

    def affine_values(self, points: np.ndarray) -> np.ndarray:
        """All piece values at the given rows: (n, m) array."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        return pts @ self.slopes.T + self.intercepts[None, :]

    def value(self, x) -> float:
        return float(np.max(self.affine_values(as_coeffs(x)[None, :])))

    def values(self, points: np.ndarray) -> np.ndarray:
        return np.max(self.affine_values(points), axis=1)

    def argmax_indices(self, points: np.ndarray) -> np.ndarray:
        """Attaining piece per row (lowest index on exact ties)."""
        return np.argmax(self.affine_values(points), axis=1)

    def map_points(self, points: np.ndarray) -> np.ndarray:
        """Gradient rows at the given points (ties resolved to lowest index)."""
        return self.slopes[self.argmax_indices(points)]

    def shifted(self, constant: float) -> "MaxAffinePotential":
        return MaxAffinePotential(self.slopes, self.intercepts + float(constant))

    def anchored(self, anchor) -> "MaxAffinePotential":
        """Normalize so the potential vanishes at the anchor point."""
        return self.shifted(-self.value(anchor))


@dataclass(frozen=True)
class GradResult:
    value: np.ndarray
    tie: bool


def grad(psi: MaxAffinePotential, x, tie_tol: float = TIE_TOL) -> GradResult:
    """Slope of the attaining piece at ``x``; flags near-ties.

    ``tie`` is true when a second piece comes within ``tie_tol`` of the
    maximum, i.e. the subdifferential is not (numerically) a singleton.
    """
    vals = psi.affine_values(as_coeffs(x)[None, :])[0]
    best = int(np.argmax(vals))
    tie = bool(np.sum(vals >= vals[best] - tie_tol) > 1)
    return GradResult(value=psi.slopes[best].copy(), tie=tie)


def attaining_slopes(psi: MaxAffinePotential, x, tie_tol: float = TIE_TOL) -> np.ndarray:
    """All slopes whose pieces attain the maximum within ``tie_tol`` at ``x``."""
    vals = psi.affine_values(as_coeffs(x)[None, :])[0]
    top = np.max(vals)
    return psi.slopes[vals >= top - tie_tol].copy()


def potential_from_dual(
    dual: DualSolution,
    tgt: DiscreteMeasure,
    src: DiscreteMeasure | None = None,
) -> MaxAffinePotential:
    """Convex potential whose gradient realizes the coupling behind ``dual``.

    Slopes are the target atoms and intercepts ``b_j = -(|y_j|^2 - w_j) / 2``,
    converting the unhalved-cost dual into max-affine form: at a source atom
    ``x_i``, the attaining index is exactly the dual-tight target.  When
    ``src`` is supplied, dual feasibility is verified first.
    """
    if dual.w.size != tgt.n_atoms:
        raise InvalidInputError("dual has the wrong number of target potentials")
    if src is not None:
        if dual.u.size != src.n_atoms:
            raise InvalidInputError("dual has the wrong number of source potentials")
        c = squared_distances(src.points, tgt.points)
        worst = float((dual.u[:, None] + dual.w[None, :] - c).max())
        if worst > TIE_TOL:
            raise InvalidInputError(f"dual infeasible by {worst}")
    y = tgt.points
    intercepts = -(np.sum(y * y, axis=1) - dual.w) / 2.0
    return MaxAffinePotential(slopes=y, intercepts=intercepts)
