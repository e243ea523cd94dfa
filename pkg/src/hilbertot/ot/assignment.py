"""Exact one-to-one matching for equal-size point sets under squared distance."""
from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..errors import InvalidInputError
from ..hilbert import as_coeffs
from ..measures import MERGE_TOL, DiscreteMeasure, empirical
from .coupling import Coupling, squared_distances

__all__ = ["points_matrix", "solve_assignment"]


def points_matrix(points) -> np.ndarray:
    """Stack a point collection into an (n, d) array."""
    if isinstance(points, np.ndarray):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        return pts
    rows = [as_coeffs(p) for p in points]
    if not rows:
        raise InvalidInputError("empty point list")
    return np.stack(rows)


def _require_distinct(pts: np.ndarray, name: str):
    order = np.lexsort(pts.T[::-1])
    if pts.shape[0] > 1:
        gaps = np.max(np.abs(np.diff(pts[order], axis=0)), axis=1)
        if np.min(gaps) <= MERGE_TOL:
            raise InvalidInputError(f"{name} contains duplicate points")


def solve_assignment(x_points, y_points) -> Coupling:
    """Minimum total squared-distance matching between two equal-size sets.

    Returns the permutation coupling with mass 1/n per pair; its ``cost`` is
    the quadratic transport cost between the two empirical measures.
    """
    x = points_matrix(x_points)
    y = points_matrix(y_points)
    if x.shape[0] != y.shape[0]:
        raise InvalidInputError(f"size mismatch: {x.shape[0]} vs {y.shape[0]}")
    if x.shape[1] != y.shape[1]:
        raise InvalidInputError("dimension mismatch between point sets")
    _require_distinct(x, "source set")
    _require_distinct(y, "target set")
    n = x.shape[0]
    cost_matrix = squared_distances(x, y)
    rows, cols = linear_sum_assignment(cost_matrix)
    diffs = x[rows] - y[cols]
    cost = float(np.sum(diffs * diffs) / n)
    src, tgt = empirical(x), empirical(y)
    return Coupling(
        src=src,
        tgt=tgt,
        src_idx=rows.astype(np.intp),
        tgt_idx=cols.astype(np.intp),
        mass=np.full(n, 1.0 / n),
        cost=cost,
    )
