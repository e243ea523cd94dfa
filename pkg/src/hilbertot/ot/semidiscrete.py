"""Averaged stochastic dual ascent for semi-discrete quadratic transport.

The dual of the transport problem from a sampled source onto finitely many
atoms is a concave function of one weight per atom, whose gradient entries
are the target masses minus the source mass of the induced cells.  Ascent
with step ``c / sqrt(t)`` and tail averaging drives the cell masses to the
target weights; the averaged weights define the max-affine potential whose
gradient is the fitted transport map.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError, InvalidInputError
from ..hilbert import as_coeffs
from ..measures import DiscreteMeasure, MeasureSpec, make_rng
from .potential import MaxAffinePotential

__all__ = ["SemidiscreteResult", "cell_indices", "cell_masses", "semidiscrete_solve"]


def _affine_form(tgt_points: np.ndarray, weights: np.ndarray) -> MaxAffinePotential:
    intercepts = -(np.sum(tgt_points * tgt_points, axis=1) - weights) / 2.0
    return MaxAffinePotential(slopes=tgt_points, intercepts=intercepts)


def cell_indices(points: np.ndarray, tgt_points: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Index of the weighted-nearest atom (the attaining affine piece) per row."""
    return _affine_form(tgt_points, weights).argmax_indices(points)


def cell_masses(points: np.ndarray, tgt_points: np.ndarray, weights: np.ndarray) -> np.ndarray:
    idx = cell_indices(points, tgt_points, weights)
    return np.bincount(idx, minlength=tgt_points.shape[0]) / points.shape[0]


@dataclass(frozen=True)
class SemidiscreteResult:
    """Fitted potential plus the ascent diagnostics."""

    potential: MaxAffinePotential
    weights: np.ndarray
    mismatch: float
    iters: int
    step_scale: float


def semidiscrete_solve(
    src_spec: MeasureSpec,
    tgt: DiscreteMeasure,
    batch: int = 512,
    iters: int = 3000,
    step_scale: float | None = None,
    seed: int = 0,
    tol: float = 0.005,
    validation_n: int = 100_000,
    anchor=None,
) -> SemidiscreteResult:
    """Fit the transport potential from a sampled source onto discrete atoms.

    Parameters
    ----------
    src_spec : measure spec
        Sampler for the source; should be regular (non-degenerate Gaussian or
        cube measure) so cells have well-defined masses.
    tgt : DiscreteMeasure
        Bounded discrete target.
    batch, iters : int
        Mini-batch size and number of ascent steps; the second half of the
        iterates is averaged.
    step_scale : float, optional
        The ``c`` in the ``c / sqrt(t)`` schedule.  Defaults to the mean
        squared distance between a probe batch and the atoms, which puts the
        first steps on the scale of the dual weights.
    seed : int
        Drives the probe, every mini-batch, and the validation sample.
    tol : float
        Maximum allowed cell-mass mismatch ``max_j |mass_j - q_j|`` measured
        on a fresh validation sample.
    validation_n : int
        Validation sample size (default 1e5).
    anchor : vector, optional
        The returned potential is shifted so its value at ``anchor`` (default
        the origin) is zero.

    Raises
    ------
    ConvergenceError
        If the validation mismatch exceeds ``tol``; carries the mismatch.
    """
    if src_spec.dim != tgt.dim:
        raise InvalidInputError("source and target dimensions differ")
    if batch < 1 or iters < 1 or validation_n < 1:
        raise InvalidInputError("batch, iters, and validation_n must be >= 1")
    rng = make_rng(seed)
    y = tgt.points
    q = tgt.weights
    m = tgt.n_atoms
    if anchor is None:
        anchor = np.zeros(tgt.dim)
    anchor = as_coeffs(anchor)

    if m == 1:
        potential = _affine_form(y, np.zeros(1)).anchored(anchor)
        return SemidiscreteResult(
            potential=potential, weights=np.zeros(1), mismatch=0.0, iters=0, step_scale=0.0
        )

    if step_scale is None:
        probe = src_spec.draw(min(1024, max(64, batch)), rng)
        sq = (
            np.sum(probe * probe, axis=1)[:, None]
            + np.sum(y * y, axis=1)[None, :]
            - 2.0 * probe @ y.T
        )
        step_scale = float(np.mean(np.maximum(sq, 0.0)))

    w = np.zeros(m)
    acc = np.zeros(m)
    n_acc = 0
    tail_start = iters // 2
    for t in range(1, iters + 1):
        x = src_spec.draw(batch, rng)
        freq = np.bincount(cell_indices(x, y, w), minlength=m) / batch
        w += (step_scale / np.sqrt(t)) * (q - freq)
        if t > tail_start:
            acc += w
            n_acc += 1
    w_bar = acc / n_acc

    val = src_spec.draw(validation_n, rng)
    mismatch = float(np.max(np.abs(cell_masses(val, y, w_bar) - q)))
    if mismatch > tol:
        raise ConvergenceError(
            f"cell-mass mismatch {mismatch:.4g} above tolerance {tol:.4g} "
            f"after {iters} iterations",
            mismatch=mismatch,
        )
    potential = _affine_form(y, w_bar).anchored(anchor)
    return SemidiscreteResult(
        potential=potential,
        weights=w_bar,
        mismatch=mismatch,
        iters=iters,
        step_scale=step_scale,
    )
