"""The two explicit failure modes of coupling stability, at desk scale.

Unbounded reference (geometric Gaussian family)
    The maps ``T_n`` scaling coordinate i by ``(2/(2 - 1/n))^i`` push a fixed
    fast-decaying Gaussian onto nearby ones, yet along the point
    ``x = sum_i (1/i) e_i`` their images blow up coordinate-by-coordinate as
    the truncation grows: the image norm at truncation d grows without bound
    in d for every n.  At a *fixed* truncation the maps converge to the
    identity as n grows, so any fixed nonnegative-coefficient direction sees
    shrinking gaps; the experiment therefore (a) verifies the closed form of
    the last-coordinate gap, (b) records the image-norm growth in d, and
    (c) *searches* for a unit direction h along which the gap sequence
    ``<h, T_n(x_{m(n)}) - x_{m(n)}>`` increases across the tested grid,
    making the existential unbounded-direction argument concrete.

Boundary of the support (1-D two-interval family)
    Transporting Uniform((0, 1+1/n) u (2+1/n, 3)) onto Uniform((0,1) u (2,3))
    has the explicit monotone quantile map: identity below 1, ``x + 1`` on
    (1, 1+1/n), the constant ``2 + 1/n`` on [1+1/n, 2+1/n], identity above;
    the subdifferential at the boundary point 1 is the full interval [1, 2],
    so the value 2 persists for every n while interior probes converge.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError
from ..maps import gaussian_map
from ..measures import GaussianSpec, geometric_spectrum

__all__ = [
    "CounterexampleAResult",
    "CounterexampleBResult",
    "unbounded_family_map",
    "run_counterexample_a",
    "boundary_subdifferential",
    "run_counterexample_b",
]


def unbounded_family_map(n: int, d: int):
    """The diagonal map with ratios (2/(2 - 1/n))^i between the two Gaussians."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    src = GaussianSpec(mean=np.zeros(d), stds=geometric_spectrum(0.5, d), rule="geometric(0.5)")
    tgt_base = 1.0 / (2.0 - 1.0 / n)
    tgt = GaussianSpec(
        mean=np.zeros(d),
        stds=geometric_spectrum(tgt_base, d),
        rule=f"geometric(1/(2-1/{n}))",
    )
    return gaussian_map(src, tgt)


@dataclass(frozen=True)
class CounterexampleAResult:
    rows: list
    norm_growth: list
    found_direction: np.ndarray
    found_gap_increasing: bool
    max_closed_form_dev: float
    truncation_dim: int


def run_counterexample_a(d: int, n_grid, seed: int = 0) -> CounterexampleAResult:
    """Image blow-up along x = sum_i e_i / i under the geometric map family.

    For each n: picks ``x_{m(n)}``, the shortest prefix of x whose image norm
    exceeds n (falling back, flagged, to the full truncation when the target
    is out of reach at dimension d), then reports the image norm, the
    last-coordinate gap against its closed form ``((2/(2-1/n))^d - 1)/d``,
    and the gap along a searched unit direction chosen (least-norm
    interpolation) to make the gap sequence increase across the grid.  The
    ``seed`` only enters the run metadata; the construction is deterministic.
    """
    if d < 1:
        raise InvalidInputError("d must be >= 1")
    n_grid = [int(n) for n in n_grid]
    x_full = 1.0 / np.arange(1, d + 1, dtype=float)

    rows = []
    vectors = []
    norm_growth = []
    max_dev = 0.0
    for n in n_grid:
        tmap = unbounded_family_map(n, d)
        image_coords = tmap.apply(x_full)
        cum_norms = np.sqrt(np.cumsum(image_coords**2))
        above = np.nonzero(cum_norms > n)[0]
        target_met = above.size > 0
        m_n = int(above[0]) + 1 if target_met else d
        x_m = np.where(np.arange(d) < m_n, x_full, 0.0)
        v = tmap.apply(x_m) - x_m
        vectors.append(v)

        ratio = 2.0 / (2.0 - 1.0 / n)
        gap_impl = float((tmap.apply(x_full) - x_full)[d - 1])
        gap_closed = (ratio**d - 1.0) / d
        max_dev = max(max_dev, abs(gap_impl - gap_closed))
        rows.append(
            {
                "n": n,
                "ratio": ratio,
                "m_n": m_n,
                "target_met": target_met,
                "image_norm": float(cum_norms[m_n - 1]),
                "gap_e_d": gap_impl,
                "gap_e_d_closed_form": float(gap_closed),
            }
        )
        for m in range(1, d + 1):
            norm_growth.append({"n": n, "m": m, "image_norm": float(cum_norms[m - 1])})

    v_mat = np.stack(vectors)
    targets = np.arange(1, len(n_grid) + 1, dtype=float)
    h_raw, *_ = np.linalg.lstsq(v_mat, targets, rcond=None)
    h_norm = float(np.linalg.norm(h_raw))
    if h_norm == 0.0:
        h_unit = np.zeros(d)
        found_gaps = np.zeros(len(n_grid))
    else:
        h_unit = h_raw / h_norm
        found_gaps = v_mat @ h_unit
    increasing = bool(np.all(np.diff(found_gaps) > 0))
    for row, g in zip(rows, found_gaps):
        row["gap_found_h"] = float(g)

    return CounterexampleAResult(
        rows=rows,
        norm_growth=norm_growth,
        found_direction=h_unit,
        found_gap_increasing=increasing,
        max_closed_form_dev=float(max_dev),
        truncation_dim=d,
    )


def boundary_subdifferential(x: float, n: int) -> tuple[float, float]:
    """Derived subdifferential interval of the two-interval quantile map.

    Comes from composing the distribution function of
    Uniform((0, 1+1/n) u (2+1/n, 3)) with the quantile function of
    Uniform((0,1) u (2,3)) and filling jumps with intervals (both densities
    are 1/2 on supports of total length 2, which is what makes the pieces
    affine with unit slope).
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    step = 1.0 / n
    if x < 1.0:
        return (x, x)
    if x == 1.0:
        return (1.0, 2.0)
    if x < 1.0 + step:
        return (x + 1.0, x + 1.0)
    if x <= 2.0 + step:
        return (2.0 + step, 2.0 + step)
    return (x, x)


def _printed_formula(x: float, n: int):
    """The four printed cases; returns (covered, lo, hi, note)."""
    step = 1.0 / n
    if x < 1.0 or x > 2.0 + step:
        return True, x, x, "identity piece"
    if x == 1.0:
        return True, 1.0, 2.0, "boundary interval"
    if 1.0 + step <= x <= 2.0:
        return True, 2.0 + step, 2.0 + step, "constant piece"
    if 1.0 < x < 1.0 + step:
        return False, x + 1.0, x + 1.0, "interval printed as '(1+1/n)'; read as (1, 1+1/n)"
    return False, None, None, "not covered by the printed cases"


@dataclass(frozen=True)
class CounterexampleBResult:
    rows: list
    grid_x: np.ndarray
    grid_lo: np.ndarray
    grid_hi: np.ndarray
    monotone: bool


def run_counterexample_b(n_grid, probes=None) -> CounterexampleBResult:
    """Probe the derived two-interval map and compare with the printed cases.

    Each row records the derived subdifferential at a probe, whether the
    probe lies in the interior of the limiting support, the gap to the
    identity, and whether the printed piecewise formula covers/matches the
    derived value.  The derived map is also checked to be nondecreasing on a
    1000-point grid.
    """
    if probes is None:
        probes = [0.5, 0.99, 1.0, 1.3, 2.05, 2.9]
    n_grid = [int(n) for n in n_grid]
    rows = []
    for n in n_grid:
        for x in probes:
            lo, hi = boundary_subdifferential(float(x), n)
            covered, plo, phi, note = _printed_formula(float(x), n)
            match = covered and plo is not None and (abs(plo - lo) < 1e-12 and abs(phi - hi) < 1e-12)
            interior = (0.0 < x < 1.0) or (2.0 < x < 3.0)
            rows.append(
                {
                    "n": n,
                    "probe": float(x),
                    "lo": lo,
                    "hi": hi,
                    "limit_value": hi,
                    "identity_gap": max(abs(lo - x), abs(hi - x)),
                    "in_interior_support": interior,
                    "printed_covered": covered,
                    "printed_match": bool(match),
                    "note": note,
                }
            )

    grid_x = np.linspace(-0.5, 3.5, 1000)
    n_check = n_grid[0]
    pairs = [boundary_subdifferential(float(x), n_check) for x in grid_x]
    grid_lo = np.array([p[0] for p in pairs])
    grid_hi = np.array([p[1] for p in pairs])
    monotone = bool(
        np.all(np.diff(grid_lo) >= 0)
        and np.all(np.diff(grid_hi) >= 0)
        and np.all(grid_hi[:-1] <= grid_lo[1:])
    )
    return CounterexampleBResult(
        rows=rows, grid_x=grid_x, grid_lo=grid_lo, grid_hi=grid_hi, monotone=monotone
    )
