"""Monte-Carlo stability runs: empirical couplings against a population map.

A run draws, for each replication, one source stream and one reference
stream at the largest grid size (smaller n use prefixes, so each replication
follows a nested sequence of empirical measures), solves the exact coupling
at each n, and compares the fitted subdifferential against a population map
inside a compact region: per-direction sups ``|<y - T(x), h>|`` and the norm
sup ``|y - T(x)|`` over pairs (x, y) of the fitted subdifferential with x in
the region (a fixed probe grid plus the in-region support pairs), and the
sup difference of the anchored dual potential against the population
potential on the same probes.  Gaps shrinking along the n grid is the
expected behavior when the reference stays bounded; the Gaussian (unbounded)
reference model exists to exhibit the opposite and is flagged as a bound
violation in every row.

Population maps come in three flavors:

* ``ball_squash`` — the closed-form radial squash; the reference atoms are
  squashed independent source samples, so the population map and potential
  are exact;
* ``gaussian`` — closed-form diagonal Gaussian-to-Gaussian map (unbounded
  reference, deliberately violating the bounded-support premise);
* ``discretized`` — reference atoms discretize a bounded spec; the population
  map is fitted once by semi-discrete ascent against a fine discretization.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import InvalidInputError
from ..maps import BallSquashMap, DiagonalMap, gaussian_map
from ..measures import (
    DiscreteMeasure,
    GaussianSpec,
    MeasureSpec,
    discretize_reference,
    empirical,
    sample,
    spec_from_dict,
    spec_to_dict,
)
from ..ot import potential_from_dual, semidiscrete_solve, solve_transport
from ..regions import CompactRegion

__all__ = [
    "StabilityConfig",
    "StabilityResult",
    "build_reference_model",
    "run_stability",
]

_DATA_SALT = 1_000_003
_REF_SALT = 2_000_003
_PROBE_SALT = 9_000_017
_FIT_SALT = 5_000_011


class SquashReferenceModel:
    """Bounded reference = radial squash of independent source samples."""

    kind = "ball_squash"

    def __init__(self, p_spec: MeasureSpec, scale: float = 1.0):
        self.p_spec = p_spec
        self.map = BallSquashMap(scale)
        self.bound = self.map.bound

    def draw_atoms(self, n: int, seed: int, stream: int) -> np.ndarray:
        return self.map.apply(sample(self.p_spec, n, seed, stream))

    def map_points(self, points: np.ndarray) -> np.ndarray:
        return self.map.apply(points)

    def potential_values(self, points: np.ndarray) -> np.ndarray:
        return self.map.potential_values(points)

    def describe(self) -> dict:
        return {"kind": self.kind, "scale": self.map.scale}


class GaussianReferenceModel:
    """Unbounded Gaussian reference; the stability premise is deliberately broken."""

    kind = "gaussian"

    def __init__(self, p_spec: GaussianSpec, tgt_spec: GaussianSpec):
        self.tgt_spec = tgt_spec
        self.map: DiagonalMap = gaussian_map(p_spec, tgt_spec)
        self.bound = float("inf")

    def draw_atoms(self, n: int, seed: int, stream: int) -> np.ndarray:
        return sample(self.tgt_spec, n, seed, stream)

    def map_points(self, points: np.ndarray) -> np.ndarray:
        return self.map.apply(points)

    def potential_values(self, points: np.ndarray) -> np.ndarray:
        return self.map.potential_values(points)

    def describe(self) -> dict:
        return {"kind": self.kind, "tgt": spec_to_dict(self.tgt_spec)}


class DiscretizedReferenceModel:
    """Reference atoms discretize a bounded spec; population map fitted once."""

    kind = "discretized"

    def __init__(
        self,
        p_spec: MeasureSpec,
        ref_spec,
        seed: int,
        strategy: str = "seeded-iid",
        fine_atoms: int = 1024,
        batch: int = 512,
        iters: int = 4000,
        tol: float = 0.01,
        validation_n: int = 100_000,
    ):
        self.ref_spec = ref_spec
        self.strategy = strategy
        fine = discretize_reference(ref_spec, fine_atoms, seed, strategy, stream=_FIT_SALT)
        self.bound = fine.bound
        fit = semidiscrete_solve(
            p_spec,
            fine.measure,
            batch=batch,
            iters=iters,
            seed=seed + _FIT_SALT,
            tol=tol,
            validation_n=validation_n,
        )
        self.fit = fit
        self.fine_atoms = fine_atoms

    def draw_atoms(self, n: int, seed: int, stream: int) -> np.ndarray:
        ref = discretize_reference(self.ref_spec, n, seed, self.strategy, stream=stream)
        return ref.measure.points

    def map_points(self, points: np.ndarray) -> np.ndarray:
        return self.fit.potential.map_points(points)

    def potential_values(self, points: np.ndarray) -> np.ndarray:
        return self.fit.potential.values(points)

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "ref": spec_to_dict(self.ref_spec),
            "strategy": self.strategy,
            "fine_atoms": self.fine_atoms,
            "fit_mismatch": self.fit.mismatch,
        }


def build_reference_model(p_spec: MeasureSpec, reference: dict, seed: int):
    """Construct the reference/population-map model named by a config dict."""
    kind = reference.get("kind")
    if kind == "ball_squash":
        return SquashReferenceModel(p_spec, scale=float(reference.get("scale", 1.0)))
    if kind == "gaussian":
        return GaussianReferenceModel(p_spec, spec_from_dict(reference["tgt"]))
    if kind == "discretized":
        opts = {
            k: reference[k]
            for k in ("strategy", "fine_atoms", "batch", "iters", "tol", "validation_n")
            if k in reference
        }
        return DiscretizedReferenceModel(
            p_spec, spec_from_dict(reference["ref"]), seed=seed, **opts
        )
    raise InvalidInputError(f"unknown reference kind {kind!r}")


@dataclass(frozen=True)
class StabilityConfig:
    p_spec: MeasureSpec
    reference: dict
    n_grid: tuple[int, ...]
    reps: int
    region: CompactRegion
    directions: np.ndarray
    seed: int
    anchor: np.ndarray
    probe_count: int = 256
    bound_m: float | None = None

    def __post_init__(self):
        dirs = np.atleast_2d(np.asarray(self.directions, dtype=float)).copy()
        dirs.flags.writeable = False
        object.__setattr__(self, "directions", dirs)
        anchor = np.asarray(self.anchor, dtype=float).copy()
        anchor.flags.writeable = False
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if len(self.n_grid) < 2:
            raise InvalidInputError("n_grid needs at least two sizes for a trend")
        if self.reps < 1:
            raise InvalidInputError("reps must be >= 1")


@dataclass(frozen=True)
class StabilityResult:
    rows: list
    verdicts: dict
    metadata: dict


def _stability_rep(args) -> list:
    """All rows for one replication (used directly or through a worker pool).

    The replication draws one source stream and one reference stream of the
    largest grid size; smaller n use prefixes, so each replication follows a
    single nested sequence of empirical measures.
    """
    config, model, probes, pop_pot_probes, pop_pot_anchor, bound_m, rep = args
    n_dirs = config.directions.shape[0]
    base = config.seed + rep
    n_max = max(config.n_grid)
    data_full = sample(config.p_spec, n_max, base, stream=_DATA_SALT)
    atoms_full = model.draw_atoms(n_max, base, stream=_REF_SALT)
    rows = []
    for n_idx, n in enumerate(config.n_grid):
        data = data_full[:n]
        atoms = atoms_full[:n]
        max_atom_norm = float(np.max(np.linalg.norm(atoms, axis=1)))
        bound_violation = not (max_atom_norm <= bound_m + 1e-9)
        coupling = solve_transport(empirical(data), empirical(atoms))
        psi_n = potential_from_dual(coupling.dual, coupling.tgt)
        pot_n = psi_n.values(probes) - psi_n.value(config.anchor)
        pot_gap = float(np.max(np.abs(pot_n - (pop_pot_probes - pop_pot_anchor))))

        # The sup runs over the fitted subdifferential with x anywhere in the
        # region: the fixed probe grid samples it as a function, and the
        # in-region support pairs are subdifferential elements at the data.
        xs, ys = coupling.support_points()
        mask = config.region.contains(xs)
        n_in = int(mask.sum())
        diffs = psi_n.map_points(probes) - model.map_points(probes)
        if n_in > 0:
            sup_diffs = ys[mask] - model.map_points(xs[mask])
            diffs = np.vstack([diffs, sup_diffs])
        norm_gap = float(np.max(np.linalg.norm(diffs, axis=1)))
        dir_gaps = np.max(np.abs(diffs @ config.directions.T), axis=0)
        for h_idx in range(n_dirs):
            rows.append(
                {
                    "n": n,
                    "rep": rep,
                    "seed": base,
                    "direction_index": h_idx,
                    "gap": float(dir_gaps[h_idx]),
                    "norm_gap": norm_gap,
                    "potential_gap": pot_gap,
                    "n_in_region": n_in,
                    "bound_violation": bound_violation,
                    "max_atom_norm": max_atom_norm,
                }
            )
    return rows


def run_stability(config: StabilityConfig, workers: int = 1) -> StabilityResult:
    """Execute the stability grid; see the module docstring for the quantities.

    Replications are independent streams; with ``workers > 1`` they run in a
    process pool and are re-assembled in replication order.
    """
    model = build_reference_model(config.p_spec, config.reference, config.seed)
    bound_m = config.bound_m if config.bound_m is not None else model.bound

    probes = sample(config.p_spec, max(4 * config.probe_count, 64), config.seed, stream=_PROBE_SALT)
    probes = probes[config.region.contains(probes)][: config.probe_count]
    if probes.shape[0] == 0:
        raise InvalidInputError("no probe points fall inside the region")
    pop_pot_probes = model.potential_values(probes)
    pop_pot_anchor = model.potential_values(config.anchor[None, :])[0]

    tasks = [
        (config, model, probes, pop_pot_probes, pop_pot_anchor, bound_m, rep)
        for rep in range(config.reps)
    ]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_rep = list(pool.map(_stability_rep, tasks))
    else:
        per_rep = [_stability_rep(t) for t in tasks]
    rows = [row for chunk in per_rep for row in chunk]

    verdicts = _trend_verdicts(rows, config)
    metadata = {
        "reference": model.describe(),
        "bound_m": None if np.isinf(bound_m) else float(bound_m),
        "n_grid": list(config.n_grid),
        "reps": config.reps,
        "seed": config.seed,
        "probe_points": int(probes.shape[0]),
        "region": config.region.to_dict(),
        "anchor": [float(v) for v in config.anchor],
        "truncation_dim": int(config.p_spec.dim),
    }
    return StabilityResult(rows=rows, verdicts=verdicts, metadata=metadata)


def _trend_verdicts(rows: Sequence[dict], config: StabilityConfig) -> dict:
    """Strict small-n vs large-n comparisons, per direction and per replication."""
    n_min, n_max = min(config.n_grid), max(config.n_grid)

    def cell(n, rep, h, key):
        for r in rows:
            if r["n"] == n and r["rep"] == rep and r["direction_index"] == h:
                return r[key]
        return float("nan")

    directional = {}
    for h in range(config.directions.shape[0]):
        oks = [
            cell(n_max, rep, h, "gap") < cell(n_min, rep, h, "gap")
            for rep in range(config.reps)
        ]
        directional[h] = bool(np.all(oks))
    norm_ok = bool(
        np.all(
            [
                cell(n_max, rep, 0, "norm_gap") < cell(n_min, rep, 0, "norm_gap")
                for rep in range(config.reps)
            ]
        )
    )
    pot_ok = bool(
        np.all(
            [
                cell(n_max, rep, 0, "potential_gap") < cell(n_min, rep, 0, "potential_gap")
                for rep in range(config.reps)
            ]
        )
    )
    return {
        "n_min": n_min,
        "n_max": n_max,
        "directional": directional,
        "directional_all": bool(all(directional.values())),
        "norm": norm_ok,
        "potential": pot_ok,
    }
