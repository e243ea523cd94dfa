"""Measure families on the truncated space: samplers and discrete containers.

Three parametric families cover every construction used by the experiment
harnesses:

* diagonal Gaussians (mean + per-coordinate standard deviations),
* cube measures ``a + sum_i scale_i U_i e_i`` with ``U_i ~ Uniform(0,1)``,
* the spherical-uniform reference ``U * G / |G|`` (``U ~ Uniform(0,1)``,
  ``G`` a non-degenerate Gaussian), whose samples fill the open unit ball
  with ``|X| ~ Uniform(0,1)`` exactly.

Discrete measures are weighted atom lists with normalized weights and
duplicate atoms merged on construction.  All sampling is driven by the
counter-based Philox generator so that (spec, n, seed) determines the output
bitwise; replication streams are derived as ``seed + stream``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import InvalidInputError
from .hilbert import as_coeffs

__all__ = [
    "make_rng",
    "geometric_spectrum",
    "GaussianSpec",
    "CubeSpec",
    "SphericalUniformSpec",
    "DiscreteMeasure",
    "DiscretizedReference",
    "sample",
    "empirical",
    "pushforward",
    "discretize_reference",
    "spec_to_dict",
    "spec_from_dict",
]

MERGE_TOL = 1e-12


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for ``seed``; stream ``r`` uses key ``seed + r``."""
    return np.random.Generator(np.random.Philox(key=int(seed) + int(stream)))


def geometric_spectrum(base: float, dim: int, scale: float = 1.0) -> np.ndarray:
    """Spectrum ``scale * base**i`` for i = 1..dim (used by the counterexamples)."""
    if dim < 1:
        raise InvalidInputError("dim must be >= 1")
    return scale * np.power(float(base), np.arange(1, dim + 1, dtype=float))


def _nonneg_spectrum(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float).copy()
    if arr.ndim != 1 or arr.size < 1:
        raise InvalidInputError(f"{name} must be a nonempty 1-D array")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    if np.any(arr < 0):
        raise InvalidInputError(f"{name} must be nonnegative")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GaussianSpec:
    """Diagonal Gaussian: mean + sum_i stds[i] * xi_i * e_i with xi_i iid N(0,1)."""

    mean: np.ndarray
    stds: np.ndarray
    rule: str | None = None  # human-readable spectrum tag, e.g. "geometric(0.5)"

    def __post_init__(self):
        mean = as_coeffs(self.mean)
        stds = _nonneg_spectrum(self.stds, "stds")
        if mean.size != stds.size:
            raise InvalidInputError("mean and stds must have equal length")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "stds", stds)

    @property
    def dim(self) -> int:
        return int(self.mean.size)

    @property
    def non_degenerate(self) -> bool:
        return bool(np.all(self.stds > 0))

    @property
    def centered(self) -> bool:
        return bool(np.all(self.mean == 0.0))

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        xi = rng.standard_normal((n, self.dim))
        return self.mean[None, :] + xi * self.stds[None, :]

    def direction_std(self, h) -> float:
        """Standard deviation of <X, h> (marginals are Gaussian)."""
        hv = as_coeffs(h)
        return float(np.sqrt(np.sum((self.stds * hv) ** 2)))


@dataclass(frozen=True)
class CubeSpec:
    """Cube measure: shift + sum_i scales[i] * U_i * e_i, U_i iid Uniform(0,1)."""

    shift: np.ndarray
    scales: np.ndarray
    rule: str | None = None

    def __post_init__(self):
        shift = as_coeffs(self.shift)
        scales = _nonneg_spectrum(self.scales, "scales")
        if shift.size != scales.size:
            raise InvalidInputError("shift and scales must have equal length")
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "scales", scales)

    @property
    def dim(self) -> int:
        return int(self.shift.size)

    @property
    def support_bound(self) -> float:
        """Radius of a ball guaranteed to contain the support."""
        return float(np.linalg.norm(self.shift) + np.linalg.norm(self.scales))

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        u = rng.random((n, self.dim))
        return self.shift[None, :] + u * self.scales[None, :]


@dataclass(frozen=True)
class SphericalUniformSpec:
    """Reference U * G/|G| with U ~ Uniform(0,1): radius uniform, directions Gaussian."""

    gaussian: GaussianSpec

    def __post_init__(self):
        if not self.gaussian.non_degenerate:
            raise InvalidInputError("spherical uniform requires a non-degenerate Gaussian")

    @property
    def dim(self) -> int:
        return self.gaussian.dim

    @property
    def support_bound(self) -> float:
        return 1.0

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        g = self.gaussian.draw(n, rng)
        u = rng.random(n)
        norms = np.linalg.norm(g, axis=1)
        return g * (u / norms)[:, None]


MeasureSpec = GaussianSpec | CubeSpec | SphericalUniformSpec


def sample(spec: MeasureSpec, n: int, seed: int, stream: int = 0) -> np.ndarray:
    """Draw ``n`` points (rows) from ``spec``, deterministically in (spec, n, seed)."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    return spec.draw(n, make_rng(seed, stream))


def _merge_duplicates(points: np.ndarray, weights: np.ndarray):
    """Merge atoms whose coordinates agree within MERGE_TOL.

    Neighbors are found in lexicographic order (chainwise), but the surviving
    atoms keep the original first-occurrence order so that indices into the
    support stay meaningful for callers that did not trigger a merge.
    """
    n = points.shape[0]
    if n == 1:
        return points, weights
    order = np.lexsort(points.T[::-1])
    sorted_pts = points[order]
    near = np.max(np.abs(np.diff(sorted_pts, axis=0)), axis=1) <= MERGE_TOL
    if not near.any():
        return points, weights
    group = np.empty(n, dtype=np.intp)
    gid = 0
    group[order[0]] = 0
    for pos, cur in enumerate(order[1:]):
        if not near[pos]:
            gid += 1
        group[cur] = gid
    n_groups = gid + 1
    first_seen = np.full(n_groups, n, dtype=np.intp)
    for idx in range(n):
        g = group[idx]
        if idx < first_seen[g]:
            first_seen[g] = idx
    rank = np.argsort(np.argsort(first_seen, kind="stable"), kind="stable")
    out_pts = np.empty((n_groups, points.shape[1]))
    out_wts = np.zeros(n_groups)
    for idx in range(n):
        slot = rank[group[idx]]
        out_wts[slot] += weights[idx]
    out_pts[rank] = points[first_seen]
    return out_pts, out_wts


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely supported probability measure: atom rows + normalized weights.

    Construction drops zero-mass atoms, merges coordinate-wise duplicates
    (tolerance 1e-12), and renormalizes the weights to sum exactly to one.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise InvalidInputError("points must be a nonempty (n, d) array")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("points contain non-finite entries")
        wts = np.asarray(self.weights, dtype=float)
        if wts.shape != (pts.shape[0],):
            raise InvalidInputError("weights must be 1-D with one entry per point")
        if np.any(wts < 0) or not np.all(np.isfinite(wts)):
            raise InvalidInputError("weights must be finite and nonnegative")
        total = wts.sum()
        if total <= 0:
            raise InvalidInputError("weights must have positive total mass")
        keep = wts > 0
        pts, wts = pts[keep].copy(), wts[keep].copy()
        pts, wts = _merge_duplicates(pts, wts)
        wts = wts / wts.sum()
        pts.flags.writeable = False
        wts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)

    @property
    def n_atoms(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    @property
    def is_uniform(self) -> bool:
        return bool(np.allclose(self.weights, 1.0 / self.n_atoms, rtol=0, atol=1e-12))

    def max_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.points, axis=1)))


def empirical(points) -> DiscreteMeasure:
    """Uniform-weight measure on the given points (duplicates merged)."""
    if isinstance(points, np.ndarray):
        pts = points
    else:
        rows = [as_coeffs(p) for p in points]
        if not rows:
            raise InvalidInputError("empty point list")
        pts = np.stack(rows)
    n = pts.shape[0]
    return DiscreteMeasure(points=pts, weights=np.full(n, 1.0 / n))


def pushforward(measure: DiscreteMeasure, mapping: Callable[[np.ndarray], np.ndarray]) -> DiscreteMeasure:
    """Image measure: apply ``mapping`` (vectorized over atom rows) to the support."""
    images = np.asarray(mapping(measure.points), dtype=float)
    if images.shape[0] != measure.n_atoms:
        raise InvalidInputError("mapping must return one row per atom")
    return DiscreteMeasure(points=images, weights=measure.weights.copy())


@dataclass(frozen=True)
class DiscretizedReference:
    """A bounded m-atom stand-in for a reference measure, plus how it was built."""

    measure: DiscreteMeasure
    strategy: str
    seed: int
    bound: float


def discretize_reference(
    spec: SphericalUniformSpec | CubeSpec,
    m: int,
    seed: int,
    strategy: str = "seeded-iid",
    stream: int = 0,
) -> DiscretizedReference:
    """Build an m-atom uniform-weight discretization of a bounded reference.

    ``seeded-iid`` draws m independent points from the spec.  ``quantile-grid``
    (1-D only) places atoms at the quantiles i/(m+1), i = 1..m; for the 1-D
    spherical uniform this is the regular grid on (-1, 1), for a 1-D cube
    measure the grid shift + scale * i/(m+1).
    """
    if m < 1:
        raise InvalidInputError("m must be >= 1")
    if strategy == "seeded-iid":
        pts = sample(spec, m, seed, stream)
    elif strategy == "quantile-grid":
        if spec.dim != 1:
            raise InvalidInputError("quantile-grid discretization is 1-D only")
        q = np.arange(1, m + 1, dtype=float) / (m + 1)
        if isinstance(spec, CubeSpec):
            pts = (spec.shift[0] + spec.scales[0] * q)[:, None]
        else:
            pts = (2.0 * q - 1.0)[:, None]
    else:
        raise InvalidInputError(f"unknown discretization strategy {strategy!r}")
    measure = empirical(pts)
    return DiscretizedReference(
        measure=measure, strategy=strategy, seed=seed, bound=float(spec.support_bound)
    )


def _spectrum_to_jsonable(arr: np.ndarray, rule: str | None):
    if rule is not None:
        return {"rule": rule, "values": [float(v) for v in arr]}
    return [float(v) for v in arr]


def _spectrum_from_jsonable(obj, dim_hint: int | None = None):
    """Accept an explicit list or a {rule: geometric, base, scale, dim} dict."""
    if isinstance(obj, dict):
        if "values" in obj:
            return np.asarray(obj["values"], dtype=float), obj.get("rule")
        rule = obj.get("rule")
        if rule == "geometric":
            dim = int(obj.get("dim", dim_hint or 0))
            if dim < 1:
                raise InvalidInputError("geometric spectrum needs a dim")
            base = float(obj["base"])
            scale = float(obj.get("scale", 1.0))
            tag = f"geometric(base={base}, scale={scale})"
            return geometric_spectrum(base, dim, scale), tag
        if rule == "constant":
            dim = int(obj.get("dim", dim_hint or 0))
            if dim < 1:
                raise InvalidInputError("constant spectrum needs a dim")
            value = float(obj["value"])
            return np.full(dim, value), f"constant({value})"
        raise InvalidInputError(f"unknown spectrum rule {obj.get('rule')!r}")
    return np.asarray(obj, dtype=float), None


def spec_to_dict(spec: MeasureSpec) -> dict:
    """JSON-ready description of a measure spec (inverse of spec_from_dict)."""
    if isinstance(spec, GaussianSpec):
        return {
            "kind": "gaussian",
            "mean": [float(v) for v in spec.mean],
            "stds": _spectrum_to_jsonable(spec.stds, spec.rule),
        }
    if isinstance(spec, CubeSpec):
        return {
            "kind": "cube",
            "shift": [float(v) for v in spec.shift],
            "scales": _spectrum_to_jsonable(spec.scales, spec.rule),
        }
    if isinstance(spec, SphericalUniformSpec):
        return {"kind": "spherical_uniform", "gaussian": spec_to_dict(spec.gaussian)}
    raise InvalidInputError(f"unknown spec type {type(spec).__name__}")


def spec_from_dict(obj: dict) -> MeasureSpec:
    """Parse a measure spec from its config-file form."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InvalidInputError("measure spec must be a dict with a 'kind' field")
    kind = obj["kind"]
    if kind == "gaussian":
        dim_hint = len(obj["mean"]) if isinstance(obj.get("mean"), (list, tuple)) else None
        stds, rule = _spectrum_from_jsonable(obj["stds"], dim_hint)
        mean = obj.get("mean", [0.0] * stds.size)
        if isinstance(mean, (int, float)):
            mean = [float(mean)] * stds.size
        return GaussianSpec(mean=np.asarray(mean, dtype=float), stds=stds, rule=rule)
    if kind == "cube":
        dim_hint = len(obj["shift"]) if isinstance(obj.get("shift"), (list, tuple)) else None
        scales, rule = _spectrum_from_jsonable(obj["scales"], dim_hint)
        shift = obj.get("shift", [0.0] * scales.size)
        if isinstance(shift, (int, float)):
            shift = [float(shift)] * scales.size
        return CubeSpec(shift=np.asarray(shift, dtype=float), scales=scales, rule=rule)
    if kind == "spherical_uniform":
        inner = dict(obj["gaussian"])
        inner.setdefault("kind", "gaussian")
        return SphericalUniformSpec(gaussian=spec_from_dict(inner))
    raise InvalidInputError(f"unknown measure kind {kind!r}")
