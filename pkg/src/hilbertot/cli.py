"""Command-line entry point: config parsing, dispatch, deterministic outputs.

Configs are YAML (canonical JSON parses identically).  Every command writes
its primary tables as CSV with shortest-round-trip float formatting, a JSON
metadata sidecar echoing the config, a ``manifest.json`` run record, and by
default one PNG figure; all files land atomically (write-temp-then-rename).
Exit codes: 0 success, 2 config error, 3 solver/convergence error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np
import yaml

from . import __version__, report
from .errors import InvalidInputError, SolverError
from .experiments import (
    CltConfig,
    StabilityConfig,
    run_clt,
    run_counterexample_a,
    run_counterexample_b,
    run_stability,
)
from .maps import null_domain_diagnostic, partial_sum_mean, pathological_push
from .measures import (
    DiscreteMeasure,
    discretize_reference,
    empirical,
    sample,
    spec_from_dict,
)
from .ot import certify_cyclic_monotonicity, potential_from_dual, solve_transport
from .ranks import fit_rank, project_curves, read_curves_csv
from .regions import CompactRegion

__all__ = ["main"]


class ConfigError(Exception):
    """Bad or missing configuration."""


# ---------------------------------------------------------------------------
# formatting and atomic output helpers


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _atomic_write(path: str, data) -> None:
    tmp = f"{path}.tmp-{os.getpid()}"
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(tmp, mode) as fh:
        fh.write(data)
    os.replace(tmp, path)


def _write_csv(path: str, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(row[h]) for h in header))
    _atomic_write(path, "\n".join(lines) + "\n")


def _write_json(path: str, obj) -> None:
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode()).hexdigest()


def _load_config(path: str) -> dict:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a mapping")
    return cfg


def _require(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"config is missing required key {key!r}")
    return cfg[key]


# ---------------------------------------------------------------------------
# input resolution


def _load_points_csv(path: str) -> np.ndarray:
    if not os.path.exists(path):
        raise ConfigError(f"points file not found: {path}")
    pts = np.loadtxt(path, delimiter=",", ndmin=2)
    return pts


def _resolve_points(obj: dict, seed: int, stream: int) -> np.ndarray:
    if "points_csv" in obj:
        return _load_points_csv(obj["points_csv"])
    if "curves_csv" in obj:
        grid, curves = read_curves_csv(obj["curves_csv"])
        dim = int(obj.get("basis_dim", 4))
        weights = obj.get("quadrature_weights")
        return project_curves(curves, grid, dim, weights)
    if "spec" in obj:
        spec = spec_from_dict(obj["spec"])
        n = int(_require(obj, "n"))
        return sample(spec, n, seed, stream=stream)
    raise ConfigError("point source needs one of points_csv | curves_csv | spec")


def _resolve_discrete(obj: dict, seed: int, stream: int) -> DiscreteMeasure:
    pts = _resolve_points(obj, seed, stream)
    if "weights_csv" in obj:
        w = np.loadtxt(obj["weights_csv"], delimiter=",", ndmin=1)
        return DiscreteMeasure(points=pts, weights=w)
    if "weights" in obj:
        return DiscreteMeasure(points=pts, weights=np.asarray(obj["weights"], dtype=float))
    return empirical(pts)


# ---------------------------------------------------------------------------
# command implementations (each returns the list of output files written)


def _cert_to_json(cert) -> dict:
    return {
        "mode": cert.mode,
        "max_violation": cert.max_violation,
        "cycles_checked": cert.cycles_checked,
        "passed": cert.passed,
        "witness": None if cert.witness is None else [list(p) for p in cert.witness],
    }


def _potential_to_json(psi) -> dict:
    return {
        "slopes": [[float(v) for v in row] for row in psi.slopes],
        "intercepts": [float(v) for v in psi.intercepts],
    }


def cmd_transport(cfg: dict, out: str, seed: int, plots: bool) -> list[str]:
    src = _resolve_discrete(_require(cfg, "src"), seed, stream=1)
    tgt = _resolve_discrete(_require(cfg, "tgt"), seed, stream=2)
    coupling = solve_transport(src, tgt)
    cert_opts = cfg.get("certify", {})
    cert = certify_cyclic_monotonicity(
        coupling,
        max_cycle_len=int(cert_opts.get("max_cycle_len", 5)),
        samples=int(cert_opts.get("samples", 10_000)),
        seed=seed,
        budget=int(cert_opts.get("budget", 100_000)),
    )
    outputs = []
    path = os.path.join(out, "coupling.csv")
    _write_csv(
        path,
        ["i", "j", "mass"],
        [
            {"i": int(i), "j": int(j), "mass": m}
            for i, j, m in zip(coupling.src_idx, coupling.tgt_idx, coupling.mass)
        ],
    )
    outputs.append(path)
    path = os.path.join(out, "dual.csv")
    rows = [{"side": "src", "index": i, "potential": v} for i, v in enumerate(coupling.dual.u)]
    rows += [{"side": "tgt", "index": j, "potential": v} for j, v in enumerate(coupling.dual.w)]
    _write_csv(path, ["side", "index", "potential"], rows)
    outputs.append(path)
    path = os.path.join(out, "certificate.json")
    _write_json(path, {"cost": coupling.cost, **_cert_to_json(cert)})
    outputs.append(path)
    psi = potential_from_dual(coupling.dual, tgt)
    path = os.path.join(out, "potential.json")
    _write_json(path, _potential_to_json(psi))
    outputs.append(path)
    if plots:
        path = os.path.join(out, "transport.png")
        report.transport_figure(coupling, path)
        outputs.append(path)
    return outputs


def cmd_rank(cfg: dict, out: str, seed: int, plots: bool) -> list[str]:
    data = _resolve_points(_require(cfg, "data"), seed, stream=1)
    ref_cfg = _require(cfg, "reference")
    spec = spec_from_dict(_require(ref_cfg, "spec"))
    strategy = ref_cfg.get("strategy", "seeded-iid")
    # the reference is discretized to exactly n atoms so the map is a bijection
    ref = discretize_reference(spec, data.shape[0], seed, strategy, stream=3)
    rank_map = fit_rank(data, ref)
    cert = rank_map.certificate(
        max_cycle_len=int(cfg.get("certify", {}).get("max_cycle_len", 4)),
        seed=seed,
        budget=int(cfg.get("certify", {}).get("budget", 100_000)),
        samples=int(cfg.get("certify", {}).get("samples", 10_000)),
    )
    d = data.shape[1]
    header = [f"x{k}" for k in range(d)] + [f"rank{k}" for k in range(d)]
    rows = []
    for xp, rp in zip(rank_map.data_points, rank_map.ranks):
        row = {f"x{k}": xp[k] for k in range(d)}
        row.update({f"rank{k}": rp[k] for k in range(d)})
        rows.append(row)
    outputs = []
    path = os.path.join(out, "rankmap.csv")
    _write_csv(path, header, rows)
    outputs.append(path)
    path = os.path.join(out, "certificate.json")
    _write_json(path, {"reference": rank_map.reference_meta, **_cert_to_json(cert)})
    outputs.append(path)
    if plots:
        path = os.path.join(out, "ranks.png")
        report.rank_figure(rank_map, path)
        outputs.append(path)
    return outputs


def _stability_config(cfg: dict, seed: int) -> StabilityConfig:
    p_spec = spec_from_dict(_require(cfg, "source"))
    region = CompactRegion.from_dict(_require(cfg, "region"))
    directions = np.asarray(_require(cfg, "directions"), dtype=float)
    anchor = np.asarray(cfg.get("anchor", [0.0] * p_spec.dim), dtype=float)
    return StabilityConfig(
        p_spec=p_spec,
        reference=_require(cfg, "reference"),
        n_grid=tuple(int(n) for n in _require(cfg, "n_grid")),
        reps=int(cfg.get("reps", 5)),
        region=region,
        directions=directions,
        seed=seed,
        anchor=anchor,
        probe_count=int(cfg.get("probe_count", 256)),
        bound_m=cfg.get("bound_m"),
    )


def cmd_stability(cfg: dict, out: str, seed: int, plots: bool, workers: int = 1) -> list[str]:
    config = _stability_config(cfg, seed)
    result = run_stability(config, workers=workers)
    outputs = []
    path = os.path.join(out, "stability_gaps.csv")
    header = [
        "experiment", "n", "rep", "seed", "direction_index", "gap",
        "norm_gap", "potential_gap", "n_in_region", "bound_violation", "max_atom_norm",
    ]
    rows = [{"experiment": "stability", **r} for r in result.rows]
    _write_csv(path, header, rows)
    outputs.append(path)
    path = os.path.join(out, "verdicts.json")
    _write_json(path, {"verdicts": result.verdicts, "metadata": result.metadata})
    outputs.append(path)
    if plots:
        path = os.path.join(out, "stability.png")
        report.stability_figure(result.rows, result.verdicts, path)
        outputs.append(path)
    return outputs


def cmd_counterexample_a(cfg: dict, out: str, seed: int, plots: bool) -> list[str]:
    result = run_counterexample_a(
        d=int(cfg.get("d", 12)),
        n_grid=cfg.get("n_grid", [2, 4, 8, 16]),
        seed=seed,
    )
    outputs = []
    path = os.path.join(out, "counterexample_a.csv")
    header = ["n", "ratio", "m_n", "target_met", "image_norm", "gap_e_d",
              "gap_e_d_closed_form", "gap_found_h"]
    _write_csv(path, header, result.rows)
    outputs.append(path)
    path = os.path.join(out, "norm_growth.csv")
    _write_csv(path, ["n", "m", "image_norm"], result.norm_growth)
    outputs.append(path)
    path = os.path.join(out, "direction.json")
    _write_json(
        path,
        {
            "found_direction": [float(v) for v in result.found_direction],
            "found_gap_increasing": result.found_gap_increasing,
            "max_closed_form_dev": result.max_closed_form_dev,
            "truncation_dim": result.truncation_dim,
        },
    )
    outputs.append(path)
    if plots:
        path = os.path.join(out, "counterexample_a.png")
        report.counterexample_a_figure(result, path)
        outputs.append(path)
    return outputs


def cmd_counterexample_b(cfg: dict, out: str, seed: int, plots: bool) -> list[str]:
    result = run_counterexample_b(
        n_grid=cfg.get("n_grid", [2, 4, 8, 16, 32]),
        probes=cfg.get("probes"),
    )
    outputs = []
    path = os.path.join(out, "counterexample_b.csv")
    header = ["n", "probe", "lo", "hi", "limit_value", "identity_gap",
              "in_interior_support", "printed_covered", "printed_match", "note"]
    _write_csv(path, header, result.rows)
    outputs.append(path)
    path = os.path.join(out, "monotonicity.json")
    _write_json(path, {"monotone": result.monotone, "grid_points": int(result.grid_x.size)})
    outputs.append(path)
    if plots:
        path = os.path.join(out, "counterexample_b.png")
        report.counterexample_b_figure(result, path)
        outputs.append(path)
    return outputs


def cmd_clt(cfg: dict, out: str, seed: int, plots: bool, workers: int = 1) -> list[str]:
    p_spec = spec_from_dict(_require(cfg, "source"))
    ref_cfg = _require(cfg, "reference")
    if "points_csv" in ref_cfg or "spec" in ref_cfg and "atoms" not in ref_cfg:
        target = _resolve_discrete(ref_cfg, seed, stream=4)
    else:
        spec = spec_from_dict(_require(ref_cfg, "spec"))
        target = discretize_reference(
            spec, int(_require(ref_cfg, "atoms")), seed,
            ref_cfg.get("strategy", "seeded-iid"), stream=4
        ).measure
    config = CltConfig(
        p_spec=p_spec,
        target=target,
        n=int(_require(cfg, "n")),
        reps=int(_require(cfg, "reps")),
        seed=seed,
        potential_opts=cfg.get("potential", {}),
        mc_n=int(cfg.get("mc_n", 200_000)),
    )
    result = run_clt(config, workers=workers)
    outputs = []
    path = os.path.join(out, "clt_statistics.csv")
    _write_csv(
        path,
        ["rep", "statistic"],
        [{"rep": i, "statistic": s} for i, s in enumerate(result.statistics)],
    )
    outputs.append(path)
    path = os.path.join(out, "clt_report.json")
    _write_json(
        path,
        {
            "sigma2_formula": result.sigma2_formula,
            "sigma2_formula_se": result.sigma2_formula_se,
            "sigma2_empirical": result.sigma2_empirical,
            "ks_to_normal": result.ks_to_normal,
            "variance_ratio": result.variance_ratio,
            "degenerate": result.degenerate,
            "mean_t2": result.mean_t2,
            "n": result.n,
            "reps": result.reps,
            "regularity": config.regularity,
        },
    )
    outputs.append(path)
    if result.potential is not None:
        path = os.path.join(out, "potential.json")
        _write_json(path, _potential_to_json(result.potential))
        outputs.append(path)
    if plots:
        path = os.path.join(out, "clt.png")
        report.clt_figure(result, path)
        outputs.append(path)
    return outputs


def cmd_diagnose_null_domain(cfg: dict, out: str, seed: int, plots: bool) -> list[str]:
    d_max = int(cfg.get("d_max", 12))
    n_seeds = int(cfg.get("n_seeds", 1000))
    table = null_domain_diagnostic(d_max, n_seeds, seed)
    push_cfg = cfg.get("push", {})
    push_d = int(push_cfg.get("d", 3))
    push_n = int(push_cfg.get("n", 5))
    inputs, outputs_pts = pathological_push(push_d, push_n, seed)
    outputs = []
    path = os.path.join(out, "partial_sums.csv")
    rows = [
        {"seed": k, "d": dd + 1, "s_d": table[k, dd]}
        for k in range(table.shape[0])
        for dd in range(table.shape[1])
    ]
    _write_csv(path, ["seed", "d", "s_d"], rows)
    outputs.append(path)
    path = os.path.join(out, "push_samples.csv")
    rows = []
    for k in range(push_n):
        row = {f"x{j}": inputs[k, j] for j in range(push_d)}
        row.update({f"Ax{j}": outputs_pts[k, j] for j in range(push_d)})
        rows.append(row)
    _write_csv(path, [f"x{j}" for j in range(push_d)] + [f"Ax{j}" for j in range(push_d)], rows)
    outputs.append(path)
    path = os.path.join(out, "diagnostics.json")
    means = table.mean(axis=0)
    _write_json(
        path,
        {
            "d_max": d_max,
            "n_seeds": n_seeds,
            "sample_mean_s_d": [float(v) for v in means],
            "analytic_mean_s_d": [partial_sum_mean(dd) for dd in range(1, d_max + 1)],
        },
    )
    outputs.append(path)
    if plots:
        path = os.path.join(out, "partial_sums.png")
        mean_curve = np.array([partial_sum_mean(dd) for dd in range(1, d_max + 1)])
        report.null_domain_figure(table, mean_curve, path)
        outputs.append(path)
    return outputs


_COMMANDS = {
    "transport": cmd_transport,
    "rank": cmd_rank,
    "stability": cmd_stability,
    "counterexample-a": cmd_counterexample_a,
    "counterexample-b": cmd_counterexample_b,
    "clt": cmd_clt,
    "diagnose-null-domain": cmd_diagnose_null_domain,
}
_PARALLEL = {"stability", "clt"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hilbertot",
        description="Monotone transport laboratory: exact couplings, ranks, and experiments.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", "-c", required=True, help="YAML or JSON config file")
        p.add_argument("--out", "-o", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument(
            "--threads",
            type=int,
            default=0,
            help="worker pool size (0 = available parallelism)",
        )
        p.add_argument("--plots", dest="plots", action="store_true", default=True)
        p.add_argument("--no-plots", dest="plots", action="store_false")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    started = time.time()
    try:
        cfg = _load_config(args.config)
        seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
        os.makedirs(args.out, exist_ok=True)
        workers = args.threads if args.threads > 0 else (os.cpu_count() or 1)
        handler = _COMMANDS[args.command]
        if args.command in _PARALLEL:
            outputs = handler(cfg, args.out, seed, args.plots, workers=workers)
        else:
            outputs = handler(cfg, args.out, seed, args.plots)
    except (ConfigError, InvalidInputError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2
    except SolverError as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        mismatch = getattr(exc, "mismatch", None)
        if mismatch is not None:
            payload["mismatch"] = mismatch
        print(json.dumps(payload), file=sys.stderr)
        return 3

    manifest = {
        "command": args.command,
        "config_hash": _config_hash(cfg),
        "seed": seed,
        "version": __version__,
        "outputs": [os.path.relpath(p, args.out) for p in outputs],
        "timings": {"wall_s": time.time() - started},
        "created_unix": started,
    }
    _write_json(os.path.join(args.out, "manifest.json"), manifest)
    meta = {
        "config": cfg,
        "seed": seed,
        "command": args.command,
        "wall_s": time.time() - started,
    }
    _write_json(os.path.join(args.out, "metadata.json"), meta)
    return 0


if __name__ == "__main__":
    sys.exit(main())
