import numpy as np
import pytest
from scipy.stats import kstest

from hilbertot.errors import InvalidInputError
from hilbertot.maps import (
    BallSquashMap,
    DiagonalMap,
    NormalToUniform1D,
    PathologicalOperator,
    gaussian_map,
    null_domain_diagnostic,
    partial_sum_mean,
    pathological_push,
)
from hilbertot.measures import GaussianSpec, empirical, geometric_spectrum, make_rng, sample
from hilbertot.ot import Coupling, certify_cyclic_monotonicity


def centered(stds):
    stds = np.asarray(stds, dtype=float)
    return GaussianSpec(mean=np.zeros(stds.size), stds=stds)


def test_identity_map_for_equal_specs():
    spec = centered([1.0, 0.5, 0.25])
    ratios = gaussian_map(spec, spec).ratios
    assert np.array_equal(ratios, np.ones(3))


def test_geometric_family_ratios_match_closed_form():
    # src std 2^-i, tgt std (2 - 1/n)^-i gives ratios (2/(2 - 1/n))^i.
    d, n = 8, 5
    src = centered(geometric_spectrum(0.5, d))
    tgt = centered(geometric_spectrum(1.0 / (2.0 - 1.0 / n), d))
    ratios = gaussian_map(src, tgt).ratios
    expected = (2.0 / (2.0 - 1.0 / n)) ** np.arange(1, d + 1)
    assert ratios == pytest.approx(expected, rel=1e-14)


def test_pushforward_passes_marginal_ks():
    src = centered([1.0, 2.0])
    tgt = centered([0.5, 3.0])
    tmap = gaussian_map(src, tgt)
    pts = tmap.apply(sample(src, 10_000, seed=13))
    for i in range(2):
        assert kstest(pts[:, i], "norm", args=(0.0, tgt.stds[i])).pvalue > 0.01


def test_composition_multiplies_ratios():
    r_spec = centered([1.0, 1.0])
    p_spec = centered([2.0, 0.5])
    q_spec = centered([4.0, 0.25])
    rp = gaussian_map(r_spec, p_spec)
    pq = gaussian_map(p_spec, q_spec)
    rq = gaussian_map(r_spec, q_spec)
    assert np.array_equal(pq.compose(rp).ratios, rq.ratios)


def test_degenerate_source_rejected():
    with pytest.raises(InvalidInputError):
        gaussian_map(centered([1.0, 0.0]), centered([1.0, 1.0]))
    with pytest.raises(InvalidInputError):
        gaussian_map(GaussianSpec(mean=np.ones(1), stds=np.ones(1)), centered([1.0]))


def test_diagonal_map_graph_is_cyclically_monotone():
    rng = make_rng(17)
    tmap = DiagonalMap(ratios=np.array([2.0, 0.5, 1.5]))
    x = rng.standard_normal((7, 3))
    y = tmap.apply(x)
    src, tgt = empirical(x), empirical(y)
    n = src.n_atoms
    coupling = Coupling(
        src=src, tgt=tgt,
        src_idx=np.arange(n), tgt_idx=np.arange(n), mass=np.full(n, 1.0 / n),
        cost=float(np.sum((x - y) ** 2) / n),
    )
    cert = certify_cyclic_monotonicity(coupling, max_cycle_len=4)
    assert cert.passed


def test_diagonal_map_is_gradient_of_its_quadratic():
    tmap = DiagonalMap(ratios=np.array([2.0, 0.5]))
    x = np.array([[1.0, -3.0]])
    eps = 1e-6
    for k in range(2):
        step = np.zeros(2)
        step[k] = eps
        fd = (tmap.potential_values(x + step) - tmap.potential_values(x - step)) / (2 * eps)
        assert fd[0] == pytest.approx(tmap.apply(x)[0, k], abs=1e-6)


def test_pathological_push_paper_values():
    # unit coefficients at d=3: inputs (1/8, 1/64, 1/512) map to (1/2, 1/4, 1/8)
    op = PathologicalOperator(dim=3)
    x = np.array([[1.0 / 8.0, 1.0 / 64.0, 1.0 / 512.0]])
    assert np.array_equal(op.apply(x), np.array([[0.5, 0.25, 0.125]]))


def test_pathological_push_zero_maps_to_zero():
    op = PathologicalOperator(dim=4)
    assert np.array_equal(op.apply(np.zeros((1, 4))), np.zeros((1, 4)))


def test_pathological_push_coordinate_identity_exact():
    inputs, outputs = pathological_push(d=6, n=50, seed=123)
    diag = 4.0 ** np.arange(1, 7)
    assert np.array_equal(outputs, inputs * diag[None, :])


def test_partial_sum_formula_for_unit_coefficient():
    # reconstruct the normals behind the table: S_1 = 2 * xi_1^2
    table = null_domain_diagnostic(d_max=1, n_seeds=5, seed=3)
    xi = make_rng(3).standard_normal((5, 1))
    assert np.array_equal(table[:, 0], 2.0 * xi[:, 0] ** 2)


def test_partial_sums_monotone_and_match_mean():
    table = null_domain_diagnostic(d_max=10, n_seeds=10_000, seed=77)
    assert np.all(np.diff(table, axis=1) >= 0)
    assert table.mean(axis=0)[-1] == pytest.approx(partial_sum_mean(10), rel=0.05)
    assert partial_sum_mean(1) == 2.0
    medians = np.median(table, axis=0)
    assert np.all(np.diff(medians) > 0)


def test_ball_squash_bounded_and_gradient():
    squash = BallSquashMap(scale=1.0)
    rng = make_rng(5)
    x = rng.standard_normal((100, 4)) * 3
    y = squash.apply(x)
    assert np.all(np.linalg.norm(y, axis=1) < 1.0)
    eps = 1e-6
    point = np.array([[0.4, -0.2, 1.0, 0.3]])
    for k in range(4):
        step = np.zeros(4)
        step[k] = eps
        fd = (squash.potential_values(point + step) - squash.potential_values(point - step)) / (2 * eps)
        assert fd[0] == pytest.approx(squash.apply(point)[0, k], abs=1e-6)


def test_normal_to_uniform_1d():
    cdf_map = NormalToUniform1D(mean=0.0, std=1.0)
    pts = sample(centered([1.0]), 20_000, seed=3)
    u = cdf_map.apply(pts)
    assert kstest(u[:, 0], "uniform").pvalue > 0.01
