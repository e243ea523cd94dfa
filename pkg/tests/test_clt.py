import numpy as np
import pytest

from hilbertot.errors import InvalidInputError
from hilbertot.measures import GaussianSpec, empirical
from hilbertot.ot import MaxAffinePotential
from hilbertot.experiments import CltConfig, Sigma2Estimate, run_clt, sigma2_formula


def unit_gauss(d):
    return GaussianSpec(mean=np.zeros(d), stds=np.ones(d))


def test_sigma2_single_atom_matches_chi_square_moment():
    # target at the origin: psi affine with zero slope, so the statistic is
    # |X|^2 whose variance for a standard 1-D Gaussian is Var(xi^2) = 2.
    psi = MaxAffinePotential(slopes=np.zeros((1, 1)), intercepts=np.array([0.0]))
    est = sigma2_formula(psi, unit_gauss(1), mc_n=1_000_000, seed=8)
    assert abs(est.value - 2.0) <= 3 * est.std_error
    assert est.std_error < 0.02


def test_sigma2_shift_invariance_bitwise():
    # The formula re-anchors intercepts before evaluating, so a constant added
    # to every intercept cancels inside the intercept array.  Bit-identity is
    # asserted for intercepts whose +7.3 is float-exact (adding 7.3 to e.g.
    # 1.0 already rounds before the function is called, losing the game for
    # any implementation).
    rng = np.random.default_rng(0)
    slopes = rng.standard_normal((6, 2))
    intercepts = np.array([0.5, -0.25, 0.0, 0.125, -0.5, 0.25])
    psi = MaxAffinePotential(slopes=slopes, intercepts=intercepts)
    shifted = MaxAffinePotential(slopes=slopes, intercepts=intercepts + 7.3)
    a = sigma2_formula(psi, unit_gauss(2), mc_n=50_000, seed=4)
    b = sigma2_formula(shifted, unit_gauss(2), mc_n=50_000, seed=4)
    assert a.value == b.value
    assert a.std_error == b.std_error


def test_sigma2_shift_invariance_general_within_ulps():
    rng = np.random.default_rng(1)
    slopes = rng.standard_normal((5, 2))
    intercepts = rng.standard_normal(5)
    psi = MaxAffinePotential(slopes=slopes, intercepts=intercepts)
    shifted = MaxAffinePotential(slopes=slopes, intercepts=intercepts + 7.3)
    a = sigma2_formula(psi, unit_gauss(2), mc_n=20_000, seed=4)
    b = sigma2_formula(shifted, unit_gauss(2), mc_n=20_000, seed=4)
    assert b.value == pytest.approx(a.value, rel=1e-12)


def test_sigma2_degenerate_point_mass():
    psi = MaxAffinePotential(slopes=np.array([[1.0, 0.0]]), intercepts=np.array([0.0]))
    degenerate = GaussianSpec(mean=np.array([2.0, -1.0]), stds=np.zeros(2))
    est = sigma2_formula(psi, degenerate, mc_n=10_000, seed=1)
    assert est.value == 0.0


def test_clt_config_requires_reps():
    with pytest.raises(InvalidInputError):
        CltConfig(p_spec=unit_gauss(1), target=empirical(np.zeros((1, 1))),
                  n=10, reps=50, seed=0)


def test_degenerate_source_flagged():
    config = CltConfig(
        p_spec=GaussianSpec(mean=np.zeros(1), stds=np.zeros(1)),
        target=empirical(np.array([[0.0]])),
        n=1,
        reps=100,
        seed=0,
        potential_opts={"iters": 1, "batch": 8, "validation_n": 100, "tol": 1.0},
        mc_n=1_000,
    )
    report = run_clt(config)
    assert report.degenerate
    assert np.all(report.statistics == 0.0)


def test_small_clt_statistics_centered_and_plausible():
    config = CltConfig(
        p_spec=GaussianSpec(mean=np.zeros(2), stds=np.array([1.0, 0.5])),
        target=empirical(np.array([[0.4, 0.0], [-0.4, 0.0], [0.0, 0.4], [0.0, -0.4]])),
        n=64,
        reps=120,
        seed=3,
        potential_opts={"iters": 600, "batch": 256, "validation_n": 20_000, "tol": 0.05},
        mc_n=50_000,
    )
    report = run_clt(config)
    assert abs(report.statistics.mean()) <= 1e-12 * max(1.0, np.abs(report.statistics).max())
    assert 0.0 <= report.ks_to_normal <= 1.0
    assert report.sigma2_formula > 0
    assert not report.degenerate
    assert 0.3 < report.variance_ratio < 3.0


def test_run_clt_deterministic():
    config = CltConfig(
        p_spec=unit_gauss(1),
        target=empirical(np.array([[-0.5], [0.5]])),
        n=16,
        reps=100,
        seed=11,
        potential_opts={"iters": 200, "batch": 64, "validation_n": 5_000, "tol": 0.2},
        mc_n=5_000,
    )
    a = run_clt(config)
    b = run_clt(config)
    assert np.array_equal(a.statistics, b.statistics)
    assert a.sigma2_formula == b.sigma2_formula
    assert a.ks_to_normal == b.ks_to_normal
