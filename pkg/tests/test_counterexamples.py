import numpy as np
import pytest

from hilbertot.experiments import (
    boundary_subdifferential,
    run_counterexample_a,
    run_counterexample_b,
    unbounded_family_map,
)


def test_family_map_n1_doubles_each_coordinate():
    tmap = unbounded_family_map(1, 6)
    assert tmap.ratios == pytest.approx(2.0 ** np.arange(1, 7))
    # image norm of x = sum e_i/i grows with the truncation by direct summation
    x = 1.0 / np.arange(1, 13)
    tmap12 = unbounded_family_map(1, 12)
    expected = np.sqrt(np.sum((2.0 ** np.arange(1, 13) / np.arange(1, 13)) ** 2))
    assert np.linalg.norm(tmap12.apply(x)) == pytest.approx(expected, rel=1e-13)


def test_last_coordinate_gap_closed_form():
    d = 12
    result = run_counterexample_a(d=d, n_grid=[2, 4, 8, 16])
    assert result.max_closed_form_dev <= 1e-12
    for row in result.rows:
        r = 2.0 / (2.0 - 1.0 / row["n"])
        assert row["gap_e_d"] == pytest.approx((r**d - 1.0) / d, abs=1e-12)


def test_identity_limit_for_large_n():
    # ratios (2/(2-1/n))^i approach 1, so the fixed-direction gap vanishes.
    result = run_counterexample_a(d=8, n_grid=[4, 64, 4096])
    gaps = [row["gap_e_d"] for row in result.rows]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-2


def test_found_direction_gap_increases():
    result = run_counterexample_a(d=12, n_grid=[2, 4, 8, 16])
    assert result.found_gap_increasing
    gaps = [row["gap_found_h"] for row in result.rows]
    assert all(b > a for a, b in zip(gaps, gaps[1:]))
    assert np.linalg.norm(result.found_direction) == pytest.approx(1.0, rel=1e-12)


def test_image_norm_growth_recorded_and_flagged():
    result = run_counterexample_a(d=12, n_grid=[2, 4, 8, 16])
    by_n = {row["n"]: row for row in result.rows}
    # n=2 reaches |T_n(x_m)| > 2 within d=12; larger n cannot and fall back
    assert by_n[2]["target_met"]
    assert by_n[2]["image_norm"] > 2.0
    assert not by_n[16]["target_met"]
    assert by_n[16]["m_n"] == 12
    growth = [r["image_norm"] for r in result.norm_growth if r["n"] == 2]
    assert all(b >= a for a, b in zip(growth, growth[1:]))


def test_boundary_subdifferential_piecewise_structure():
    n = 4
    step = 1.0 / n
    assert boundary_subdifferential(0.5, n) == (0.5, 0.5)
    assert boundary_subdifferential(1.0, n) == (1.0, 2.0)
    mid = 1.0 + step / 2
    assert boundary_subdifferential(mid, n) == (mid + 1.0, mid + 1.0)
    assert boundary_subdifferential(1.5, n) == (2.0 + step, 2.0 + step)
    assert boundary_subdifferential(2.9, n) == (2.9, 2.9)


def test_counterexample_b_probe_table():
    result = run_counterexample_b(n_grid=[2, 4, 8, 16], probes=[0.5, 1.0, 2.05, 2.9])
    for row in result.rows:
        if row["probe"] == 1.0:
            assert row["limit_value"] == 2.0
            assert row["printed_covered"] and row["printed_match"]
        if row["probe"] == 0.5:
            assert row["lo"] == 0.5 and row["hi"] == 0.5
        if row["in_interior_support"]:
            assert row["identity_gap"] <= 2.0 / row["n"] + 1e-12


def test_counterexample_b_printed_formula_gaps():
    # the printed cases miss (2, 2+1/n] and mislabel (1, 1+1/n)
    result = run_counterexample_b(n_grid=[4], probes=[1.1, 2.1])
    rows = {r["probe"]: r for r in result.rows}
    assert not rows[1.1]["printed_covered"]
    assert rows[1.1]["lo"] == pytest.approx(2.1)
    assert not rows[2.1]["printed_covered"]
    assert rows[2.1]["lo"] == pytest.approx(2.25)


def test_counterexample_b_monotone_on_grid():
    result = run_counterexample_b(n_grid=[8])
    assert result.monotone
