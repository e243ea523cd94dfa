import numpy as np
import pytest

from hilbertot.measures import DiscreteMeasure, empirical, make_rng
from hilbertot.ot import (
    Coupling,
    certify_cyclic_monotonicity,
    cycle_sums,
    solve_transport,
)
from hilbertot.ot.certify import exhaustive_cycle_count


def identity_coupling(points):
    src = empirical(points)
    tgt = empirical(points.copy())
    n = src.n_atoms
    return Coupling(
        src=src, tgt=tgt,
        src_idx=np.arange(n), tgt_idx=np.arange(n),
        mass=np.full(n, 1.0 / n), cost=0.0,
    )


def swapped_pair_coupling():
    src = empirical(np.array([[0.0], [1.0]]))
    tgt = empirical(np.array([[1.0], [0.0]]))
    return Coupling(
        src=src, tgt=tgt,
        src_idx=np.array([0, 1]), tgt_idx=np.array([0, 1]),
        mass=np.array([0.5, 0.5]), cost=0.5 * 1.0 + 0.5 * 1.0,
    )


def test_identity_support_passes():
    rng = make_rng(1)
    cert = certify_cyclic_monotonicity(identity_coupling(rng.standard_normal((6, 3))))
    assert cert.passed
    assert cert.mode == "exhaustive"
    assert cert.max_violation <= 1e-9


def test_swapped_pair_yields_witness_with_unit_violation():
    # pairs {(0,1),(1,0)}: cycle sum 0*(0-1) + 1*(1-0) = 1 > 0.
    cert = certify_cyclic_monotonicity(swapped_pair_coupling(), max_cycle_len=2)
    assert not cert.passed
    assert cert.max_violation == pytest.approx(1.0, abs=1e-12)
    assert cert.witness is not None and len(cert.witness) == 2


def test_optimal_couplings_certify_exhaustively():
    rng = make_rng(55)
    for _ in range(20):
        n = int(rng.integers(2, 8))
        m = int(rng.integers(2, 8))
        d = int(rng.integers(1, 5))
        wa = rng.random(n) + 0.1
        wb = rng.random(m) + 0.1
        src = DiscreteMeasure(points=rng.standard_normal((n, d)), weights=wa / wa.sum())
        tgt = DiscreteMeasure(points=rng.standard_normal((m, d)), weights=wb / wb.sum())
        coupling = solve_transport(src, tgt)
        cert = certify_cyclic_monotonicity(coupling, max_cycle_len=5)
        assert cert.mode == "exhaustive"
        assert cert.passed, f"violation {cert.max_violation}"


def test_cycle_swap_strictly_improves_cost():
    # Rewiring targets along a positive cycle lowers the cost by twice the
    # cyclic sum per unit mass, so a witnessed coupling is suboptimal.
    coupling = swapped_pair_coupling()
    cert = certify_cyclic_monotonicity(coupling, max_cycle_len=2)
    assert cert.witness is not None
    pairs = list(cert.witness)
    src_pts = coupling.src.points
    tgt_pts = coupling.tgt.points
    old = sum(np.sum((src_pts[i] - tgt_pts[j]) ** 2) for i, j in pairs)
    rotated = [pairs[(k + 1) % len(pairs)][1] for k in range(len(pairs))]
    new = sum(np.sum((src_pts[i] - tgt_pts[j]) ** 2) for (i, _), j in zip(pairs, rotated))
    assert new < old - 1e-12
    assert old - new == pytest.approx(2 * cert.max_violation, rel=1e-12)
    optimum = solve_transport(coupling.src, coupling.tgt).cost
    assert coupling.cost > optimum + 1e-12


def test_exhaustive_count_matches_enumeration():
    # K pairs, cycles up to length L anchored at the smallest index.
    assert exhaustive_cycle_count(4, 2) == 6
    assert exhaustive_cycle_count(4, 3) == 6 + 8
    assert exhaustive_cycle_count(4, 4) == 6 + 8 + 6
    assert exhaustive_cycle_count(15, 5) == 105 + 910 + 8190 + 72072


def test_sampled_mode_when_budget_exceeded():
    rng = make_rng(12)
    coupling = identity_coupling(rng.standard_normal((40, 2)))
    cert = certify_cyclic_monotonicity(coupling, max_cycle_len=5, samples=2000, seed=4, budget=10_000)
    assert cert.mode == "sampled"
    assert cert.cycles_checked == 2000
    assert cert.passed
    again = certify_cyclic_monotonicity(coupling, max_cycle_len=5, samples=2000, seed=4, budget=10_000)
    assert again.max_violation == cert.max_violation


def test_cycle_sums_vectorized_matches_direct():
    rng = make_rng(3)
    x = rng.standard_normal((5, 3))
    y = rng.standard_normal((5, 3))
    gram = x @ y.T
    cycles = np.array([[0, 2, 4], [1, 3, 0]])
    vals = cycle_sums(gram, cycles)
    for row, expected in zip(cycles, vals):
        direct = 0.0
        for t in range(len(row)):
            nxt = row[(t + 1) % len(row)]
            direct += x[row[t]] @ (y[nxt] - y[row[t]])
        assert expected == pytest.approx(direct, rel=1e-12)


def test_single_pair_has_no_cycles():
    coupling = identity_coupling(np.array([[1.0, 2.0]]))
    cert = certify_cyclic_monotonicity(coupling)
    assert cert.passed
    assert cert.cycles_checked == 0
