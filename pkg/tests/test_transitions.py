import numpy as np
import pytest

from zerohot.exceptions import AnalysisError, BracketError, InputError
from zerohot.meanfield import (
    Branch,
    MFParams,
    OrderParams,
    PhaseBoundary,
    SaddleSolution,
    detect_first_order,
    gamma_first_order,
    gamma_T_boundary,
    region_contains,
    rho1_threshold,
    standard_branches,
    sweep_control,
    sweep_rows,
)
from zerohot.meanfield.transitions import SWEEP_COLUMNS, _runs

P3 = MFParams.symmetric(3, 1.0, 1.5)


def fake_branch(grid, m0, f, conv=None):
    conv = np.ones(len(grid), bool) if conv is None else conv
    idx = P3.layout.index
    sols = [
        SaddleSolution(P3, OrderParams(idx, np.full(len(idx), a)), float(b), 1, bool(c), 0.0)
        for a, b, c in zip(m0, f, conv)
    ]
    return Branch("gamma", np.asarray(grid, float), "up", "zero", sols)


GRID = np.linspace(0.0, 1.0, 11)


def test_smooth_single_branch_not_first_order():
    b = fake_branch(GRID, 0.5 - 0.3 * GRID, -GRID)
    rep = detect_first_order([b])
    assert not rep.first_order
    assert rep.hysteresis_interval == ()
    assert rep.crossing_point is None
    assert np.allclose(rep.selected_m0, 0.5 - 0.3 * GRID)


def test_crossing_branches_interval_and_crossing():
    a = fake_branch(GRID, np.full(11, 0.9), GRID)
    b = fake_branch(GRID, np.zeros(11), 0.5 - GRID)
    rep = detect_first_order([a, b])
    assert rep.first_order
    assert rep.hysteresis_interval == (0.0, 1.0)
    assert rep.crossing_point == pytest.approx(0.25, abs=1e-12)
    # pointwise argmin of the free energy
    assert np.all(rep.selected_branch == np.where(GRID < 0.25, 0, 1))
    assert rep.jump_size == pytest.approx(0.9)


def test_distinct_without_crossing_is_not_coexistence():
    a = fake_branch(GRID, np.full(11, 0.3), -1 - GRID)
    b = fake_branch(GRID, np.full(11, 0.31), -GRID)
    rep = detect_first_order([a, b])
    assert not rep.first_order


def test_short_coexistence_ignored():
    conv = np.zeros(11, bool)
    conv[4:6] = True
    a = fake_branch(GRID, np.full(11, 0.01), GRID)
    b = fake_branch(GRID, np.zeros(11), 0.45 - GRID, conv)
    rep = detect_first_order([a, b])
    # one grid spacing of distinct solutions, below the two-spacing minimum
    assert rep.hysteresis_interval == ()
    assert not rep.first_order


def test_jump_only():
    m = np.where(GRID < 0.5, 0.8, 0.0)
    rep = detect_first_order([fake_branch(GRID, m, -GRID)])
    assert rep.first_order and rep.hysteresis_interval == ()
    assert rep.jump_at == pytest.approx(0.45)


def test_unconverged_points_excluded():
    conv = np.ones(11, bool)
    conv[3] = False
    m = 0.5 - 0.3 * GRID
    m[3] = -1.0
    rep = detect_first_order([fake_branch(GRID, m, -GRID, conv)])
    assert np.isnan(rep.selected_m0[3])
    assert not rep.first_order


def test_all_unconverged_raises():
    with pytest.raises(AnalysisError):
        detect_first_order([fake_branch(GRID, GRID, GRID, np.zeros(11, bool))])


def test_grid_mismatch_rejected():
    with pytest.raises(InputError):
        detect_first_order([fake_branch(GRID, GRID, GRID)], grid=GRID[:5])


@pytest.mark.parametrize(
    "mask,runs",
    [([], []), ([1, 1, 0, 1], [(0, 1), (3, 3)]), ([0, 0], []), ([1, 1, 1], [(0, 2)])],
)
def test_runs(mask, runs):
    assert _runs(np.array(mask, bool)) == runs


def test_sweep_rows_columns():
    p = MFParams.symmetric(4, 0.5, 1.5)
    branches = sweep_control(p, "gamma", np.linspace(0.5, 1.0, 3), "up", ("ferro", "zero"))
    rows = sweep_rows(branches)
    assert len(rows) == 6
    assert tuple(rows[0]) == SWEEP_COLUMNS
    assert [r["branch_id"] for r in rows] == [0, 0, 0, 1, 1, 1]
    assert all(r["converged"] for r in rows)


def test_sweep_rejects_bad_control():
    with pytest.raises(InputError):
        sweep_control(P3, "lambda", [0.1, 0.2])
    with pytest.raises(InputError):
        sweep_control(P3, "gamma", [0.1, 0.2], direction="sideways")
    with pytest.raises(InputError):
        sweep_control(P3, "gamma", [-0.1, 0.2])


def test_temperature_sweep_hysteresis_rho1():
    p = MFParams.symmetric(4, 1.0, 1.5, 0.0, 0.0)
    grid = np.linspace(0.02, 2.0, 100)
    down, up = standard_branches(p, "temperature", grid)
    differ = np.abs(down.m0 - up.m0) > 1e-3
    assert differ.sum() >= 2
    rep = detect_first_order([down, up])
    assert rep.first_order
    lo, hi = rep.hysteresis_interval
    assert lo < rep.crossing_point < hi


def test_gamma_sweep_rho1_no_hysteresis():
    grid = np.linspace(0.0, 3.0, 61)
    p = MFParams.symmetric(4, 1.0, 1.5)
    down, up = standard_branches(p, "gamma", grid)
    assert np.max(np.abs(down.m0 - up.m0)) <= 1e-6
    assert not detect_first_order([down, up]).first_order


def test_gamma_sweep_small_rho1_first_order():
    rep = gamma_first_order(4, 1.5, 0.26, gamma_grid=np.linspace(0.0, 3.0, 61))
    assert rep.first_order
    assert rep.hysteresis_interval
    assert rep.crossing_point is not None


def test_gamma_sweep_large_rho1_continuous():
    # the default grid: on coarse grids the steep continuous drop trips the jump test
    rep = gamma_first_order(4, 1.5, 0.60)
    assert not rep.first_order


def test_threshold_bracket_failure():
    # two states: the Ising case has no first-order quantum transition here
    with pytest.raises(BracketError):
        rho1_threshold(2, 1.5, gamma_grid=np.linspace(0.0, 3.0, 31))


def test_threshold_tolerance_floor():
    with pytest.raises(InputError):
        rho1_threshold(4, 1.5, tol=1e-6)


def test_boundary_reaches_zero_gamma_below_classical_transition():
    grid = np.linspace(0.01, 1.6, 160)
    p = MFParams.symmetric(5, 1.0, 1.5)
    Tc = detect_first_order(standard_branches(p, "temperature", grid)).crossing_point
    assert Tc > 0
    pb = gamma_T_boundary(5, 1.5, 1.0, [Tc - 0.02, Tc + 0.1], np.linspace(0.0, 1.0, 51))
    assert pb.gamma_low[0] == 0.0
    assert np.isnan(pb.gamma_low[1])


def test_boundary_empty_when_continuous():
    pb = gamma_T_boundary(4, 1.5, 1.0, [0.0], np.linspace(0.0, 3.0, 61))
    assert np.isnan(pb.gamma_low[0]) and pb.region() == {}


def test_region_contains():
    T = np.array([0.1, 0.2])
    nan = np.nan
    outer = PhaseBoundary(T, np.array([0.0, 0.1]), np.array([1.0, 0.5]), T * nan, np.zeros(2, bool))
    inner = PhaseBoundary(T, np.array([0.2, nan]), np.array([0.8, nan]), T * nan, np.zeros(2, bool))
    assert region_contains(outer, inner)
    assert not region_contains(inner, outer)
    assert region_contains(outer, outer)
