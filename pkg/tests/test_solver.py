import numpy as np
import pytest
import scipy.sparse.linalg as spla

import rupture_lab as rl
from rupture_lab.solver import _InteriorSystem, SolverError, default_delta
from rupture_lab.profiles import radial_exact

from oracles import pullin_lambda_of_peak


@pytest.fixture(scope="module")
def coarse_branch():
    """Shared coarse continuation on the unit disk, p=2, through both folds."""
    grid = rl.disk_grid((0.0, 0.0), 1.0, 1.0 / 64)
    branch = rl.continue_pullin(grid, 2.0, rl.SolveConfig(residual_tol=1e-10),
                                step=0.08, stop_gap=0.02,
                                snapshot_gaps=[0.2, 0.02])
    return grid, branch


def test_annulus_recovery_convergence():
    ex = radial_exact(2, 3)
    errs = {}
    for n in (64, 128):
        g = rl.annulus_grid((0, 0), 0.2, 1.0, 1.0 / n)
        res = rl.solve_dirichlet(g, 3.0, ex, cfg=rl.SolveConfig(residual_tol=1e-10))
        errs[n] = float(np.max(np.abs(res.u.values - ex.sample(g).values)
                               [g.interior_mask]))
        assert res.residual_norm <= 1e-10
        assert not res.regularization_dominated
    assert 3.0 < errs[64] / errs[128] < 5.0


def test_one_dimensional_saturated_solve_is_symmetric():
    # bc=1 on (-1,1) lies past the pull-in threshold (the symmetric exact
    # family needs bc >= sqrt(2)), so the solve saturates the floor
    g = rl.interval_grid(-1.0, 1.0, 65)
    res = rl.solve_dirichlet(g, 3.0, lambda x: np.ones_like(x),
                             cfg=rl.SolveConfig(residual_tol=1e-9, delta=0.1))
    v = res.u.values
    assert res.residual_norm <= 1e-9
    assert np.max(np.abs(v - v[::-1])) < 1e-10
    assert res.regularization_dominated


def test_perturbation_off_large_constant():
    g = rl.rectangle_grid((0, 0), (0.1, 0.1), 0.1 / 16)
    c = 5.0
    res = rl.solve_dirichlet(g, 3.0, lambda x, y: np.full_like(x, c))
    assert np.all(res.u.values > 0)
    dev = c - res.u.values.min()
    assert 0 < dev < 10 * c ** -3
    # one-step linearization oracle: Delta w = c^-p + p c^(-p-1) w
    sys = _InteriorSystem(g)
    import scipy.sparse as sp
    w = spla.spsolve((sys.lap - sp.diags(np.full(sys.n, 3 * c ** -4))).tocsc(),
                     np.full(sys.n, c ** -3))
    assert np.max(np.abs(res.u.values[g.interior_mask] - (c + w))) < 1e-8


def test_solver_reports_divergence_with_last_iterate():
    g = rl.annulus_grid((0, 0), 0.2, 1.0, 1.0 / 32)
    ex = radial_exact(2, 3)
    with pytest.raises(SolverError) as err:
        rl.solve_dirichlet(g, 3.0, ex, cfg=rl.SolveConfig(max_newton_iters=0,
                                                          residual_tol=1e-14))
    assert err.value.last is not None
    assert "residual_norm" in err.value.diagnostics


def test_guess_below_floor_rejected():
    g = rl.annulus_grid((0, 0), 0.2, 1.0, 1.0 / 32)
    ex = radial_exact(2, 3)
    bad = rl.ScalarField(g, np.full(g.shape, 1e-12), 3.0)
    with pytest.raises(SolverError):
        rl.solve_dirichlet(g, 3.0, ex, guess=bad)


def test_residual_field_examples():
    ex = radial_exact(2, 3)
    errs = {}
    for n in (64, 128):
        g = rl.annulus_grid((0, 0), 0.2, 1.0, 1.0 / n)
        res = rl.residual_field(ex.sample(g), 3.0, 0.0)
        errs[n] = float(np.max(np.abs(res.values[g.interior_mask])))
    assert 3.0 < errs[64] / errs[128] < 5.0
    g = rl.rectangle_grid((0, 0), (1, 1), 0.25)
    res = rl.residual_field(rl.ScalarField(g, np.ones(g.shape), 3.0), 3.0, 0.0)
    assert np.array_equal(res.values[g.interior_mask], np.full(9, -1.0))


def test_delta_robustness():
    # halving delta changes the solution by less than 2 * residual_tol
    ex = radial_exact(2, 3)
    g = rl.annulus_grid((0, 0), 0.2, 1.0, 1.0 / 64)
    tol = 1e-10
    d = default_delta(g.h, 3.0)
    u1 = rl.solve_dirichlet(g, 3.0, ex, cfg=rl.SolveConfig(residual_tol=tol, delta=d)).u
    u2 = rl.solve_dirichlet(g, 3.0, ex, cfg=rl.SolveConfig(residual_tol=tol, delta=d / 2)).u
    assert u1.values[g.interior_mask].min() > 4 * d
    assert np.max(np.abs((u1.values - u2.values)[g.interior_mask])) <= 2 * tol


def test_branch_startpoint_and_small_lambda_expansion():
    grid = rl.disk_grid((0.0, 0.0), 1.0, 1.0 / 64)
    branch = rl.continue_pullin(grid, 2.0, rl.SolveConfig(residual_tol=1e-12),
                                step=0.05, stop_gap=0.9)
    first = branch.points[0]
    assert first.lam == 0.0 and first.sup_v == 0.0 and first.min_gap == 1.0
    # v = lam * w + O(lam^2) with -Delta_h w = 1
    lam = 1e-3
    v = rl.solve_pullin_at_lambda(grid, 2.0, lam, rl.SolveConfig(residual_tol=1e-13))
    sys = _InteriorSystem(grid)
    w = spla.spsolve((-sys.lap).tocsc(), np.ones(sys.n))
    rel = np.max(np.abs(v - lam * w)) / np.max(np.abs(lam * w))
    assert rel <= 1e-4


def test_branch_structure_and_lambda_star(coarse_branch):
    grid, branch = coarse_branch
    folds = [q for q in branch.points if q.fold_flag]
    assert len(folds) == 1
    arcs = [q.arc_s for q in branch.points]
    assert all(b > a for a, b in zip(arcs, arcs[1:]))
    assert branch.points[-1].min_gap <= 0.02
    for q in branch.points:
        assert 0 <= q.sup_v < 1 and q.min_gap == pytest.approx(1 - q.sup_v)
    # oracle agreement at the coarse grid stays within 1%
    lam_star = pullin_lambda_of_peak(0.44429, 2.0)
    assert branch.lambda_star == pytest.approx(lam_star, rel=0.01)
    csv = branch.to_csv()
    lines = csv.strip().splitlines()
    assert lines[0] == "arc_s,lambda,sup_v,min_gap,energy,fold_flag"
    assert sum(1 for ln in lines[1:] if ln.endswith(",1")) == 1


def test_snapshots_restore_lambda_free_equation(coarse_branch):
    grid, branch = coarse_branch
    snap = branch.snapshots[("min_gap", 0.02)]
    res = rl.residual_field(snap, 2.0, 1e-9)
    inner = grid.interior_mask & (grid.radii_from((0, 0)) < 0.9)
    keep = inner & (snap.values > 0.2)  # away from the rupture core
    assert np.max(np.abs(res.values[keep])) < 0.5  # discretization scale, not O(1) bias
    assert snap.values[grid.interior_mask].min() < 0.05


def test_minimal_branch_monotone(coarse_branch):
    grid, _ = coarse_branch
    cfg = rl.SolveConfig(residual_tol=1e-12)
    prev = None
    for lam in (0.2, 0.4, 0.6):
        v = rl.solve_pullin_at_lambda(grid, 2.0, lam, cfg)
        if prev is not None:
            assert np.all(v >= prev - 1e-8)
        prev = v


def test_fold_consistency_under_step_refinement():
    grid = rl.disk_grid((0.0, 0.0), 1.0, 1.0 / 64)
    lam_stars = {}
    for step in (0.08, 0.04):
        br = rl.continue_pullin(grid, 2.0, rl.SolveConfig(residual_tol=1e-10),
                                step=step, stop_gap=0.45)
        lam_stars[step] = br.lambda_star
    # second-order fold interpolation: halving the step should agree to O(step^2)
    assert abs(lam_stars[0.08] - lam_stars[0.04]) < 4 * 0.08 ** 2


def test_growth_ratio_bounded_along_branch(coarse_branch):
    grid, branch = coarse_branch
    from rupture_lab import diagnostics as dg
    ratios = []
    for key in [("min_gap", 0.2), ("min_gap", 0.02)]:
        snap = branch.snapshots[key]
        idx = np.unravel_index(
            np.argmin(np.where(grid.interior_mask, snap.values, np.inf)), grid.shape)
        x = (grid.origin[0] + idx[0] * grid.h, grid.origin[1] + idx[1] * grid.h)
        for r in (0.1, 0.2):
            ratios.append(dg.growth_ratio_up(snap, x, r))
    assert max(ratios) / min(ratios) < 10.0  # fixed interval while min_gap drops 10x


def test_continuation_validates_inputs():
    grid = rl.disk_grid((0.0, 0.0), 1.0, 1.0 / 32)
    with pytest.raises(ValueError):
        rl.continue_pullin(grid, 2.0, step=-0.1)
    with pytest.raises(ValueError):
        rl.continue_pullin(grid, 2.0, stop_gap=1.5)
