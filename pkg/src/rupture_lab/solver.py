"""Newton solver for the regularized rupture equation and pseudo-arclength
continuation of the pull-in branch.

The Dirichlet problem solved here is Delta u = g_delta(u) with
g_delta(u) = max(u, delta)^(-p); the pull-in problem -Delta v = lambda/(1-v)^p
is traced in (lambda, v) with Keller arclength steps so the branch can be
followed around folds. Stored snapshots use u = 1 - v.
"""

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .field import Grid, ScalarField, gradient


class SolverError(RuntimeError):
    """Newton or continuation failure; carries the last iterate when available."""

    def __init__(self, message, last=None, diagnostics=None):
        super().__init__(message)
        self.last = last
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class RegularizedNonlinearity:
    """g_delta(u) = max(u, delta)^(-p); delta=0 is the exact nonlinearity."""

    p: float
    delta: float = 0.0

    def __post_init__(self):
        if self.p <= 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")

    def __call__(self, u):
        return np.maximum(u, self.delta) ** (-self.p)

    def deriv(self, u):
        out = np.where(u > self.delta, -self.p * np.maximum(u, self.delta) ** (-self.p - 1.0), 0.0)
        return out


def default_delta(h, p):
    """Regularization floor tied to the natural Holder scale h^(2/(p+1))."""
    return h ** (2.0 / (p + 1.0)) / 100.0


@dataclass
class SolveConfig:
    max_newton_iters: int = 40
    residual_tol: float = 1e-9
    damping: float = 0.5
    delta: float = 0.0

    def __post_init__(self):
        if self.residual_tol <= 0:
            raise ValueError("residual_tol must be positive")
        if not 0 < self.damping < 1:
            raise ValueError("damping must lie in (0,1)")


@dataclass
class SolveResult:
    u: ScalarField
    newton_iters: int
    residual_norm: float
    regularization_dominated: bool


# ---------------------------------------------------------------------------
# discrete operator over interior unknowns


def _factor(matrix):
    return spla.splu(matrix.tocsc(), permc_spec="MMD_AT_PLUS_A")


class _InteriorSystem:
    """Index map and 3/5-point Laplacian split into interior and boundary parts."""

    def __init__(self, grid: Grid):
        self.grid = grid
        mask = grid.interior_mask
        self.n = int(mask.sum())
        self.index = -np.ones(grid.shape, dtype=int)
        self.index[mask] = np.arange(self.n)
        self.mask = mask
        h2 = grid.h ** 2
        idx_flat = self.index.ravel()
        strides = [1] if grid.dim == 1 else [grid.shape[1], 1]
        flat_mask = mask.ravel()
        own = np.flatnonzero(flat_mask)
        rows = [idx_flat[own]]
        cols = [idx_flat[own]]
        vals = [np.full(self.n, -2.0 * grid.dim / h2)]
        brows, bflat = [], []
        for s in strides:
            for nb in (own - s, own + s):
                inside = flat_mask[nb]
                rows.append(idx_flat[own[inside]])
                cols.append(idx_flat[nb[inside]])
                vals.append(np.full(int(inside.sum()), 1.0 / h2))
                brows.append(idx_flat[own[~inside]])
                bflat.append(nb[~inside])
        self.lap = sp.csr_matrix((np.concatenate(vals),
                                  (np.concatenate(rows), np.concatenate(cols))),
                                 shape=(self.n, self.n))
        self.bnd_rows = np.concatenate(brows)
        self.bnd_flat = np.concatenate(bflat)
        self.h2 = h2

    def boundary_term(self, full_values):
        """Contribution of boundary node values to Delta_h at interior rows."""
        out = np.zeros(self.n)
        np.add.at(out, self.bnd_rows, full_values.ravel()[self.bnd_flat] / self.h2)
        return out

    def embed(self, interior_vec, full_values):
        out = full_values.copy()
        out[self.mask] = interior_vec
        return out


def _boundary_values(grid: Grid, bc):
    """Full array holding bc on every non-interior node (zero inside)."""
    full = np.zeros(grid.shape)
    if callable(bc):
        mesh = grid.meshgrid()
        vals = np.broadcast_to(np.asarray(bc(*mesh), dtype=float), grid.shape)
        full[~grid.interior_mask] = vals[~grid.interior_mask]
    else:
        vals = np.broadcast_to(np.asarray(bc, dtype=float), grid.shape)
        full[~grid.interior_mask] = vals[~grid.interior_mask]
    return full


def harmonic_extension(grid: Grid, bc, p=3.0) -> ScalarField:
    """Solve Delta_h w = 0 with the given Dirichlet data; handy initial guess."""
    sys = _InteriorSystem(grid)
    full = _boundary_values(grid, bc)
    rhs = -sys.boundary_term(full)
    w = spla.spsolve(sys.lap.tocsc(), rhs)
    return ScalarField(grid, sys.embed(w, full), p)


def residual_field(u: ScalarField, p, delta=0.0) -> ScalarField:
    """Delta_h u - g_delta(u) on interior nodes (zero elsewhere)."""
    g = RegularizedNonlinearity(p, delta)
    sys = _InteriorSystem(u.grid)
    ui = u.values[u.grid.interior_mask]
    res = sys.lap @ ui + sys.boundary_term(u.values) - g(ui)
    out = np.zeros(u.grid.shape)
    out[u.grid.interior_mask] = res
    return ScalarField(u.grid, out, p)


def solve_dirichlet(grid: Grid, p, bc, guess=None, cfg: SolveConfig = None) -> SolveResult:
    """Damped Newton for Delta_h u = g_delta(u) with Dirichlet data.

    bc is a callable of node coordinates or an array; it is imposed on every
    non-interior node. The returned field satisfies
    max |Delta_h u - g_delta(u)| <= cfg.residual_tol on interior nodes.
    """
    cfg = cfg or SolveConfig()
    delta = cfg.delta if cfg.delta > 0 else default_delta(grid.h, p)
    g = RegularizedNonlinearity(p, delta)
    sys = _InteriorSystem(grid)
    full_bc = _boundary_values(grid, bc)
    # positivity is required where the data enters the stencil, not on inert
    # exterior nodes (e.g. deep inside the hole of an annulus)
    if len(sys.bnd_flat) and np.any(full_bc.ravel()[sys.bnd_flat] <= 0):
        raise SolverError("boundary data must be positive")
    if guess is None:
        guess = harmonic_extension(grid, bc, p)
    u = guess.values[grid.interior_mask].copy()
    if np.any(u <= delta):
        raise SolverError("initial guess must exceed the regularization floor")
    bterm = sys.boundary_term(full_bc)

    def resid(v):
        return sys.lap @ v + bterm - g(v)

    def newton(u):
        res = resid(u)
        norm = float(np.max(np.abs(res)))
        iters = 0
        while norm > cfg.residual_tol:
            if iters >= cfg.max_newton_iters:
                raise SolverError(
                    f"Newton did not converge: residual {norm:.3e} after {iters} iterations",
                    last=ScalarField(grid, sys.embed(u, full_bc), p),
                    diagnostics={"residual_norm": norm, "iterations": iters})
            jac = sys.lap - sp.diags(g.deriv(u))
            step = _factor(jac).solve(-res)
            eta, accepted = 1.0, False
            for _ in range(40):
                cand = u + eta * step
                cand_res = resid(cand)
                cand_norm = float(np.max(np.abs(cand_res)))
                if np.isfinite(cand_norm) and cand_norm < norm:
                    u, res, norm, accepted = cand, cand_res, cand_norm, True
                    break
                eta *= cfg.damping
            if not accepted:
                raise SolverError(
                    f"Newton line search failed at residual {norm:.3e}",
                    last=ScalarField(grid, sys.embed(u, full_bc), p),
                    diagnostics={"residual_norm": norm, "iterations": iters})
            iters += 1
        return u, norm, iters

    try:
        u, norm, iters = newton(u)
    except SolverError as err:
        # Data past the pull-in threshold has no unfloored solution and plain
        # Newton stalls chasing it. The floor-saturated problem is linear, so
        # restart from its solution; if that stalls too, the failure is real.
        lin = _factor(sys.lap).solve(np.full(sys.n, delta ** (-p)) - bterm)
        try:
            u, norm, iters = newton(lin)
        except SolverError:
            raise err from None
    floored = float(np.mean(u <= delta))
    out = ScalarField(grid, sys.embed(u, full_bc), p)
    return SolveResult(out, iters, norm, regularization_dominated=floored > 0.5)


# ---------------------------------------------------------------------------
# pull-in continuation


@dataclass
class BranchPoint:
    arc_s: float
    lam: float
    sup_v: float
    min_gap: float
    energy: float
    fold_flag: bool = False


@dataclass
class Branch:
    points: list = dc_field(default_factory=list)
    lambda_star: float = None
    snapshots: dict = dc_field(default_factory=dict)

    def to_csv(self):
        lines = ["arc_s,lambda,sup_v,min_gap,energy,fold_flag"]
        for pt in self.points:
            lines.append("%.12g,%.12g,%.12g,%.12g,%.12g,%d" %
                         (pt.arc_s, pt.lam, pt.sup_v, pt.min_gap, pt.energy, pt.fold_flag))
        return "\n".join(lines) + "\n"


class _PullinSystem:
    """Residual F(v, lam) = Delta_h v + lam * max(1-v, delta)^(-p) on interior nodes."""

    def __init__(self, grid: Grid, p, delta):
        self.sys = _InteriorSystem(grid)
        self.g = RegularizedNonlinearity(p, delta)
        self.grid = grid
        self.p = p
        self.hn = grid.h ** grid.dim

    def resid(self, v, lam):
        return self.sys.lap @ v + lam * self.g(1.0 - v)

    def jac(self, v, lam):
        # d/dv of lam*(1-v)^(-p) is +lam*p*(1-v)^(-p-1) where the floor is inactive
        diag = np.where(1.0 - v > self.g.delta,
                        lam * self.p * np.maximum(1.0 - v, self.g.delta) ** (-self.p - 1.0),
                        0.0)
        return self.sys.lap + sp.diags(diag)

    def flam(self, v):
        return self.g(1.0 - v)

    def dot(self, dv1, dl1, dv2, dl2):
        return self.hn * float(dv1 @ dv2) + dl1 * dl2


def solve_pullin_at_lambda(grid: Grid, p, lam, cfg: SolveConfig = None, v0=None):
    """Fixed-lambda Newton from v0 (default 0); converges to the minimal solution
    for lambda below the fold. Returns the interior vector."""
    cfg = cfg or SolveConfig()
    delta = cfg.delta if cfg.delta > 0 else default_delta(grid.h, p)
    ps = _PullinSystem(grid, p, delta)
    v = np.zeros(ps.sys.n) if v0 is None else v0.copy()
    res = ps.resid(v, lam)
    norm = float(np.max(np.abs(res)))
    for it in range(cfg.max_newton_iters):
        if norm <= cfg.residual_tol:
            return v
        step = _factor(ps.jac(v, lam)).solve(-res)
        eta = 1.0
        for _ in range(40):
            cand = v + eta * step
            if np.max(cand) < 1.0:
                cand_res = ps.resid(cand, lam)
                cand_norm = float(np.max(np.abs(cand_res)))
                if cand_norm < norm:
                    v, res, norm = cand, cand_res, cand_norm
                    break
            eta *= cfg.damping
        else:
            raise SolverError(f"pull-in Newton stalled at lambda={lam}")
    if norm <= cfg.residual_tol:
        return v
    raise SolverError(f"pull-in Newton did not converge at lambda={lam}")


def _tangent(ps, lu, v, lam, prev):
    """Unit tangent (dv, dlam) of the branch via the bordering trick."""
    y = lu.solve(-ps.flam(v))
    scale = 1.0 / math.sqrt(1.0 + ps.hn * float(y @ y))
    dv, dlam = scale * y, scale
    if prev is not None and ps.dot(dv, dlam, prev[0], prev[1]) < 0:
        dv, dlam = -dv, -dlam
    return dv, dlam


def continue_pullin(grid: Grid, p, cfg: SolveConfig = None, step=0.1, stop_gap=0.05,
                    snapshot_gaps=(), snapshot_lambdas=(), max_steps=2000) -> Branch:
    """Trace the pull-in branch from (lambda=0, v=0) past the fold until
    min(1-v) <= stop_gap.

    Keller pseudo-arclength: predictor along the unit tangent, corrector Newton
    on (PDE residual, arclength constraint) solved by block elimination. The
    first sign change of dlambda/ds marks the fold; the lambda* estimate comes
    from a quadratic fit of lambda(s) around it. Snapshots store u = 1 - v.
    """
    cfg = cfg or SolveConfig()
    if step <= 0:
        raise ValueError("arclength step must be positive")
    if not 0 < stop_gap < 1:
        raise ValueError("stop_gap must lie in (0,1)")
    delta = cfg.delta if cfg.delta > 0 else default_delta(grid.h, p)
    ps = _PullinSystem(grid, p, delta)
    n = ps.sys.n

    branch = Branch()
    v, lam, s = np.zeros(n), 0.0, 0.0
    want_gaps = sorted(snapshot_gaps, reverse=True)
    want_lams = sorted(snapshot_lambdas)

    def record(v, lam, s, fold=False):
        full_v = ps.sys.embed(v, np.zeros(grid.shape))
        grad = gradient(ScalarField(grid, full_v, p))
        energy = 0.5 * ps.hn * float(sum(np.sum(c ** 2) for c in grad.components))
        sup_v = float(np.max(full_v)) if n else 0.0
        branch.points.append(BranchPoint(s, lam, sup_v, 1.0 - sup_v, energy, fold))

    def snapshot(key, v, lam):
        # 1 - v solves Delta u = lam u^(-p); the amplitude factor lam^(-1/(p+1))
        # restores the lam-free equation every downstream diagnostic assumes
        scale = lam ** (-1.0 / (p + 1.0)) if lam > 0 else 1.0
        u_full = scale * ps.sys.embed(1.0 - v, np.ones(grid.shape))
        branch.snapshots[key] = ScalarField(grid, u_full, p, nonneg=True)

    record(v, lam, s)
    lu = _factor(ps.jac(v, lam))
    dv, dlam = _tangent(ps, lu, v, lam, prev=None)
    if dlam < 0:
        dv, dlam = -dv, -dlam
    ds = step
    fold_seen = False
    prev_dlam = dlam
    halvings = 0

    for _ in range(max_steps):
        vp, lp = v + ds * dv, lam + ds * dlam
        ok = False
        for _ in range(cfg.max_newton_iters):
            res = ps.resid(vp, lp)
            con = ps.dot(dv, dlam, vp - v, lp - lam) - ds
            if max(float(np.max(np.abs(res))), abs(con)) <= cfg.residual_tol:
                ok = True
                break
            if np.max(vp) >= 1.0 - 1e-13:
                break
            jac = ps.jac(vp, lp)
            lu = _factor(jac)
            x1 = lu.solve(-res)
            x2 = lu.solve(ps.flam(vp))
            denom = dlam - ps.hn * float(dv @ x2)
            if denom == 0:
                break
            dl = (-con - ps.hn * float(dv @ x1)) / denom
            vp = vp + x1 - dl * x2
            lp = lp + dl
        if not ok:
            ds *= 0.5
            halvings += 1
            if halvings > 10:
                raise SolverError("corrector diverged after 10 step halvings",
                                  diagnostics={"arc_s": s, "lambda": lam})
            continue
        halvings = 0
        v, lam = vp, lp
        s += ds
        record(v, lam, s)
        if len(branch.points) >= 2 and branch.points[-1].arc_s <= branch.points[-2].arc_s:
            raise SolverError("internal error: arclength not increasing")

        lu = _factor(ps.jac(v, lam))
        dv, dlam = _tangent(ps, lu, v, lam, prev=(dv, dlam))
        if not fold_seen and prev_dlam > 0 and dlam <= 0:
            fold_seen = True
            branch.points[-1].fold_flag = True
            pts = branch.points[-3:]
            if len(pts) == 3:
                coeff = np.polyfit([q.arc_s for q in pts], [q.lam for q in pts], 2)
                s_star = float(np.clip(-coeff[1] / (2 * coeff[0]), pts[0].arc_s, pts[-1].arc_s))
                branch.lambda_star = float(np.polyval(coeff, s_star))
            else:
                branch.lambda_star = lam
        prev_dlam = dlam

        gap = branch.points[-1].min_gap
        while want_gaps and gap <= want_gaps[0]:
            snapshot(("min_gap", want_gaps.pop(0)), v, lam)
        while want_lams and not fold_seen and lam >= want_lams[0]:
            snapshot(("lambda", want_lams.pop(0)), v, lam)
        if gap <= stop_gap:
            return branch
        # gentle step growth after an easy corrector
        ds = min(step, ds * 1.3)
    raise SolverError("continuation exceeded max_steps before reaching stop_gap")
