"""Quantitative functionals attached to a field: the monotone ball energy and
its density limit, growth/nondegeneracy ratios, Holder seminorm, gradient
bound, domain-variation residual, and the frequency machinery D, H, N with
the flux identity and doubling bound.

Quadrature of u^(-p) and u^(1-p) at a rupture center uses a fitted local
homogeneous core (u ~ c s^alpha on a 3h ball): node sampling of a negative
power at a zero of u is off by O(h^(1+q*alpha)) otherwise, which would drown
the quantities these diagnostics are meant to resolve.
"""

import json
import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import ndimage

from .field import ScalarField, VectorField, ball_integral, gradient, laplacian, \
    laplacian_defined_mask, sample_linear, sphere_integral, radial_derivative, FieldError
from . import solver as _solver

MINUS_INFINITY = float("-inf")


def natural_floor(u: ScalarField) -> float:
    """Quadrature floor at the Holder scale of one cell, h^(2/(p+1))."""
    return u.grid.h ** (2.0 / (u.p + 1.0))


def _alpha(p):
    return 2.0 / (p + 1.0)


def _energy_exponent(n, p):
    return -n + 2.0 * (p - 1.0) / (p + 1.0)


@dataclass
class EnergyRecord:
    center: tuple
    r: float
    E: float
    bulk: float
    boundary_raw: float
    dE_integrand: float
    floor_used: bool = False


@dataclass
class FrequencyRecord:
    center: tuple
    r: float
    D: float
    H: float
    N: float = None
    interpretable: bool = True
    gate_value: float = 0.0


@dataclass
class Verdict:
    check: str
    passed: bool  # None when the hypothesis of the check is unmet
    worst_violation: float
    tolerance: float
    details: dict = dc_field(default_factory=dict)

    def to_json(self):
        doc = {"check": self.check, "pass": self.passed,
               "worst_violation": self.worst_violation, "tolerance": self.tolerance}
        doc.update(self.details)
        return json.dumps(doc)


# ---------------------------------------------------------------------------
# rupture-core quadrature helpers


def _interp_value(u, x):
    return float(sample_linear(u, np.asarray(x, dtype=float)[None, :])[0])


def _is_rupture_center(u, x, delta):
    return u.grid.dim == 2 and _interp_value(u, x) < 3.0 * delta


def _local_amplitude(u, x, delta):
    """Least-squares amplitude of u ~ c s^alpha on the ring 1.5h < s <= 4h."""
    g = u.grid
    s = g.radii_from(x)
    ring = (s > 1.5 * g.h) & (s <= 4.0 * g.h)
    a = _alpha(u.p)
    w = s[ring] ** a
    c = float(np.sum(u.values[ring] * w) / np.sum(w * w))
    return max(c, delta)


def _power_core_mass(c, q_u, p, rho):
    """Closed form of the 2D integral of (c s^alpha)^q_u over the ball s <= rho."""
    a = _alpha(p)
    expo = q_u * a
    if expo + 2.0 <= 0:
        raise FieldError("core power is not integrable")
    return c ** q_u * 2.0 * math.pi * rho ** (expo + 2.0) / (expo + 2.0)


def _grad_sq_core_mass(c, p, rho):
    """Integral of |grad(c s^alpha)|^2 = c^2 alpha^2 s^(2 alpha - 2) over s <= rho."""
    a = _alpha(p)
    return c ** 2 * a ** 2 * 2.0 * math.pi * rho ** (2 * a) / (2 * a)


def _singular_power_integral(u, x, r, q_u, delta):
    """Integral of max(u, delta)^q_u over B_r(x), rupture core handled analytically."""
    vals = np.maximum(u.values, delta) ** q_u
    f = ScalarField(u.grid, vals, u.p)
    if _is_rupture_center(u, x, delta):
        rho = min(3.0 * u.grid.h, 0.5 * r)
        c = _local_amplitude(u, x, delta)
        return ball_integral(f, x, r, inner=rho) + _power_core_mass(c, q_u, u.p, rho)
    return ball_integral(f, x, r)


# ---------------------------------------------------------------------------
# monotone energy


def energy_E(u: ScalarField, x, r, delta=None) -> EnergyRecord:
    """Assemble the weighted ball energy

        E(r) = r^gamma int_B (|grad u|^2/2 - u^(1-p)/(p-1))
               - r^(gamma-1)/(p+1) int_dB u^2,   gamma = -n + 2(p-1)/(p+1),

    together with the equality-case integrand int_dB (du/dr - alpha u / r)^2.
    """
    p, g = u.p, u.grid
    n = g.dim
    if delta is None:
        delta = natural_floor(u)
    gamma = _energy_exponent(n, p)
    a = _alpha(p)

    grad = gradient(u)
    gsq = sum(c ** 2 for c in grad.components)
    floored = np.maximum(u.values, delta)
    floor_used = bool(np.any(u.values < delta))
    W = ScalarField(g, 0.5 * gsq - floored ** (1.0 - p) / (p - 1.0), p)

    if _is_rupture_center(u, x, delta):
        rho = min(3.0 * g.h, 0.5 * r)
        c = _local_amplitude(u, x, delta)
        core = 0.5 * _grad_sq_core_mass(c, p, rho) \
            - _power_core_mass(c, 1.0 - p, p, rho) / (p - 1.0)
        bulk = ball_integral(W, x, r, inner=rho) + core
    else:
        bulk = ball_integral(W, x, r)

    usq = ScalarField(g, u.values ** 2, p)
    boundary_raw = sphere_integral(usq, x, r)

    pts, dudr = radial_derivative(u, x, r)
    uvals = sample_linear(u, pts)
    integrand = (dudr - a * uvals / r) ** 2
    if g.dim == 1:
        dE = float(np.sum(integrand))
    else:
        dE = float(np.mean(integrand) * 2 * math.pi * r)

    E = r ** gamma * bulk - r ** (gamma - 1.0) / (p + 1.0) * boundary_raw
    return EnergyRecord(tuple(x), float(r), float(E), float(bulk),
                        float(boundary_raw), dE, floor_used)


def solution_caveat(u: ScalarField, delta=None, tol=0.1) -> bool:
    """True when u is visibly not a solution: L1 norm of the PDE residual over
    nodes safely above the rupture scale exceeds tol."""
    if delta is None:
        delta = natural_floor(u)
    res = _solver.residual_field(u, u.p, delta)
    keep = u.grid.interior_mask & (u.values > 3.0 * delta)
    norm = float(np.sum(np.abs(res.values[keep])) * u.grid.h ** u.grid.dim)
    return norm > tol


def check_E_monotone(u: ScalarField, x, radii, C_mono=5.0, delta=None) -> Verdict:
    """Nondecreasing-energy verdict with additive slack C_mono * h^(2/(p+1))."""
    radii = sorted(float(r) for r in radii)
    if len(radii) < 3:
        raise FieldError("need at least 3 radii")
    recs = [energy_E(u, x, r, delta=delta) for r in radii]
    E = np.array([q.E for q in recs])
    drops = np.maximum(0.0, E[:-1] - E[1:])
    worst = float(np.max(drops))
    k = int(np.argmax(drops))
    tol = C_mono * u.grid.h ** (2.0 / (u.p + 1.0))
    details = {
        "radii": radii,
        "E": [float(v) for v in E],
        "dE_integrand": [q.dE_integrand for q in recs],
        "worst_violation_at_r": radii[k + 1],
        "not_a_solution": solution_caveat(u, delta=delta),
    }
    return Verdict("E_monotone", worst <= tol, worst, tol, details)


def energy_E_alt(u: ScalarField, x, r, dr=None, delta=None) -> float:
    """Alternative assembly of E valid for p != 3; for solutions it matches
    energy_E up to O(h^2) + O(dr^2)."""
    p, g = u.p, u.grid
    if abs(p - 3.0) < 1e-12:
        raise FieldError("alternative form singular at p=3 (coefficients divide by p-3)")
    if delta is None:
        delta = natural_floor(u)
    n = g.dim
    gamma = _energy_exponent(n, p)
    if dr is None:
        dr = max(2.0 * g.h, 0.02 * r)

    grad = gradient(u)
    gsq = ScalarField(g, sum(c ** 2 for c in grad.components), p)
    if _is_rupture_center(u, x, delta):
        rho = min(3.0 * g.h, 0.5 * r)
        c = _local_amplitude(u, x, delta)
        G = ball_integral(gsq, x, r, inner=rho) + _grad_sq_core_mass(c, p, rho)
        P = _singular_power_integral(u, x, r, 1.0 - p, delta)
    else:
        G = ball_integral(gsq, x, r)
        P = _singular_power_integral(u, x, r, 1.0 - p, delta)

    usq = ScalarField(g, u.values ** 2, p)

    def weighted_boundary(rr):
        return rr ** gamma * sphere_integral(usq, x, rr)

    ddr = (weighted_boundary(r + dr) - weighted_boundary(r - dr)) / (2 * dr)
    c1 = 0.5 + 2.0 / (p - 3.0)
    c2 = 2.0 / (p - 3.0) - 1.0 / (p - 1.0)
    return float(r ** gamma * (c1 * G + c2 * P) - ddr / (p - 3.0))


# ---------------------------------------------------------------------------
# density and point classification


def density_theta(u: ScalarField, x, radii, cutoff=50.0, delta=None):
    """Limit of E(r) as r -> 0 at desk scale.

    Returns -inf when E drops below -cutoff with the log-log slope of the
    positive-point blowup E ~ -C r^(2(p-1)/(p+1) - 2); otherwise the
    linearly extrapolated limit at r = 0.
    """
    radii = sorted((float(r) for r in radii), reverse=True)
    usable = [r for r in radii
              if r >= 4.0 * u.grid.h and u.grid.contains_ball(x, r + 2 * u.grid.h)]
    if len(usable) < 3:
        raise FieldError("need at least 3 usable radii (>= 4h, inside hull)")
    E = np.array([energy_E(u, x, r, delta=delta).E for r in usable])
    r_arr = np.array(usable)
    if E[-1] < -cutoff:
        tail = E < -1.0
        if np.sum(tail) >= 2:
            slope = np.polyfit(np.log(r_arr[tail]), np.log(-E[tail]), 1)[0]
        else:
            slope = 0.0
        blowup_slope = 2.0 * (u.p - 1.0) / (u.p + 1.0) - 2.0
        if slope <= blowup_slope + 0.2:
            return MINUS_INFINITY
    k = min(3, len(usable))
    coeff = np.polyfit(r_arr[-k:], E[-k:], 1)
    return float(np.polyval(coeff, 0.0))


@dataclass
class PointClass:
    kind: str  # "rupture" or "positive"
    theta: float
    ambiguous: bool


def classify_point(u: ScalarField, x, radii=None, cutoff=50.0, delta=None) -> PointClass:
    """Rupture iff the density limit is finite; cross-checked against the
    direct value test u(x) < h^(2/(p+1)). Disagreement is flagged, not fatal."""
    g = u.grid
    if radii is None:
        lo, hi = g.hull()
        rmax = float(min(np.min(np.asarray(x) - lo), np.min(hi - np.asarray(x)))) - 3 * g.h
        rmax = min(rmax, 0.5)
        if rmax < 6 * g.h:
            raise FieldError("point too close to the hull for a radius sweep")
        radii = np.geomspace(4 * g.h, rmax, 12)
    theta = density_theta(u, x, radii, cutoff=cutoff, delta=delta)
    kind = "positive" if theta == MINUS_INFINITY else "rupture"
    direct_rupture = _interp_value(u, x) < g.h ** (2.0 / (u.p + 1.0))
    ambiguous = (kind == "rupture") != direct_rupture
    return PointClass(kind, theta, ambiguous)


# ---------------------------------------------------------------------------
# growth and nondegeneracy ratios


def growth_ratio_up(u: ScalarField, x, r, delta=None) -> float:
    """int_B u^(-p) / r^(n - 2p/(p+1))."""
    if delta is None:
        delta = natural_floor(u)
    mass = _singular_power_integral(u, x, r, -u.p, delta)
    return float(mass / r ** (u.grid.dim - 2.0 * u.p / (u.p + 1.0)))


def growth_ratio_energy(u: ScalarField, x, r, delta=None) -> float:
    """int_B (|grad u|^2 + u^(1-p)) / r^(n - 2(p-1)/(p+1))."""
    p, g = u.p, u.grid
    if delta is None:
        delta = natural_floor(u)
    grad = gradient(u)
    gsq = ScalarField(g, sum(c ** 2 for c in grad.components), p)
    if _is_rupture_center(u, x, delta):
        rho = min(3.0 * g.h, 0.5 * r)
        c = _local_amplitude(u, x, delta)
        G = ball_integral(gsq, x, r, inner=rho) + _grad_sq_core_mass(c, p, rho)
    else:
        G = ball_integral(gsq, x, r)
    P = _singular_power_integral(u, x, r, 1.0 - p, delta)
    return float((G + P) / r ** (g.dim - 2.0 * (p - 1.0) / (p + 1.0)))


def nondegeneracy_ratio(u: ScalarField, x, r) -> float:
    """int_B u / r^(n + 2/(p+1))."""
    return float(ball_integral(u, x, r) / r ** (u.grid.dim + _alpha(u.p)))


# ---------------------------------------------------------------------------
# Holder seminorm and gradient bound


def holder_seminorm(u: ScalarField, exponent, budget=200000, seed=0) -> float:
    """max |u(x)-u(y)| / |x-y|^exponent over node pairs.

    All pairs when the grid is small enough; otherwise stratified sampling
    biased toward the minimum node and toward short separations.
    """
    if not 0 < exponent <= 1:
        raise FieldError("exponent must lie in (0, 1]")
    g = u.grid
    coords = g.node_coords()
    vals = u.values.ravel()
    m = len(vals)

    def quotient(ia, ib):
        d = np.linalg.norm(coords[ia] - coords[ib], axis=-1)
        keep = d > 0
        if not np.any(keep):
            return 0.0
        return float(np.max(np.abs(vals[ia][keep] - vals[ib][keep]) / d[keep] ** exponent))

    if m * (m - 1) // 2 <= budget:
        best = 0.0
        for i in range(m - 1):
            ia = np.full(m - 1 - i, i)
            ib = np.arange(i + 1, m)
            best = max(best, quotient(ia, ib))
        return best

    rng = np.random.default_rng(seed)
    k = budget // 3
    best = 0.0
    # pairs with the minimum node (rupture candidates dominate the quotient)
    imin = int(np.argmin(vals))
    best = max(best, quotient(np.full(min(k, m), imin), rng.integers(0, m, size=min(k, m))))
    # short-separation pairs: random node plus a shift of a few cells
    ia = rng.integers(0, m, size=k)
    multi = np.stack(np.unravel_index(ia, g.shape), axis=-1)
    shift = rng.integers(-4, 5, size=multi.shape)
    nb = np.clip(multi + shift, 0, np.asarray(g.shape) - 1)
    ib = np.ravel_multi_index(tuple(nb.T), g.shape)
    best = max(best, quotient(ia, ib))
    # uniform pairs
    best = max(best, quotient(rng.integers(0, m, size=k), rng.integers(0, m, size=k)))
    return best


def gradient_bound_ratio(u: ScalarField, delta=None) -> float:
    """sup |grad u| * u^((p-1)/2) over nodes safely above the rupture scale."""
    if delta is None:
        delta = natural_floor(u)
    grad = gradient(u)
    mag = np.sqrt(sum(c ** 2 for c in grad.components))
    keep = u.grid.interior_mask & (u.values > 3.0 * delta)
    if not np.any(keep):
        return 0.0
    return float(np.max(mag[keep] * u.values[keep] ** ((u.p - 1.0) / 2.0)))


# ---------------------------------------------------------------------------
# domain-variation (inner variation) residual


def stationarity_residual(u: ScalarField, Y: VectorField, delta=None) -> float:
    """Quadrature of int (|grad u|^2/2 - u^(1-p)/(p-1)) div Y - DY(grad u, grad u).

    Y must vanish within 2h of every non-interior node.
    """
    g = u.grid
    if Y.grid is not u.grid and Y.grid.shape != g.shape:
        raise FieldError("Y must live on the grid of u")
    if delta is None:
        delta = natural_floor(u)
    inner = ndimage.binary_erosion(g.interior_mask, iterations=2)
    outside = ~inner
    for comp in Y.components:
        if np.any(np.abs(comp[outside]) > 0):
            raise FieldError("Y must vanish within 2h of the boundary")

    grad_u = gradient(u).components
    W = 0.5 * sum(c ** 2 for c in grad_u) \
        - np.maximum(u.values, delta) ** (1.0 - u.p) / (u.p - 1.0)
    divY = np.zeros(g.shape)
    dY = []  # dY[i][j] = d Y_i / d x_j
    for i, comp in enumerate(Y.components):
        parts = np.gradient(comp, g.h, edge_order=2)
        if g.dim == 1:
            parts = [parts]
        dY.append(parts)
        divY += parts[i]
    bilinear = np.zeros(g.shape)
    for i in range(g.dim):
        for j in range(g.dim):
            bilinear += dY[i][j] * grad_u[i] * grad_u[j]
    integrand = W * divY - bilinear
    return float(np.sum(integrand[g.interior_mask]) * g.h ** g.dim)


# ---------------------------------------------------------------------------
# frequency machinery


def interpretation_gate(u: ScalarField, gate_tol=1e-8):
    """(interpretable, gate_value): L1 norm of u * Delta_h u over stencil nodes.

    The degree reading of N is proved for fields with u * Delta u = 0; for
    anything else the raw ratio is still reported, flagged non-interpretable.
    """
    lap = laplacian(u)
    m = laplacian_defined_mask(u.grid)
    val = float(np.sum(np.abs(u.values[m] * lap.values[m])) * u.grid.h ** u.grid.dim)
    scale = 1.0 + float(np.max(u.values ** 2))
    return val <= gate_tol * scale, val


def frequency(u: ScalarField, x, r, gate_tol=1e-8, h_tol=1e-14) -> FrequencyRecord:
    """D = r^(2-n) int_B |grad u|^2, H = r^(1-n) int_dB u^2, N = D/H."""
    g = u.grid
    n = g.dim
    grad = gradient(u)
    gsq = ScalarField(g, sum(c ** 2 for c in grad.components), u.p)
    D = r ** (2.0 - n) * ball_integral(gsq, x, r)
    usq = ScalarField(g, u.values ** 2, u.p)
    H = r ** (1.0 - n) * sphere_integral(usq, x, r)
    interpretable, gate = interpretation_gate(u, gate_tol)
    N = D / H if H >= h_tol else None
    return FrequencyRecord(tuple(x), float(r), float(D), float(H),
                           None if N is None else float(N), interpretable, gate)


def _sphere_profile(u, x, r, m=256):
    theta = 2 * np.pi * np.arange(m) / m
    pts = np.asarray(x, dtype=float) + r * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    return sample_linear(u, pts)


def check_N_monotone(u: ScalarField, x, radii, tol=0.02, gate_tol=1e-8) -> Verdict:
    """N nondecreasing in r (within tol). Near-constant N triggers a direct
    homogeneity cross-check of degree N via two-sphere profile comparison."""
    radii = sorted(float(r) for r in radii)
    recs = [frequency(u, x, r, gate_tol=gate_tol) for r in radii]
    if not recs[0].interpretable:
        return Verdict("N_monotone", None, 0.0, tol,
                       {"hypothesis_met": False, "gate_value": recs[0].gate_value})
    if any(q.N is None for q in recs):
        return Verdict("N_monotone", None, 0.0, tol, {"undefined_H": True})
    N = np.array([q.N for q in recs])
    drops = np.maximum(0.0, N[:-1] - N[1:])
    worst = float(np.max(drops)) if len(drops) else 0.0
    details = {"radii": radii, "N": [float(v) for v in N]}
    if float(np.max(N) - np.min(N)) <= tol and u.grid.dim == 2:
        d = float(np.mean(N))
        ra, rb = radii[0], radii[-1]
        fa = _sphere_profile(u, x, ra) / ra ** d
        fb = _sphere_profile(u, x, rb) / rb ** d
        scale = max(1e-30, float(np.max(np.abs(fb))))
        details["constant_N"] = d
        details["homogeneity_mismatch"] = float(np.max(np.abs(fa - fb)) / scale)
        details["homogeneous"] = details["homogeneity_mismatch"] <= 5 * tol
    return Verdict("N_monotone", worst <= tol, worst, tol, details)


def check_A8(u: ScalarField, x, radii, dr=None, tol=0.01, gate_tol=1e-8) -> Verdict:
    """Flux identity dH/dr = (2/r) D, centered difference against the closed form."""
    g = u.grid
    interpretable, gate = interpretation_gate(u, gate_tol)
    radii = sorted(float(r) for r in radii)
    n = g.dim
    usq = ScalarField(g, u.values ** 2, u.p)
    worst = 0.0
    rows = []
    for r in radii:
        step = dr if dr is not None else max(2.0 * g.h, 0.02 * r)
        Hp = (r + step) ** (1.0 - n) * sphere_integral(usq, x, r + step)
        Hm = (r - step) ** (1.0 - n) * sphere_integral(usq, x, r - step)
        lhs = (Hp - Hm) / (2 * step)
        rec = frequency(u, x, r, gate_tol=gate_tol)
        rhs = 2.0 * rec.D / r
        scale = max(abs(lhs), abs(rhs), 1e-30)
        mismatch = abs(lhs - rhs) / scale
        rows.append({"r": r, "dH_dr": lhs, "two_D_over_r": rhs, "mismatch": mismatch})
        worst = max(worst, mismatch)
    if not interpretable:
        return Verdict("A8", None, worst, tol,
                       {"hypothesis_met": False, "gate_value": gate, "rows": rows})
    return Verdict("A8", worst <= tol, worst, tol, {"rows": rows})


def check_doubling(u: ScalarField, x, d, R, radii, tol=0.01, gate_tol=1e-8) -> Verdict:
    """H(r) >= H(R) (r/R)^(2d) (1 - tol) for r <= R, requiring N(R) <= d first."""
    top = frequency(u, x, R, gate_tol=gate_tol)
    if top.N is None or top.N > d + 1e-9:
        return Verdict("doubling", None, 0.0, tol,
                       {"hypothesis_met": False, "N_at_R": top.N, "d": d})
    worst = 0.0
    rows = []
    for r in sorted(float(r) for r in radii):
        if r > R:
            continue
        rec = frequency(u, x, r, gate_tol=gate_tol)
        bound = top.H * (r / R) ** (2.0 * d)
        deficit = max(0.0, (bound - rec.H) / max(bound, 1e-30))
        rows.append({"r": r, "H": rec.H, "bound": bound, "deficit": deficit})
        worst = max(worst, deficit)
    return Verdict("doubling", worst <= tol, worst, tol,
                   {"N_at_R": top.N, "d": d, "rows": rows})


# ---------------------------------------------------------------------------
# report assembly


@dataclass
class DiagnosticReport:
    rows: list = dc_field(default_factory=list)
    verdicts: list = dc_field(default_factory=list)
    holder: dict = dc_field(default_factory=dict)
    summary: dict = dc_field(default_factory=dict)

    def to_csv(self):
        header = ("center_x,center_y,r,E,dE_integrand,D,H,N,"
                  "ratio_up,ratio_energy,ratio_nondeg,flags")
        lines = [header]
        for row in self.rows:
            lines.append(",".join([
                "%.12g" % row["center"][0],
                "%.12g" % (row["center"][1] if len(row["center"]) > 1 else 0.0),
                "%.12g" % row["r"],
                "%.12g" % row["E"],
                "%.12g" % row["dE_integrand"],
                "%.12g" % row["D"],
                "%.12g" % row["H"],
                ("%.12g" % row["N"]) if row["N"] is not None else "nan",
                "%.12g" % row["ratio_up"],
                "%.12g" % row["ratio_energy"],
                "%.12g" % row["ratio_nondeg"],
                row["flags"],
            ]))
        return "\n".join(lines) + "\n"


def _center_block(u, x, radii, delta, gate_tol):
    rows = []
    for r in radii:
        erec = energy_E(u, x, r, delta=delta)
        frec = frequency(u, x, r, gate_tol=gate_tol)
        flags = []
        if erec.floor_used:
            flags.append("floor")
        if not frec.interpretable:
            flags.append("raw_N")
        rows.append({
            "center": x, "r": r, "E": erec.E, "dE_integrand": erec.dE_integrand,
            "D": frec.D, "H": frec.H, "N": frec.N,
            "ratio_up": growth_ratio_up(u, x, r, delta=delta),
            "ratio_energy": growth_ratio_energy(u, x, r, delta=delta),
            "ratio_nondeg": nondegeneracy_ratio(u, x, r),
            "flags": ";".join(flags),
        })
    verdict = check_E_monotone(u, x, radii, delta=delta)
    theta = density_theta(u, x, sorted(radii, reverse=True), delta=delta)
    return rows, verdict, theta


def sweep_report(u: ScalarField, centers, radii, delta=None, seed=0,
                 holder_budget=200000, gate_tol=1e-8, threads=1) -> DiagnosticReport:
    """Full (center, radius) sweep: energy, frequency and ratio rows plus
    monotonicity verdicts per center and the energy-bound summary statistic.

    Centers are independent; with threads > 1 they run in a pool and are
    merged back in input order, so the report is deterministic either way.
    """
    rep = DiagnosticReport()
    radii = sorted(float(r) for r in radii)
    centers = [tuple(float(v) for v in x) for x in centers]
    if threads > 1 and len(centers) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(
                lambda x: _center_block(u, x, radii, delta, gate_tol), centers))
    else:
        blocks = [_center_block(u, x, radii, delta, gate_tol) for x in centers]
    for x, (rows, verdict, theta) in zip(centers, blocks):
        rep.rows.extend(rows)
        rep.verdicts.append(verdict)
        rep.summary[f"theta@{x}"] = theta
    exponent = _alpha(u.p)
    rep.holder = {"exponent": exponent,
                  "seminorm": holder_seminorm(u, exponent, budget=holder_budget, seed=seed)}
    grad = gradient(u)
    gsq = sum(c ** 2 for c in grad.components)
    mass = (gsq + np.maximum(u.values, natural_floor(u)) ** (1.0 - u.p) + u.values ** 2)
    rep.summary["energy_mass"] = float(np.sum(mass[u.grid.interior_mask])
                                       * u.grid.h ** u.grid.dim)
    rep.summary["gradient_bound_ratio"] = gradient_bound_ratio(u, delta=delta)
    return rep
