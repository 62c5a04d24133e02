"""Blow-up rescaling u^lam(y) = lam^(-2/(p+1)) u(x + lam y) on a fixed
reference window, plus homogeneity detection and angular-profile fitting."""

import json
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import Grid, ScalarField, ball_integral, gradient, rectangle_grid, \
    sample_linear, FieldError
from .profiles import AngularProfile
from . import diagnostics

REF_ETA = 0.25
REF_NODES = 257  # 256 cells across the reference window


def reference_grid(eta=REF_ETA, nodes=REF_NODES) -> Grid:
    half = 1.0 / eta
    h = 2 * half / (nodes - 1)
    g = rectangle_grid((-half, -half), (half, half), h)
    r = g.radii_from((0.0, 0.0))
    mask = (r > eta + h / 2) & (r < half - h / 2)
    return Grid(2, g.shape, h, g.origin, mask, "rectangle")


def annulus_mask(grid: Grid, eta=REF_ETA):
    r = grid.radii_from((0.0, 0.0))
    return (r >= eta) & (r <= 1.0 / eta)


@dataclass
class BlowupSequence:
    center: tuple
    lambdas: list
    fields: list  # rescaled ScalarFields on the shared reference grid
    deviations: list  # sup distance between consecutive rescalings on the annulus

    def to_json(self):
        return json.dumps({
            "center": list(self.center),
            "lambdas": list(self.lambdas),
            "deviations": list(self.deviations),
        })


def max_admissible_lambda(u: ScalarField, x, eta=REF_ETA) -> float:
    lo, hi = u.grid.hull()
    x = np.asarray(x, dtype=float)
    return float(min(np.min(x - lo), np.min(hi - x)) * eta)


def rescale(u: ScalarField, x, lam, eta=REF_ETA, nodes=REF_NODES,
            degree=None) -> ScalarField:
    """Sample lam^(-degree) u(x + lam y) on the reference window.

    degree defaults to the rupture exponent 2/(p+1); other degrees support
    homogeneity checks of integer-degree fields.
    """
    if lam <= 0:
        raise FieldError("lambda must be positive")
    admissible = max_admissible_lambda(u, x, eta)
    if lam > admissible + 1e-12:
        raise FieldError(f"window exits the domain; max admissible lambda = {admissible:.6g}")
    if degree is None:
        degree = 2.0 / (u.p + 1.0)
    ref = reference_grid(eta, nodes)
    pts = ref.node_coords() * lam + np.asarray(x, dtype=float)
    vals = sample_linear(u, pts).reshape(ref.shape) * lam ** (-degree)
    return ScalarField(ref, vals, u.p)


def homogeneity_deviation(u: ScalarField, x, r_in, r_out, delta=None) -> float:
    """Annulus integral of |y|^(2(p-1)/(p+1) - n) (du/dr - (2/(p+1)) u/|y|)^2.

    Zero exactly on fields homogeneous of degree 2/(p+1) around x.
    """
    g = u.grid
    if not (0 < r_in < r_out):
        raise FieldError("need 0 < r_in < r_out")
    if not g.contains_ball(x, r_out):
        raise FieldError("annulus exits the grid hull")
    p = u.p
    a = 2.0 / (p + 1.0)
    weight_expo = 2.0 * (p - 1.0) / (p + 1.0) - g.dim
    mesh = g.meshgrid()
    s = g.radii_from(x)
    s_safe = np.maximum(s, 1e-30)
    grad = gradient(u).components
    dudr = sum(grad[k] * (mesh[k] - x[k]) for k in range(g.dim)) / s_safe
    integrand = s_safe ** weight_expo * (dudr - a * u.values / s_safe) ** 2
    f = ScalarField(g, np.where(s > r_in / 2, integrand, 0.0), p)
    return float(ball_integral(f, x, r_out, inner=r_in))


def fit_angular_profile(ref_field: ScalarField, p, n_theta=128, n_radii=8,
                        eta=REF_ETA, fourier_modes=16) -> AngularProfile:
    """Average u(r, theta) / r^alpha over radii, then smooth by Fourier cutoff."""
    a = 2.0 / (p + 1.0)
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    radii = np.geomspace(1.5 * eta, 0.75 / eta, n_radii)
    acc = np.zeros(n_theta)
    for r in radii:
        pts = r * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        acc += sample_linear(ref_field, pts) / r ** a
    phi = acc / n_radii
    spec = np.fft.rfft(phi)
    spec[fourier_modes + 1:] = 0.0
    phi = np.fft.irfft(spec, n_theta)
    return AngularProfile(p, theta, phi)


@dataclass
class BlowupResult:
    sequence: BlowupSequence
    homogeneous: bool
    final_deviation: float
    profile: AngularProfile
    profile_residual: float

    def verdict(self):
        return "homogeneous" if self.homogeneous else "inconclusive"


def blowup_analyze(u: ScalarField, x, lambdas, tol=0.05, eta=REF_ETA,
                   nodes=REF_NODES, classify=True) -> BlowupResult:
    """Rescale along decreasing lambdas, measure successive sup distances on
    the reference annulus, and fit the angular profile of the last rescaling.

    Verdict "homogeneous" requires the distances to drop below tol and the
    weighted homogeneity integral of the last field to be below tol as well.
    """
    lambdas = sorted((float(v) for v in lambdas), reverse=True)
    if len(lambdas) < 2:
        raise FieldError("need at least two scales")
    if classify:
        cls = diagnostics.classify_point(u, x)
        if cls.kind != "rupture":
            raise FieldError(f"center classifies as {cls.kind}; blow-up needs a rupture point")
    fields = [rescale(u, x, lam, eta, nodes) for lam in lambdas]
    mask = annulus_mask(fields[0].grid, eta)
    devs = [float(np.max(np.abs(fields[k + 1].values[mask] - fields[k].values[mask])))
            for k in range(len(fields) - 1)]
    last = fields[-1]
    hdev = homogeneity_deviation(last, (0.0, 0.0), eta, 1.0 / eta)
    homogeneous = devs[-1] <= tol and hdev <= tol
    profile = fit_angular_profile(last, u.p, eta=eta)
    residual = float(np.max(np.abs(profile.residual())))
    seq = BlowupSequence(tuple(float(v) for v in x), lambdas, fields, devs)
    return BlowupResult(seq, homogeneous, devs[-1], profile, residual)
