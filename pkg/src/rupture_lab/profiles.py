"""Reference solutions: the homogeneous radial profile, angular profiles on the
circle, and harmonic test fields for the frequency diagnostics."""

import json
import math
from dataclasses import dataclass

import numpy as np

from .field import Grid, ScalarField


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class RadialExact:
    """u(x) = c |x|^alpha with alpha = 2/(p+1) and c^(p+1) * alpha * (alpha+n-2) = 1.

    Solves Delta u = u^(-p) away from the origin in dimension n >= 2.
    """

    n: int
    p: float
    alpha: float
    c: float

    def __call__(self, *coords):
        r2 = sum(np.asarray(c, dtype=float) ** 2 for c in coords)
        return self.c * r2 ** (self.alpha / 2)

    def eval_radius(self, r):
        return self.c * np.asarray(r, dtype=float) ** self.alpha

    def radial_slope(self, r):
        return self.c * self.alpha * np.asarray(r, dtype=float) ** (self.alpha - 1)

    def sample(self, grid: Grid) -> ScalarField:
        return ScalarField.from_function(grid, self, self.p, nonneg=True)


def radial_exact(n, p) -> RadialExact:
    if n < 2:
        raise ProfileError("no homogeneous radial solution exists in dimension 1")
    if p <= 1:
        raise ProfileError(f"exponent p must exceed 1, got {p}")
    alpha = 2.0 / (p + 1.0)
    c = (alpha * (alpha + n - 2.0)) ** (-1.0 / (p + 1.0))
    return RadialExact(n, float(p), alpha, c)


def angular_constant(p) -> float:
    """The unique constant solution of phi'' + alpha^2 phi = phi^(-p)."""
    if p <= 1:
        raise ProfileError(f"exponent p must exceed 1, got {p}")
    return ((p + 1.0) ** 2 / 4.0) ** (1.0 / (p + 1.0))


@dataclass
class AngularProfile:
    """Positive periodic profile phi(theta) with u = r^alpha phi(theta)."""

    p: float
    theta: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        if self.theta.shape != self.phi.shape:
            raise ProfileError("theta and phi must have matching shapes")
        if np.any(self.phi <= 0):
            raise ProfileError("angular profile must be strictly positive")

    @property
    def alpha(self):
        return 2.0 / (self.p + 1.0)

    @classmethod
    def constant(cls, p, n_theta=512):
        theta = 2 * np.pi * np.arange(n_theta) / n_theta
        return cls(p, theta, np.full(n_theta, angular_constant(p)))

    def residual(self):
        """Periodic collocation residual phi'' + alpha^2 phi - phi^(-p)."""
        dtheta = 2 * np.pi / len(self.theta)
        d2 = (np.roll(self.phi, -1) - 2 * self.phi + np.roll(self.phi, 1)) / dtheta ** 2
        return d2 + self.alpha ** 2 * self.phi - self.phi ** (-self.p)

    def to_json(self):
        return json.dumps({"p": self.p, "alpha": self.alpha,
                           "theta": list(self.theta), "phi": list(self.phi)})

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        return cls(float(doc["p"]), np.array(doc["theta"]), np.array(doc["phi"]))


def solve_angular(p, guess: AngularProfile, tol=1e-10, max_iters=200) -> AngularProfile:
    """Newton collocation for phi'' + alpha^2 phi = phi^(-p), periodic in theta.

    Solutions can be non-isolated (rotation zero mode; at resonant p a whole
    profile family), so steps are Tikhonov-damped Newton: the damping grows
    until a step keeps phi positive and reduces the residual, which is the
    positivity line search in damped form. Note the achievable tol for
    nonconstant profiles is floored by the O(dtheta^2) collocation error.
    """
    phi = guess.phi.copy()
    if np.any(phi <= 0):
        raise ProfileError("initial angular guess must be positive")
    m = len(phi)
    alpha = 2.0 / (p + 1.0)
    dtheta = 2 * np.pi / m

    def resid(v):
        d2 = (np.roll(v, -1) - 2 * v + np.roll(v, 1)) / dtheta ** 2
        return d2 + alpha ** 2 * v - v ** (-p)

    d2mat = (np.eye(m, k=1) + np.eye(m, k=-1) - 2 * np.eye(m)) / dtheta ** 2
    d2mat[0, -1] = d2mat[-1, 0] = 1.0 / dtheta ** 2

    res = resid(phi)
    mu = 0.0
    eye = np.eye(m)
    for _ in range(max_iters):
        if np.max(np.abs(res)) <= tol:
            break
        jac = d2mat + np.diag(alpha ** 2 + p * phi ** (-p - 1.0))
        jtj = jac.T @ jac
        jtf = jac.T @ res
        norm2 = np.linalg.norm(res)
        accepted = False
        for _ in range(30):
            step = np.linalg.solve(jtj + mu * eye, -jtf)
            cand = phi + step
            if np.all(cand > 0):
                cand_res = resid(cand)
                if np.linalg.norm(cand_res) < norm2:
                    phi, res = cand, cand_res
                    mu *= 0.25
                    accepted = True
                    break
            mu = mu * 10.0 if mu > 0 else 1e-6
        if not accepted:
            raise ProfileError(
                f"angular Newton stalled at residual {np.max(np.abs(res)):.3e} "
                f"(collocation floor at this resolution?)")
    else:
        raise ProfileError(f"angular Newton did not reach tol={tol}")
    if np.min(phi) <= 0:
        raise ProfileError("profile touched zero; positive profiles required")
    return AngularProfile(p, guess.theta.copy(), phi)


def harmonic_test_field(kind, grid: Grid, p=3.0) -> ScalarField:
    """Sample one of the appendix test fields onto a grid.

    kinds: 'linear' (x1), 'quadratic_saddle' (x1^2 - x2^2), 'abs_x1', 'constant'.
    """
    fns = {
        "linear": lambda *c: c[0],
        "quadratic_saddle": lambda *c: c[0] ** 2 - (c[1] ** 2 if len(c) > 1 else 0.0),
        "abs_x1": lambda *c: np.abs(c[0]),
        "constant": lambda *c: np.ones_like(c[0]),
    }
    if kind not in fns:
        raise ProfileError(f"unknown test field kind '{kind}'")
    return ScalarField.from_function(grid, fns[kind], p)
