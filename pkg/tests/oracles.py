"""Independent oracles used to freeze expected values in the tests.

Everything here deliberately avoids the package quadrature and solvers:
1D integrals go through scipy.integrate.quad, initial value problems through
solve_ivp, so each check has a second, structurally different route.
"""

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import minimize_scalar


def radial_ball_integral(profile, r, n=2):
    """Integral over the n-ball of a radial function via 1D quadrature."""
    if n == 2:
        val, _ = quad(lambda s: 2 * np.pi * s * profile(s), 0, r)
    else:
        val, _ = quad(lambda s: 2 * profile(s), 0, r)
    return val


def energy_of_constant(c, p, n, r):
    """Closed-form ball energy of the constant field u = c (not a solution)."""
    gamma = -n + 2.0 * (p - 1.0) / (p + 1.0)
    if n == 2:
        bulk = -c ** (1.0 - p) / (p - 1.0) * np.pi * r ** 2
        boundary = 2 * np.pi * r * c ** 2
    else:
        bulk = -c ** (1.0 - p) / (p - 1.0) * 2 * r
        boundary = 2 * c ** 2
    return r ** gamma * bulk - r ** (gamma - 1.0) / (p + 1.0) * boundary


def energy_alt_of_constant(c, p, n, r):
    """Closed form of the alternative energy assembly on u = c.

    For non-solutions the two assemblies differ by
    (2/(p-3)) r^gamma * int_B u^(1-p); this is the alt-form value.
    """
    defect = 2.0 / (p - 3.0) * r ** (-n + 2.0 * (p - 1.0) / (p + 1.0)) \
        * c ** (1.0 - p) * (np.pi * r ** 2 if n == 2 else 2 * r)
    return energy_of_constant(c, p, n, r) + defect


def pullin_lambda_of_peak(m, p=2.0):
    """lambda(m) for the radial pull-in problem on the unit disk by shooting.

    Scale-free form: y'' + y'/s = -(1-y)^(-p), y(0)=m, y'(0)=0; if y hits 0
    at s0 then lambda = s0^2 solves the unit-disk problem with v(0)=m.
    """
    def rhs(s, y):
        curv = -(1.0 - y[0]) ** (-p)
        return [y[1], curv - (y[1] / s if s > 0 else -0.5 * curv)]

    eps = 1e-8
    y0 = [m - 0.25 * (1 - m) ** (-p) * eps ** 2, -0.5 * (1 - m) ** (-p) * eps]
    hit = lambda s, y: y[0]
    hit.terminal, hit.direction = True, -1
    sol = solve_ivp(rhs, [eps, 60.0], y0, events=hit, rtol=1e-11, atol=1e-13)
    return float(sol.t_events[0][0] ** 2)


def pullin_lambda_star(p=2.0):
    """Fold value lambda* on the unit disk, maximizing lambda(m)."""
    res = minimize_scalar(lambda m: -pullin_lambda_of_peak(m, p),
                          bracket=(0.35, 0.45, 0.55), options={"xtol": 1e-9})
    return float(-res.fun)


def angular_shooting_trajectory(phi_at_0, dphi_at_0, p, thetas):
    """Integrate phi'' = phi^(-p) - alpha^2 phi from given initial data."""
    a = 2.0 / (p + 1.0)
    sol = solve_ivp(lambda t, y: [y[1], y[0] ** (-p) - a * a * y[0]],
                    [0.0, float(np.max(thetas))], [phi_at_0, dphi_at_0],
                    rtol=1e-12, atol=1e-14, dense_output=True)
    return sol.sol(thetas)[0]
