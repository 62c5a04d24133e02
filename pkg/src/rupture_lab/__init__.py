"""rupture-lab: a finite-difference laboratory for rupture solutions of the
negative-exponent equation Delta u = u^(-p) and the pull-in problem
-Delta v = lambda (1-v)^(-p)."""

from .field import (Grid, ScalarField, VectorField, interval_grid, rectangle_grid,
                    disk_grid, annulus_grid, gradient, laplacian, ball_integral,
                    sphere_integral, radial_derivative, sample_linear,
                    save_field, load_field, FieldError)
from .profiles import (RadialExact, AngularProfile, radial_exact, angular_constant,
                       solve_angular, harmonic_test_field, ProfileError)
from .solver import (SolveConfig, SolveResult, RegularizedNonlinearity, SolverError,
                     solve_dirichlet, residual_field, harmonic_extension,
                     continue_pullin, solve_pullin_at_lambda, Branch, BranchPoint)
from . import blowup, diagnostics, rupture

__version__ = "0.1.0"
