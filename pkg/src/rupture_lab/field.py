"""Structured grids, scalar/vector fields, finite differences and ball/sphere quadrature.

Everything downstream (solver, diagnostics, blow-up analysis) works on these
types. Grids are uniform Cartesian; disks and annuli are masked rectangles.
All operations are pure functions of immutable inputs.
"""

import json
import math
import os
import tempfile
from dataclasses import dataclass, field as dc_field

import numpy as np

FIELD_FORMAT = "rupture-lab-field/1"


class FieldError(ValueError):
    """Invalid grid/field construction or quadrature request."""


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class Grid:
    """Uniform node-centered grid on an interval (1D) or rectangle (2D).

    ``interior_mask`` flags the unknowns of a Dirichlet problem; the mask is
    what turns a rectangle into a disk or an annulus. ``origin`` is the
    coordinate of node (0, ...) and node k sits at origin + k*h per axis.
    """

    dim: int
    shape: tuple
    h: float
    origin: tuple
    interior_mask: np.ndarray
    domain_kind: str

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise FieldError(f"dim must be 1 or 2, got {self.dim}")
        if self.h <= 0:
            raise FieldError(f"spacing must be positive, got {self.h}")
        if len(self.shape) != self.dim or any(n < 3 for n in self.shape):
            raise FieldError(f"shape needs >= 3 nodes per axis, got {self.shape}")
        if self.interior_mask.shape != tuple(self.shape):
            raise FieldError("interior_mask shape does not match grid shape")
        # every interior node must have all axis neighbors inside the array
        m = self.interior_mask
        for ax in range(self.dim):
            lo = np.take(m, [0], axis=ax)
            hi = np.take(m, [-1], axis=ax)
            if lo.any() or hi.any():
                raise FieldError("interior node on the array edge (missing neighbor)")

    def axes(self):
        return [self.origin[a] + self.h * np.arange(self.shape[a]) for a in range(self.dim)]

    def meshgrid(self):
        return np.meshgrid(*self.axes(), indexing="ij")

    def hull(self):
        """(lo, hi) corner coordinates of the node array."""
        lo = np.asarray(self.origin, dtype=float)
        hi = lo + self.h * (np.asarray(self.shape) - 1)
        return lo, hi

    def node_coords(self):
        """(n_nodes, dim) array of all node coordinates, row-major order."""
        mesh = self.meshgrid()
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def radii_from(self, x):
        """Distance of every node from point x, shaped like the grid."""
        mesh = self.meshgrid()
        r2 = np.zeros(self.shape)
        for a in range(self.dim):
            r2 += (mesh[a] - x[a]) ** 2
        return np.sqrt(r2)

    def contains_ball(self, x, r):
        lo, hi = self.hull()
        x = np.asarray(x, dtype=float)
        return bool(np.all(x - r >= lo - 1e-12) and np.all(x + r <= hi + 1e-12))


def interval_grid(a, b, n):
    """1D grid on [a, b] with n nodes; endpoints are boundary."""
    if n < 3:
        raise FieldError("need at least 3 nodes")
    h = (b - a) / (n - 1)
    mask = np.ones(n, dtype=bool)
    mask[0] = mask[-1] = False
    return Grid(1, (n,), h, (a,), mask, "interval")


def rectangle_grid(lo, hi, h):
    """2D grid covering [lo0,hi0]x[lo1,hi1]; the array edge is boundary."""
    lo = tuple(float(v) for v in lo)
    hi = tuple(float(v) for v in hi)
    shape = tuple(int(round((hi[a] - lo[a]) / h)) + 1 for a in range(2))
    for a in range(2):
        if abs(lo[a] + (shape[a] - 1) * h - hi[a]) > 1e-9 * max(1.0, abs(hi[a])):
            raise FieldError("extent is not an integer multiple of h")
    mask = np.ones(shape, dtype=bool)
    mask[0, :] = mask[-1, :] = mask[:, 0] = mask[:, -1] = False
    return Grid(2, shape, h, lo, mask, "rectangle")


def disk_grid(center, radius, h):
    """Masked-rectangle disk: interior nodes are those with |x-c| < radius - h/2."""
    g = rectangle_grid((center[0] - radius, center[1] - radius),
                       (center[0] + radius, center[1] + radius), h)
    r = g.radii_from(center)
    mask = r < radius - h / 2
    return Grid(2, g.shape, h, g.origin, mask, "disk")


def annulus_grid(center, r_inner, r_outer, h):
    """Masked-rectangle annulus, same half-cell rule as the disk on both circles."""
    if not 0 < r_inner < r_outer:
        raise FieldError("need 0 < r_inner < r_outer")
    g = rectangle_grid((center[0] - r_outer, center[1] - r_outer),
                       (center[0] + r_outer, center[1] + r_outer), h)
    r = g.radii_from(center)
    mask = (r < r_outer - h / 2) & (r > r_inner + h / 2)
    return Grid(2, g.shape, h, g.origin, mask, "annulus")


# ---------------------------------------------------------------------------
# fields


@dataclass
class ScalarField:
    """Node values on a grid plus the exponent p the field is associated to."""

    grid: Grid
    values: np.ndarray
    p: float
    nonneg: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != tuple(self.grid.shape):
            raise FieldError("values shape does not match grid")
        if not np.all(np.isfinite(self.values)):
            raise FieldError("field contains non-finite values")
        if self.p <= 1:
            raise FieldError(f"exponent p must exceed 1, got {self.p}")
        if self.nonneg and np.any(self.values < 0):
            raise FieldError("field flagged nonnegative has negative values")

    @classmethod
    def from_function(cls, grid, fn, p, nonneg=False):
        mesh = grid.meshgrid()
        vals = fn(*mesh)
        return cls(grid, np.broadcast_to(np.asarray(vals, dtype=float), grid.shape).copy(),
                   p, nonneg=nonneg)

    def copy(self):
        return ScalarField(self.grid, self.values.copy(), self.p, nonneg=self.nonneg)


@dataclass
class VectorField:
    grid: Grid
    components: tuple

    def __post_init__(self):
        comps = tuple(np.asarray(c, dtype=float) for c in self.components)
        if len(comps) != self.grid.dim:
            raise FieldError("one component per axis required")
        for c in comps:
            if c.shape != tuple(self.grid.shape):
                raise FieldError("component shape does not match grid")
            if not np.all(np.isfinite(c)):
                raise FieldError("vector field contains non-finite values")
        object.__setattr__(self, "components", comps)


# ---------------------------------------------------------------------------
# differential operators


def gradient(f: ScalarField) -> VectorField:
    """Second-order gradient: central differences inside, one-sided at array edges."""
    comps = np.gradient(f.values, f.grid.h, edge_order=2)
    if f.grid.dim == 1:
        comps = [comps]
    return VectorField(f.grid, tuple(comps))


def laplacian(f: ScalarField) -> ScalarField:
    """3/5-point Laplacian. Array-edge nodes carry no stencil; their entries are 0."""
    v = f.values
    h2 = f.grid.h ** 2
    out = np.zeros_like(v)
    if f.grid.dim == 1:
        out[1:-1] = (v[2:] - 2 * v[1:-1] + v[:-2]) / h2
    else:
        out[1:-1, 1:-1] = (v[2:, 1:-1] + v[:-2, 1:-1] + v[1:-1, 2:] + v[1:-1, :-2]
                           - 4 * v[1:-1, 1:-1]) / h2
    return ScalarField(f.grid, out, f.p)


def laplacian_defined_mask(grid: Grid) -> np.ndarray:
    """Nodes where the compact stencil exists (everything off the array edge)."""
    m = np.zeros(grid.shape, dtype=bool)
    if grid.dim == 1:
        m[1:-1] = True
    else:
        m[1:-1, 1:-1] = True
    return m


# ---------------------------------------------------------------------------
# interpolation


def sample_linear(f: ScalarField, points):
    """Multilinear interpolation of node values at arbitrary points inside the hull."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    g = f.grid
    lo, hi = g.hull()
    if np.any(pts < lo - 1e-9) or np.any(pts > hi + 1e-9):
        raise FieldError("interpolation point outside grid hull")
    t = (pts - lo) / g.h
    i0 = np.clip(np.floor(t).astype(int), 0, np.asarray(g.shape) - 2)
    w = t - i0
    v = f.values
    if g.dim == 1:
        a = i0[:, 0]
        return (1 - w[:, 0]) * v[a] + w[:, 0] * v[a + 1]
    ix, iy = i0[:, 0], i0[:, 1]
    wx, wy = w[:, 0], w[:, 1]
    return ((1 - wx) * (1 - wy) * v[ix, iy] + wx * (1 - wy) * v[ix + 1, iy]
            + (1 - wx) * wy * v[ix, iy + 1] + wx * wy * v[ix + 1, iy + 1])


def _sphere_points(x, r, h, dim):
    if dim == 1:
        pts = np.array([[x[0] - r], [x[0] + r]])
        normals = np.array([[-1.0], [1.0]])
        weights = np.array([1.0, 1.0])  # 0-sphere counting measure
        return pts, normals, weights
    m = max(64, int(math.ceil(2 * math.pi * r / h)))
    theta = 2 * math.pi * np.arange(m) / m
    normals = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    pts = np.asarray(x, dtype=float) + r * normals
    weights = np.full(m, 2 * math.pi * r / m)  # periodic trapezoid
    return pts, normals, weights


def sphere_integral(f: ScalarField, x, r) -> float:
    """Integral of f over the sphere |y-x| = r (two endpoint values in 1D)."""
    g = f.grid
    if not g.contains_ball(x, r):
        raise FieldError(f"sphere of radius {r} at {tuple(x)} exits the grid hull")
    pts, _, w = _sphere_points(x, r, g.h, g.dim)
    return float(np.sum(sample_linear(f, pts) * w))


def radial_derivative(f: ScalarField, x, r):
    """(points, dudr) on the quadrature set of the sphere |y-x| = r.

    The directional derivative grad(f).nu is taken from the interpolated
    node gradient, so accuracy matches the gradient stencil.
    """
    g = f.grid
    if not g.contains_ball(x, r + 2 * g.h):
        raise FieldError("radial derivative needs the sphere plus a 2h margin inside the hull")
    pts, normals, _ = _sphere_points(x, r, g.h, g.dim)
    grad = gradient(f)
    out = np.zeros(len(pts))
    for a in range(g.dim):
        comp = ScalarField(g, grad.components[a], f.p)
        out += sample_linear(comp, pts) * normals[:, a]
    return pts, out


def ball_integral(f: ScalarField, x, r, inner=None) -> float:
    """Integral of f over the ball (or shell inner < |y-x| <= r) around x.

    Node-centered cells cut by a sphere get the first-order weight
    clamp(1/2 + signed_distance/h, 0, 1).
    """
    g = f.grid
    if inner is not None and inner >= r:
        raise FieldError("inner radius must be smaller than r")
    if not g.contains_ball(x, r):
        lo, hi = g.hull()
        raise FieldError(f"ball of radius {r} at {tuple(x)} exceeds hull [{lo}, {hi}]")
    d = g.radii_from(x)
    w = np.clip(0.5 + (r - d) / g.h, 0.0, 1.0)
    if inner is not None:
        w *= np.clip(0.5 + (d - inner) / g.h, 0.0, 1.0)
    return float(np.sum(f.values * w) * g.h ** g.dim)


# ---------------------------------------------------------------------------
# serialization (single JSON document, 17 significant digits)


def _fmt(v):
    return format(float(v), ".17g")


def _fmt_array(a):
    return "[" + ", ".join(_fmt(v) for v in np.asarray(a, dtype=float).ravel()) + "]"


def field_to_json(f: ScalarField) -> str:
    g = f.grid
    parts = [
        f'"format": "{FIELD_FORMAT}"',
        f'"dim": {g.dim}',
        '"shape": [' + ", ".join(str(int(n)) for n in g.shape) + "]",
        f'"h": {_fmt(g.h)}',
        '"origin": ' + _fmt_array(g.origin),
        f'"domain_kind": "{g.domain_kind}"',
        f'"p": {_fmt(f.p)}',
        '"values": ' + _fmt_array(f.values),
        '"interior_mask": [' + ", ".join(str(int(b)) for b in g.interior_mask.ravel()) + "]",
    ]
    return "{" + ", ".join(parts) + "}"


def field_from_json(text: str) -> ScalarField:
    doc = json.loads(text)
    for key in ("format", "dim", "shape", "h", "origin", "domain_kind", "p",
                "values", "interior_mask"):
        if key not in doc:
            raise FieldError(f"field document missing key '{key}'")
    if doc["format"] != FIELD_FORMAT:
        raise FieldError(f"unsupported field format '{doc['format']}'")
    shape = tuple(int(n) for n in doc["shape"])
    mask = np.array(doc["interior_mask"], dtype=bool).reshape(shape)
    grid = Grid(int(doc["dim"]), shape, float(doc["h"]),
                tuple(float(v) for v in doc["origin"]), mask, str(doc["domain_kind"]))
    values = np.array(doc["values"], dtype=float).reshape(shape)
    return ScalarField(grid, values, float(doc["p"]))


def save_field(f: ScalarField, path):
    """Atomic write: temp file in the target directory, then rename."""
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(field_to_json(f))
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_field(path) -> ScalarField:
    with open(path) as fh:
        return field_from_json(fh.read())
