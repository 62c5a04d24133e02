"""Rupture-set geometry: sublevel masks, connected components, box-counting
dimension, and the 2D discreteness test."""

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import ndimage
from scipy.spatial import ConvexHull, QhullError

from .field import ScalarField, FieldError


@dataclass
class Component:
    label: int
    centroid: tuple
    diameter: float
    node_count: int


@dataclass
class LevelMask:
    grid: object
    tau: float
    mask: np.ndarray
    components: list

    def to_csv(self):
        lines = ["id,centroid_x,centroid_y,diameter,node_count,tau"]
        for c in self.components:
            cy = c.centroid[1] if len(c.centroid) > 1 else 0.0
            lines.append("%d,%.12g,%.12g,%.12g,%d,%.12g" %
                         (c.label, c.centroid[0], cy, c.diameter, c.node_count, self.tau))
        return "\n".join(lines) + "\n"


def _component_diameter(coords):
    """Max pairwise distance; hull vertices only once the set is big."""
    if len(coords) == 1:
        return 0.0
    pts = coords
    if len(coords) > 64:
        try:
            hull = ConvexHull(coords)
            pts = coords[hull.vertices]
        except QhullError:
            pass  # degenerate (collinear) sets stay as-is
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    return float(math.sqrt(np.max(d2)))


def sublevel(u: ScalarField, tau) -> LevelMask:
    """Nodes with u <= tau on the interior, split into 4-connected components."""
    if tau <= 0:
        raise FieldError("tau must be positive")
    g = u.grid
    mask = (u.values <= tau) & g.interior_mask
    comps = []
    if g.dim == 1:
        labels, n = ndimage.label(mask)
    else:
        structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
        labels, n = ndimage.label(mask, structure=structure)
    mesh = g.meshgrid()
    for k in range(1, n + 1):
        sel = labels == k
        coords = np.stack([m[sel] for m in mesh], axis=-1)
        centroid = tuple(float(v) for v in coords.mean(axis=0))
        comps.append(Component(k, centroid, _component_diameter(coords), int(sel.sum())))
    return LevelMask(g, float(tau), mask, comps)


@dataclass
class DimensionEstimate:
    scales: list
    counts: list
    slope: float
    slope_stderr: float
    defined: bool = True


def box_dimension(mask: LevelMask, scales) -> DimensionEstimate:
    """Least-squares slope of log N(eps) against log 1/eps.

    Boxes are anchored at the lower corner of the occupied nodes so a single
    small cluster occupies one box at every coarse scale.
    """
    scales = sorted(float(s) for s in scales)
    if len(scales) < 4 or scales[-1] / scales[0] < 10 - 1e-9:
        raise FieldError("need >= 4 scales spanning at least one decade")
    g = mask.grid
    sel = mask.mask
    if not np.any(sel):
        return DimensionEstimate(scales, [0] * len(scales), float("nan"), float("nan"),
                                 defined=False)
    mesh = g.meshgrid()
    coords = np.stack([m[sel] for m in mesh], axis=-1)
    anchor = coords.min(axis=0)
    counts = []
    for eps in scales:
        boxes = np.floor((coords - anchor) / eps + 1e-12).astype(int)
        counts.append(len(np.unique(boxes, axis=0)))
    x = np.log(1.0 / np.asarray(scales))
    y = np.log(np.asarray(counts, dtype=float))
    coeff, cov = np.polyfit(x, y, 1, cov=True)
    return DimensionEstimate(scales, counts, float(coeff[0]),
                             float(math.sqrt(max(cov[0, 0], 0.0))))


def discreteness_check(u: ScalarField, tau_list, factor=4.0) -> dict:
    """Discrete-rupture verdict over a decreasing tau sweep.

    Passes when the component count stabilizes and the largest component
    diameter tracks tau^((p+1)/2) within the given factor across the sweep
    (the inverse of the Holder growth of u at a nondegenerate rupture).
    """
    taus = sorted((float(t) for t in tau_list), reverse=True)
    if len(taus) < 3:
        raise FieldError("need at least 3 thresholds")
    masks = [sublevel(u, t) for t in taus]
    counts = [len(m.components) for m in masks]
    expo = (u.p + 1.0) / 2.0
    h = u.grid.h
    ratios = []
    for t, m in zip(taus, masks):
        if m.components:
            diam = max(c.diameter for c in m.components)
            ratios.append(max(diam, h) / t ** expo)  # grid floor: one node has diameter 0
    count_stable = len(set(counts[-2:])) == 1 and counts[-1] > 0
    if len(ratios) >= 2:
        spread = max(ratios) / min(ratios)
    else:
        spread = float("inf")
    passed = bool(count_stable and spread <= factor)
    return {
        "pass": passed,
        "taus": taus,
        "component_counts": counts,
        "diameter_ratio_spread": spread,
        "scaling_exponent": expo,
        "factor": factor,
        "masks": masks,
    }
