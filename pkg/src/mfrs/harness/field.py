"""Field and magnetic-reward landscapes sampled on a lattice, written as CSV."""

import csv
import itertools

import numpy as np

from ..magnets import QuadratureSpec, field_at, intensity_at
from ..reward import FieldStats, magnetic_reward_from


def lattice_points(lattice):
    """Row-major ``(n, 3)`` points from three 1-D coordinate arrays (x varies slowest)."""
    xs, ys, zs = (np.atleast_1d(np.asarray(v, dtype=float)) for v in lattice)
    for v in (xs, ys, zs):
        if v.size == 0 or not np.all(np.isfinite(v)):
            raise ValueError("lattice axes must be finite and nonempty")
    return np.array(list(itertools.product(xs, ys, zs)))


def field_grid(magnets, lattice, quad=None):
    """``(points, |H|)`` for the superposed field of ``magnets`` (zero for no magnets)."""
    pts = lattice_points(lattice)
    h = np.zeros_like(pts)
    for m in magnets:
        h += field_at(m, pts, quad)
    return pts, np.linalg.norm(h, axis=1)


def reward_grid(magnets, lattice, stats, quad=None):
    """``(points, R^m)`` with ``magnets[0]`` as target and the rest as obstacles.

    ``stats`` is held fixed; nothing is recorded into its buffers.
    """
    if not magnets:
        raise ValueError("the reward landscape needs a target magnet")
    pts = lattice_points(lattice)
    h_t = intensity_at(magnets[0], pts, quad)
    h_o = np.stack([intensity_at(m, pts, quad) for m in magnets[1:]], axis=1) \
        if len(magnets) > 1 else np.zeros((len(pts), 0))
    rm = np.array([magnetic_reward_from(a, b, stats) for a, b in zip(h_t, h_o)])
    return pts, rm


def dump_field_grid(magnets, lattice, path, quantity="H", stats=None, quad=None):
    """Write ``x,y,z,H`` (or ``x,y,z,Rm``) rows for every lattice point."""
    quad = quad or QuadratureSpec()
    if quantity == "H":
        pts, v = field_grid(magnets, lattice, quad)
    elif quantity == "Rm":
        if stats is None:
            stats = FieldStats(max(len(magnets) - 1, 0))
        pts, v = reward_grid(magnets, lattice, stats, quad)
    else:
        raise ValueError("quantity must be 'H' or 'Rm'")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("x", "y", "z", quantity))
        for p, val in zip(pts, v):
            w.writerow([repr(float(p[0])), repr(float(p[1])), repr(float(p[2])), repr(float(val))])
    return len(pts)
