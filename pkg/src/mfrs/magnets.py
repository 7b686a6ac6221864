"""Field intensity of spherical and cuboid permanent magnets.

Both magnets are magnetized along their field-frame +z axis.  The sphere is
centred on its frame origin; the cuboid occupies ``[0, l] x [0, w] x [0, h]``
of its frame.  Only the Euclidean norm of the field is returned.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .geometry import MagnetPose, from_magnet_frame, placement_pose, to_magnet_frame

EPS = 1e-7
MAGNETIZATION = 4 * np.pi
DEFAULT_NODES = 64


@dataclass(frozen=True)
class QuadratureSpec:
    """Gauss-Legendre nodes per axis for the (theta0, phi0) surface integral."""

    n_theta: int = DEFAULT_NODES
    n_phi: int = DEFAULT_NODES

    def __post_init__(self):
        if self.n_theta < 2 or self.n_phi < 2:
            raise ValueError("quadrature needs at least 2 nodes per axis")


@lru_cache(maxsize=16)
def _gauss_grid(n_theta, n_phi):
    """Flattened node tables: sin/cos of theta0 and phi0, and product weights."""
    xt, wt = np.polynomial.legendre.leggauss(n_theta)
    xp, wp = np.polynomial.legendre.leggauss(n_phi)
    theta0 = 0.5 * np.pi * (xt + 1.0)
    phi0 = np.pi * (xp + 1.0)
    w = np.outer(0.5 * np.pi * wt, np.pi * wp).ravel()
    t0, p0 = np.meshgrid(theta0, phi0, indexing="ij")
    t0, p0 = t0.ravel(), p0.ravel()
    tables = (np.sin(t0), np.cos(t0), np.cos(p0), np.sin(p0), w)
    for t in tables:
        t.flags.writeable = False
    return tables


@dataclass(frozen=True)
class SphericalMagnet:
    radius: float
    pose: MagnetPose = field(default_factory=MagnetPose)
    magnetization: float = MAGNETIZATION

    def __post_init__(self):
        if not self.radius > 0 or not self.magnetization > 0:
            raise ValueError("radius and magnetization must be positive")

    @classmethod
    def placed(cls, center, radius, orientation=(0.0, 0.0, 0.0), magnetization=MAGNETIZATION):
        """Sphere centred at ``center`` whose magnetization axis is
        ``rotation_matrix(orientation) @ z`` in the environment frame."""
        return cls(radius, placement_pose(center, orientation), magnetization)

    @property
    def center(self):
        return from_magnet_frame(np.zeros(3), self.pose)

    @property
    def bounding_radius(self):
        return self.radius

    def contains(self, p_env):
        p = to_magnet_frame(p_env, self.pose)
        return np.linalg.norm(p, axis=-1) <= self.radius

    def intensity(self, p_env, quad=None):
        return sphere_intensity(self, to_magnet_frame(p_env, self.pose), quad)


@dataclass(frozen=True)
class CuboidMagnet:
    length: float
    width: float
    height: float
    pose: MagnetPose = field(default_factory=MagnetPose)
    magnetization: float = MAGNETIZATION

    def __post_init__(self):
        if min(self.length, self.width, self.height) <= 0 or not self.magnetization > 0:
            raise ValueError("cuboid extents and magnetization must be positive")

    @classmethod
    def placed(cls, center, size, orientation=(0.0, 0.0, 0.0), magnetization=MAGNETIZATION):
        """Cuboid with extents ``size = (l, w, h)`` centred at ``center``, its
        edges along the columns of ``rotation_matrix(orientation)``."""
        from .geometry import rotation_matrix

        size = np.asarray(size, dtype=float)
        corner = np.asarray(center, dtype=float) - rotation_matrix(orientation) @ (size / 2)
        return cls(*size, pose=placement_pose(corner, orientation), magnetization=magnetization)

    @property
    def size(self):
        return np.array([self.length, self.width, self.height])

    @property
    def center(self):
        return from_magnet_frame(self.size / 2, self.pose)

    @property
    def bounding_radius(self):
        return 0.5 * float(np.linalg.norm(self.size))

    def contains(self, p_env):
        # closed box: points on a face count as inside
        p = to_magnet_frame(p_env, self.pose)
        return np.all((p >= 0.0) & (p <= self.size), axis=-1)

    def distance_to(self, p_env):
        """Euclidean distance from point(s) to the solid box (0 inside)."""
        p = to_magnet_frame(p_env, self.pose)
        d = np.maximum(np.maximum(-p, p - self.size), 0.0)
        return np.linalg.norm(d, axis=-1)

    def intensity(self, p_env, eps=EPS):
        return cuboid_intensity(self, to_magnet_frame(p_env, self.pose), eps)


def cartesian_to_spherical(p, eps=EPS):
    """Radius, inclination and azimuth of ``p`` with the single-argument arctan.

    The azimuth folds quadrants (range (-pi/2, pi/2)); for an axisymmetric
    field this reflects the point through the z axis and leaves |H| unchanged.
    """
    p = np.asarray(p, dtype=float)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    r = np.sqrt(x * x + y * y + z * z)
    theta = np.arccos(np.clip(z / (r + eps), -1.0, 1.0))
    phi = np.arctan(y / (x + eps))
    return r, theta, phi


def _sphere_components(a, M, r, ts, ps, quad, kernel, eps):
    st0, ct0, cp0, sp0, w = _gauss_grid(quad.n_theta, quad.n_phi)
    r = np.asarray(r, dtype=float)[:, None]
    cts, sts = np.cos(ts)[:, None], np.sin(ts)[:, None]
    cps, sps = np.cos(ps)[:, None], np.sin(ps)[:, None]
    cdp = cps * cp0 + sps * sp0
    dist2 = r * r + a * a - 2 * a * r * (cts * ct0 + sts * st0 * cdp)
    wd = w / (np.maximum(dist2, 0.0) ** 1.5 + eps)
    if kernel == "charge":
        # surface charge M cos(theta0) on the sphere, area element a^2 sin(theta0)
        q = (a * a * st0 * ct0) * wd
        s = q.sum(axis=1)
        hx = (r * sts * cps)[:, 0] * s - a * (q @ (st0 * cp0))
        hy = (r * sts * sps)[:, 0] * s - a * (q @ (st0 * sp0))
        hz = (r * cts)[:, 0] * s - a * (q @ ct0)
    elif kernel == "printed":
        q = (a ** 3 * st0 ** 3) * wd
        rc = r * cts
        hx = ((q * cp0) * (rc - a * ct0)).sum(axis=1)
        hy = ((q * sp0) * (rc - a * ct0)).sum(axis=1)
        hz = (q * (a * st0 - rc * cdp)).sum(axis=1)
    else:
        raise ValueError("unknown sphere kernel %r" % (kernel,))
    c = M / (4 * np.pi)
    return c * hx, c * hy, c * hz


def sphere_field(m, p_mag, quad=None, kernel="charge", eps=EPS, chunk=256):
    """Field components (Hx, Hy, Hz) of a spherical magnet at field-frame point(s).

    ``kernel="charge"`` integrates the magnetic surface charge of the uniformly
    magnetized sphere; ``kernel="printed"`` evaluates the alternative integrand
    kept for comparison (it does not reproduce the on-axis closed form).
    """
    quad = quad or QuadratureSpec()
    p = np.asarray(p_mag, dtype=float)
    if not np.all(np.isfinite(p)):
        raise ValueError("non-finite point")
    flat = p.reshape(-1, 3)
    r, ts, ps = cartesian_to_spherical(flat, eps)
    out = np.empty((flat.shape[0], 3))
    for i in range(0, flat.shape[0], chunk):
        sl = slice(i, i + chunk)
        hx, hy, hz = _sphere_components(m.radius, m.magnetization, r[sl], ts[sl], ps[sl],
                                        quad, kernel, eps)
        out[sl, 0], out[sl, 1], out[sl, 2] = hx, hy, hz
    return out.reshape(p.shape)


def sphere_intensity(m, p_mag, quad=None, kernel="charge", eps=EPS):
    """|H| of a spherical magnet at field-frame point(s) by Gauss-Legendre quadrature."""
    return np.linalg.norm(sphere_field(m, p_mag, quad, kernel, eps), axis=-1)


def axial_sphere_intensity(m, z):
    """Closed-form |H| on the magnetization axis: 2 M a^3 / (3 |z|^3) outside, M/3 inside."""
    z = np.abs(np.asarray(z, dtype=float))
    a, M = m.radius, m.magnetization
    with np.errstate(divide="ignore"):
        outside = 2 * M * a ** 3 / (3 * z ** 3)
    return np.where(z >= a, outside, M / 3)


def _gamma(g1, g2, g3, h, eps):
    out = 0.0
    for z0, sign in ((h, 1.0), (0.0, -1.0)):
        R = np.sqrt(g1 * g1 + g2 * g2 + (g3 - z0) ** 2)
        arg = np.maximum((R - g2) / (R + g2 + eps) + eps, eps)
        out = out + sign * np.log(arg)
    return out


def _psi(f1, f2, f3, h, eps):
    out = 0.0
    for z0, sign in ((h, 1.0), (0.0, -1.0)):
        R = np.sqrt(f1 * f1 + f2 * f2 + (f3 - z0) ** 2)
        out = out + sign * np.arctan(f1 * (f3 - z0) / (f2 * R + eps))
    return out


def cuboid_field(m, p_mag, eps=EPS):
    """Field components of a z-magnetized cuboid at field-frame point(s).

    Hx and Hy use the logarithmic auxiliary with prefactor -M/(8 pi); the
    eight-term arctan sum for Hz carries -M/(4 pi), which is what the
    surface-charge integral over the two poles gives.
    """
    p = np.asarray(p_mag, dtype=float)
    if not np.isfinite(p).all():
        raise ValueError("non-finite point")
    x, y, z = p[..., 0:1], p[..., 1:2], p[..., 2:3]
    l, w, h, M = m.length, m.width, m.height, m.magnetization
    lx, wy = l - x, w - y
    # all sixteen auxiliary evaluations in one pass; last axis enumerates the terms
    g1 = np.concatenate([lx, lx, x, x, wy, wy, y, y], axis=-1)
    g2 = np.concatenate([wy, y, wy, y, lx, x, lx, x], axis=-1)
    gam = _gamma(g1, g2, z, h, eps)
    sign = np.array([1.0, 1.0, -1.0, -1.0])
    hx = -M / (8 * np.pi) * (gam[..., :4] @ sign)
    hy = -M / (8 * np.pi) * (gam[..., 4:] @ sign)
    f1 = np.concatenate([wy, y, lx, x, wy, y, lx, x], axis=-1)
    f2 = np.concatenate([lx, lx, wy, wy, x, x, y, y], axis=-1)
    hz = -M / (4 * np.pi) * _psi(f1, f2, z, h, eps).sum(axis=-1)
    return np.stack([hx, hy, hz], axis=-1)


def cuboid_intensity(m, p_mag, eps=EPS):
    return np.linalg.norm(cuboid_field(m, p_mag, eps), axis=-1)


def intensity_at(magnet, p_env, quad=None):
    """|H| of ``magnet`` at environment-frame point(s) ``p_env``."""
    if isinstance(magnet, SphericalMagnet):
        return magnet.intensity(p_env, quad)
    if isinstance(magnet, CuboidMagnet):
        return magnet.intensity(p_env)
    raise TypeError("unsupported magnet type %s" % type(magnet).__name__)


def field_at(magnet, p_env, quad=None):
    """Field vector of ``magnet`` at environment-frame point(s), in environment axes."""
    p = to_magnet_frame(p_env, magnet.pose)
    if isinstance(magnet, SphericalMagnet):
        h = sphere_field(magnet, p, quad)
    elif isinstance(magnet, CuboidMagnet):
        h = cuboid_field(magnet, p)
    else:
        raise TypeError("unsupported magnet type %s" % type(magnet).__name__)
    # p_mag = R p_env + T, so vectors map back with R^T
    return h @ magnet.pose.rotation
