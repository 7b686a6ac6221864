"""Rigid transforms between the environment frame and a magnet's field frame.

Points map into a field frame as ``p_m = Rx(tx) @ Ry(ty) @ Rz(tz) @ p_e + T``.
Angles follow the right-hand rule and are kept in (-pi, pi].
"""

from dataclasses import dataclass, field

import numpy as np


def _finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite input: %r" % (a,))


def wrap_angle(theta):
    """Map an angle (or array of angles) into (-pi, pi]."""
    t = np.mod(np.asarray(theta, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.where(t == -np.pi, np.pi, t)


def rot_x(t):
    c, s = np.cos(t), np.sin(t)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(t):
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(t):
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_matrix(angles):
    """Return ``Rx @ Ry @ Rz`` for ``angles = (theta_x, theta_y, theta_z)``."""
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (3,):
        raise ValueError("expected three angles, got shape %s" % (angles.shape,))
    _finite(angles)
    tx, ty, tz = angles
    return rot_x(tx) @ rot_y(ty) @ rot_z(tz)


def angles_from_matrix(R):
    """Inverse of :func:`rotation_matrix` for a proper rotation.

    At gimbal lock (``|R[0, 2]| == 1``) the z angle is fixed to zero.
    """
    R = np.asarray(R, dtype=float)
    sy = np.clip(R[0, 2], -1.0, 1.0)
    ty = np.arcsin(sy)
    if abs(sy) < 1.0 - 1e-12:
        tx = np.arctan2(-R[1, 2], R[2, 2])
        tz = np.arctan2(-R[0, 1], R[0, 0])
    else:
        tx = np.arctan2(R[2, 1], R[1, 1])
        tz = 0.0
    return wrap_angle(np.array([tx, ty, tz]))


@dataclass(frozen=True)
class MagnetPose:
    """Environment-to-field-frame transform of one magnet."""

    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    angles: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rotation: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t = np.array(self.translation, dtype=float).reshape(3)
        a = np.array(self.angles, dtype=float).reshape(3)
        _finite(t, a)
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "angles", wrap_angle(a))
        R = rotation_matrix(self.angles)
        R.flags.writeable = False
        object.__setattr__(self, "rotation", R)

    def __eq__(self, other):
        if not isinstance(other, MagnetPose):
            return NotImplemented
        return bool(np.array_equal(self.translation, other.translation)
                    and np.array_equal(self.angles, other.angles))

    def __hash__(self):
        return hash((tuple(self.translation), tuple(self.angles)))


def to_magnet_frame(p_env, pose):
    """Express environment point(s) ``p_env`` (shape (3,) or (n, 3)) in the field frame."""
    p = np.asarray(p_env, dtype=float)
    if not np.isfinite(p).all():
        raise ValueError("non-finite input: %r" % (p,))
    return p @ pose.rotation.T + pose.translation


def from_magnet_frame(p_mag, pose):
    """Inverse of :func:`to_magnet_frame`."""
    p = np.asarray(p_mag, dtype=float)
    _finite(p)
    return (p - pose.translation) @ pose.rotation


def align_magnetization_toward(magnet_position, focus):
    """Angles whose rotation maps the +z axis onto the direction magnet -> focus.

    Roll about the magnetization axis is fixed by taking ``theta_z = 0``.
    """
    m = np.asarray(magnet_position, dtype=float)
    f = np.asarray(focus, dtype=float)
    _finite(m, f)
    d = f - m
    n = np.linalg.norm(d)
    if n <= 1e-9:
        raise ValueError("degenerate direction: focus coincides with magnet position")
    d = d / n
    # Rx(a) Ry(b) z = (sin b, -sin a cos b, cos a cos b)
    ty = np.arctan2(d[0], np.hypot(d[1], d[2]))
    tx = np.arctan2(-d[1], d[2]) + 0.0
    return wrap_angle(np.array([tx, ty, 0.0]))


def placement_pose(origin, orientation=(0.0, 0.0, 0.0)):
    """Pose for a field frame whose origin sits at ``origin`` (environment frame)
    and whose axes are the columns of ``rotation_matrix(orientation)``.
    """
    Ro = rotation_matrix(orientation)
    R = Ro.T
    return MagnetPose(translation=-R @ np.asarray(origin, dtype=float),
                      angles=angles_from_matrix(R))
