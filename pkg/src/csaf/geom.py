"""Small quaternion / vector toolbox shared by the kinematic modules.

Conventions: y-up right-handed world, forward is +z for an identity
heading, quaternions are float64 arrays in (w, x, y, z) order.
"""

from __future__ import annotations

import numpy as np

IDENTITY_QUAT = np.array([1.0, 0.0, 0.0, 0.0])

AXIS_X = np.array([1.0, 0.0, 0.0])
AXIS_Y = np.array([0.0, 1.0, 0.0])
AXIS_Z = np.array([0.0, 0.0, 1.0])

FORWARD = AXIS_Z


def vec3(x: float, y: float, z: float) -> np.ndarray:
    return np.array([float(x), float(y), float(z)])


def qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a*b (apply b first, then a)."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def qconj(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def qnorm(q: np.ndarray) -> np.ndarray:
    n = float(np.sqrt(np.dot(q, q)))
    if n == 0.0:
        raise ValueError("cannot normalize zero quaternion")
    return q / n


def qrotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vector v by unit quaternion q."""
    w, x, y, z = q
    u = np.array([x, y, z])
    return 2.0 * np.dot(u, v) * u + (w * w - np.dot(u, u)) * v + 2.0 * w * np.cross(u, v)


def quat_from_axis_angle(axis: np.ndarray, angle_deg: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    n = float(np.sqrt(np.dot(axis, axis)))
    if n == 0.0:
        raise ValueError("rotation axis must be non-zero")
    half = np.deg2rad(angle_deg) * 0.5
    s = np.sin(half) / n
    return np.array([np.cos(half), axis[0] * s, axis[1] * s, axis[2] * s])


def yaw_quat(angle_deg: float) -> np.ndarray:
    """Rotation about the vertical (+y) axis. Positive turns forward toward +x."""
    return quat_from_axis_angle(AXIS_Y, angle_deg)


def quat_to_axis_angle(q: np.ndarray) -> tuple[np.ndarray, float]:
    """Unit axis and angle in degrees, angle in [0, 360)."""
    q = qnorm(q)
    w = min(1.0, max(-1.0, float(q[0])))
    angle = 2.0 * np.arccos(w)
    s = np.sqrt(max(0.0, 1.0 - w * w))
    if s < 1e-12:
        return AXIS_Y.copy(), 0.0
    return np.array(q[1:4]) / s, float(np.rad2deg(angle))


def rotation_vector_deg(q: np.ndarray) -> np.ndarray:
    """Axis-angle rotation vector (degrees), shortest arc."""
    axis, angle = quat_to_axis_angle(q)
    if angle > 180.0:
        angle -= 360.0
    return axis * angle


def yaw_of(q: np.ndarray) -> float:
    """Yaw angle (degrees) of the heading's forward axis projected on xz."""
    f = qrotate(q, FORWARD)
    return float(np.rad2deg(np.arctan2(f[0], f[2])))


def look_rotation(direction: np.ndarray) -> np.ndarray:
    """Heading quaternion pointing forward along `direction` (yaw then pitch, no roll)."""
    d = np.asarray(direction, dtype=float)
    n = float(np.sqrt(np.dot(d, d)))
    if n == 0.0:
        raise ValueError("look direction must be non-zero")
    d = d / n
    yaw = np.rad2deg(np.arctan2(d[0], d[2]))
    pitch = np.rad2deg(np.arctan2(-d[1], np.sqrt(d[0] * d[0] + d[2] * d[2])))
    return qmul(yaw_quat(yaw), quat_from_axis_angle(AXIS_X, pitch))


def compose_pose(pos_a: np.ndarray, rot_a: np.ndarray,
                 pos_b: np.ndarray, rot_b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pose composition a∘b: apply b in a's frame."""
    return pos_a + qrotate(rot_a, pos_b), qnorm(qmul(rot_a, rot_b))


def wrap_angle_deg(angle: float, half_range: float = 180.0) -> float:
    """Wrap into (-half_range, half_range]."""
    period = 2.0 * half_range
    wrapped = angle - period * np.floor((angle + half_range) / period)
    if wrapped == -half_range:
        wrapped = half_range
    return float(wrapped)
